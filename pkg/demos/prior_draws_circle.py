"""Function draws from deep limiting GPs along a circle in input space.

Traversing a random great circle of the unit sphere visualises what a
kernel does at depth: zero-mean priors give draws that are nearly constant
(the kernel has flattened), while negative-mean priors keep structure.
Prints a compact per-draw profile and the spread statistic for each
hyperparameter setting.
"""

import numpy as np

from mlpgp import GPModel, LayerHyper, NetworkHyper, circle_traversal, \
    kernel_matrix, sample_prior

DIM = 10
DEPTH = 64
SETTINGS = [(0.0, 2.0), (-0.3, 1.52 ** 2), (-0.65, 1.63 ** 2),
            (-1.05, 1.75 ** 2), (-1.51, 1.89 ** 2)]

points = circle_traversal(DIM, 48, seed=5)

for mu, sig2 in SETTINGS:
    layers = tuple([LayerHyper(mu, np.sqrt(sig2))] * (DEPTH - 1)
                   + [LayerHyper(0.0, 1.0)])
    net = NetworkHyper(0.0, DIM, layers, final_layer_linear=True)
    K = kernel_matrix(points, points, net)
    scale = np.sqrt(np.mean(np.diag(K)))
    corr_min = (K / np.sqrt(np.outer(np.diag(K), np.diag(K)))).min()
    draws = sample_prior(points, GPModel(net, 0.0), 3, seed=11)
    spread = (draws.max(axis=1) - draws.min(axis=1)) / scale
    print(f"(mu, sigma^2) = ({mu:+.2f}, {sig2:.2f}): "
          f"min corr {corr_min:+.4f}, draw spread/scale "
          + " ".join(f"{s:.3f}" for s in spread))
    # a crude ASCII profile of the first draw
    d = draws[0] / scale
    lo, hi = d.min(), d.max()
    width = 40
    cells = np.zeros(48, dtype=int) if hi == lo else \
        np.round((d - lo) / (hi - lo) * (width - 1)).astype(int)
    print("   first draw:", "".join(".:-=+*#@"[c * 8 // width] for c in cells))
