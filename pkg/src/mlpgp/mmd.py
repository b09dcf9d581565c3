"""Unbiased MMD^2 between finite-width network outputs and limiting-GP draws."""

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
from scipy.spatial.distance import cdist

from .finite_net import (DEFAULT_END_SIGMA, IIDGaussian, NetworkShape,
                         RCEScheme, WeightScheme, forward, sample_weights)
from .gp import FactorizationError, _chol_with_jitter
from .kernels import LayerHyper, NetworkHyper, VanishedSignalError, \
    kernel_matrix

__all__ = [
    "mmd2_unbiased",
    "permutation_null",
    "limiting_hyper",
    "ConvergenceResult",
    "convergence_experiment",
]


def _gram(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    # fixed unit bandwidth, deliberately untuned
    return np.exp(-cdist(u, v, "sqeuclidean"))


def mmd2_unbiased(xs, ys) -> float:
    """Unbiased U-statistic estimate of MMD^2 with kernel exp(-||u - v||^2).

    Rows of xs / ys are samples (function values at the shared probe
    points).  May be negative; that is the price of unbiasedness.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    n, m = xs.shape[0], ys.shape[0]
    if n < 2 or m < 2:
        raise ValueError("unbiased MMD^2 needs at least two samples per set")
    if xs.shape[1] != ys.shape[1]:
        raise ValueError("sample sets must share the probe dimension")
    kxx = _gram(xs, xs)
    kyy = _gram(ys, ys)
    kxy = _gram(xs, ys)
    term_x = (kxx.sum() - np.trace(kxx)) / (n * (n - 1))
    term_y = (kyy.sum() - np.trace(kyy)) / (m * (m - 1))
    return float(term_x + term_y - 2.0 * kxy.mean())


def _null_band_from_gram(G, n, m, n_perm, seed, quantiles):
    # all permutations at once: one GEMM against a 0/1 mask matrix
    diag = np.diag(G)
    total = G.sum()
    rng = np.random.default_rng(seed)
    masks = np.zeros((n + m, n_perm))
    for p in range(n_perm):
        masks[rng.permutation(n + m)[:n], p] = 1.0
    V = G @ masks
    s_xx = np.einsum("ip,ip->p", masks, V)
    s_xy = V.sum(axis=0) - s_xx
    s_yy = total - s_xx - 2.0 * s_xy
    d_x = diag @ masks
    d_y = diag.sum() - d_x
    vals = ((s_xx - d_x) / (n * (n - 1)) + (s_yy - d_y) / (m * (m - 1))
            - 2.0 * s_xy / (n * m))
    return float(np.quantile(vals, quantiles[0])), \
        float(np.quantile(vals, quantiles[1]))


def permutation_null(xs, ys, n_perm: int = 200, seed: int = 0,
                     quantiles: Tuple[float, float] = (0.025, 0.975)):
    """Null band for MMD^2 under random relabelling of the pooled samples.

    Returns (lo, hi) quantiles of the permuted estimates; gives the scale on
    which an observed MMD^2 counts as indistinguishable from zero.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    ys = np.atleast_2d(np.asarray(ys, dtype=float))
    n, m = xs.shape[0], ys.shape[0]
    pooled = np.vstack([xs, ys])
    return _null_band_from_gram(_gram(pooled, pooled), n, m, n_perm, seed,
                                quantiles)


def limiting_hyper(scheme: WeightScheme, depth: int, input_dim: int,
                   a: float = 0.0, end_sigma: float = DEFAULT_END_SIGMA,
                   A_values: Optional[Sequence[float]] = None) -> NetworkHyper:
    """Kernel hyperparameters of the GP limit of a sampled network.

    iid schemes carry (mu, sigma) in every layer.  RCE schemes keep the
    zero-mean Gaussian ends and put the scheme's effective hyperparameters
    in the hidden layers; A_values supplies the per-layer global latents
    for random-hyperparameter schemes (one per hidden layer 2..L-1).
    """
    if isinstance(scheme, IIDGaussian):
        layers = tuple(LayerHyper(scheme.mu, scheme.sigma) for _ in range(depth))
        return NetworkHyper(a, input_dim, layers, True)
    if not isinstance(scheme, RCEScheme):
        raise TypeError(f"unsupported weight scheme {type(scheme).__name__}")
    n_internal = max(depth - 2, 0)
    if A_values is None:
        A_values = [0.0] * n_internal
    if len(A_values) != n_internal:
        raise ValueError(f"need {n_internal} A values for depth {depth}")
    layers = [LayerHyper(0.0, end_sigma)]
    for A in A_values:
        mu, sigma = scheme.hyperparams(A)
        layers.append(LayerHyper(mu, sigma))
    if depth > 1:
        layers.append(LayerHyper(0.0, end_sigma))
    return NetworkHyper(a, input_dim, tuple(layers), True)


@dataclass
class ConvergenceResult:
    """MMD^2 curve over widths with a permutation null band per width."""

    widths: Tuple[int, ...]
    mmd2: np.ndarray
    null_lo: np.ndarray
    null_hi: np.ndarray
    scheme: str
    depth: int


def _mlp_samples_reference(scheme, depth, width, S, n_samples, a, end_sigma,
                           seed_seq):
    # one independent sample_weights draw per sample; the plain route
    shape = NetworkShape(S.shape[1], (width,) * (depth - 1), 1)
    out = np.empty((n_samples, S.shape[0]))
    children = seed_seq.spawn(n_samples)
    for i, child in enumerate(children):
        netw = sample_weights(shape, scheme, a, child, end_sigma=end_sigma)
        out[i] = forward(netw, S)
    return out


def _affine_coeffs(scheme, rng, k, n_in):
    # Preset generators are affine in D given the latents, so the centred
    # weight is scale * D + shift with D uniform on [-sqrt(3), sqrt(3)].
    # Shapes: scale broadcasts over (k, n_in, n_out); shift likewise.
    s3 = np.sqrt(3.0)
    root = np.sqrt(n_in)
    if isinstance(scheme, IIDGaussian):
        return None  # gaussian layer, handled separately
    name = scheme.name
    if name == "f1":
        return np.sqrt(2.0) / root, 0.0
    if name == "f2":
        return 2.0 * np.sqrt(2.0) / root, -0.5 / n_in
    if name == "f3":
        A = rng.random((k, 1, 1)) * (2 * s3) - s3
        C = rng.random((k, n_in, 1)) * (2 * s3) - s3
        return np.sqrt(2.0) / root, -1.5 * A * C / n_in
    if name == "f4":
        A = rng.random((k, 1, 1)) * (2 * s3) - s3
        C = rng.random((k, n_in, 1)) * (2 * s3) - s3
        return (np.sqrt(2.0) * (A + s3) / root,
                (-0.1 * A * A * C * C - 0.4) / n_in)
    return None


def _mlp_samples(scheme, depth, width, S, n_samples, a, end_sigma, seed_seq,
                 chunk_bytes=2 ** 27):
    """Finite-network output samples at the probe points S.

    Preset schemes run through a buffer-reusing chunked sampler (identical
    distribution to the per-draw reference path, much less allocator
    traffic); anything else falls back to the reference path.
    """
    preset = (isinstance(scheme, IIDGaussian)
              or (isinstance(scheme, RCEScheme)
                  and scheme.name in ("f1", "f2", "f3", "f4")))
    if not preset:
        return _mlp_samples_reference(scheme, depth, width, S, n_samples, a,
                                      end_sigma, seed_seq)
    rng = np.random.Generator(np.random.SFC64(seed_seq))
    d_in = S.shape[1]
    n_probe = S.shape[0]
    sizes = [d_in] + [width] * (depth - 1) + [1]
    k = max(1, min(n_samples, chunk_bytes // (4 * width * width + 1)))
    # raw-draw float32 (k, n_in, n_out) buffers reused across chunks, so the
    # sampler is allocation-free after warm-up; weights are affine in the
    # raw draws, so their scale and shift fold into the (small) matmul
    # output instead of costing full passes over the buffers:
    #   h (c1 R + c2) = c1 (h R) + (h c2_col) 1^T
    bufs = {}
    for n_i, n_o in zip(sizes[:-1], sizes[1:]):
        bufs.setdefault((n_i, n_o), np.empty((k, n_i, n_o), dtype=np.float32))
    S32 = S.astype(np.float32)
    out = np.empty((n_samples, n_probe))
    done = 0
    sqrt3 = np.float32(np.sqrt(3.0))
    while done < n_samples:
        m = min(k, n_samples - done)
        h = np.broadcast_to(S32, (m, n_probe, d_in))
        for l, (n_i, n_o) in enumerate(zip(sizes[:-1], sizes[1:]), start=1):
            R = bufs[(n_i, n_o)][:m]
            gauss_end = isinstance(scheme, RCEScheme) and (l == 1 or l == depth)
            if gauss_end:
                rng.standard_normal(out=R, dtype=np.float32)
                c1 = np.float32(end_sigma / np.sqrt(n_i))
                c2 = None
            elif isinstance(scheme, IIDGaussian):
                rng.standard_normal(out=R, dtype=np.float32)
                c1 = np.float32(scheme.sigma / np.sqrt(n_i))
                c2 = np.full((m, n_i, 1), scheme.mu / n_i, dtype=np.float32)
            else:
                scale, shift = _affine_coeffs(scheme, rng, m, n_i)
                rng.random(out=R, dtype=np.float32)
                # weight = scale*(2 sqrt3 u - sqrt3) + shift
                c1 = np.asarray(2.0 * sqrt3 * np.asarray(scale, dtype=np.float32))
                c1 = c1.reshape(-1, 1, 1) if c1.ndim else np.float32(c1)
                col = np.asarray(shift - sqrt3 * np.asarray(scale),
                                 dtype=np.float32)
                c2 = np.empty((m, n_i, 1), dtype=np.float32)
                c2[:] = np.broadcast_to(col, (m, n_i, 1)) if col.ndim \
                    else col
            y = np.matmul(h, R)
            y *= c1
            if c2 is not None:
                y += np.matmul(h, c2)
            h = y
            if l < depth:
                np.maximum(np.float32(a) * h, h, out=h)
        out[done:done + m] = h[:, :, 0]
        done += m
    return out


def _gp_samples(scheme, depth, S, n_samples, a, end_sigma, seed_seq):
    rng = np.random.default_rng(seed_seq)
    random_hyper = isinstance(scheme, RCEScheme) and scheme.random_hyper
    if not random_hyper:
        net = limiting_hyper(scheme, depth, S.shape[1], a, end_sigma)
        K = kernel_matrix(S, S, net)
        L, _ = _chol_with_jitter(K)
        return rng.standard_normal((n_samples, S.shape[0])) @ L.T
    n_internal = max(depth - 2, 0)
    out = np.empty((n_samples, S.shape[0]))
    for i in range(n_samples):
        A_values = rng.uniform(-np.sqrt(3.0), np.sqrt(3.0), n_internal)
        net = limiting_hyper(scheme, depth, S.shape[1], a, end_sigma, A_values)
        z = rng.standard_normal(S.shape[0])
        # hyperparameter draws with vanishing layer scale collapse the
        # kernel to (numerically) zero; the limiting function is the zero
        # function there
        try:
            K = kernel_matrix(S, S, net)
        except VanishedSignalError:
            out[i] = 0.0
            continue
        try:
            L, _ = _chol_with_jitter(K)
        except FactorizationError:
            if np.max(np.abs(K)) < 1e-12:
                out[i] = 0.0
                continue
            raise
        out[i] = L @ z
    return out


def convergence_experiment(scheme: WeightScheme, depth: int,
                           widths: Sequence[int], d_probe: int = 4,
                           n_samples: int = 2000, input_dim: int = 10,
                           seed: int = 0, a: float = 0.0, n_perm: int = 200,
                           end_sigma: float = DEFAULT_END_SIGMA) -> ConvergenceResult:
    """MMD^2 between finite networks and their GP limit, per hidden width.

    Probe points are drawn once (standard Gaussian rows) and shared across
    widths.  Every finite-network sample is an independent weight draw; for
    random-hyperparameter schemes every GP draw refreshes the global latents
    and hence the kernel.
    """
    widths = tuple(int(w) for w in widths)
    if any(b < a_ for a_, b in zip(widths, widths[1:])):
        raise ValueError("widths must be nondecreasing")
    if depth < 2:
        raise ValueError("need depth >= 2 for a hidden layer")
    root = np.random.SeedSequence(seed)
    probe_ss, gp_root, perm_root, mlp_root = root.spawn(4)
    S = np.random.default_rng(probe_ss).standard_normal((d_probe, input_dim))
    gp_children = gp_root.spawn(len(widths))
    perm_children = perm_root.spawn(len(widths))
    mlp_children = mlp_root.spawn(len(widths))
    mmd2 = np.empty(len(widths))
    lo = np.empty(len(widths))
    hi = np.empty(len(widths))
    name = scheme.name if isinstance(scheme, RCEScheme) else "iid"
    for i, w in enumerate(widths):
        xs = _mlp_samples(scheme, depth, w, S, n_samples, a, end_sigma,
                          mlp_children[i])
        ys = _gp_samples(scheme, depth, S, n_samples, a, end_sigma,
                         gp_children[i])
        # one pooled gram serves both the estimate and its null band
        n, m = xs.shape[0], ys.shape[0]
        G = _gram(np.vstack([xs, ys]), np.vstack([xs, ys]))
        kxx = G[:n, :n]
        kyy = G[n:, n:]
        mmd2[i] = ((kxx.sum() - np.trace(kxx)) / (n * (n - 1))
                   + (kyy.sum() - np.trace(kyy)) / (m * (m - 1))
                   - 2.0 * G[:n, n:].mean())
        lo[i], hi[i] = _null_band_from_gram(G, n, m, n_perm,
                                            perm_children[i],
                                            (0.025, 0.975))
    return ConvergenceResult(widths, mmd2, lo, hi, name, depth)
