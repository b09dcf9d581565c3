"""Limiting kernels of wide LReLU networks with general weight means.

Single-layer second moments for linear / absolute-value / leaky-ReLU units
under Gaussian pre-activations with non-zero means, and the deep recursion
that propagates the five-number state (k_xx, k_yy, k_xy, m_x, m_y) through
the layers.  All formula-level operations broadcast over numpy arrays, which
is what makes `kernel_matrix` cheap: the whole Gram recursion runs on
(N, 1) / (1, M) / (N, M) shaped states.

The recursion carries unnormalised post-activation second moments plus the
post-activation means; each step rescales by the incoming layer's (mu, sigma).
With non-zero means the kernel is not a function of the input angle alone, so
normalised angles are never stored internally.
"""

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from .special import bvn_cdf, bvn_pdf, erf, std_normal_cdf, std_normal_pdf

__all__ = [
    "ArrayLike",
    "DegenerateInputError",
    "VanishedSignalError",
    "LayerHyper",
    "NetworkHyper",
    "constant_hyper",
    "BivariatePreActivation",
    "KernelState",
    "linear_kernel",
    "folded_mean",
    "abs_kernel",
    "cross_term",
    "lrelu_kernel",
    "lrelu_mean",
    "input_state",
    "layer_step",
    "deep_kernel",
    "arccos_reference",
    "kernel_matrix",
    "single_layer_kernel_with_bias",
]

ArrayLike = Union[float, np.ndarray]

# below this sin(theta), the absolute-value moment switches to its exact
# |rho| = 1 limit; the deep recursion drives rho -> 1, so this is a hot path
SIN_THETA_TOL = 1e-7

# second moments below this are treated as a vanished signal
VANISHED_TOL = 1e-300

_SQRT2 = np.sqrt(2.0)


class DegenerateInputError(ValueError):
    """Raised for inputs (zero norm / zero scale) that collapse a kernel."""


class VanishedSignalError(ArithmeticError):
    """Raised when the propagated signal variance underflows at some layer."""

    def __init__(self, layer: int, value: float):
        self.layer = layer
        self.value = value
        super().__init__(
            f"signal variance {value:.3e} vanished at layer {layer}; "
            "sigma^2 is too far below the stable ridge for this depth")


@dataclass(frozen=True)
class LayerHyper:
    """Per-layer prior hyperparameters: weight mean mu and std-dev sigma.

    mu is the layer-average mean before the extra 1/n scaling; sigma > 0.
    For row-column-exchangeable priors factored per Assumption-2 style
    schemes these are the effective per-layer values (first/second moment
    factors collapsed in), so the same recursion applies unchanged.
    """

    mu: float
    sigma: float

    def __post_init__(self):
        if not np.isfinite(self.mu):
            raise ValueError("layer mean must be finite")
        if not (self.sigma > 0.0 and np.isfinite(self.sigma)):
            raise ValueError("layer sigma must be positive and finite")


@dataclass(frozen=True)
class NetworkHyper:
    """Hyperparameters that fully determine the limiting kernel.

    layers[0] feeds on the raw input; layers[-1] is the output layer and is
    linear when final_layer_linear is set (the usual architecture).  With L
    entries and a linear output this makes L - 1 LReLU applications.
    """

    slope_a: float
    input_dim: int
    layers: Tuple[LayerHyper, ...]
    final_layer_linear: bool = True

    def __post_init__(self):
        object.__setattr__(self, "layers", tuple(self.layers))
        if not (-1.0 < self.slope_a < 1.0):
            raise ValueError("LReLU slope must lie in (-1, 1)")
        if self.input_dim < 1:
            raise ValueError("input_dim must be >= 1")
        if len(self.layers) < 1:
            raise ValueError("need at least one layer")

    @property
    def depth(self) -> int:
        return len(self.layers)


def constant_hyper(mu: float, sigma: float, depth: int, input_dim: int,
                   slope_a: float = 0.0,
                   final_layer_linear: bool = True) -> NetworkHyper:
    """Network with the same (mu, sigma) in every layer."""
    return NetworkHyper(slope_a, input_dim,
                        tuple(LayerHyper(mu, sigma) for _ in range(depth)),
                        final_layer_linear)


@dataclass
class BivariatePreActivation:
    """Moments of a correlated Gaussian pre-activation pair.

    s1, s2 are the standard deviations, rho the correlation, t1, t2 the
    means.  Fields may be broadcast-compatible arrays.
    """

    s1: ArrayLike
    s2: ArrayLike
    rho: ArrayLike
    t1: ArrayLike
    t2: ArrayLike

    def __post_init__(self):
        if np.any(np.asarray(self.s1) <= 0.0) or np.any(np.asarray(self.s2) <= 0.0):
            raise DegenerateInputError("pre-activation std-devs must be positive")
        if np.any(np.abs(np.asarray(self.rho)) > 1.0 + 1e-9):
            raise ValueError("correlation must lie in [-1, 1]")

    def swapped(self) -> "BivariatePreActivation":
        return BivariatePreActivation(self.s2, self.s1, self.rho, self.t2, self.t1)


@dataclass
class KernelState:
    """Five-number state driving the deep recursion.

    k_xx, k_yy, k_xy are (unnormalised) second moments of the activations for
    the two inputs; m_x, m_y are the activation means.
    """

    k_xx: ArrayLike
    k_yy: ArrayLike
    k_xy: ArrayLike
    m_x: ArrayLike
    m_y: ArrayLike


def _maybe_float(x: np.ndarray) -> ArrayLike:
    return float(x) if np.ndim(x) == 0 else x


def linear_kernel(p: BivariatePreActivation) -> ArrayLike:
    """E[G1 G2] for the pre-activation pair: s1 s2 rho + t1 t2."""
    return _maybe_float(np.asarray(p.s1 * p.s2 * p.rho + p.t1 * p.t2))


def folded_mean(mu_t: ArrayLike, sigma_t: ArrayLike) -> ArrayLike:
    """E|G| for G ~ N(mu_t, sigma_t^2), the folded Gaussian mean."""
    mu_t = np.asarray(mu_t, dtype=float)
    sigma_t = np.asarray(sigma_t, dtype=float)
    if np.any(sigma_t <= 0.0):
        raise DegenerateInputError("sigma_t must be positive")
    mt = mu_t / sigma_t
    out = mu_t * erf(mt / _SQRT2) + 2.0 * sigma_t * std_normal_pdf(mt)
    return _maybe_float(out)


def _abs_moment_colinear(b1, b2):
    # E|Z + b1||Z + b2| for a single standard normal Z: the |rho| = 1 limit.
    # |(Z+b1)(Z+b2)| = (Z+b1)(Z+b2) minus twice the part where Z lies between
    # the roots -b1 and -b2.
    lo = np.minimum(-b1, -b2)
    hi = np.maximum(-b1, -b2)
    phi_lo = std_normal_pdf(lo)
    phi_hi = std_normal_pdf(hi)
    mid = ((1.0 + b1 * b2) * (std_normal_cdf(hi) - std_normal_cdf(lo))
           - (hi * phi_hi - lo * phi_lo)
           + (b1 + b2) * (phi_lo - phi_hi))
    return 1.0 + b1 * b2 - 2.0 * mid


def abs_kernel(p: BivariatePreActivation) -> ArrayLike:
    """E|G1||G2| for the pre-activation pair (folded Gaussian cross moment)."""
    s1, s2, rho, t1, t2 = np.broadcast_arrays(
        np.asarray(p.s1, dtype=float), np.asarray(p.s2, dtype=float),
        np.asarray(p.rho, dtype=float), np.asarray(p.t1, dtype=float),
        np.asarray(p.t2, dtype=float))
    rho = np.clip(rho, -1.0, 1.0)
    m1 = t1 / s1
    m2 = t2 / s2
    sin2 = (1.0 - rho) * (1.0 + rho)
    sin_t = np.sqrt(sin2)

    out = np.empty(np.broadcast(s1, rho).shape)
    colinear = sin_t < SIN_THETA_TOL
    regular = ~colinear

    if np.any(colinear):
        sign = np.where(rho[colinear] > 0.0, 1.0, -1.0)
        out[colinear] = (s1 * s2)[colinear] * _abs_moment_colinear(
            m1[colinear], sign * m2[colinear])

    if np.any(regular):
        s1r, s2r = s1[regular], s2[regular]
        r = rho[regular]
        m1r, m2r = m1[regular], m2[regular]
        st = sin_t[regular]
        quadrant = 4.0 * bvn_cdf(m1r, m2r, r) \
            - 2.0 * std_normal_cdf(m1r) - 2.0 * std_normal_cdf(m2r) + 1.0
        term1 = (m1r * m2r + r) * quadrant
        term2 = 2.0 * m1r * std_normal_pdf(m2r) * erf((m1r - r * m2r) / (_SQRT2 * st))
        term3 = 2.0 * m2r * std_normal_pdf(m1r) * erf((m2r - r * m1r) / (_SQRT2 * st))
        term4 = 4.0 * sin2[regular] * bvn_pdf(m1r, m2r, r)
        out[regular] = s1r * s2r * (term1 + term2 + term3 + term4)

    return _maybe_float(out)


def cross_term(p: BivariatePreActivation) -> ArrayLike:
    """E[G1 |G2|] for the pre-activation pair.

    Rotation trick: with Q = Z + t2/s2, the moment reduces to univariate
    folded moments E|Q| and E[Theta(Q) Q^2].
    """
    s1 = np.asarray(p.s1, dtype=float)
    s2 = np.asarray(p.s2, dtype=float)
    rho = np.clip(np.asarray(p.rho, dtype=float), -1.0, 1.0)
    m1 = np.asarray(p.t1, dtype=float) / s1
    m2 = np.asarray(p.t2, dtype=float) / s2
    e_abs_q = m2 * erf(m2 / _SQRT2) + 2.0 * std_normal_pdf(m2)
    e_theta_q2 = (1.0 + m2 * m2) * std_normal_cdf(m2) + m2 * std_normal_pdf(m2)
    e_q_abs_q = 2.0 * e_theta_q2 - (1.0 + m2 * m2)
    out = s1 * s2 * (rho * (e_q_abs_q - m2 * e_abs_q) + m1 * e_abs_q)
    return _maybe_float(np.asarray(out))


def lrelu_kernel(p: BivariatePreActivation, a: float) -> ArrayLike:
    """E[psi_a(G1) psi_a(G2)] with psi_a(z) = max(az, z).

    Assembled from the split psi(z) = ((1+a) z + (1-a)|z|)/2 as the quarter-
    weighted sum of the linear, two cross, and absolute-value moments.
    """
    if not (-1.0 < a <= 1.0):
        raise ValueError("LReLU slope must lie in (-1, 1]")
    lin = linear_kernel(p)
    if a == 1.0:
        return lin
    cross = cross_term(p) + cross_term(p.swapped())
    out = 0.25 * ((1.0 + a) ** 2 * np.asarray(lin)
                  + (1.0 - a * a) * np.asarray(cross)
                  + (1.0 - a) ** 2 * np.asarray(abs_kernel(p)))
    return _maybe_float(out)


def lrelu_mean(mu_t: ArrayLike, sigma_t: ArrayLike, a: float) -> ArrayLike:
    """E[psi_a(G)] for G ~ N(mu_t, sigma_t^2)."""
    if not (-1.0 < a <= 1.0):
        raise ValueError("LReLU slope must lie in (-1, 1]")
    mu_t = np.asarray(mu_t, dtype=float)
    if a == 1.0:
        return _maybe_float(mu_t)
    out = 0.5 * ((1.0 + a) * mu_t + (1.0 - a) * np.asarray(folded_mean(mu_t, sigma_t)))
    return _maybe_float(out)


def _first_layer_preactivation(x, y, layer: LayerHyper, n0: int):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if x.shape[1] != n0 or y.shape[1] != n0:
        raise ValueError(f"inputs must have length n0 = {n0}")
    nx = np.linalg.norm(x, axis=1)
    ny = np.linalg.norm(y, axis=1)
    if np.any(nx == 0.0) or np.any(ny == 0.0):
        raise DegenerateInputError("zero-norm input has no first-layer signal")
    sq = np.sqrt(n0)
    s1 = (layer.sigma / sq) * nx[:, None]
    s2 = (layer.sigma / sq) * ny[None, :]
    rho = np.clip((x @ y.T) / (nx[:, None] * ny[None, :]), -1.0, 1.0)
    t1 = layer.mu * np.mean(x, axis=1)[:, None]
    t2 = layer.mu * np.mean(y, axis=1)[None, :]
    return s1, s2, rho, t1, t2


def input_state(x, y, first_layer: LayerHyper, n0: int, a: float) -> KernelState:
    """Post-activation state after layer one.

    The first-layer pre-activation for input x has mean mu * mean(x) and
    std-dev sigma * ||x|| / sqrt(n0); one LReLU moment step turns that into
    the layer-one (k, m) state.
    """
    s1, s2, rho, t1, t2 = _first_layer_preactivation(x, y, first_layer, n0)
    scalar = np.ndim(x) == 1 and np.ndim(y) == 1
    k_xx = lrelu_kernel(BivariatePreActivation(s1, s1, 1.0, t1, t1), a)
    k_yy = lrelu_kernel(BivariatePreActivation(s2, s2, 1.0, t2, t2), a)
    k_xy = lrelu_kernel(BivariatePreActivation(s1, s2, rho, t1, t2), a)
    m_x = lrelu_mean(t1, s1, a)
    m_y = lrelu_mean(t2, s2, a)
    if scalar:
        return KernelState(float(np.asarray(k_xx).squeeze()),
                           float(np.asarray(k_yy).squeeze()),
                           float(np.asarray(k_xy).squeeze()),
                           float(np.asarray(m_x).squeeze()),
                           float(np.asarray(m_y).squeeze()))
    return KernelState(k_xx, k_yy, k_xy, m_x, m_y)


def layer_step(state: KernelState, layer: LayerHyper, a: float,
               layer_index: int = 0) -> KernelState:
    """One hidden-layer update of the (k, m) state.

    Builds the pre-activation pair with s_i = sigma sqrt(k_ii), correlation
    k_xy / sqrt(k_xx k_yy) and means mu * m, then applies the LReLU moment
    maps to all three pairs.
    """
    k_xx = np.asarray(state.k_xx, dtype=float)
    k_yy = np.asarray(state.k_yy, dtype=float)
    if np.any(k_xx < VANISHED_TOL) or np.any(k_yy < VANISHED_TOL):
        bad = min(float(np.min(k_xx)), float(np.min(k_yy)))
        raise VanishedSignalError(layer_index, bad)
    s1 = layer.sigma * np.sqrt(k_xx)
    s2 = layer.sigma * np.sqrt(k_yy)
    rho = np.clip(np.asarray(state.k_xy) / np.sqrt(k_xx * k_yy), -1.0, 1.0)
    t1 = layer.mu * np.asarray(state.m_x, dtype=float)
    t2 = layer.mu * np.asarray(state.m_y, dtype=float)
    new_xx = lrelu_kernel(BivariatePreActivation(s1, s1, 1.0, t1, t1), a)
    new_yy = lrelu_kernel(BivariatePreActivation(s2, s2, 1.0, t2, t2), a)
    new_xy = lrelu_kernel(BivariatePreActivation(s1, s2, rho, t1, t2), a)
    new_mx = lrelu_mean(t1, s1, a)
    new_my = lrelu_mean(t2, s2, a)
    return KernelState(new_xx, new_yy, new_xy, new_mx, new_my)


def _recurse(x, y, net: NetworkHyper):
    # shared by deep_kernel / kernel_matrix; returns the final second moment
    layers = net.layers
    depth = len(layers)
    if net.final_layer_linear and depth == 1:
        s1, s2, rho, t1, t2 = _first_layer_preactivation(x, y, layers[0],
                                                         net.input_dim)
        return linear_kernel(BivariatePreActivation(s1, s2, rho, t1, t2))
    state = input_state(x, y, layers[0], net.input_dim, net.slope_a)
    last_hidden = depth - 1 if net.final_layer_linear else depth
    for l in range(2, last_hidden + 1):
        state = layer_step(state, layers[l - 1], net.slope_a, layer_index=l)
    if net.final_layer_linear:
        out = layers[-1]
        return (out.sigma ** 2 * np.asarray(state.k_xy)
                + out.mu ** 2 * np.asarray(state.m_x) * np.asarray(state.m_y))
    return np.asarray(state.k_xy)


def deep_kernel(x, y, net: NetworkHyper) -> float:
    """Limiting kernel k(x, y) of the network described by `net`."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 1 or y.ndim != 1:
        raise ValueError("deep_kernel expects single input vectors")
    return float(np.asarray(_recurse(x, y, net)).squeeze())


def kernel_matrix(X, Y, net: NetworkHyper) -> np.ndarray:
    """Gram matrix with entry (i, j) = deep_kernel(X[i], Y[j]).

    The recursion runs vectorised over all pairs at once; output values do
    not depend on evaluation order.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    K = np.asarray(_recurse(X, Y, net))
    if X.shape == Y.shape and np.array_equal(X, Y):
        K = 0.5 * (K + K.T)
    return K


def arccos_reference(theta0: float, a: float, L: int) -> float:
    """cos(theta_L) after L applications of the zero-mean LReLU angle map."""
    if not (0.0 <= theta0 <= np.pi):
        raise ValueError("theta0 must lie in [0, pi]")
    if L < 1:
        raise ValueError("L must be >= 1")
    theta = float(theta0)
    denom = 1.0 + a * a
    cos_t = np.cos(theta)
    for _ in range(L):
        cos_t = ((1.0 - a) ** 2 / (np.pi * denom)
                 * (np.sin(theta) + (np.pi - theta) * np.cos(theta))
                 + 2.0 * a / denom * np.cos(theta))
        cos_t = min(1.0, max(-1.0, cos_t))
        theta = np.arccos(cos_t)
    return float(cos_t)


def single_layer_kernel_with_bias(x1, x2, mu, sigma_diag, a: float) -> float:
    """One-layer LReLU kernel with bias handled by input augmentation.

    Inputs are augmented with a trailing 1; mu and sigma_diag cover the
    augmented coordinates (weights first, bias last), sigma_diag holding the
    diagonal of the weight covariance.
    """
    x1 = np.asarray(x1, dtype=float)
    x2 = np.asarray(x2, dtype=float)
    if x1.shape != x2.shape or x1.ndim != 1:
        raise ValueError("x1 and x2 must be equal-length vectors")
    x1h = np.append(x1, 1.0)
    x2h = np.append(x2, 1.0)
    mu = np.asarray(mu, dtype=float)
    sig = np.asarray(sigma_diag, dtype=float)
    if mu.shape != x1h.shape or sig.shape != x1h.shape:
        raise ValueError("mu and sigma_diag must cover the augmented input")
    if np.any(sig < 0.0):
        raise ValueError("sigma_diag entries must be non-negative")
    s1 = np.sqrt(np.sum(sig * x1h * x1h))
    s2 = np.sqrt(np.sum(sig * x2h * x2h))
    if s1 == 0.0 or s2 == 0.0:
        raise DegenerateInputError("stretched input has zero scale")
    rho = float(np.clip(np.sum(sig * x1h * x2h) / (s1 * s2), -1.0, 1.0))
    p = BivariatePreActivation(s1, s2, rho, float(mu @ x1h), float(mu @ x2h))
    return float(np.asarray(lrelu_kernel(p, a)))
