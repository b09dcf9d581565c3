"""Finite-width random MLPs under iid-Gaussian and row-column-exchangeable priors.

The exchangeable priors follow the representation F(A, B, C, D) with latent
variables iid uniform on [-sqrt(3), sqrt(3)]; hidden layers are centred and
scaled so the limiting kernel hyperparameters stay finite, while the first
and last layers keep independent zero-mean Gaussian priors.
"""

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, List, Optional, Tuple, Union

import numpy as np

__all__ = [
    "NetworkShape",
    "IIDGaussian",
    "RCEScheme",
    "WeightScheme",
    "SampledNetwork",
    "get_scheme",
    "custom_scheme",
    "scheme_hyperparams",
    "sample_weights",
    "forward",
    "activations",
    "dump_weights",
    "load_weights",
]

SQRT3 = np.sqrt(3.0)
SQRT2 = np.sqrt(2.0)

# zero-mean Gaussian scale for the first and last layers in RCE mode
DEFAULT_END_SIGMA = SQRT2


@dataclass(frozen=True)
class NetworkShape:
    """Finite widths: input_dim -> widths[0] -> ... -> output_dim."""

    input_dim: int
    widths: Tuple[int, ...]
    output_dim: int = 1

    def __post_init__(self):
        object.__setattr__(self, "widths", tuple(int(w) for w in self.widths))
        if self.input_dim < 1 or self.output_dim < 1 or not self.widths:
            raise ValueError("all dimensions must be >= 1")
        if any(w < 1 for w in self.widths):
            raise ValueError("hidden widths must be >= 1")

    @property
    def n_layers(self) -> int:
        return len(self.widths) + 1

    def layer_dims(self) -> List[Tuple[int, int]]:
        sizes = [self.input_dim, *self.widths, self.output_dim]
        return [(sizes[i + 1], sizes[i]) for i in range(len(sizes) - 1)]


@dataclass(frozen=True)
class IIDGaussian:
    """Independent Gaussian prior (mu, sigma) used in every layer."""

    mu: float
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0.0:
            raise ValueError("sigma must be positive")


@dataclass(frozen=True)
class RCEScheme:
    """Row-column-exchangeable generator W ~ F(A, B_j, C_i, D_ji).

    f evaluates the generator elementwise; f_mean is the conditional mean
    E_D[F] given the latents (needed for centring); mu_of / sigma_of map the
    global latent A to the limiting kernel hyperparameters of the layer.
    """

    name: str
    f: Callable
    f_mean: Callable
    mu_of: Callable
    sigma_of: Callable
    random_hyper: bool = False

    def hyperparams(self, A: float = 0.0) -> Tuple[float, float]:
        return float(self.mu_of(A)), float(self.sigma_of(A))


WeightScheme = Union[IIDGaussian, RCEScheme]


def _f4_sigma(convention: str) -> Callable:
    # Table value is 2|A + sqrt(3)|; the variance of sqrt(2) D (A + sqrt(3))
    # with unit-variance D works out to 2 (A + sqrt(3))^2, i.e. sqrt(2)|A +
    # sqrt(3)|.  Both are exposed; nothing picks silently between them.
    if convention == "table":
        return lambda A: 2.0 * abs(A + SQRT3)
    if convention == "analytic":
        return lambda A: SQRT2 * abs(A + SQRT3)
    raise ValueError("f4 sigma convention must be 'table' or 'analytic'")


def get_scheme(name: str, f4_sigma: str = "table") -> RCEScheme:
    """Preset exchangeable generators F1-F4."""
    key = name.lower()
    # f_mean returns a scalar or a (1, n_in) row; sample_weights broadcasts
    if key == "f1":
        return RCEScheme(
            "f1",
            f=lambda A, B, C, D: SQRT2 * D,
            f_mean=lambda A, B, C: 0.0,
            mu_of=lambda A: 0.0,
            sigma_of=lambda A: SQRT2,
        )
    if key == "f2":
        return RCEScheme(
            "f2",
            f=lambda A, B, C, D: 2.0 * SQRT2 * D - 0.5,
            f_mean=lambda A, B, C: -0.5,
            mu_of=lambda A: -0.5,
            sigma_of=lambda A: np.sqrt(8.0),
        )
    if key == "f3":
        return RCEScheme(
            "f3",
            f=lambda A, B, C, D: SQRT2 * D - 1.5 * A * C,
            f_mean=lambda A, B, C: -1.5 * A * C,
            mu_of=lambda A: 0.0,
            sigma_of=lambda A: SQRT2,
        )
    if key == "f4":
        return RCEScheme(
            "f4",
            f=lambda A, B, C, D: SQRT2 * D * (A + SQRT3) - 0.1 * A * A * C * C - 0.4,
            f_mean=lambda A, B, C: -0.1 * A * A * C * C - 0.4,
            mu_of=lambda A: -0.1 * A * A - 0.4,
            sigma_of=_f4_sigma(f4_sigma),
            random_hyper=True,
        )
    raise ValueError(f"unknown scheme {name!r}; expected f1..f4")


def custom_scheme(name: str, g: Callable, h: Callable, h_mean: Callable,
                  mu_of: Callable, var_of: Callable,
                  g_abs_mean: float = 1.0, g_sq_mean: float = 1.0,
                  random_hyper: bool = True) -> RCEScheme:
    """Build a generator F(A,B,C,D) = G(B) H(A,C,D) from its two factors.

    The split keeps the limiting hyperparameters computable in closed form:
    h_mean(A, C) = E_D[H], mu_of(A) = E_C[E_D H], var_of(A) = E_C[Var_D H],
    and g_abs_mean / g_sq_mean are E|G(B)| and E[G(B)^2].
    """
    return RCEScheme(
        name,
        f=lambda A, B, C, D: g(B) * h(A, C, D),
        f_mean=lambda A, B, C: g(B) * h_mean(A, C),
        mu_of=lambda A: g_abs_mean * mu_of(A),
        sigma_of=lambda A: np.sqrt(g_sq_mean * var_of(A)),
        random_hyper=random_hyper,
    )


def scheme_hyperparams(scheme: Union[str, RCEScheme], A: float = 0.0,
                       f4_sigma: str = "table") -> Tuple[float, float]:
    """Limiting kernel hyperparameters (mu, sigma) of a scheme, given A."""
    if isinstance(scheme, str):
        scheme = get_scheme(scheme, f4_sigma=f4_sigma)
    return scheme.hyperparams(A)


@dataclass
class SampledNetwork:
    """Concrete weight draw: per-layer matrices plus the RCE latents used."""

    weights: List[np.ndarray]
    slope_a: float
    latents: List[Optional[Tuple[float, np.ndarray, np.ndarray]]] = field(
        default_factory=list, repr=False)

    @property
    def n_layers(self) -> int:
        return len(self.weights)


def _uniform_latent(rng, shape=None):
    if shape is None:
        return float(rng.random() * (2.0 * SQRT3) - SQRT3)
    out = rng.random(shape)
    out *= 2.0 * SQRT3
    out -= SQRT3
    return out


def sample_weights(shape: NetworkShape, scheme: WeightScheme, a: float,
                   seed, end_sigma: float = DEFAULT_END_SIGMA) -> SampledNetwork:
    """Draw one network.

    iid mode uses W = (sigma Z + mu / sqrt(n)) / sqrt(n) in every layer.  RCE
    mode samples the latents uniform on [-sqrt(3), sqrt(3)], centres the
    hidden layers as W = (F - E_D[F](1 - 1/sqrt(n))) / sqrt(n), and keeps
    zero-mean Gaussians at scale end_sigma in the first and last layers.

    Layers draw from split substreams of `seed`, so the draw for layer l
    does not depend on the widths of other layers.
    """
    if isinstance(seed, np.random.Generator):
        master = seed
    else:
        master = np.random.Generator(np.random.SFC64(seed))
    layer_rngs = master.spawn(shape.n_layers)
    dims = shape.layer_dims()
    weights: List[np.ndarray] = []
    latents: List[Optional[Tuple[float, np.ndarray, np.ndarray]]] = []
    for l, ((n_out, n_in), rng) in enumerate(zip(dims, layer_rngs), start=1):
        root_n = np.sqrt(n_in)
        if isinstance(scheme, IIDGaussian):
            z = rng.standard_normal((n_out, n_in))
            z *= scheme.sigma
            z += scheme.mu / root_n
            z /= root_n
            weights.append(z)
            latents.append(None)
        elif isinstance(scheme, RCEScheme):
            if l == 1 or l == shape.n_layers:
                z = rng.standard_normal((n_out, n_in))
                z *= end_sigma / root_n
                weights.append(z)
                latents.append(None)
            else:
                A = _uniform_latent(rng)
                B = _uniform_latent(rng, (n_out, 1))
                C = _uniform_latent(rng, (1, n_in))
                D = _uniform_latent(rng, (n_out, n_in))
                centred = scheme.f(A, B, C, D) \
                    - scheme.f_mean(A, B, C) * (1.0 - 1.0 / root_n)
                centred /= root_n
                weights.append(centred)
                latents.append((A, B, C))
        else:
            raise TypeError(f"unsupported weight scheme {type(scheme).__name__}")
    return SampledNetwork(weights, a, latents)


def _lrelu(z: np.ndarray, a: float) -> np.ndarray:
    return np.maximum(a * z, z)


def activations(netw: SampledNetwork, X) -> List[np.ndarray]:
    """Per-layer signals for inputs X: LReLU outputs, linear in the last layer."""
    h = np.atleast_2d(np.asarray(X, dtype=float))
    if h.shape[1] != netw.weights[0].shape[1]:
        raise ValueError(
            f"input width {h.shape[1]} does not match first layer "
            f"fan-in {netw.weights[0].shape[1]}")
    out = []
    last = len(netw.weights) - 1
    for l, W in enumerate(netw.weights):
        z = h @ W.T
        h = z if l == last else _lrelu(z, netw.slope_a)
        out.append(h)
    return out


def forward(netw: SampledNetwork, X) -> np.ndarray:
    """Network outputs for the input rows of X (linear final layer)."""
    out = activations(netw, X)[-1]
    return out[:, 0] if out.shape[1] == 1 else out


def dump_weights(netw: SampledNetwork, directory) -> Path:
    """Write one little-endian float64 .bin per layer plus a JSON manifest."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    manifest = {"slope_a": netw.slope_a, "layers": []}
    for i, W in enumerate(netw.weights):
        fname = f"layer_{i:02d}.bin"
        W.astype("<f8").tofile(directory / fname)
        manifest["layers"].append({"file": fname, "shape": list(W.shape)})
    path = directory / "manifest.json"
    with open(path, "w") as fh:
        json.dump(manifest, fh, indent=2)
    return path


def load_weights(directory) -> SampledNetwork:
    """Round-trip loader for dump_weights output."""
    directory = Path(directory)
    with open(directory / "manifest.json") as fh:
        manifest = json.load(fh)
    weights = []
    for entry in manifest["layers"]:
        raw = np.fromfile(directory / entry["file"], dtype="<f8")
        weights.append(raw.reshape(entry["shape"]))
    return SampledNetwork(weights, manifest["slope_a"], [None] * len(weights))
