"""Level-II inference over the kernel hyperparameters (mu, sigma^2).

Hyper-prior, grid evaluation of evidence / hyper-posterior surfaces,
random-walk Metropolis-Hastings, and the hyperparameter-marginalised
predictive.
"""

import math
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .gp import FactorizationError, GPModel, log_marginal_likelihood, \
    posterior_predictive
from .kernels import LayerHyper, NetworkHyper, VanishedSignalError

__all__ = [
    "HyperPrior",
    "MHConfig",
    "Chain",
    "GridSpec",
    "GridResult",
    "MarginalPredictive",
    "hyper_prior_logpdf",
    "substitute_hyper",
    "gp_log_posterior",
    "grid_eval",
    "random_walk_mh",
    "mh_sample",
    "marginal_predictive",
]


@dataclass(frozen=True)
class HyperPrior:
    """Independent N(mu_mean, mu_var) x Inv-Gamma(ig_shape, ig_scale) prior."""

    mu_mean: float = -1.0
    mu_var: float = 2.0
    ig_shape: float = 2.5
    ig_scale: float = 6.0

    def __post_init__(self):
        if self.mu_var <= 0.0 or self.ig_shape <= 0.0 or self.ig_scale <= 0.0:
            raise ValueError("prior scale parameters must be positive")


@dataclass(frozen=True)
class MHConfig:
    """Fixed-proposal random-walk MH settings.

    The proposal covariance has variances (prop_var_mu, prop_var_sig2) and
    correlation prop_corr, roughly tracking the diagonal ridge of the
    target.  burn_in iterations are discarded, then every thin-th state is
    kept until n_samples are collected.
    """

    prop_var_mu: float = 2.38
    prop_var_sig2: float = 4.76
    prop_corr: float = -0.9
    burn_in: int = 20
    thin: int = 20
    n_samples: int = 100
    seed: int = 0

    def __post_init__(self):
        if not (abs(self.prop_corr) < 1.0):
            raise ValueError("|prop_corr| must be < 1")
        if min(self.burn_in, self.thin, self.n_samples) < 1:
            raise ValueError("burn_in, thin and n_samples must be >= 1")
        if self.prop_var_mu <= 0.0 or self.prop_var_sig2 <= 0.0:
            raise ValueError("proposal variances must be positive")

    def proposal_cov(self) -> np.ndarray:
        off = self.prop_corr * math.sqrt(self.prop_var_mu * self.prop_var_sig2)
        return np.array([[self.prop_var_mu, off], [off, self.prop_var_sig2]])


@dataclass
class Chain:
    """Retained MH states: (mu, sigma^2) rows with their log densities."""

    samples: np.ndarray
    log_densities: np.ndarray
    acceptance_rate: float

    def __len__(self) -> int:
        return self.samples.shape[0]

    def map_estimate(self) -> Tuple[float, float]:
        """Retained sample with the largest target density."""
        i = int(np.argmax(self.log_densities))
        return float(self.samples[i, 0]), float(self.samples[i, 1])


@dataclass(frozen=True)
class GridSpec:
    """Rectangular (mu, sigma^2) grid.

    The default ranges cover the sigma^2 = 2 ridge and the negative-mu
    diagonal that the evidence surfaces develop with depth.
    """

    mu_range: Tuple[float, float] = (-2.5, 1.0)
    sig2_range: Tuple[float, float] = (0.1, 8.0)
    resolution: int = 200

    def __post_init__(self):
        if self.mu_range[0] >= self.mu_range[1] and self.resolution > 1:
            raise ValueError("mu_range must be increasing")
        if self.sig2_range[0] <= 0.0:
            raise ValueError("sigma^2 range must be positive")
        if self.sig2_range[0] >= self.sig2_range[1] and self.resolution > 1:
            raise ValueError("sig2_range must be increasing")
        if self.resolution < 1:
            raise ValueError("resolution must be >= 1")

    def axes(self) -> Tuple[np.ndarray, np.ndarray]:
        return (np.linspace(*self.mu_range, self.resolution),
                np.linspace(*self.sig2_range, self.resolution))


@dataclass
class GridResult:
    """Evaluated surface plus its maximisers."""

    mu_axis: np.ndarray
    sig2_axis: np.ndarray
    values: np.ndarray
    target: str
    argmax: Tuple[float, float, float]
    argmax_mu0: Tuple[float, float, float]
    n_failed: int = 0
    jitter_events: int = 0


@dataclass
class MarginalPredictive:
    """Per-point mean and variance of the hyperparameter mixture."""

    mean: np.ndarray
    var: np.ndarray
    n_skipped: int = 0


def hyper_prior_logpdf(mu: float, sigma2: float,
                       prior: HyperPrior = HyperPrior()) -> float:
    """Log density of the hyper-prior at (mu, sigma^2)."""
    mu = np.asarray(mu, dtype=float)
    sigma2 = np.asarray(sigma2, dtype=float)
    if np.any(sigma2 <= 0.0):
        raise ValueError("sigma2 must be positive")
    a, b = prior.ig_shape, prior.ig_scale
    log_mu = (-0.5 * np.log(2.0 * np.pi * prior.mu_var)
              - (mu - prior.mu_mean) ** 2 / (2.0 * prior.mu_var))
    log_s2 = (a * np.log(b) - math.lgamma(a) - (a + 1.0) * np.log(sigma2)
              - b / sigma2)
    out = log_mu + log_s2
    return float(out) if out.ndim == 0 else out


def substitute_hyper(net_template: NetworkHyper, mu: float, sigma2: float,
                     include_final: bool = False) -> NetworkHyper:
    """Place (mu, sqrt(sigma2)) in every LReLU layer of the template.

    The final linear layer keeps its template values unless include_final
    is set (or the template has no linear output layer).
    """
    if sigma2 <= 0.0:
        raise ValueError("sigma2 must be positive")
    sub = LayerHyper(float(mu), float(np.sqrt(sigma2)))
    layers = list(net_template.layers)
    stop = len(layers)
    if net_template.final_layer_linear and not include_final and stop > 1:
        stop -= 1
    for i in range(stop):
        layers[i] = sub
    return NetworkHyper(net_template.slope_a, net_template.input_dim,
                        tuple(layers), net_template.final_layer_linear)


def gp_log_posterior(X, y, net_template: NetworkHyper,
                     prior: Optional[HyperPrior], noise_var: float) -> Callable:
    """log p(y | mu, sigma^2) (+ log hyper-prior when one is given).

    Returns -inf for sigma^2 <= 0 and for hyperparameters where the Gram
    matrix cannot be factorised, so the result plugs straight into MH.
    """
    def logp(theta) -> float:
        mu, sigma2 = float(theta[0]), float(theta[1])
        if sigma2 <= 0.0 or not np.isfinite(mu) or not np.isfinite(sigma2):
            return -np.inf
        net = substitute_hyper(net_template, mu, sigma2)
        try:
            with np.errstate(over="ignore", invalid="ignore"):
                lml = log_marginal_likelihood(X, y, GPModel(net, noise_var))
        except (FactorizationError, VanishedSignalError, FloatingPointError):
            return -np.inf
        if not np.isfinite(lml):
            return -np.inf
        if prior is not None:
            lml += hyper_prior_logpdf(mu, sigma2, prior)
        return lml

    return logp


def grid_eval(X, y, net_template: NetworkHyper, spec: GridSpec,
              target: str = "log-ml", noise_var: float = 0.1,
              prior: Optional[HyperPrior] = None) -> GridResult:
    """Evaluate the evidence or hyper-posterior surface on the grid.

    Cell (i, j) holds the target at (mu_axis[i], sig2_axis[j]); failed
    factorisations become -inf cells without aborting the sweep.  Returns
    the unconstrained argmax and the argmax along the mu-row nearest zero.
    """
    if target not in ("log-ml", "log-posterior"):
        raise ValueError("target must be 'log-ml' or 'log-posterior'")
    if target == "log-posterior" and prior is None:
        prior = HyperPrior()
    mu_axis, sig2_axis = spec.axes()
    values = np.empty((mu_axis.size, sig2_axis.size))
    n_failed = 0
    jitter_events = 0
    for i, mu in enumerate(mu_axis):
        for j, s2 in enumerate(sig2_axis):
            val = -np.inf
            try:
                net = substitute_hyper(net_template, float(mu), float(s2))
                with np.errstate(over="ignore", invalid="ignore"):
                    lml, jit = log_marginal_likelihood(
                        X, y, GPModel(net, noise_var), return_jitter=True)
                if np.isfinite(lml):
                    jitter_events += jit > 0.0
                    val = lml
                    if target == "log-posterior":
                        val += hyper_prior_logpdf(float(mu), float(s2), prior)
            except (FactorizationError, VanishedSignalError,
                    FloatingPointError):
                pass
            if val == -np.inf:
                n_failed += 1
            values[i, j] = val
    if not np.any(np.isfinite(values)):
        raise FactorizationError("every grid cell failed to factorise")

    def _argmax_of(vals, rows):
        flat = int(np.argmax(vals))
        i, j = np.unravel_index(flat, vals.shape)
        return float(rows[i]), float(sig2_axis[j]), float(vals[i, j])

    argmax = _argmax_of(values, mu_axis)
    i0 = int(np.argmin(np.abs(mu_axis)))
    j0 = int(np.argmax(values[i0]))
    argmax_mu0 = (float(mu_axis[i0]), float(sig2_axis[j0]),
                  float(values[i0, j0]))
    return GridResult(mu_axis, sig2_axis, values, target, argmax, argmax_mu0,
                      n_failed, jitter_events)


def random_walk_mh(log_density: Callable, init, config: MHConfig) -> Chain:
    """No-frills random-walk Metropolis with a fixed Gaussian proposal.

    Proposals landing where log_density is -inf are rejected outright.
    Runs burn_in + thin * n_samples iterations and is deterministic for a
    fixed config.seed.
    """
    rng = np.random.default_rng(config.seed)
    L = np.linalg.cholesky(config.proposal_cov())
    current = np.asarray(init, dtype=float).copy()
    cur_ld = float(log_density(current))
    if not np.isfinite(cur_ld):
        raise ValueError("initial state has zero target density")
    total = config.burn_in + config.thin * config.n_samples
    samples = np.empty((config.n_samples, 2))
    lds = np.empty(config.n_samples)
    kept = 0
    accepted = 0
    for it in range(1, total + 1):
        prop = current + L @ rng.standard_normal(2)
        ld = float(log_density(prop))
        if np.isfinite(ld) and np.log(rng.uniform()) < ld - cur_ld:
            current = prop
            cur_ld = ld
            accepted += 1
        if it > config.burn_in and (it - config.burn_in) % config.thin == 0:
            samples[kept] = current
            lds[kept] = cur_ld
            kept += 1
    return Chain(samples[:kept], lds[:kept], accepted / total)


def mh_sample(X, y, net_template: NetworkHyper, prior: HyperPrior,
              config: MHConfig, init: Tuple[float, float],
              noise_var: float = 0.1) -> Chain:
    """Sample the hyper-posterior over (mu, sigma^2) by random-walk MH.

    init is typically the MAP over a grid_eval surface.
    """
    if init[1] <= 0.0:
        raise ValueError("initial sigma^2 must be positive")
    logp = gp_log_posterior(X, y, net_template, prior, noise_var)
    return random_walk_mh(logp, init, config)


def marginal_predictive(Xstar, X, y, net_template: NetworkHyper, chain: Chain,
                        noise_var: float = 0.1) -> MarginalPredictive:
    """Predictive mixture over the chain's hyperparameter samples.

    Mixture mean averages the conditional means; the mixture variance is
    E[var] + E[mean^2] - (E[mean])^2 per test point.  Samples whose Gram
    matrix cannot be factorised are skipped and counted.
    """
    if len(chain) == 0:
        raise ValueError("chain is empty")
    means = []
    variances = []
    n_skipped = 0
    for mu, sigma2 in chain.samples:
        net = substitute_hyper(net_template, float(mu), float(sigma2))
        try:
            pp = posterior_predictive(Xstar, X, y, GPModel(net, noise_var))
        except (FactorizationError, VanishedSignalError):
            n_skipped += 1
            continue
        means.append(pp.mean)
        variances.append(pp.var)
    if not means:
        raise FactorizationError("every chain sample failed to factorise")
    if len(means) == 1:
        return MarginalPredictive(means[0], variances[0], n_skipped)
    means = np.asarray(means)
    variances = np.asarray(variances)
    mix_mean = means.mean(axis=0)
    mix_var = (variances + means ** 2).mean(axis=0) - mix_mean ** 2
    return MarginalPredictive(mix_mean, mix_var, n_skipped)
