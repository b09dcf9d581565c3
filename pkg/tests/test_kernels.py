import numpy as np
import pytest

from mlpgp.kernels import (BivariatePreActivation, DegenerateInputError,
                           KernelState, LayerHyper, NetworkHyper,
                           VanishedSignalError, abs_kernel, arccos_reference,
                           constant_hyper, cross_term, deep_kernel,
                           folded_mean, input_state, kernel_matrix,
                           layer_step, linear_kernel, lrelu_kernel,
                           lrelu_mean, single_layer_kernel_with_bias)

from _oracles import bivariate_mc, bivariate_moment_oracle, leaky_relu, \
    weightspace_kernel_mc

P = BivariatePreActivation
SQRT2 = np.sqrt(2.0)

# values pinned from the conditional-moment quadrature oracle in _oracles.py
ABS_GENERIC = 1.5145414110076927          # (1.3, 0.8, -0.35, 0.7, -1.1)
CROSS_SPEC = 0.04879307465793131          # (1, 1, 0.5, 0.2, -0.3)
CROSS_GENERIC = -0.6557451772285137       # (0.9, 1.7, -0.6, -0.4, 0.25)
LRELU_GENERIC = 0.3765625590469272        # (1.1, 0.6, 0.3, -0.5, 0.8), a=-0.25
LAYER_KXY = 0.33848644588774396           # state (1,1,.5,.4,.4), mu=-1, s=sqrt2
BIAS_GENERIC = 0.3439509608096999         # see test_single_layer_bias_generic


def test_linear_kernel():
    assert linear_kernel(P(1.0, 1.0, 1.0, 0.0, 0.0)) == 1.0
    assert linear_kernel(P(1.0, 1.0, 0.0, 2.0, 3.0)) == 6.0
    assert abs(linear_kernel(P(1.3, 0.7, 0.4, 0.5, -0.2)) - 0.264) < 1e-15


def test_folded_mean():
    assert abs(folded_mean(0.0, 1.0) - np.sqrt(2 / np.pi)) < 1e-15
    assert abs(folded_mean(8.0, 1.0) - 8.0) < 1e-10
    assert abs(folded_mean(1.0, 1.0) - 1.1666309411753726) < 1e-14
    # scale: E|N(m, s^2)| = s E|N(m/s, 1)|
    assert np.isclose(folded_mean(1.0, 2.0), 2.0 * folded_mean(0.5, 1.0),
                      rtol=1e-14)
    with pytest.raises(DegenerateInputError):
        folded_mean(0.5, 0.0)


def test_abs_kernel_zero_mean_closed_form():
    for theta in (0.2, 1.1, 2.5):
        got = abs_kernel(P(1.0, 1.0, np.cos(theta), 0.0, 0.0))
        want = (2 / np.pi) * (np.sin(theta) + (np.pi / 2 - theta) * np.cos(theta))
        assert abs(got - want) < 1e-13


def test_abs_kernel_examples():
    assert abs(abs_kernel(P(1, 1, 1.0, 0.0, 0.0)) - 1.0) < 1e-14
    got = abs_kernel(P(1.0, 1.0, 0.0, 1.0, -0.5))
    want = folded_mean(1.0, 1.0) * folded_mean(-0.5, 1.0)
    assert abs(got - want) < 1e-14
    assert abs(abs_kernel(P(1.3, 0.8, -0.35, 0.7, -1.1)) - ABS_GENERIC) < 1e-12


def test_abs_kernel_colinear_limits():
    for rho, t1, t2 in [(1.0, 0.5, -0.8), (-1.0, 0.5, -0.8), (1.0, 0.3, 0.3)]:
        got = abs_kernel(P(1.2, 0.9, rho, 1.2 * t1, 0.9 * t2))
        want = bivariate_moment_oracle("abs", "abs", 1.2, 0.9,
                                       rho * (1 - 1e-13), 1.2 * t1, 0.9 * t2)
        assert abs(got - want) < 1e-10
    # continuity across the degenerate switch at sin(theta) = 1e-7
    lo = abs_kernel(P(1, 1, np.cos(0.9999999e-7), 0.4, -0.7))
    hi = abs_kernel(P(1, 1, np.cos(1.0000001e-7), 0.4, -0.7))
    assert abs(lo - hi) < 1e-12


def test_cross_term():
    assert cross_term(P(1.3, 0.8, 0.5, 0.0, 0.0)) == 0.0
    got = cross_term(P(1.1, 0.9, 0.0, 1.1 * 0.6, 0.9 * -0.4))
    want = (1.1 * 0.6) * folded_mean(0.9 * -0.4, 0.9)
    assert abs(got - want) < 1e-14
    assert abs(cross_term(P(1, 1, 0.5, 0.2, -0.3)) - CROSS_SPEC) < 1e-12
    assert abs(cross_term(P(0.9, 1.7, -0.6, -0.4, 0.25)) - CROSS_GENERIC) < 1e-12


def test_lrelu_kernel():
    p = P(1.1, 0.6, 0.3, -0.5, 0.8)
    assert lrelu_kernel(p, 1.0) == linear_kernel(p)
    got = lrelu_kernel(P(SQRT2, SQRT2, 0.0, 0.0, 0.0), 0.0)
    assert abs(got - 1 / np.pi) < 1e-14
    assert abs(lrelu_kernel(P(1, 1, 1.0, 0.0, 0.0), 0.0) - 0.5) < 1e-14
    assert abs(lrelu_kernel(p, -0.25) - LRELU_GENERIC) < 1e-12


def test_lrelu_kernel_scale_equivariance():
    rng = np.random.default_rng(0)
    for _ in range(20):
        s1, s2 = rng.uniform(0.2, 2, 2)
        rho = rng.uniform(-1, 1)
        t1, t2 = rng.normal(0, 1, 2)
        a = rng.uniform(-0.9, 0.9)
        c = rng.uniform(0.1, 3)
        base = lrelu_kernel(P(s1, s2, rho, t1, t2), a)
        scaled = lrelu_kernel(P(c * s1, c * s2, rho, c * t1, c * t2), a)
        assert np.isclose(scaled, c * c * base, rtol=1e-12, atol=1e-14)


def test_lrelu_mean():
    assert lrelu_mean(0.7, 1.3, 1.0) == 0.7
    assert abs(lrelu_mean(0.0, 1.0, 0.0) - 1 / np.sqrt(2 * np.pi)) < 1e-15
    want = 0.5 * (1.0 + 1.1666309411753726)
    assert abs(lrelu_mean(1.0, 1.0, 0.0) - want) < 1e-14


def test_monte_carlo_agreement_single_layer_moments():
    # lrelu_kernel / cross_term / abs_kernel vs plain MC, 4 standard errors
    rng = np.random.default_rng(2024)
    n = 10 ** 6
    for _ in range(8):
        s1, s2 = rng.uniform(0.3, 1.8, 2)
        rho = rng.uniform(-0.98, 0.98)
        t1, t2 = rng.normal(0, 1, 2)
        a = rng.uniform(-0.8, 0.8)
        p = P(s1, s2, rho, t1, t2)
        for func, f in [
            (lambda q: lrelu_kernel(q, a),
             lambda g1, g2: leaky_relu(g1, a) * leaky_relu(g2, a)),
            (cross_term, lambda g1, g2: g1 * np.abs(g2)),
            (abs_kernel, lambda g1, g2: np.abs(g1) * np.abs(g2)),
        ]:
            est, se = bivariate_mc(f, s1, s2, rho, t1, t2, n, rng)
            assert abs(func(p) - est) < 4.0 * se + 1e-12


def test_input_state_canonical_values():
    layer = LayerHyper(0.0, SQRT2)
    st = input_state([1.0, 0.0], [1.0, 0.0], layer, 2, 0.0)
    # layer-one pre-activation is standard normal here; ReLU moments follow
    assert abs(st.k_xx - 0.5) < 1e-14
    assert st.k_xx == st.k_yy == st.k_xy
    assert st.m_x == st.m_y
    assert abs(st.m_x - 1 / np.sqrt(2 * np.pi)) < 1e-15
    orth = input_state([1.0, 0.0], [0.0, 1.0], layer, 2, 0.0)
    assert abs(orth.k_xy - 1 / (2 * np.pi)) < 1e-14
    assert abs(orth.k_xy / orth.k_xx - arccos_reference(np.pi / 2, 0.0, 1)) < 1e-13


def test_input_state_nonzero_mean_matches_quadrature():
    layer = LayerHyper(-0.9, 1.3)
    x = np.array([0.6, -0.2, 1.1])
    y = np.array([-0.4, 0.9, 0.3])
    st = input_state(x, y, layer, 3, 0.2)
    s1 = layer.sigma * np.linalg.norm(x) / np.sqrt(3)
    s2 = layer.sigma * np.linalg.norm(y) / np.sqrt(3)
    rho = x @ y / (np.linalg.norm(x) * np.linalg.norm(y))
    t1 = layer.mu * x.mean()
    t2 = layer.mu * y.mean()
    want = bivariate_moment_oracle("lrelu", "lrelu", s1, s2, rho, t1, t2, a=0.2)
    assert abs(st.k_xy - want) < 1e-10


def test_input_state_degenerate_input():
    with pytest.raises(DegenerateInputError):
        input_state([0.0, 0.0], [1.0, 0.0], LayerHyper(0.0, 1.0), 2, 0.0)


def test_layer_step_relu_unit():
    st = layer_step(KernelState(1.0, 1.0, 0.0, 0.0, 0.0),
                    LayerHyper(0.0, SQRT2), 0.0, 2)
    assert abs(st.k_xx - 1.0) < 1e-14
    assert abs(st.k_xy - 1 / np.pi) < 1e-14
    assert abs(st.m_x - 1 / np.sqrt(np.pi)) < 1e-14
    # rho = 1 is a fixed point of the normalised recursion
    st2 = layer_step(KernelState(1.0, 1.0, 1.0, 0.3, 0.3),
                     LayerHyper(0.0, SQRT2), 0.0, 2)
    assert abs(st2.k_xy - st2.k_xx) < 1e-14


def test_layer_step_generic_oracle():
    st = layer_step(KernelState(1.0, 1.0, 0.5, 0.4, 0.4),
                    LayerHyper(-1.0, SQRT2), 0.0, 2)
    assert abs(st.k_xy - LAYER_KXY) < 1e-12
    from _oracles import univariate_expect
    want_m = univariate_expect(lambda g: leaky_relu(g, 0.0), -0.4, SQRT2)
    assert abs(st.m_x - want_m) < 1e-10


def test_layer_step_vanished_signal():
    with pytest.raises(VanishedSignalError) as err:
        layer_step(KernelState(1e-301, 1.0, 0.0, 0.0, 0.0),
                   LayerHyper(0.0, 1.0), 0.0, layer_index=7)
    assert err.value.layer == 7


def test_layer_step_preserves_cauchy_schwarz():
    rng = np.random.default_rng(5)
    for _ in range(1000):
        kxx, kyy = rng.uniform(0.05, 4.0, 2)
        rho = rng.uniform(-1, 1)
        kxy = rho * np.sqrt(kxx * kyy)
        mx, my = rng.normal(0, 1, 2)
        layer = LayerHyper(rng.normal(0, 1), rng.uniform(0.3, 2.0))
        a = rng.uniform(-0.9, 0.9)
        out = layer_step(KernelState(kxx, kyy, kxy, mx, my), layer, a)
        assert out.k_xy ** 2 <= out.k_xx * out.k_yy * (1 + 1e-12)
        assert out.k_xx >= 0 and out.k_yy >= 0


def test_deep_kernel_zero_mean_equivalence():
    for a in (-0.5, 0.0, 0.3):
        net_sigma = np.sqrt(2.0 / (1 + a * a))
        for L in (1, 2, 8):
            for theta in np.linspace(0, np.pi, 7):
                x = np.array([1.0, 0.0])
                y = np.array([np.cos(theta), np.sin(theta)])
                net = constant_hyper(0.0, net_sigma, L, 2, a,
                                     final_layer_linear=False)
                norm = deep_kernel(x, y, net) / np.sqrt(
                    deep_kernel(x, x, net) * deep_kernel(y, y, net))
                assert abs(norm - arccos_reference(theta, a, L)) < 1e-10


def test_deep_kernel_diagonal_and_linear():
    rng = np.random.default_rng(1)
    x = rng.normal(size=4)
    net = NetworkHyper(0.2, 4, (LayerHyper(-0.5, 1.2), LayerHyper(0.3, 0.9)), True)
    kxx = deep_kernel(x, x, net)
    assert kxx >= 0.0
    # single linear layer reduces to the linear kernel of the raw inputs
    lin = NetworkHyper(0.0, 4, (LayerHyper(-0.5, 1.2),), True)
    y = rng.normal(size=4)
    want = (1.2 ** 2 / 4) * (x @ y) + (0.5 ** 2) * x.mean() * y.mean()
    assert abs(deep_kernel(x, y, lin) - want) < 1e-14


def test_deep_kernel_reparameterisation_scaling():
    # fixed mu/sigma ratio, all sigmas scaled by c => kernel scales by c^(2L)
    rng = np.random.default_rng(8)
    x, y = rng.normal(size=(2, 3))
    layers = (LayerHyper(-0.7, 1.4), LayerHyper(0.5, 1.1), LayerHyper(-0.3, 0.9))
    net = NetworkHyper(0.1, 3, layers, True)
    c = 1.37
    scaled = NetworkHyper(0.1, 3, tuple(LayerHyper(l.mu * c, l.sigma * c)
                                        for l in layers), True)
    k0 = deep_kernel(x, y, net)
    k1 = deep_kernel(x, y, scaled)
    assert np.isclose(k1, c ** 6 * k0, rtol=1e-12)


def test_arccos_reference():
    assert abs(arccos_reference(np.pi / 2, 0.0, 1) - 1 / np.pi) < 1e-15
    for a in (-0.5, 0.0, 0.7):
        for L in (1, 3, 10):
            assert arccos_reference(0.0, a, L) == 1.0
    assert arccos_reference(np.pi / 2, 0.0, 64) >= 0.99


def test_kernel_matrix_properties():
    rng = np.random.default_rng(12)
    X = rng.normal(size=(6, 3))
    net = NetworkHyper(0.0, 3, (LayerHyper(-0.6, 1.3), LayerHyper(0.2, 1.0),
                                LayerHyper(0.0, 1.0)), True)
    K = kernel_matrix(X, X, net)
    assert np.array_equal(K, K.T)
    assert np.linalg.eigvalsh(K).min() >= -1e-8
    # single row
    k11 = kernel_matrix(X[:1], X[:1], net)
    assert k11.shape == (1, 1)
    assert abs(k11[0, 0] - deep_kernel(X[0], X[0], net)) < 1e-15
    # entrywise agreement with the scalar path
    Y = rng.normal(size=(4, 3))
    Kxy = kernel_matrix(X, Y, net)
    for i in range(6):
        for j in range(4):
            assert abs(Kxy[i, j] - deep_kernel(X[i], Y[j], net)) < 1e-13


def test_kernel_matrix_normalisation_identity():
    # two unit rows at angle pi/2 under a zero-mean net
    X = np.array([[1.0, 0.0], [0.0, 1.0]])
    for a, L in [(0.0, 3), (-0.5, 5)]:
        net = constant_hyper(0.0, np.sqrt(2 / (1 + a * a)), L, 2, a,
                             final_layer_linear=False)
        K = kernel_matrix(X, X, net)
        got = K[0, 1] / np.sqrt(K[0, 0] * K[1, 1])
        assert abs(got - arccos_reference(np.pi / 2, a, L)) < 1e-12


def test_single_layer_bias_relu_diagonal():
    got = single_layer_kernel_with_bias([1.0, 0.0], [1.0, 0.0],
                                        np.zeros(3), np.ones(3), 0.0)
    assert abs(got - 1.0) < 1e-14


def test_single_layer_bias_orthogonal_zero_mean():
    # augmented vectors (1,0,1) and (-1,1,1) are orthogonal
    got = single_layer_kernel_with_bias([1.0, 0.0], [-1.0, 1.0],
                                        np.zeros(3), np.ones(3), 0.0)
    s1 = np.sqrt(2.0)
    s2 = np.sqrt(3.0)
    want = s1 * s2 / (2 * np.pi)
    assert abs(got - want) < 1e-13


def test_single_layer_bias_generic_oracle():
    got = single_layer_kernel_with_bias([0.8, -0.4], [-0.2, 1.1],
                                        [0.3, -0.6, 0.5], [1.2, 0.8, 0.5], 0.1)
    assert abs(got - BIAS_GENERIC) < 1e-12
    # weight-space Monte-Carlo cross-check
    rng = np.random.default_rng(77)
    est, se = weightspace_kernel_mc([0.8, -0.4, 1.0], [-0.2, 1.1, 1.0],
                                    [0.3, -0.6, 0.5], [1.2, 0.8, 0.5], 0.1,
                                    10 ** 6, rng)
    assert abs(got - est) < 4 * se


def test_single_layer_bias_degenerate():
    with pytest.raises(DegenerateInputError):
        single_layer_kernel_with_bias([1.0, 0.0], [0.0, 1.0],
                                      np.zeros(3), np.zeros(3), 0.0)


def test_hyper_validation():
    with pytest.raises(ValueError):
        LayerHyper(0.0, 0.0)
    with pytest.raises(ValueError):
        NetworkHyper(1.0, 2, (LayerHyper(0.0, 1.0),), True)
    with pytest.raises(ValueError):
        NetworkHyper(0.0, 0, (LayerHyper(0.0, 1.0),), True)
    with pytest.raises(ValueError):
        lrelu_kernel(P(1, 1, 0, 0, 0), 1.5)
