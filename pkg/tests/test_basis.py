import math

import numpy as np
import pytest
from scipy import integrate, optimize

from flexsat import (ModalBeamState, PhysicalParams, RangeError, beam_energy, build_basis,
                     energy_bound_constant, fd_frequencies, gamma_functionals, project, reconstruct,
                     solve_characteristic_roots, y_functional)
from flexsat.basis import characteristic_residual, scaled_residual
from flexsat.errors import ConfigurationError

# brentq on the raw residual over [1.5, 2.5], xtol 1e-15 (independent oracle)
BETA1_ELL = 1.8751040687119611


def test_first_root_against_brentq():
    oracle = optimize.brentq(characteristic_residual, 1.5, 2.5, xtol=1e-15, rtol=4 * np.finfo(float).eps)
    assert oracle == pytest.approx(BETA1_ELL, abs=1e-15)
    root = solve_characteristic_roots(1)[0]
    assert abs(root - 1.8751040687) < 1e-9
    assert abs(root - oracle) < 1e-14
    assert abs(characteristic_residual(root)) < 1e-12


def test_roots_ascending_and_asymptotic():
    roots = solve_characteristic_roots(20)
    assert np.all(np.diff(roots) > 0)
    assert abs(roots[3] - 7 * math.pi / 2) < 0.01
    k = np.arange(1, 21)
    assert np.all(np.abs(roots[4:] - (2 * k[4:] - 1) * math.pi / 2) < 1e-3)
    assert np.all(np.abs(scaled_residual(roots)) < 1e-10)
    assert np.all(np.abs(characteristic_residual(roots[:4])) < 1e-10)


def test_roots_even_index_lies_below_half_period():
    # the second root sits below 3 pi / 2, so brackets centred on (k - 1/2) pi would miss it
    assert solve_characteristic_roots(2)[1] < 1.5 * math.pi


def test_roots_require_positive_count():
    with pytest.raises(ValueError):
        solve_characteristic_roots(0)


@pytest.mark.parametrize("n_modes", [1, 4, 8, 12])
def test_boundary_conditions(params, n_modes):
    basis = build_basis(params, n_modes)
    beta = basis.beta
    for d in (0, 1):
        assert np.abs(basis.evaluate(0.0, d)).max() < 1e-10
    assert np.all(np.abs(basis.evaluate(params.ell, 2)[0]) < 1e-6 * beta ** 2)
    assert np.all(np.abs(basis.evaluate(params.ell, 3)[0]) < 1e-6 * beta ** 3)


def test_mode_shape_derivatives_consistent(basis, params):
    # central differences of phi against the analytic derivative
    z = np.linspace(0.1, params.ell - 0.1, 7)
    h = 1e-5
    for d in range(3):
        fd = (basis.evaluate(z + h, d) - basis.evaluate(z - h, d)) / (2 * h)
        np.testing.assert_allclose(fd, basis.evaluate(z, d + 1), rtol=1e-7, atol=1e-6)


def test_gram_matrices_default(basis):
    d = basis.defects()
    assert d["gram0_offdiag"] < 1e-8
    assert d["gram0"] < 1e-8
    assert d["gram2_diag"] < 1e-6
    assert d["gram2_offdiag"] < 1e-6
    np.testing.assert_allclose(np.diag(basis.gram2), basis.beta ** 4, rtol=1e-6)


def test_gram0_converges_under_refinement(params):
    coarse = build_basis(params, 12, 201 * 2 + 1)
    fine = build_basis(params, 12, 801 * 2 + 1)
    assert fine.defects()["gram0"] < coarse.defects()["gram0"]


def test_gram_against_adaptive_quadrature(basis, params):
    # independent of the Simpson grid
    for j, k in [(0, 0), (0, 1), (2, 3)]:
        g1 = integrate.quad(lambda z: basis.evaluate(z, 1)[0, j] * basis.evaluate(z, 1)[0, k],
                            0, params.ell, epsabs=1e-13, limit=200)[0]
        assert basis.gram1[j, k] == pytest.approx(g1, rel=1e-9)
    b1 = integrate.quad(lambda z: (z + params.ell0) * basis.evaluate(z)[0, 0], 0, params.ell, epsabs=1e-13)[0]
    assert basis.b[0] == pytest.approx(b1, rel=1e-10)


def test_coarse_quadrature_rejected_for_many_modes(params):
    with pytest.raises(ConfigurationError, match="gram0"):
        build_basis(params, 12, 201)


@pytest.mark.parametrize("n_modes,quad", [(0, 1001), (13, 1001), (4, 1000), (4, 199)])
def test_build_basis_argument_checks(params, n_modes, quad):
    with pytest.raises(ConfigurationError):
        build_basis(params, n_modes, quad)


def test_project_examples(basis, params):
    e2 = project(lambda z: basis.evaluate(z)[:, 1], basis)
    np.testing.assert_allclose(e2, [0, 1, 0, 0], atol=1e-8)
    np.testing.assert_array_equal(project(lambda z: np.zeros_like(z), basis), 0.0)
    np.testing.assert_allclose(project(lambda z: z + params.ell0, basis), basis.b, rtol=1e-14)


def test_reconstruct_round_trip(basis, rng):
    c = rng.normal(size=basis.n_modes)
    np.testing.assert_allclose(project(reconstruct(c, basis, basis.nodes), basis), c, atol=1e-8)
    np.testing.assert_array_equal(reconstruct(np.zeros(4), basis, [0.0, 1.0]), 0.0)
    grid = np.linspace(0, 2, 9)
    np.testing.assert_allclose(reconstruct([0, 0, 3.0, 0], basis, grid), 3.0 * basis.evaluate(grid)[:, 2])


def test_reconstruct_range_error(basis):
    with pytest.raises(RangeError):
        reconstruct(np.zeros(4), basis, [0.0, 2.5])


def _beam(rng, n, scale=1.0):
    return ModalBeamState(*(scale * rng.normal(size=n) for _ in range(4)))


def test_gammas_vanish_without_velocity(basis, rng):
    b = _beam(rng, 4)
    g = gamma_functionals(ModalBeamState(b.a1, np.zeros(4), b.a2, np.zeros(4)), basis)
    assert (g.gamma1, g.gamma2, g.gamma3) == (0.0, 0.0, 0.0)


def test_gamma_swap_symmetry(basis, rng):
    b = _beam(rng, 4)
    g = gamma_functionals(b, basis)
    s = gamma_functionals(b.swapped(), basis)
    assert s.gamma1 == pytest.approx(-g.gamma2, rel=1e-14)
    assert s.gamma2 == pytest.approx(-g.gamma1, rel=1e-14)
    assert s.gamma3 == pytest.approx(-g.gamma3, rel=1e-14)


def test_gammas_match_field_integrals(basis, params, rng):
    b = _beam(rng, 4)
    z = basis.nodes
    w1, v1, w2, v2 = (reconstruct(c, basis, z) for c in (b.a1, b.p1, b.a2, b.p2))
    g1 = integrate.simpson((z + params.ell0) * v2, x=z)
    g2 = -integrate.simpson((z + params.ell0) * v1, x=z)
    g3 = integrate.simpson(w2 * v1 - w1 * v2, x=z)
    g = gamma_functionals(b, basis)
    np.testing.assert_allclose([g.gamma1, g.gamma2, g.gamma3], [g1, g2, g3], rtol=1e-9)


def test_gamma1_converges_to_continuum(params):
    # v2 = c constant: gamma1 -> c (ell^2 / 2 + ell0 ell) = 3 c
    c = 0.7
    errors = []
    for n in (1, 2, 4, 8, 12):
        basis = build_basis(params, n, 2001)
        p2 = project(lambda z: np.full_like(z, c), basis)
        g = gamma_functionals(ModalBeamState(np.zeros(n), np.zeros(n), np.zeros(n), p2), basis)
        errors.append(abs(g.gamma1 - 3 * c))
    assert all(e2 < e1 for e1, e2 in zip(errors, errors[1:]))
    # constants are outside the clamped span; the L2 projection converges like 1/N
    assert errors[-1] < errors[0] / 15


def test_beam_energy(basis, params, rng):
    z = np.zeros(4)
    assert beam_energy(ModalBeamState.zeros(4), basis, params) == 0.0
    A = 0.03
    for k in range(4):
        a = z.copy()
        a[k] = A
        v = beam_energy(ModalBeamState(a, z, z, z), basis, params)
        assert v == pytest.approx(0.5 * params.stiffness_ratio * basis.beta[k] ** 4 * A ** 2, rel=1e-6)
    b = _beam(rng, 4)
    v = beam_energy(b, basis, params)
    assert v > 0
    assert beam_energy(b.scaled(2.0), basis, params) == pytest.approx(4 * v, rel=1e-14)


def test_y_functional(basis, rng):
    assert y_functional(ModalBeamState.zeros(4), basis) == 0.0
    b = _beam(rng, 4)
    assert y_functional(b.scaled(3.5), basis) == pytest.approx(3.5 * y_functional(b, basis), rel=1e-14)


def test_energy_bounds_y(basis, params, rng):
    alpha = energy_bound_constant(basis, params)
    assert alpha > 0
    worst = 0.0
    for _ in range(2000):
        b = _beam(rng, 4)
        ratio = alpha * y_functional(b, basis) ** 2 / beam_energy(b, basis, params)
        worst = max(worst, ratio)
    assert worst <= 1.0


def test_energy_bound_is_attained_in_worst_direction(basis, params):
    # the per-block constant is sharp: 4 equal blocks aligned with the minimizing direction
    from scipy import linalg
    lam, vec = linalg.eigh(0.5 * params.stiffness_ratio * basis.gram2, basis.h2_gram)
    a = vec[:, 0] / math.sqrt(vec[:, 0] @ basis.h2_gram @ vec[:, 0])
    p = np.zeros(4)
    p[0] = 1.0
    b = ModalBeamState(a, p, a, p)
    alpha = energy_bound_constant(basis, params)
    ratio = alpha * y_functional(b, basis) ** 2 / beam_energy(b, basis, params)
    assert ratio == pytest.approx(min(0.5, lam[0]) * 4 / (2 * lam[0] + 1.0), rel=1e-10)


def test_fd_frequencies(params, basis):
    fd = fd_frequencies(params, 400, 4)
    assert np.all(fd > 0) and np.all(np.diff(fd) > 0)
    modal = basis.natural_frequencies(params)
    assert abs(fd[0] - modal[0]) / modal[0] < 5e-3
    assert fd[1] / fd[0] == pytest.approx((basis.beta[1] / basis.beta[0]) ** 2, rel=0.01)
    assert (basis.beta[1] / basis.beta[0]) ** 2 == pytest.approx(6.267, abs=1e-3)


def test_fd_converges_under_refinement(params, basis):
    modal = basis.natural_frequencies(params)[0]
    errs = [abs(fd_frequencies(params, g, 1)[0] - modal) for g in (50, 100, 200)]
    assert errs[0] > errs[1] > errs[2]
    assert 3.0 < errs[0] / errs[1] < 5.0


def test_fd_requires_grid():
    with pytest.raises(ValueError):
        fd_frequencies(PhysicalParams.default(), 20)
