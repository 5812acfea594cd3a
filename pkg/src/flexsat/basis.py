"""Clamped-free Euler-Bernoulli modal basis.

Mode shapes are normalized so that ``int_0^ell phi_k^2 = 1``; with that choice
``gram0`` is the identity and Galerkin projection is a plain quadrature of
``field * phi_k``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import linalg

from .errors import ConfigurationError, FlexsatError, RangeError
from .model import PhysicalParams
from .state import ModalBeamState

MAX_MODES = 12
BISECTION_ITERS = 200

ROOT_TOL = 1e-10
GRAM0_TOL = 1e-8
GRAM2_TOL = 1e-6


def characteristic_residual(x):
    """Raw clamped-free residual ``1 + cos(x) cosh(x)``."""
    return 1.0 + np.cos(x) * np.cosh(x)


def scaled_residual(x):
    """``cos(x) + 1/cosh(x)``: same roots as the raw residual, O(1) conditioning."""
    return np.cos(x) + 1.0 / np.cosh(x)


def solve_characteristic_roots(n: int) -> np.ndarray:
    """First ``n`` positive roots of ``1 + cos(x) cosh(x) = 0`` by bisection.

    The k-th root lies in ``((k-1) pi, k pi)``: ``cos x + sech x`` changes sign
    across that interval because ``|cos(k pi)| = 1`` dominates ``sech``.
    """
    if n < 1:
        raise ValueError("need at least one root")
    roots = np.empty(n)
    for k in range(1, n + 1):
        lo, hi = (k - 1) * math.pi, k * math.pi
        flo = scaled_residual(lo)
        if flo * scaled_residual(hi) >= 0:
            raise FlexsatError(f"bracket for root {k} does not straddle a sign change")
        for _ in range(BISECTION_ITERS):
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            fmid = scaled_residual(mid)
            if fmid == 0.0:
                lo = hi = mid
                break
            if (fmid > 0) == (flo > 0):
                lo, flo = mid, fmid
            else:
                hi = mid
        roots[k - 1] = 0.5 * (lo + hi)
    return roots


def simpson_weights(n_points: int, length: float) -> np.ndarray:
    if n_points < 3 or n_points % 2 == 0:
        raise ConfigurationError("Simpson's rule needs an odd node count >= 3")
    h = length / (n_points - 1)
    w = np.full(n_points, 2.0)
    w[1::2] = 4.0
    w[0] = w[-1] = 1.0
    return w * (h / 3.0)


def _shape_terms(beta, sigma, one_minus_sigma, zeta):
    """Unnormalized phi, phi', phi'', phi''' at points ``zeta`` (rows) for all modes (columns).

    The hyperbolic part ``cosh x - sigma sinh x`` is written as
    ``((1-sigma) e^x + (1+sigma) e^-x) / 2`` so nothing large is subtracted.
    """
    x = np.outer(zeta, beta)
    ep = np.exp(x) * one_minus_sigma
    em = np.exp(-x) * (1.0 + sigma)
    hyp_even = 0.5 * (ep + em)   # cosh - sigma sinh
    hyp_odd = 0.5 * (ep - em)    # sinh - sigma cosh
    c, s = np.cos(x), np.sin(x)
    phi = hyp_even - c + sigma * s
    d1 = beta * (hyp_odd + s + sigma * c)
    d2 = beta ** 2 * (hyp_even + c - sigma * s)
    d3 = beta ** 3 * (hyp_odd - s - sigma * c)
    return phi, d1, d2, d3


@dataclass(frozen=True, eq=False)
class BeamBasis:
    """Orthonormal clamped-free modes sampled on a Simpson grid over ``[0, ell]``."""

    ell: float
    ell0: float
    beta_ell: np.ndarray
    beta: np.ndarray
    sigma: np.ndarray
    one_minus_sigma: np.ndarray
    scale: np.ndarray
    nodes: np.ndarray
    weights: np.ndarray
    phi: np.ndarray
    gram0: np.ndarray
    gram1: np.ndarray
    gram2: np.ndarray
    b: np.ndarray

    @property
    def n_modes(self) -> int:
        return self.beta.shape[0]

    @property
    def quad_points(self) -> int:
        return self.nodes.shape[0]

    def evaluate(self, zeta, derivative: int = 0) -> np.ndarray:
        """Mode shapes (or a derivative up to the third) at points ``zeta``.

        Returns an array of shape ``(len(zeta), n_modes)``.
        """
        zeta = np.atleast_1d(np.asarray(zeta, dtype=float))
        terms = _shape_terms(self.beta, self.sigma, self.one_minus_sigma, zeta)
        return terms[derivative] * self.scale

    @property
    def h2_gram(self) -> np.ndarray:
        """Gram matrix of the H^2 norm on the modal span."""
        return self.gram0 + self.gram1 + self.gram2

    def natural_frequencies(self, params: PhysicalParams) -> np.ndarray:
        """Angular natural frequencies ``beta_k^2 sqrt(EI/rhoA)`` in rad/s."""
        return self.beta ** 2 * math.sqrt(params.stiffness_ratio)

    def defects(self) -> dict:
        n = self.n_modes
        off = ~np.eye(n, dtype=bool)
        beta4 = self.beta ** 4
        scale = np.sqrt(np.outer(beta4, beta4))
        return {
            "root_residual": float(np.max(np.abs(scaled_residual(self.beta_ell)))),
            "gram0": float(np.max(np.abs(self.gram0 - np.eye(n)))),
            "gram0_offdiag": float(np.max(np.abs(self.gram0[off]), initial=0.0)),
            "gram2_diag": float(np.max(np.abs(np.diag(self.gram2) / beta4 - 1.0))),
            "gram2_offdiag": float(np.max(np.abs(self.gram2[off] / scale[off]), initial=0.0)),
        }


def build_basis(params: PhysicalParams, n_modes: int = 4, quad_points: int = 1001) -> BeamBasis:
    if not 1 <= n_modes <= MAX_MODES:
        raise ConfigurationError(f"n_modes must be in 1..{MAX_MODES}, got {n_modes}")
    if quad_points < 201 or quad_points % 2 == 0:
        raise ConfigurationError(f"quad_points must be odd and >= 201, got {quad_points}")
    ell = params.ell
    beta_ell = solve_characteristic_roots(n_modes)
    beta = beta_ell / ell
    L = beta_ell
    denom = np.sinh(L) + np.sin(L)
    sigma = (np.cosh(L) + np.cos(L)) / denom
    one_minus_sigma = (np.sin(L) - np.cos(L) - np.exp(-L)) / denom

    nodes = np.linspace(0.0, ell, quad_points)
    weights = simpson_weights(quad_points, ell)
    raw = _shape_terms(beta, sigma, one_minus_sigma, nodes)
    scale = 1.0 / np.sqrt(weights @ raw[0] ** 2)
    phi, d1, d2 = (t * scale for t in raw[:3])

    def gram(f):
        g = f.T @ (weights[:, None] * f)
        return 0.5 * (g + g.T)

    basis = BeamBasis(
        ell=ell, ell0=params.ell0, beta_ell=beta_ell, beta=beta, sigma=sigma,
        one_minus_sigma=one_minus_sigma, scale=scale, nodes=nodes, weights=weights,
        phi=phi, gram0=gram(phi), gram1=gram(d1), gram2=gram(d2),
        b=weights @ ((nodes + params.ell0)[:, None] * phi),
    )
    _check_basis(basis)
    return basis


def _check_basis(basis: BeamBasis) -> None:
    d = basis.defects()
    if d["root_residual"] >= ROOT_TOL:
        raise ConfigurationError(f"characteristic residual {d['root_residual']:.3g} >= {ROOT_TOL:g}")
    if d["gram0"] >= GRAM0_TOL:
        raise ConfigurationError(f"gram0 deviates from identity by {d['gram0']:.3g}")
    if d["gram2_diag"] > GRAM2_TOL:
        raise ConfigurationError(f"gram2 diagonal deviates from beta^4 by {d['gram2_diag']:.3g} (relative)")
    if d["gram2_offdiag"] > GRAM2_TOL:
        raise ConfigurationError(f"gram2 off-diagonal relative size {d['gram2_offdiag']:.3g}")
    if not np.all(np.isfinite(basis.b)) or basis.b[0] == 0.0:
        raise ConfigurationError("coupling vector b must be finite with b[0] != 0")


def project(field, basis: BeamBasis) -> np.ndarray:
    """Galerkin coefficients ``int field * phi_k`` of a callable or sampled field."""
    values = field(basis.nodes) if callable(field) else np.asarray(field, dtype=float)
    values = np.broadcast_to(np.asarray(values, dtype=float), basis.nodes.shape)
    return (basis.weights * values) @ basis.phi


def reconstruct(coeffs, basis: BeamBasis, grid) -> np.ndarray:
    grid = np.atleast_1d(np.asarray(grid, dtype=float))
    if grid.size and (grid.min() < 0.0 or grid.max() > basis.ell):
        raise RangeError(f"grid must lie in [0, {basis.ell}]")
    return basis.evaluate(grid) @ np.asarray(coeffs, dtype=float)


@dataclass(frozen=True)
class GammaValues:
    gamma1: float
    gamma2: float
    gamma3: float

    def as_array(self) -> np.ndarray:
        return np.array([self.gamma1, self.gamma2, self.gamma3])


def gamma_functionals(beam: ModalBeamState, basis: BeamBasis) -> GammaValues:
    b = basis.b
    return GammaValues(
        gamma1=float(b @ beam.p2),
        gamma2=float(-(b @ beam.p1)),
        gamma3=float(beam.a2 @ beam.p1 - beam.a1 @ beam.p2),
    )


def beam_energy(beam: ModalBeamState, basis: BeamBasis, params: PhysicalParams) -> float:
    """Vibrational energy per unit linear density (kinetic + bending)."""
    g2 = basis.gram2
    c = params.stiffness_ratio
    return 0.5 * float(beam.p1 @ beam.p1 + beam.p2 @ beam.p2
                       + c * (beam.a1 @ g2 @ beam.a1 + beam.a2 @ g2 @ beam.a2))


def y_functional(beam: ModalBeamState, basis: BeamBasis) -> float:
    """Sum of H^2 norms of the deflections and L^2 norms of their rates."""
    h = basis.h2_gram
    return (math.sqrt(max(float(beam.a1 @ h @ beam.a1), 0.0))
            + math.sqrt(max(float(beam.a2 @ h @ beam.a2), 0.0))
            + math.sqrt(float(beam.p1 @ beam.p1))
            + math.sqrt(float(beam.p2 @ beam.p2)))


def energy_bound_constant(basis: BeamBasis, params: PhysicalParams) -> float:
    """Largest ``alpha`` (from this construction) with ``alpha * y^2 <= V``.

    ``y^2 <= 4 (|w1|_H2^2 + |w2|_H2^2 + |v1|^2 + |v2|^2)`` by Cauchy-Schwarz,
    and ``V`` dominates the bracket by the smaller of ``1/2`` and the least
    generalized eigenvalue of ``(EI/rhoA) gram2 / 2`` against the H^2 Gram matrix.
    """
    lam = linalg.eigh(0.5 * params.stiffness_ratio * basis.gram2, basis.h2_gram,
                      eigvals_only=True)
    return min(0.5, float(lam[0])) / 4.0


def fd_frequencies(params: PhysicalParams, grid_points: int = 400, n_freq: int = 4) -> np.ndarray:
    """Clamped-free natural frequencies (rad/s) from a finite-difference model.

    Second differences on ``grid_points`` intervals define the curvature; the
    clamped root uses the ghost node ``w[-1] = w[1]`` and the free tip carries
    zero curvature. The stiffness ``D^T W D`` and lumped mass are symmetric, so
    a generalized symmetric eigensolve applies.
    """
    if grid_points < 50:
        raise ValueError("grid_points must be >= 50")
    n = grid_points
    h = params.ell / n
    # unknowns w[1..n]; curvature rows for nodes 0..n-1
    D = np.zeros((n, n))
    D[0, 0] = 2.0
    for i in range(1, n):
        if i - 1 >= 1:
            D[i, i - 2] = 1.0
        D[i, i - 1] = -2.0
        D[i, i] = 1.0
    D /= h * h
    cw = np.full(n, h)
    cw[0] = 0.5 * h
    K = params.EI * D.T @ (cw[:, None] * D)
    m = np.full(n, h * params.rhoA)
    m[-1] *= 0.5
    try:
        lam = linalg.eigh(K, np.diag(m), eigvals_only=True, subset_by_index=[0, n_freq - 1])
    except linalg.LinAlgError as exc:
        raise FlexsatError(f"finite-difference eigensolve failed: {exc}") from exc
    return np.sqrt(lam)
