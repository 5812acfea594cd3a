"""Invariant and identity checks shared by ``flexsat verify`` and the test suite."""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import Callable, List

import numpy as np

from .basis import fd_frequencies
from .control import feedback_torque
from .dynamics import Flavor, Mode, SatelliteSystem, open_loop_rhs
from .simulation import random_state

EQUILIBRIUM_TOL = 1e-14
DECAY_TOL = 1e-12
CONSISTENCY_TOL = 1e-12
TANGENCY_TOL = 1e-14
BETA1_ELL = 1.8751040687
BETA1_TOL = 1e-9
ROOT_TOL = 1e-10
GRAM0_TOL = 1e-8
GRAM2_TOL = 1e-6
FD_GRID = 400
FD_TOL = 5e-3
N_RANDOM = 1000


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def seed_from_env(default: int = 0) -> int:
    raw = os.environ.get("FLEXSAT_SEED")
    return int(raw) if raw not in (None, "") else default


def equilibrium_residual(system: SatelliteSystem) -> float:
    """Largest |rhs| at the equilibrium over every model and kinematics variant."""
    worst = 0.0
    for mode in Mode:
        for flavor in Flavor:
            s = system.with_mode(mode, flavor)
            worst = max(worst, float(np.max(np.abs(s.rhs(s.equilibrium)))))
    return worst


def check_equilibrium(system: SatelliteSystem, **_) -> CheckResult:
    r = equilibrium_residual(system)
    return CheckResult("equilibrium residual", r < EQUILIBRIUM_TOL, f"max |rhs| = {r:.3e} (< {EQUILIBRIUM_TOL:g})")


def decay_identity_error(system: SatelliteSystem, rng, count: int = N_RANDOM) -> float:
    """Worst ``|Vdot + sum nu gamma^2| / max(1, |Vdot|)`` over random states."""
    s = system.with_mode(Mode.CLOSED)
    worst = 0.0
    for _ in range(count):
        x = random_state(s, rng)
        vdot = s.energy_rate(x)
        worst = max(worst, abs(s.decay_residual(x)) / max(1.0, abs(vdot)))
    return worst


def check_decay_identity(system: SatelliteSystem, rng, **_) -> CheckResult:
    e = decay_identity_error(system, rng)
    return CheckResult("decay identity", e < DECAY_TOL,
                       f"{N_RANDOM} states, worst scaled residual {e:.3e} (< {DECAY_TOL:g})")


def control_consistency_error(system: SatelliteSystem, rng, count: int = N_RANDOM) -> float:
    """Worst relative gap between the closed loop and open loop driven by the feedback."""
    worst = 0.0
    for flavor in Flavor:
        s = system.with_mode(Mode.CLOSED, flavor)
        for _ in range(count // len(Flavor)):
            x = random_state(s, rng)
            closed = s.rhs(x)
            u = feedback_torque(x, s.params, s.gains, s.basis)
            opened = open_loop_rhs(x, u, s.params, s.basis, Mode.OPEN_TRUNCATED, flavor)
            worst = max(worst, float(np.max(np.abs(closed - opened)) / np.max(np.abs(closed))))
    return worst


def check_control_consistency(system: SatelliteSystem, rng, **_) -> CheckResult:
    e = control_consistency_error(system, rng)
    return CheckResult("control consistency", e < CONSISTENCY_TOL,
                       f"{N_RANDOM} states, worst relative gap {e:.3e} (< {CONSISTENCY_TOL:g})")


def check_quaternion_tangency(system: SatelliteSystem, rng, **_) -> CheckResult:
    s = system.with_mode(Mode.CLOSED, Flavor.CONSISTENT)
    worst = 0.0
    for _ in range(N_RANDOM):
        x = random_state(s, rng)
        qd = s.rhs(x)[-4:]
        worst = max(worst, abs(float(x[-4:] @ qd)))
    return CheckResult("quaternion tangency", worst < TANGENCY_TOL,
                       f"worst |<q, qdot>| = {worst:.3e} (< {TANGENCY_TOL:g})")


def check_basis(system: SatelliteSystem, **_) -> CheckResult:
    basis = system.basis
    d = basis.defects()
    b1 = float(basis.beta_ell[0])
    raw = abs(1.0 + np.cos(b1) * np.cosh(b1))
    ok = (abs(b1 - BETA1_ELL) <= BETA1_TOL and raw < ROOT_TOL and d["root_residual"] < ROOT_TOL
          and d["gram0_offdiag"] < GRAM0_TOL and d["gram2_diag"] <= GRAM2_TOL
          and d["gram2_offdiag"] <= GRAM2_TOL)
    detail = (f"beta1*ell = {b1:.10f}, residual {raw:.1e}, gram0 off-diag {d['gram0_offdiag']:.1e}, "
              f"gram2 diag {d['gram2_diag']:.1e}, gram2 off-diag {d['gram2_offdiag']:.1e}")
    return CheckResult("modal basis", ok, detail)


def fd_relative_error(system: SatelliteSystem, grid: int = FD_GRID) -> float:
    modal = system.basis.natural_frequencies(system.params)[0]
    fd = fd_frequencies(system.params, grid, 1)[0]
    return abs(fd - modal) / modal


def check_fd_oracle(system: SatelliteSystem, **_) -> CheckResult:
    e = fd_relative_error(system)
    return CheckResult("finite-difference oracle", e < FD_TOL,
                       f"fundamental frequency relative gap {e:.2e} at grid {FD_GRID} (< {FD_TOL:g})")


CHECKS: List[Callable[..., CheckResult]] = [
    check_equilibrium, check_decay_identity, check_control_consistency,
    check_quaternion_tangency, check_basis, check_fd_oracle,
]


def run_checks(system: SatelliteSystem, seed: int = 0) -> List[CheckResult]:
    rng = np.random.default_rng(seed)
    return [check(system, rng=rng) for check in CHECKS]


def free_vibration_error(system: SatelliteSystem, mode_index: int = 0, steps_per_period: int = 128,
                         amplitude: float = 0.01) -> float:
    """Phase-space error after one period of a single undriven beam mode.

    The carrier is held inertial (zero orbital rate, zero rate, zero torque) so
    the excited mode is a harmonic oscillator with frequency
    ``sqrt(EI/rhoA * gram2[k, k])``. The error is measured in
    ``(a, p / omega)`` coordinates, which is first-order in the RK4 phase error.
    """
    from dataclasses import replace

    from .dynamics import TorquePolicy
    from .simulation import IntegratorConfig, integrate

    params = replace(system.params, omega0=0.0)
    s = SatelliteSystem(params, system.gains, system.basis, Mode.OPEN_TRUNCATED,
                        Flavor.CONSISTENT, TorquePolicy.ZERO)
    n, k = s.n, mode_index
    omega = float(np.sqrt(s.stiff[k, k]))
    period = 2.0 * np.pi / omega
    dt = period / steps_per_period
    x0 = np.zeros(s.size)
    x0[k] = amplitude
    x0[-1] = 1.0
    cfg = IntegratorConfig(dt=dt, t_end=steps_per_period * dt, record_every=steps_per_period)
    xf = integrate(x0, cfg, s).final_state
    return float(np.hypot(xf[k] - amplitude, xf[n + k] / omega))


def convergence_ratio(system: SatelliteSystem, mode_index: int = 0, steps_per_period: int = 128) -> float:
    """Error at ``dt`` divided by error at ``dt / 2``; about 16 for RK4."""
    coarse = free_vibration_error(system, mode_index, steps_per_period)
    fine = free_vibration_error(system, mode_index, 2 * steps_per_period)
    return coarse / fine
