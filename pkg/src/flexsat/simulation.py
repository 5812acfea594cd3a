"""Fixed-step RK4 integration, diagnostics streaming and stability sweeps."""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence

import numpy as np

from . import _kernels as K
from .basis import GammaValues, energy_bound_constant
from .dynamics import SatelliteSystem
from .errors import ConfigurationError, DivergenceError, InvalidStateError
from .model import Torque
from .state import FullState

log = logging.getLogger(__name__)

# largest |lambda dt| on the imaginary axis inside the RK4 stability region
RK4_IMAG_BOUND = 2.0 * math.sqrt(2.0)


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float = 1e-3
    t_end: float = 200.0
    renormalize_q: bool = True
    record_every: int = 100

    def __post_init__(self):
        if not (math.isfinite(self.dt) and self.dt > 0):
            raise ConfigurationError("integrator.dt must be positive")
        if not (math.isfinite(self.t_end) and self.t_end >= 0):
            raise ConfigurationError("integrator.t_end must be non-negative")
        if int(self.record_every) != self.record_every or self.record_every < 1:
            raise ConfigurationError("integrator.record_every must be an integer >= 1")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_end / self.dt))


@dataclass(frozen=True)
class DiagnosticsRecord:
    t: float
    state: np.ndarray
    V: float
    Vdot: float
    gamma: GammaValues
    decay_residual: float
    y: float
    q_drift: float
    dist_X: float
    u: Torque
    tau_g: Torque


@dataclass
class Summary:
    final_state: np.ndarray
    t_final: float
    steps: int
    max_decay_residual: float
    max_q_drift: float
    max_V_increase: float
    V_min: float
    V_max: float
    V0: float
    sup_y: float
    sup_dist_X: float
    max_abs_u: np.ndarray

    def final(self, n_modes: int, q_tol: float = 1e-6) -> FullState:
        return FullState.from_flat(self.final_state, n_modes, q_tol=q_tol)


def diagnostics(system: SatelliteSystem, x, t: float = 0.0, q_drift: float = 0.0) -> DiagnosticsRecord:
    """Full diagnostics record for a single flat state."""
    x = system.flat(x)
    xd, u = system.evaluate(x)
    g = system.gammas(x)
    vdot = float(K.energy_rate(x, xd, system.n, system.stiff))
    tau = np.empty(3)
    K.gravity(x, system.n, system.inertia, system.params.omega0, tau)
    return DiagnosticsRecord(
        t=t, state=x.copy(), V=system.energy(x), Vdot=vdot,
        gamma=GammaValues(*map(float, g)),
        decay_residual=float(K.decay_residual(x, xd, system.n, system.stiff, system.b, system.nu)),
        y=system.y(x), q_drift=q_drift, dist_X=system.distance(x),
        u=Torque(u, "control"), tau_g=Torque(tau, "gravity"),
    )


def rk4_step(state, system: SatelliteSystem, dt: float, renormalize_q: bool = True):
    """Advance one classical RK4 step.

    Returns ``(next_state, drift)`` where ``drift`` is ``|q| - 1`` before
    renormalization.
    """
    if not dt > 0:
        raise ConfigurationError("dt must be positive")
    x = system.flat(state)
    k1, _ = system.evaluate(x)
    out = np.empty_like(x)
    drift = K.rk4_step(x, k1, dt, system.n, system.stiff, system.b, system.inertia,
                       system.params.omega0, system.nu, system.mode.code, system.flavor.code,
                       system.torque_code, np.zeros(3), renormalize_q, out)
    if not np.all(np.isfinite(out)):
        raise DivergenceError(1, dt)
    return out, float(drift)


def stability_limit(system: SatelliteSystem) -> float:
    """Largest stable RK4 step for the stiffest retained beam mode."""
    omega_max = math.sqrt(float(np.max(np.diag(system.stiff))))
    return RK4_IMAG_BOUND / omega_max


def integrate(initial, config: IntegratorConfig, system: SatelliteSystem,
              sink: Optional[Callable[[DiagnosticsRecord], None]] = None) -> Summary:
    """Integrate from ``initial`` and stream a record every ``record_every`` steps.

    Per-step extrema (decay residual, q drift, energy increase, torque, y and
    the distance to equilibrium) are tracked at every step regardless of the
    record stride.
    """
    x = system.flat(initial).copy()
    limit = stability_limit(system)
    if config.dt >= limit:
        warnings.warn(f"dt = {config.dt:g} s exceeds the RK4 stability bound "
                      f"{limit:.3g} s for the stiffest mode", RuntimeWarning, stacklevel=2)
    p = system.params
    k1 = np.empty_like(x)
    u = np.empty(3)
    zero_u = np.zeros(3)
    K.rhs(x, system.n, system.stiff, system.b, system.inertia, p.omega0, system.nu,
          system.mode.code, system.flavor.code, system.torque_code, zero_u, u, k1)
    acc = np.zeros(K.ACC_SIZE)
    K.initial_accumulate(x, k1, u, system.n, system.stiff, system.b, system.nu, system.h2,
                         system.gram2, system.equilibrium, p.rhoA, p.EI, system.inertia,
                         p.kappa, acc)
    v0 = acc[K.ACC_LAST_V]
    if sink is not None:
        sink(diagnostics(system, x, 0.0, 0.0))

    total = config.n_steps
    stride = int(config.record_every)
    done = 0
    while done < total:
        chunk = min(stride, total - done)
        drift, failed = K.advance(x, k1, u, chunk, config.dt, system.n, system.stiff, system.b,
                                  system.inertia, p.omega0, system.nu, system.mode.code,
                                  system.flavor.code, system.torque_code, zero_u,
                                  config.renormalize_q, system.h2, system.gram2,
                                  system.equilibrium, p.rhoA, p.EI, p.kappa, acc)
        if failed >= 0:
            step = done + failed + 1
            raise DivergenceError(step, step * config.dt)
        done += chunk
        if sink is not None and (done % stride == 0 or done == total):
            sink(diagnostics(system, x, done * config.dt, float(drift)))

    increase = acc[K.ACC_MAX_V_INCREASE]
    return Summary(
        final_state=x, t_final=done * config.dt, steps=done,
        max_decay_residual=float(acc[K.ACC_MAX_RESIDUAL]),
        max_q_drift=float(acc[K.ACC_MAX_DRIFT]),
        max_V_increase=float(increase) if math.isfinite(increase) else 0.0,
        V_min=float(acc[K.ACC_MIN_V]), V_max=float(acc[K.ACC_MAX_V]), V0=float(v0),
        sup_y=float(acc[K.ACC_SUP_Y]), sup_dist_X=float(acc[K.ACC_SUP_DIST]),
        max_abs_u=acc[K.ACC_MAX_U:K.ACC_MAX_U + 3].copy(),
    )


def default_template(system: SatelliteSystem) -> np.ndarray:
    """Beam-only offset from equilibrium with unit y.

    Deflection mostly in the first mode about both axes, with some velocity so
    the feedback is active from the start.
    """
    n = system.n
    t = np.zeros(system.size)
    t[0] = 1.0
    if n > 1:
        t[1] = -0.2
    t[3 * n] = 2.0             # p2 along mode 1
    t[2 * n] = 0.5             # a2 along mode 1
    return t / system.y(t)


def perturbed_state(system: SatelliteSystem, template, delta: float) -> np.ndarray:
    """``equilibrium + delta * template`` with the quaternion renormalized."""
    x = system.equilibrium + delta * np.asarray(template, dtype=float)
    q = x[-4:]
    x[-4:] = q / np.linalg.norm(q)
    return x


def random_state(system: SatelliteSystem, rng: np.random.Generator, scale: float = 0.01) -> np.ndarray:
    """Random state near desk scale: modal coefficients and rate offsets ~ N(0, scale), uniform attitude."""
    n = system.n
    x = system.equilibrium.copy()
    x[:4 * n] = rng.normal(0.0, scale, 4 * n)
    x[4 * n:4 * n + 3] += rng.normal(0.0, scale, 3)
    q = rng.normal(size=4)
    x[4 * n + 3:] = q / np.linalg.norm(q)
    return x


@dataclass(frozen=True)
class SweepConfig:
    deltas: Sequence[float]
    template: np.ndarray
    horizon: float = 50.0

    def __post_init__(self):
        d = [float(v) for v in self.deltas]
        if not d or any(not math.isfinite(v) or v < 0 for v in d):
            raise ConfigurationError("sweep deltas must be finite and non-negative")
        object.__setattr__(self, "deltas", tuple(sorted(d)))


@dataclass(frozen=True)
class SweepRow:
    delta: float
    sup_y: float
    sup_dist_X: float
    V0: float
    y_bound: float
    diverged: Optional[str] = None


def stability_sweep(sweep: SweepConfig, system: SatelliteSystem, dt: float = 1e-3) -> List[SweepRow]:
    """Integrate from ``equilibrium + delta * template`` for each delta (ascending).

    ``y_bound`` is ``sqrt(V(0) / alpha)`` with ``alpha`` the discrete constant
    from :func:`energy_bound_constant`.
    """
    alpha = energy_bound_constant(system.basis, system.params)
    config = IntegratorConfig(dt=dt, t_end=sweep.horizon, record_every=max(1, int(round(sweep.horizon / dt))))
    rows = []
    for delta in sweep.deltas:
        x0 = perturbed_state(system, sweep.template, delta)
        v0 = system.energy(x0)
        bound = math.sqrt(v0 / alpha)
        try:
            s = integrate(x0, config, system)
        except DivergenceError as exc:
            log.warning("sweep row delta=%g diverged: %s", delta, exc)
            rows.append(SweepRow(delta, math.inf, math.inf, v0, bound, diverged=str(exc)))
            continue
        rows.append(SweepRow(delta, s.sup_y, s.sup_dist_X, v0, bound))
    return rows
