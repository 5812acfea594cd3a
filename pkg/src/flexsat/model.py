"""Model constants, orbital-frame geometry and gravity-gradient torque.

Quaternions are stored as ``(q1, q2, q3, q4)`` with ``q4`` the scalar part and
describe the rotation from the orbit frame (OCS) to the body frame (BCS).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import ConfigurationError, InvalidStateError

UNIT_TOL = 1e-9


@dataclass(frozen=True)
class PhysicalParams:
    """All model constants in SI units.

    ``E``, ``I_cs``, ``A_cs`` and ``rho`` are optional constituent values kept
    for bookkeeping; only the products ``EI`` and ``rhoA`` enter the dynamics.
    """

    ell: float
    ell0: float
    EI: float
    rhoA: float
    I1: float
    I2: float
    I3: float
    omega0: float
    kappa: float = 1.0
    E: Optional[float] = None
    I_cs: Optional[float] = None
    A_cs: Optional[float] = None
    rho: Optional[float] = None

    def __post_init__(self):
        for name in ("ell", "ell0", "EI", "rhoA", "I1", "I2", "I3", "omega0", "kappa"):
            if not math.isfinite(getattr(self, name)):
                raise ConfigurationError(f"params.{name} must be finite")
        for name in ("ell", "EI", "rhoA", "kappa", "I1", "I2", "I3"):
            if getattr(self, name) <= 0:
                raise ConfigurationError(f"params.{name} must be positive")
        for name in ("ell0", "omega0"):
            if getattr(self, name) < 0:
                raise ConfigurationError(f"params.{name} must be non-negative")
        I1, I2, I3 = self.I1, self.I2, self.I3
        if I1 + I2 < I3 or I2 + I3 < I1 or I1 + I3 < I2:
            raise ConfigurationError("params.I1..I3 violate the triangle inequality")
        if self.E is not None and self.I_cs is not None:
            if abs(self.E * self.I_cs - self.EI) > 1e-9 * self.EI:
                raise ConfigurationError("params.EI disagrees with E * I_cs")
        if self.rho is not None and self.A_cs is not None:
            if abs(self.rho * self.A_cs - self.rhoA) > 1e-9 * self.rhoA:
                raise ConfigurationError("params.rhoA disagrees with rho * A_cs")

    @property
    def inertia(self) -> np.ndarray:
        return np.array([self.I1, self.I2, self.I3], dtype=float)

    @property
    def stiffness_ratio(self) -> float:
        """EI / rhoA, the coefficient of the fourth-derivative term."""
        return self.EI / self.rhoA

    @classmethod
    def default(cls) -> "PhysicalParams":
        """Desk-scale boom on a low-Earth-orbit carrier."""
        return cls(ell=2.0, ell0=0.5, EI=40.0, rhoA=1.2, I1=8.0, I2=10.0, I3=6.0,
                   omega0=0.00113, kappa=1.0)


@dataclass(frozen=True)
class Gains:
    """Feedback gains multiplying the squared gamma functionals in the decay rate.

    Zero gains are accepted so the uncontrolled (energy-conserving) loop can be
    studied; scenario files require strictly positive values.
    """

    nu1: float
    nu2: float
    nu3: float

    def __post_init__(self):
        for name in ("nu1", "nu2", "nu3"):
            v = getattr(self, name)
            if not math.isfinite(v) or v < 0:
                raise ConfigurationError(f"gains.{name} must be finite and non-negative")

    def as_array(self) -> np.ndarray:
        return np.array([self.nu1, self.nu2, self.nu3], dtype=float)

    @classmethod
    def default(cls) -> "Gains":
        return cls(0.5, 0.5, 0.5)


@dataclass(frozen=True)
class KinematicsAux:
    """Orbit-frame unit vectors expressed in the body frame, plus the relative rate."""

    i: np.ndarray
    j: np.ndarray
    k: np.ndarray
    omega_r: Optional[np.ndarray] = None


@dataclass(frozen=True)
class Torque:
    components: np.ndarray
    source: str = "control"

    def __post_init__(self):
        if self.source not in ("control", "gravity"):
            raise ValueError(f"unknown torque source {self.source!r}")
        comps = np.asarray(self.components, dtype=float).reshape(3)
        if not np.all(np.isfinite(comps)):
            raise InvalidStateError("torque components must be finite")
        object.__setattr__(self, "components", comps)

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.components, dtype=dtype)


def check_unit_quaternion(q, tol: float = UNIT_TOL) -> np.ndarray:
    q = np.asarray(q, dtype=float).reshape(4)
    if not np.all(np.isfinite(q)):
        raise InvalidStateError("quaternion has non-finite entries")
    norm = math.sqrt(float(q @ q))
    if abs(norm - 1.0) > tol:
        raise InvalidStateError(f"quaternion norm {norm!r} differs from 1 by more than {tol:g}")
    return q


def frame_vectors(q) -> KinematicsAux:
    """Return the OCS axes ``i, j, k`` as body-frame coordinates."""
    q1, q2, q3, q4 = check_unit_quaternion(q)
    i = np.array([q1 * q1 - q2 * q2 - q3 * q3 + q4 * q4,
                  2.0 * (q1 * q2 - q3 * q4),
                  2.0 * (q1 * q3 + q2 * q4)])
    j = np.array([2.0 * (q1 * q2 + q3 * q4),
                  q4 * q4 - q1 * q1 + q2 * q2 - q3 * q3,
                  2.0 * (q2 * q3 - q1 * q4)])
    k = np.array([2.0 * (q1 * q3 - q2 * q4),
                  2.0 * (q2 * q3 + q1 * q4),
                  q3 * q3 + q4 * q4 - q1 * q1 - q2 * q2])
    return KinematicsAux(i=i, j=j, k=k)


def relative_rate(omega, q, omega0: float) -> np.ndarray:
    """Angular velocity of the body relative to the orbit frame, in BCS."""
    omega = np.asarray(omega, dtype=float).reshape(3)
    return omega + omega0 * frame_vectors(q).i


def quaternion_rate(q, omega_r) -> np.ndarray:
    """Attitude quaternion derivative for a given relative angular rate."""
    q = check_unit_quaternion(q)
    w = np.asarray(omega_r, dtype=float).reshape(3)
    vec, q4 = q[:3], q[3]
    out = np.empty(4)
    out[:3] = 0.5 * q4 * w + 0.5 * np.cross(vec, w)
    out[3] = -0.5 * float(vec @ w)
    return out


def gravity_torque(q, params: PhysicalParams) -> Torque:
    """Gravity-gradient torque ``3 omega0^2 k x (I k)`` in BCS."""
    k = frame_vectors(q).k
    tau = 3.0 * params.omega0 ** 2 * np.cross(k, params.inertia * k)
    return Torque(tau, source="gravity")


def norm_X(state, params: PhysicalParams, basis) -> float:
    """Energy norm of a full state (beam + angular velocity + quaternion).

    The beam block uses ``rhoA`` on modal velocities and ``EI`` on curvature
    through ``basis.gram2``; ``kappa`` weights the quaternion.
    """
    from .state import FullState

    x = state.to_flat() if isinstance(state, FullState) else np.asarray(state, dtype=float)
    n = basis.n_modes
    if x.shape != (4 * n + 7,):
        raise InvalidStateError(f"expected flat state of length {4 * n + 7}, got {x.shape}")
    a1, p1, a2, p2 = x[:n], x[n:2 * n], x[2 * n:3 * n], x[3 * n:4 * n]
    omega, q = x[4 * n:4 * n + 3], x[4 * n + 3:]
    g2 = basis.gram2
    sq = (params.rhoA * (p1 @ p1 + p2 @ p2)
          + params.EI * (a1 @ g2 @ a1 + a2 @ g2 @ a2)
          + params.inertia @ (omega * omega)
          + params.kappa * (q @ q))
    return math.sqrt(max(float(sq), 0.0))
