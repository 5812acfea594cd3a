"""Semi-discrete right-hand sides in modal coordinates.

Three models share one kernel:

* ``closed``: the closed-loop operator with the gamma feedback substituted;
* ``open-trunc``: carrier Euler equations with an external torque, beam
  equations truncated at second order in (w, omega);
* ``open-full``: as above, keeping the quadratic centrifugal and
  ``omega1 omega2`` terms of the untruncated beam equations.

Two quaternion kinematics variants are available: ``consistent`` (the
quaternion equation with the relative rate built from the exact ``i(q)``)
and ``paper-exact`` (fixed rows in which the orbital rate enters as
``omega1 +- omega0``). The two agree on the unit sphere and differ off it.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import _kernels as K
from .basis import BeamBasis
from .errors import InvalidStateError
from .model import Gains, PhysicalParams, Torque
from .state import FullState, ModalBeamState, RigidState


class Mode(str, enum.Enum):
    CLOSED = "closed"
    OPEN_TRUNCATED = "open-trunc"
    OPEN_FULL = "open-full"

    @property
    def code(self) -> int:
        return {"closed": K.MODE_CLOSED, "open-trunc": K.MODE_OPEN_TRUNCATED,
                "open-full": K.MODE_OPEN_FULL}[self.value]


class Flavor(str, enum.Enum):
    CONSISTENT = "consistent"
    PAPER_EXACT = "paper-exact"

    @property
    def code(self) -> int:
        return K.FLAVOR_CONSISTENT if self is Flavor.CONSISTENT else K.FLAVOR_PAPER_EXACT


class TorquePolicy(str, enum.Enum):
    """Torque fed to the open-loop models during simulation."""

    FEEDBACK = "feedback"
    ZERO = "zero"


def _coerce(enum_cls, value):
    if isinstance(value, enum_cls):
        return value
    return enum_cls(str(value).replace("_", "-") if enum_cls is not TorquePolicy else str(value))


@dataclass(frozen=True)
class RhsMode:
    mode: Mode = Mode.CLOSED
    flavor: Flavor = Flavor.CONSISTENT

    def __post_init__(self):
        object.__setattr__(self, "mode", _coerce(Mode, self.mode))
        object.__setattr__(self, "flavor", _coerce(Flavor, self.flavor))


@dataclass(eq=False)
class SatelliteSystem:
    """Model constants, gains and basis bundled with the arrays the kernels need."""

    params: PhysicalParams
    gains: Gains
    basis: BeamBasis
    mode: Union[Mode, str] = Mode.CLOSED
    flavor: Union[Flavor, str] = Flavor.CONSISTENT
    torque: Union[TorquePolicy, str] = TorquePolicy.FEEDBACK

    def __post_init__(self):
        self.mode = _coerce(Mode, self.mode)
        self.flavor = _coerce(Flavor, self.flavor)
        self.torque = _coerce(TorquePolicy, self.torque)
        p = self.params
        self.n = self.basis.n_modes
        self.stiff = np.ascontiguousarray(p.stiffness_ratio * self.basis.gram2)
        self.b = np.ascontiguousarray(self.basis.b)
        self.inertia = p.inertia
        self.nu = self.gains.as_array()
        self.h2 = np.ascontiguousarray(self.basis.h2_gram)
        self.gram2 = np.ascontiguousarray(self.basis.gram2)
        self.equilibrium = equilibrium_state(p, self.basis).to_flat()

    @property
    def size(self) -> int:
        return 4 * self.n + 7

    @property
    def torque_code(self) -> int:
        return K.TORQUE_FEEDBACK if self.torque is TorquePolicy.FEEDBACK else K.TORQUE_EXTERNAL

    def with_mode(self, mode=None, flavor=None, torque=None) -> "SatelliteSystem":
        return SatelliteSystem(self.params, self.gains, self.basis,
                               mode if mode is not None else self.mode,
                               flavor if flavor is not None else self.flavor,
                               torque if torque is not None else self.torque)

    def flat(self, state) -> np.ndarray:
        x = state.to_flat() if isinstance(state, FullState) else np.asarray(state, dtype=float)
        if x.shape != (self.size,):
            raise InvalidStateError(f"expected flat state of length {self.size}, got {x.shape}")
        if not np.all(np.isfinite(x)):
            raise InvalidStateError("state has non-finite entries")
        return np.ascontiguousarray(x, dtype=float)

    def evaluate(self, state, u_ext=None):
        """Return ``(derivative, applied torque)`` at a state.

        ``u_ext`` overrides the torque policy in the open-loop models.
        """
        x = self.flat(state)
        policy = self.torque_code
        if u_ext is None:
            u_ext = np.zeros(3)
        else:
            u_ext = np.asarray(u_ext, dtype=float).reshape(3)
            if not np.all(np.isfinite(u_ext)):
                raise InvalidStateError("torque has non-finite entries")
            policy = K.TORQUE_EXTERNAL
        out = np.empty_like(x)
        u = np.empty(3)
        K.rhs(x, self.n, self.stiff, self.b, self.inertia, self.params.omega0, self.nu,
              self.mode.code, self.flavor.code, policy, u_ext, u, out)
        return out, u

    def rhs(self, state, u_ext=None) -> np.ndarray:
        return self.evaluate(state, u_ext)[0]

    def feedback(self, state) -> np.ndarray:
        x = self.flat(state)
        u = np.empty(3)
        K.feedback(x, self.n, self.b, self.inertia, self.params.omega0, self.nu, u)
        return u

    def energy(self, state) -> float:
        return float(K.energy(self.flat(state), self.n, self.stiff))

    def energy_rate(self, state, derivative=None) -> float:
        """Analytic rate of the beam energy along the model's own vector field."""
        x = self.flat(state)
        xd = self.rhs(x) if derivative is None else np.asarray(derivative, dtype=float)
        return float(K.energy_rate(x, xd, self.n, self.stiff))

    def gammas(self, state) -> np.ndarray:
        return np.array(K.gammas(self.flat(state), self.n, self.b))

    def decay_residual(self, state) -> float:
        """``Vdot + sum(nu_i gamma_i^2)``; identically zero for the closed loop."""
        x = self.flat(state)
        return float(K.decay_residual(x, self.rhs(x), self.n, self.stiff, self.b, self.nu))

    def y(self, state) -> float:
        return float(K.y_value(self.flat(state), self.n, self.h2))

    def distance(self, state) -> float:
        """X-norm distance to the equilibrium."""
        p = self.params
        return float(K.dist_x(self.flat(state), self.equilibrium, self.n, self.gram2,
                              p.rhoA, p.EI, self.inertia, p.kappa))


def equilibrium_state(params: PhysicalParams, basis: BeamBasis) -> FullState:
    """Undeformed beam, body frame aligned with the orbit frame, spinning at -omega0 about x."""
    return FullState(ModalBeamState.zeros(basis.n_modes),
                     RigidState(np.array([-params.omega0, 0.0, 0.0]), np.array([0.0, 0.0, 0.0, 1.0])))


def closed_loop_rhs(state, params: PhysicalParams, gains: Gains, basis: BeamBasis,
                    flavor="consistent") -> np.ndarray:
    return SatelliteSystem(params, gains, basis, Mode.CLOSED, flavor).rhs(state)


def open_loop_rhs(state, u, params: PhysicalParams, basis: BeamBasis,
                  mode="open-trunc", flavor="consistent") -> np.ndarray:
    """Open-loop derivative under the torque ``u`` (a ``Torque`` or 3-vector)."""
    mode = {"truncated": Mode.OPEN_TRUNCATED, "full": Mode.OPEN_FULL}.get(mode, mode)
    mode = _coerce(Mode, mode)
    if mode is Mode.CLOSED:
        raise ValueError("open_loop_rhs needs an open-loop mode")
    if u is None:
        raise InvalidStateError("open-loop models require a torque input")
    comps = u.components if isinstance(u, Torque) else u
    # gains never enter the open-loop rows
    system = SatelliteSystem(params, Gains(0.0, 0.0, 0.0), basis, mode, flavor, TorquePolicy.ZERO)
    return system.rhs(state, u_ext=comps)
