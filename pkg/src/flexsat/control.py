"""Stabilizing state feedback for the flexible satellite.

Substituting the torque below into the carrier's Euler equations leaves

    omega1' - omega2 omega3 = -nu1 gamma1
    omega2' + omega1 omega3 = -nu2 gamma2
    omega3'                 = -nu3 gamma3

which turns the beam energy rate into ``-sum(nu_i gamma_i^2)``.
"""

from __future__ import annotations

import numpy as np

from . import _kernels as K
from .basis import BeamBasis
from .model import Gains, PhysicalParams, Torque
from .state import FullState


def feedback_torque(state, params: PhysicalParams, gains: Gains, basis: BeamBasis) -> Torque:
    """Control torque (BCS, N m) for a full state.

    The scalar quaternion part is read from the state rather than rebuilt from
    the normalization, so the law stays defined when ``q4 < 0``.
    """
    x = state.to_flat() if isinstance(state, FullState) else np.asarray(state, dtype=float)
    u = np.empty(3)
    K.feedback(np.ascontiguousarray(x), basis.n_modes, np.ascontiguousarray(basis.b),
               params.inertia, params.omega0, gains.as_array(), u)
    return Torque(u, source="control")
