"""State containers and the canonical flat ordering used for integration and I/O.

Flat layout for ``N`` modes (length ``4N + 7``)::

    a1[0:N] | p1[0:N] | a2[0:N] | p2[0:N] | omega1 omega2 omega3 | q1 q2 q3 q4
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidStateError
from .model import UNIT_TOL, check_unit_quaternion


def _vec(values, length, name):
    arr = np.array(values, dtype=float).reshape(-1)
    if arr.shape != (length,):
        raise InvalidStateError(f"{name} must have length {length}, got {arr.shape[0]}")
    if not np.all(np.isfinite(arr)):
        raise InvalidStateError(f"{name} has non-finite entries")
    return arr


@dataclass(frozen=True)
class RigidState:
    omega: np.ndarray
    q: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "omega", _vec(self.omega, 3, "omega"))
        object.__setattr__(self, "q", check_unit_quaternion(np.array(self.q, dtype=float)))


@dataclass(frozen=True)
class ModalBeamState:
    """Modal coefficients of the two transverse deflections and their rates."""

    a1: np.ndarray
    p1: np.ndarray
    a2: np.ndarray
    p2: np.ndarray

    def __post_init__(self):
        n = np.size(self.a1)
        for name in ("a1", "p1", "a2", "p2"):
            object.__setattr__(self, name, _vec(getattr(self, name), n, name))

    @property
    def n_modes(self) -> int:
        return self.a1.shape[0]

    @classmethod
    def zeros(cls, n: int) -> "ModalBeamState":
        z = np.zeros(n)
        return cls(z, z, z, z)

    def swapped(self) -> "ModalBeamState":
        """Exchange the roles of the two deflection directions."""
        return ModalBeamState(self.a2, self.p2, self.a1, self.p1)

    def scaled(self, factor: float) -> "ModalBeamState":
        return ModalBeamState(factor * self.a1, factor * self.p1,
                              factor * self.a2, factor * self.p2)


@dataclass(frozen=True)
class FullState:
    beam: ModalBeamState
    rigid: RigidState

    @property
    def n_modes(self) -> int:
        return self.beam.n_modes

    def to_flat(self) -> np.ndarray:
        b, r = self.beam, self.rigid
        return np.concatenate([b.a1, b.p1, b.a2, b.p2, r.omega, r.q])

    @classmethod
    def from_flat(cls, x, n_modes: int, q_tol: float = UNIT_TOL) -> "FullState":
        x = np.asarray(x, dtype=float)
        n = n_modes
        if x.shape != (4 * n + 7,):
            raise InvalidStateError(f"expected flat state of length {4 * n + 7}, got {x.shape}")
        q = check_unit_quaternion(x[4 * n + 3:], tol=q_tol)
        beam = ModalBeamState(x[:n], x[n:2 * n], x[2 * n:3 * n], x[3 * n:4 * n])
        rigid = RigidState.__new__(RigidState)
        object.__setattr__(rigid, "omega", _vec(x[4 * n:4 * n + 3], 3, "omega"))
        object.__setattr__(rigid, "q", q.copy())
        return cls(beam, rigid)


def split_flat(x, n):
    """Views ``(a1, p1, a2, p2, omega, q)`` into a flat state array."""
    return (x[:n], x[n:2 * n], x[2 * n:3 * n], x[3 * n:4 * n],
            x[4 * n:4 * n + 3], x[4 * n + 3:4 * n + 7])
