"""Line-oriented scenario files.

Each non-blank line is ``section.key = value``; ``#`` starts a comment.
Vectors are comma-separated. Unknown keys are rejected.

Initial conditions come either from ``initial.state`` (a full flat state,
``4N + 7`` values) or from a perturbation ``equilibrium + delta * template``
where the template is assembled from ``template.*`` keys (or the built-in
template when none are given) and scaled to unit y.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field, replace
from importlib import resources
from pathlib import Path
from typing import Optional

import numpy as np

from .basis import BeamBasis, build_basis
from .dynamics import Flavor, Mode, SatelliteSystem, TorquePolicy
from .errors import ConfigurationError, ScenarioError
from .model import Gains, PhysicalParams
from .simulation import IntegratorConfig, default_template, perturbed_state

Q_RENORM_WARN = 1e-6
# below this the stored quaternion is kept bit-for-bit (CSV round trips)
Q_KEEP_TOL = 1e-14

_FLOAT, _INT, _BOOL, _STR, _VEC = "float", "int", "bool", "str", "vec"

KEYS = {
    "params.ell": _FLOAT, "params.ell0": _FLOAT, "params.EI": _FLOAT, "params.rhoA": _FLOAT,
    "params.I1": _FLOAT, "params.I2": _FLOAT, "params.I3": _FLOAT, "params.omega0": _FLOAT,
    "params.kappa": _FLOAT, "params.E": _FLOAT, "params.I_cs": _FLOAT, "params.A_cs": _FLOAT,
    "params.rho": _FLOAT,
    "gains.nu1": _FLOAT, "gains.nu2": _FLOAT, "gains.nu3": _FLOAT,
    "basis.n_modes": _INT, "basis.quad_points": _INT,
    "integrator.dt": _FLOAT, "integrator.t_end": _FLOAT, "integrator.renormalize_q": _BOOL,
    "integrator.record_every": _INT,
    "model.mode": _STR, "model.flavor": _STR, "model.torque": _STR,
    "initial.delta": _FLOAT, "initial.state": _VEC,
    "template.a1": _VEC, "template.p1": _VEC, "template.a2": _VEC, "template.p2": _VEC,
    "template.omega": _VEC, "template.q": _VEC,
    "output.path": _STR,
}

MANDATORY = ("params.ell", "params.ell0", "params.EI", "params.rhoA", "params.I1",
             "params.I2", "params.I3", "params.omega0", "gains.nu1", "gains.nu2", "gains.nu3")


@dataclass
class Scenario:
    params: PhysicalParams
    gains: Gains
    n_modes: int = 4
    quad_points: int = 1001
    integrator: IntegratorConfig = field(default_factory=IntegratorConfig)
    mode: Mode = Mode.CLOSED
    flavor: Flavor = Flavor.CONSISTENT
    torque: TorquePolicy = TorquePolicy.FEEDBACK
    delta: float = 0.05
    template: Optional[dict] = None
    explicit_state: Optional[np.ndarray] = None
    output_path: Optional[str] = None

    def build_basis(self) -> BeamBasis:
        return build_basis(self.params, self.n_modes, self.quad_points)

    def system(self, basis: Optional[BeamBasis] = None) -> SatelliteSystem:
        return SatelliteSystem(self.params, self.gains, basis or self.build_basis(),
                               self.mode, self.flavor, self.torque)

    def template_vector(self, system: SatelliteSystem) -> np.ndarray:
        if not self.template:
            return default_template(system)
        n = system.n
        t = np.zeros(system.size)
        offsets = {"a1": 0, "p1": n, "a2": 2 * n, "p2": 3 * n}
        for name, values in self.template.items():
            key = f"template.{name}"
            if name in offsets:
                if len(values) > n:
                    raise ScenarioError(f"has {len(values)} entries but n_modes = {n}", key=key)
                t[offsets[name]:offsets[name] + len(values)] = values
            elif name == "omega":
                if len(values) != 3:
                    raise ScenarioError("needs 3 entries", key=key)
                t[4 * n:4 * n + 3] = values
            else:
                if len(values) != 4:
                    raise ScenarioError("needs 4 entries", key=key)
                t[4 * n + 3:] = values
        y = system.y(t)
        return t / y if y > 0 else t

    def initial_state(self, system: SatelliteSystem) -> np.ndarray:
        if self.explicit_state is not None:
            x = np.array(self.explicit_state, dtype=float)
            if x.shape != (system.size,):
                raise ScenarioError(f"needs {system.size} values for n_modes = {system.n}, "
                                    f"got {x.shape[0]}", key="initial.state")
            x[-4:] = normalize_quaternion(x[-4:], "initial.state")
            return x
        return perturbed_state(system, self.template_vector(system), self.delta)


def normalize_quaternion(q, key: str) -> np.ndarray:
    q = np.asarray(q, dtype=float)
    norm = float(np.linalg.norm(q))
    if not math.isfinite(norm) or norm == 0.0:
        raise ScenarioError("quaternion must be finite and non-zero", key=key)
    if abs(norm - 1.0) <= Q_KEEP_TOL:
        return q
    if abs(norm - 1.0) > Q_RENORM_WARN:
        warnings.warn(f"{key}: quaternion norm {norm:.9g} rescaled to 1", UserWarning, stacklevel=3)
    return q / norm


def _convert(kind, raw, key, lineno):
    try:
        if kind == _FLOAT:
            v = float(raw)
            if not math.isfinite(v):
                raise ValueError
            return v
        if kind == _INT:
            return int(raw)
        if kind == _BOOL:
            low = raw.lower()
            if low in ("true", "yes", "1", "on"):
                return True
            if low in ("false", "no", "0", "off"):
                return False
            raise ValueError
        if kind == _VEC:
            vals = [float(s) for s in raw.split(",") if s.strip()]
            if not vals or not all(math.isfinite(v) for v in vals):
                raise ValueError
            return vals
        if not raw:
            raise ValueError
        return raw
    except ValueError:
        raise ScenarioError(f"cannot read {raw!r} as {kind}", line=lineno, key=key) from None


def parse_scenario(text: str) -> dict:
    """Parse scenario text into ``{key: (value, line)}`` without validation."""
    entries = {}
    for lineno, line in enumerate(text.splitlines(), start=1):
        body = line.split("#", 1)[0].strip()
        if not body:
            continue
        if "=" not in body:
            raise ScenarioError("expected `section.key = value`", line=lineno)
        key, raw = (s.strip() for s in body.split("=", 1))
        if key not in KEYS:
            raise ScenarioError(f"unknown key `{key}`", line=lineno)
        if key in entries:
            raise ScenarioError(f"duplicate key `{key}`", line=lineno)
        entries[key] = (_convert(KEYS[key], raw, key, lineno), lineno)
    return entries


def load_scenario(text: str) -> Scenario:
    entries = parse_scenario(text)
    for key in MANDATORY:
        if key not in entries:
            raise ScenarioError("missing mandatory key", key=key)

    def get(key, default=None):
        return entries[key][0] if key in entries else default

    def section(prefix):
        return {k.split(".", 1)[1]: v for k, (v, _) in entries.items() if k.startswith(prefix + ".")}

    gains = section("gains")
    for name in ("nu1", "nu2", "nu3"):
        if gains[name] <= 0:
            raise ScenarioError("gains must be strictly positive", line=entries[f"gains.{name}"][1],
                                key=f"gains.{name}")
    params = _validated(PhysicalParams, section("params"), entries)
    gains = _validated(Gains, gains, entries)
    integ = _validated(IntegratorConfig, section("integrator"), entries)
    try:
        mode = Mode(get("model.mode", "closed"))
    except ValueError:
        raise ScenarioError("must be closed, open-trunc or open-full", key="model.mode") from None
    try:
        flavor = Flavor(get("model.flavor", "consistent"))
    except ValueError:
        raise ScenarioError("must be consistent or paper-exact", key="model.flavor") from None
    try:
        torque = TorquePolicy(get("model.torque", "feedback"))
    except ValueError:
        raise ScenarioError("must be feedback or zero", key="model.torque") from None

    template = section("template") or None
    state = get("initial.state")
    if state is not None and ("initial.delta" in entries or template):
        raise ScenarioError("cannot be combined with initial.delta or template.*", key="initial.state")
    delta = get("initial.delta", 0.05)
    if delta < 0:
        raise ScenarioError("must be non-negative", key="initial.delta")

    scenario = Scenario(
        params=params, gains=gains,
        n_modes=get("basis.n_modes", 4), quad_points=get("basis.quad_points", 1001),
        integrator=integ, mode=mode, flavor=flavor, torque=torque,
        delta=delta, template=template,
        explicit_state=None if state is None else np.array(state),
        output_path=get("output.path"),
    )
    return validate(scenario)


def validate(scenario: Scenario) -> Scenario:
    """Check cross-field invariants by building the basis and initial state."""
    try:
        system = scenario.system()
    except ConfigurationError as exc:
        raise ScenarioError(str(exc), key="basis") from exc
    scenario.initial_state(system)
    return scenario


def _validated(cls, values, entries):
    try:
        return cls(**values)
    except ConfigurationError as exc:
        msg = str(exc)
        key = msg.split(" ", 1)[0] if "." in msg.split(" ", 1)[0] else None
        line = entries[key][1] if key in entries else None
        raise ScenarioError(msg, line=line, key=key) from None


def load_scenario_file(path) -> Scenario:
    return load_scenario(Path(path).read_text())


def default_scenario_text() -> str:
    return resources.files("flexsat").joinpath("data/default.scenario").read_text()


def default_scenario() -> Scenario:
    return load_scenario(default_scenario_text())
