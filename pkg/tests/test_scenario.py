import numpy as np
import pytest

from flexsat import Flavor, Mode, ScenarioError, default_scenario, load_scenario
from flexsat.scenario import default_scenario_text

BASE = """
params.ell = 2.0
params.ell0 = 0.5
params.EI = 40.0
params.rhoA = 1.2
params.I1 = 8
params.I2 = 10
params.I3 = 6
params.omega0 = 1.13e-3
gains.nu1 = 0.5
gains.nu2 = 0.5
gains.nu3 = 0.5
"""


def test_default_scenario_loads():
    s = default_scenario()
    assert s.n_modes == 4 and s.quad_points == 1001
    assert s.integrator.dt == 1e-3 and s.integrator.t_end == 200.0
    assert s.mode is Mode.CLOSED and s.flavor is Flavor.CONSISTENT
    assert s.params.omega0 == 0.00113 and s.gains.as_array().tolist() == [0.5, 0.5, 0.5]
    system = s.system()
    x0 = s.initial_state(system)
    assert system.y(x0) == pytest.approx(s.delta, rel=1e-14)


def test_minimal_scenario_uses_defaults():
    s = load_scenario(BASE)
    assert s.params.kappa == 1.0 and s.delta == 0.05 and s.output_path is None


def test_negative_gain_names_key():
    text = BASE.replace("gains.nu1 = 0.5", "gains.nu1 = -1")
    with pytest.raises(ScenarioError, match="gains.nu1") as info:
        load_scenario(text)
    assert info.value.key == "gains.nu1"
    assert info.value.line == 10


def test_unknown_key_cites_line():
    text = BASE + "params.dampping = 0.1\n"
    with pytest.raises(ScenarioError, match="line 13") as info:
        load_scenario(text)
    assert "dampping" in str(info.value)


def test_missing_mandatory_key():
    with pytest.raises(ScenarioError, match="params.EI"):
        load_scenario(BASE.replace("params.EI = 40.0", ""))


@pytest.mark.parametrize("line,fragment", [
    ("params.ell = abc", "line 13"),
    ("just text", "line 13"),
    ("params.ell = 3", "duplicate"),
    ("integrator.renormalize_q = maybe", "bool"),
    ("model.mode = sideways", "model.mode"),
])
def test_parse_errors(line, fragment):
    with pytest.raises(ScenarioError, match=fragment):
        load_scenario(BASE + line + "\n")


def test_param_invariant_reports_key():
    with pytest.raises(ScenarioError, match="params.EI") as info:
        load_scenario(BASE.replace("params.EI = 40.0", "params.EI = -40.0"))
    assert info.value.line == 4


def test_comments_and_inline_comments():
    s = load_scenario("# header\n" + BASE + "basis.n_modes = 3   # fewer modes\n\n")
    assert s.n_modes == 3


def test_explicit_state_and_normalization():
    n = 2
    state = [0.001] * (4 * n) + [-1.13e-3, 0, 0] + [0, 0, 0, 2.0]
    text = BASE + "basis.n_modes = 2\ninitial.state = " + ", ".join(map(str, state)) + "\n"
    with pytest.warns(UserWarning, match="rescaled"):
        s = load_scenario(text)
        x = s.initial_state(s.system())
    np.testing.assert_array_equal(x[-4:], [0, 0, 0, 1])


def test_explicit_state_wrong_length():
    with pytest.raises(ScenarioError, match="initial.state"):
        load_scenario(BASE + "initial.state = 1, 2, 3\n")


def test_explicit_state_excludes_delta():
    state = ", ".join(["0"] * 23 + ["1"])
    with pytest.raises(ScenarioError, match="cannot be combined"):
        load_scenario(BASE + f"initial.state = {state}\ninitial.delta = 0.1\n")


def test_custom_template():
    s = load_scenario(BASE + "template.a1 = 0, 1\ntemplate.p2 = 0.5\ninitial.delta = 0.02\n")
    system = s.system()
    x0 = s.initial_state(system)
    assert system.y(x0) == pytest.approx(0.02, rel=1e-14)
    assert x0[0] == 0.0 and x0[1] > 0


def test_template_too_long():
    with pytest.raises(ScenarioError, match="template.a1"):
        load_scenario(BASE + "basis.n_modes = 2\ntemplate.a1 = 1, 2, 3\n").initial_state(None)


def test_basis_failure_is_scenario_error():
    with pytest.raises(ScenarioError, match="gram0"):
        load_scenario(BASE + "basis.n_modes = 12\nbasis.quad_points = 201\n")


def test_default_text_mentions_every_section():
    text = default_scenario_text()
    for section in ("params.", "gains.", "basis.", "integrator.", "model.", "initial."):
        assert section in text
