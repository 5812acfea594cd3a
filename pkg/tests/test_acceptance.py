"""Acceptance criteria, one test each, at the stated tolerances.

Every test records a ``[PASS]`` or ``[FAIL]`` line that is echoed in the
terminal summary under "acceptance criteria".
"""

import math
import subprocess
import sys
import time

import numpy as np
import pytest

from flexsat import IntegratorConfig, Mode, SweepConfig, integrate, stability_sweep
from flexsat import verification as V
from flexsat.basis import energy_bound_constant
from flexsat.scenario import default_scenario_text
from flexsat.simulation import default_template, perturbed_state

from .conftest import ACCEPTANCE_LINES

SEED = 20240601


def record(number, ok, text):
    line = f"[{'PASS' if ok else 'FAIL'}] criterion {number}: {text}"
    ACCEPTANCE_LINES.append(line)
    print(line)
    return ok


@pytest.fixture(scope="module")
def warm(system):
    """Compile the kernels once so timing budgets measure steady-state cost."""
    x0 = perturbed_state(system, default_template(system), 0.05)
    integrate(x0, IntegratorConfig(dt=1e-3, t_end=0.01, record_every=1), system)
    return system


def test_criterion_01_equilibrium(warm):
    r = V.equilibrium_residual(warm)
    assert record(1, r < 1e-14, f"equilibrium max |rhs| over all model variants = {r:.2e} (< 1e-14)")


def test_criterion_02_decay_identity(warm):
    rng = np.random.default_rng(SEED)
    t0 = time.perf_counter()
    e = V.decay_identity_error(warm, rng, 1000)
    elapsed = time.perf_counter() - t0
    ok = e < 1e-12 and elapsed < 1.0
    assert record(2, ok, f"decay identity over 1000 states, worst {e:.2e} (< 1e-12), {elapsed:.2f} s (< 1 s)")


def test_criterion_03_control_consistency(warm):
    rng = np.random.default_rng(SEED + 1)
    t0 = time.perf_counter()
    e = V.control_consistency_error(warm, rng, 1000)
    elapsed = time.perf_counter() - t0
    ok = e < 1e-12 and elapsed < 1.0
    assert record(3, ok, f"closed vs open loop over 1000 states, worst relative {e:.2e} (< 1e-12), "
                         f"{elapsed:.2f} s (< 1 s)")


@pytest.fixture(scope="module")
def default_run(warm):
    x0 = perturbed_state(warm, default_template(warm), 0.05)
    config = IntegratorConfig(dt=1e-3, t_end=200.0, record_every=100)
    t0 = time.perf_counter()
    summary = integrate(x0, config, warm)
    return summary, time.perf_counter() - t0


def test_criterion_04_energy_monotone(default_run):
    s, elapsed = default_run
    res_tol = 1e-10 * max(1.0, s.V0)
    ok = s.max_V_increase <= 1e-8 and s.max_decay_residual < res_tol and elapsed < 5.0
    assert record(4, ok, f"200 s run: max V increase {s.max_V_increase:.2e} (<= 1e-8), max decay residual "
                         f"{s.max_decay_residual:.2e} (< {res_tol:.1e}), {elapsed:.2f} s (< 5 s)")


def test_criterion_05_quaternion_drift(default_run):
    s, _ = default_run
    assert record(5, s.max_q_drift < 1e-10, f"max | |q| - 1 | = {s.max_q_drift:.2e} (< 1e-10)")


def test_criterion_06_modal_basis(warm):
    basis = warm.basis
    b1 = float(basis.beta_ell[0])
    raw = abs(1.0 + math.cos(b1) * math.cosh(b1))
    d = basis.defects()
    ok = (abs(b1 - 1.8751040687) <= 1e-9 and raw < 1e-10 and d["gram0_offdiag"] < 1e-8
          and d["gram2_diag"] <= 1e-6 and d["gram2_offdiag"] <= 1e-6)
    assert record(6, ok, f"beta1*ell = {b1:.10f}, residual {raw:.1e}, gram0 off-diag {d['gram0_offdiag']:.1e}, "
                         f"gram2 defects {d['gram2_diag']:.1e}/{d['gram2_offdiag']:.1e}")


def test_criterion_07_fd_oracle(warm):
    e = V.fd_relative_error(warm, 400)
    assert record(7, e < 5e-3, f"fundamental frequency vs grid-400 oracle, relative gap {e:.2e} (< 5e-3)")


def test_criterion_08_stability_sweep(warm):
    deltas = [1e-3, 5e-4, 2.5e-4]
    alpha = energy_bound_constant(warm.basis, warm.params)
    t0 = time.perf_counter()
    rows = stability_sweep(SweepConfig(deltas, default_template(warm)), warm)
    elapsed = time.perf_counter() - t0
    by_delta = {r.delta: r for r in rows}
    sups = [by_delta[d].sup_y for d in deltas]
    ratios = [sups[0] / sups[1], sups[1] / sups[2]]
    finite = all(r.diverged is None and math.isfinite(r.sup_y) for r in rows)
    bounded = all(r.sup_y <= math.sqrt(r.V0 / alpha) for r in rows)
    ok = finite and bounded and all(1.5 <= q <= 2.5 for q in ratios) and elapsed < 15.0
    assert record(8, ok, f"sweep sup y = {', '.join(f'{v:.3e}' for v in sups)}, ratios "
                         f"{ratios[0]:.3f}/{ratios[1]:.3f} (in [1.5, 2.5]), within sqrt(V0/alpha), "
                         f"{elapsed:.2f} s (< 15 s)")


def test_criterion_09_convergence_order(warm):
    r = V.convergence_ratio(warm)
    assert record(9, 12.0 <= r <= 20.0, f"free-vibration error ratio dt/(dt/2) = {r:.3f} (in [12, 20])")


def test_criterion_10_deterministic_csv(tmp_path):
    scenario = tmp_path / "default.scenario"
    scenario.write_text(default_scenario_text())
    outputs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        proc = subprocess.run([sys.executable, "-m", "flexsat.cli", "simulate", "--scenario", str(scenario),
                               "--out", str(path)], capture_output=True, text=True)
        assert proc.returncode == 0, proc.stderr
        outputs.append(path.read_bytes())
    same = outputs[0] == outputs[1]
    assert record(10, same, f"two simulate runs, {len(outputs[0])} bytes each, byte-identical = {same}")
