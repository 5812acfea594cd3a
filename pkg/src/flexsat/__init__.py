"""Rigid carrier with a flexible cantilever boom on a circular orbit.

Modal (Galerkin) simulation of the coupled attitude/beam dynamics under an
energy-based feedback that makes the boom's vibrational energy nonincreasing.
"""

from .basis import (BeamBasis, GammaValues, beam_energy, build_basis, energy_bound_constant,
                    fd_frequencies, gamma_functionals, project, reconstruct,
                    solve_characteristic_roots, y_functional)
from .control import feedback_torque
from .dynamics import (Flavor, Mode, RhsMode, SatelliteSystem, TorquePolicy, closed_loop_rhs,
                       equilibrium_state, open_loop_rhs)
from .errors import (ConfigurationError, DivergenceError, FlexsatError, InvalidStateError,
                     RangeError, ScenarioError)
from .model import (Gains, KinematicsAux, PhysicalParams, Torque, frame_vectors, gravity_torque,
                    norm_X, quaternion_rate, relative_rate)
from .scenario import Scenario, default_scenario, load_scenario, load_scenario_file
from .simulation import (DiagnosticsRecord, IntegratorConfig, Summary, SweepConfig, SweepRow,
                         default_template, diagnostics, integrate, perturbed_state, random_state,
                         rk4_step, stability_sweep)
from .state import FullState, ModalBeamState, RigidState

__version__ = "0.1.0"
