"""spindrift: finite-volume dynamics of magnetization and spin accumulation.

The package integrates two coupled vector fields on a structured cuboid
grid: the unit-length magnetization m, driven by precession and damping
in an effective field, and the spin accumulation s, which obeys an
anisotropic diffusion-relaxation equation fed by an applied current. Two
model variants are available: the transient system, where s carries its
own (fast) time scale set by a small parameter epsilon, and the reduced
system, where s is slaved to the instantaneous magnetization through a
stationary solve.

Entry points:

- build grids and fields: Grid, vector_field, constant_field
- single-physics pieces: solve_stationary_spin, step_spin_transient,
  step_llg, effective_field, apply_demag
- full runs: SimulationConfig + run, or parse_config on a TOML file
- harnesses: epsilon_sweep, lipschitz_probe, uniqueness_probe
- artifacts: write_outputs, read_final_state
- self-checks: run_validation (also `spindrift validate` on the CLI)
"""

from ._version import __version__
from .config import ConfigError, configs_equal, emit_config, parse_config, parse_config_text
from .demag import DemagKernel, apply_demag, apply_demag_direct, build_kernel
from .drivers import (
    ProbeReport,
    SimulationConfig,
    SweepError,
    SweepReport,
    Trajectory,
    build_rotated_perturbations,
    epsilon_sweep,
    initial_magnetization,
    initial_spin,
    lipschitz_probe,
    prolong_nearest,
    run,
    run_sdllg,
    run_sllg,
    trajectory_distance,
    uniqueness_probe,
)
from .grid import (
    Grid,
    VectorField,
    constant_field,
    divergence,
    gradient,
    inner_l2,
    laplacian,
    norm_h1,
    norm_l2,
    norm_spacetime,
    vector_field,
    zero_field,
)
from .llg import (
    EnergyBreakdown,
    EnergyLedger,
    LlgParams,
    effective_field,
    energy,
    energy_inequality_slack,
    llg_rhs,
    stability_max_dt,
    step_llg,
)
from .output import (
    RunManifest,
    read_final_state,
    read_vtk,
    write_energy_csv,
    write_final_state,
    write_outputs,
    write_vtk,
)
from .spin import (
    SolverConvergenceError,
    SpinParams,
    SpinSystem,
    assemble_spin_system,
    ellipticity_report,
    solve_stationary_spin,
    spin_current,
    step_spin_transient,
)
from .validate import run_validation

__all__ = [
    "__version__",
    "ConfigError",
    "configs_equal",
    "emit_config",
    "parse_config",
    "parse_config_text",
    "DemagKernel",
    "apply_demag",
    "apply_demag_direct",
    "build_kernel",
    "ProbeReport",
    "SimulationConfig",
    "SweepError",
    "SweepReport",
    "Trajectory",
    "build_rotated_perturbations",
    "epsilon_sweep",
    "initial_magnetization",
    "initial_spin",
    "lipschitz_probe",
    "prolong_nearest",
    "run",
    "run_sdllg",
    "run_sllg",
    "trajectory_distance",
    "uniqueness_probe",
    "Grid",
    "VectorField",
    "constant_field",
    "divergence",
    "gradient",
    "inner_l2",
    "laplacian",
    "norm_h1",
    "norm_l2",
    "norm_spacetime",
    "vector_field",
    "zero_field",
    "EnergyBreakdown",
    "EnergyLedger",
    "LlgParams",
    "effective_field",
    "energy",
    "energy_inequality_slack",
    "llg_rhs",
    "stability_max_dt",
    "step_llg",
    "RunManifest",
    "read_final_state",
    "read_vtk",
    "write_energy_csv",
    "write_final_state",
    "write_outputs",
    "write_vtk",
    "SolverConvergenceError",
    "SpinParams",
    "SpinSystem",
    "assemble_spin_system",
    "ellipticity_report",
    "solve_stationary_spin",
    "spin_current",
    "step_spin_transient",
    "run_validation",
]
