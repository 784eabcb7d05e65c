"""Energy-efficient resource allocation for wireless powered networks.

A power station charges K user devices over the air; the devices then
take TDMA turns sending data to an information receiver.  This package
solves for the charging time, per-user slot lengths, and transmit
powers that maximize system-level bits per joule, with and without a
block throughput floor, plus brute-force oracles, channel generation,
baselines, and sweep experiments around those solvers.
"""

from .best_effort import (
    PwpcnConstant,
    pwpcn_constant,
    select_pwpcn_set,
    solve_best_effort,
    solve_ielcn,
    solve_pwpcn,
)
from .channels import GeometryConfig, generate_scenario
from .experiments import (
    ExperimentConfig,
    MEAN_COLUMNS,
    RAW_COLUMNS,
    SCHEME_NAMES,
    SWEEP_AXES,
    SweepSpec,
    baseline_fixed_proportion,
    default_geometry,
    default_system_params,
    expand_schemes,
    load_config,
    mean_path_for,
    report_convergence,
    report_to_row,
    run_scheme,
    run_sweep,
    throughput_report,
    write_rows,
)
from .model import (
    Allocation,
    ConstraintReport,
    MODE_IELCN,
    MODE_INFEASIBLE,
    MODE_PWPCN,
    MODE_QOS,
    Scenario,
    SolutionReport,
    SystemParams,
    UserChannel,
    check_constraints,
    db_to_linear,
    dbm_to_watts,
    energy_total,
    scenario_from_values,
    scheduled_set,
    system_ee,
    throughput,
    with_initial_energy,
    zero_allocation,
)
from .oracle import GridSpec, grid_search_best_effort, grid_search_qos
from .qos import (
    DualState,
    dinkelbach_T,
    f0_wet_gate,
    kkt_threshold_x,
    multiplier_mu,
    power_from_duals,
    solve_qos,
    solve_qos_detailed,
)
from .throughput_max import (
    ThroughputSolution,
    inner_time_allocation,
    is_feasible,
    max_throughput,
)
from .user_ee import UserEEPoint, max_user_ee, user_ee_at

__all__ = [
    "Allocation",
    "ConstraintReport",
    "DualState",
    "ExperimentConfig",
    "GeometryConfig",
    "GridSpec",
    "MEAN_COLUMNS",
    "MODE_IELCN",
    "MODE_INFEASIBLE",
    "MODE_PWPCN",
    "MODE_QOS",
    "PwpcnConstant",
    "RAW_COLUMNS",
    "SCHEME_NAMES",
    "SWEEP_AXES",
    "Scenario",
    "SolutionReport",
    "SweepSpec",
    "SystemParams",
    "ThroughputSolution",
    "UserChannel",
    "UserEEPoint",
    "baseline_fixed_proportion",
    "check_constraints",
    "db_to_linear",
    "dbm_to_watts",
    "default_geometry",
    "default_system_params",
    "dinkelbach_T",
    "energy_total",
    "expand_schemes",
    "f0_wet_gate",
    "generate_scenario",
    "grid_search_best_effort",
    "grid_search_qos",
    "inner_time_allocation",
    "is_feasible",
    "kkt_threshold_x",
    "load_config",
    "max_throughput",
    "max_user_ee",
    "mean_path_for",
    "multiplier_mu",
    "power_from_duals",
    "pwpcn_constant",
    "report_convergence",
    "report_to_row",
    "run_scheme",
    "run_sweep",
    "scenario_from_values",
    "scheduled_set",
    "select_pwpcn_set",
    "solve_best_effort",
    "solve_ielcn",
    "solve_pwpcn",
    "solve_qos",
    "solve_qos_detailed",
    "system_ee",
    "throughput",
    "throughput_report",
    "user_ee_at",
    "with_initial_energy",
    "write_rows",
    "zero_allocation",
]

__version__ = "0.1.0"
