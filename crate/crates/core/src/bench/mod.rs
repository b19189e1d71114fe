//! Benchmark harness: problem definitions, sweeps and result files.

mod config;
mod output;
mod problems;
mod run;
mod runner;

pub use config::{parse_config_text, read_config_file, RunConfig, SweepConfig, DESK_MAX_LEVEL, KNOWN_KEYS, L5_MAX_LEVEL};
pub use output::{emit_outputs, read_csv, svg_error_vs_kappa, write_csv, BenchmarkRow, CSV_HEADER};
pub use problems::{
    circle_radius_sq, example1, example1_fitted, example2, example3, multi_interface, smooth_solution, stripe_offset,
    Example, Problem, CIRCLE_CENTER, LINE_OFFSET, MAX_INTERFACES,
};
pub use run::{
    build_levels, build_transfers, cells_for_level, condition_number, default_depth, solve, Discretization, Level,
    SolverKind, KAPPA_TOL, L1_CELLS, MAX_ITERATIONS,
};
pub use runner::{
    element_copies, problem_for, run_all, run_example1, run_example2, run_example3, run_multi_interface, run_one,
    run_sweep,
};
