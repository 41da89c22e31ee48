//! Configuration-driven driver behind the `fracgraph` binary.

mod config;
mod execute;

pub use config::{
    apply_overrides, parse_config, CheckOptions, GraphSpec, KernelOptions, PotentialSpec,
    RampSpec, RunConfig, SValues, SolveMethod, SolveOptions,
};
pub use execute::{
    configure_threads, execute, exit_status_for, run, with_outputs, CheckReport, Command,
    ExitStatus, SuiteResult,
};
