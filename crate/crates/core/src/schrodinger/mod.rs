//! Signed solutions of `(−Δ)^s u + h u = f(x, u)` on finite graphs.

mod energy;
mod mountain_pass;
mod nehari;
mod nonlinearity;
mod solver;
mod verify;

pub use energy::{energy, energy_gradient, Branch, Functional};
pub use mountain_pass::{
    barrier_radius, endpoint_scale, mountain_pass_solve, sphere_barrier_check, BarrierRadius,
    BarrierReport, DEFAULT_PATH_NODES,
};
pub use nehari::{nehari_project, NehariProjection, DEFAULT_BISECT_TOL};
pub use nonlinearity::{
    builtin_nonlinearity, check_hypotheses, check_hypotheses_at, paper_example,
    power_nonlinearity, HypothesisReport, Nonlinearity, NonlinearitySpec, ScalarFn,
};
pub use solver::{
    ground_state_from, ground_state_solve, initial_guess, Solution, SolverConfig, TraceEntry,
};
pub use verify::{ray_grid, verify_solution, verify_solution_with, VerificationReport, VerifyOptions};
