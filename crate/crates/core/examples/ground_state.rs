//! Positive and negative ground states with a coercive potential.

use fracgraph::calculus::PotentialH;
use fracgraph::graph::{generate_standard, GeneratorParams, GraphKind};
use fracgraph::kernel::ws_spectral;
use fracgraph::schrodinger::{
    check_hypotheses, ground_state_solve, paper_example, verify_solution, Branch, SolverConfig,
};
use fracgraph::spectral::eigendecompose;

pub fn run_example() -> fracgraph::Result<()> {
    let g = generate_standard(GraphKind::LatticeBallZ, &GeneratorParams::with_radius(6))?;
    let k = ws_spectral(&eigendecompose(&g)?, 0.5)?;
    let h = PotentialH::ramp(&g, 1.0, 1.0, "0")?;
    let nl = paper_example();
    let l1 = fracgraph::calculus::lambda1(&k, &h)?.value;
    let hyp = check_hypotheses(&nl, l1, 2.0, 400);
    println!("λ₁ = {l1}, hypotheses hold: {}", hyp.all_hold());

    for branch in Branch::BOTH {
        let sol = ground_state_solve(&k, &h, &nl, branch, &SolverConfig::default())?;
        let report = verify_solution(&k, &h, &nl, &sol)?;
        println!(
            "{branch}: energy {:.10}, residual {:e}, iterations {}, verified {}",
            sol.energy,
            sol.residual_inf,
            sol.iterations,
            report.passed()
        );
        println!("  u = {:?}", sol.u);
        assert!(sol.converged && report.passed());
    }
    Ok(())
}

fn main() -> fracgraph::Result<()> {
    run_example()
}
