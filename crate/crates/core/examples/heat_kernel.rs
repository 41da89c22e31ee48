//! Heat kernel of a weighted graph and its mass conservation.

use fracgraph::graph::{build_graph, validate_graph};
use fracgraph::spectral::{eigendecompose, heat_kernel, logspace, mass_check, semigroup_apply};

pub fn run_example() -> fracgraph::Result<()> {
    let g = build_graph(
        [("a", 1.0), ("b", 2.0), ("c", 0.5), ("d", 1.0)],
        [("a", "b", 1.0), ("b", "c", 0.5), ("c", "d", 2.0), ("d", "a", 1.0)],
    )?;
    let report = validate_graph(&g);
    println!("connected: {}, max normalized degree: {}", report.connected, report.max_normalized_degree);

    let sp = eigendecompose(&g)?;
    println!("eigenvalues: {:?}", sp.eigenvalues());

    for t in [0.1, 1.0, 10.0] {
        let p = heat_kernel(&sp, t)?;
        println!("p({t}, a, ·) = {:?}", (0..g.len()).map(|y| p.get(0, y)).collect::<Vec<_>>());
    }
    let spread = semigroup_apply(&sp, 1.0, &[1.0, 0.0, 0.0, 0.0])?;
    println!("e^Δ δ_a = {spread:?}");

    let defect = mass_check(&sp, &logspace(1e-3, 1e3, 20))?;
    println!("max mass defect: {defect:e}");
    assert!(defect <= 1e-10);
    Ok(())
}

fn main() -> fracgraph::Result<()> {
    run_example()
}
