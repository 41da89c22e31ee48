//! Mountain-pass critical point, compared with the Nehari ground state.

use fracgraph::calculus::PotentialH;
use fracgraph::graph::{generate_standard, GeneratorParams, GraphKind};
use fracgraph::kernel::ws_spectral;
use fracgraph::schrodinger::{
    ground_state_solve, mountain_pass_solve, power_nonlinearity, sphere_barrier_check, Branch,
    SolverConfig, DEFAULT_PATH_NODES,
};
use fracgraph::spectral::eigendecompose;

pub fn run_example() -> fracgraph::Result<()> {
    let g = generate_standard(GraphKind::Path, &GeneratorParams::with_n(3))?;
    let k = ws_spectral(&eigendecompose(&g)?, 0.5)?;
    let h = PotentialH::constant(3, 1.0)?;
    let nl = power_nonlinearity(3.0)?;
    let cfg = SolverConfig::default();

    let barrier = sphere_barrier_check(&k, &h, &nl, Branch::Positive, 100, 7)?;
    println!(
        "barrier radius {:.3e}: min J on the sphere = {:.3e}",
        barrier.constants.radius, barrier.min_energy
    );

    let gs = ground_state_solve(&k, &h, &nl, Branch::Positive, &cfg)?;
    let mp = mountain_pass_solve(&k, &h, &nl, Branch::Positive, &cfg, DEFAULT_PATH_NODES)?;
    println!("ground state   J = {:.12}  u = {:?}", gs.energy, gs.u);
    println!("mountain pass  J = {:.12}  u = {:?}", mp.energy, mp.u);
    assert!((gs.energy - mp.energy).abs() < 1e-5);
    Ok(())
}

fn main() -> fracgraph::Result<()> {
    run_example()
}
