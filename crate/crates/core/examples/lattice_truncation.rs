//! W_s(0, 1) on growing balls of ℤ.

use fracgraph::graph::{generate_standard, GeneratorParams, GraphKind};
use fracgraph::kernel::ws_spectral;
use fracgraph::spectral::eigendecompose;

fn w01(radius: usize, s: f64) -> fracgraph::Result<f64> {
    let g = generate_standard(GraphKind::LatticeBallZ, &GeneratorParams::with_radius(radius))?;
    let k = ws_spectral(&eigendecompose(&g)?, s)?;
    Ok(k.get(g.index_of("0")?, g.index_of("1")?))
}

pub fn run_example() -> fracgraph::Result<()> {
    let s = 0.5;
    let mut previous = f64::INFINITY;
    for radius in [5, 10, 20] {
        let (a, b) = (w01(radius, s)?, w01(2 * radius, s)?);
        let gap = (a - b).abs();
        println!("R = {radius:>2}: W(0,1) = {a:.12}, |W_R − W_2R| = {gap:.3e}");
        assert!(gap < previous);
        previous = gap;
    }
    Ok(())
}

fn main() -> fracgraph::Result<()> {
    run_example()
}
