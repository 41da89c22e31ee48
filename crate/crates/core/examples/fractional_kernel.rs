//! W_s by eigenexpansion and by heat-kernel quadrature, with row-sum bounds.

use fracgraph::graph::{generate_standard, GeneratorParams, GraphKind};
use fracgraph::kernel::{
    kernel_diagnostics, ws_quadrature, ws_spectral, QuadratureConfig,
};
use fracgraph::spectral::eigendecompose;

pub fn run_example() -> fracgraph::Result<()> {
    let g = generate_standard(GraphKind::Star, &GeneratorParams::with_n(5))?;
    let sp = eigendecompose(&g)?;
    for s in [0.25, 0.5, 0.75] {
        let spectral = ws_spectral(&sp, s)?;
        let quadrature = ws_quadrature(&sp, s, &QuadratureConfig::default())?;
        let d = kernel_diagnostics(&quadrature, &g, &sp, Some(&spectral));
        println!(
            "s = {s}: W(0,1) = {:.12}, W(1,2) = {:.12}, deviation {:e}, bounds hold: {}",
            spectral.get(0, 1),
            spectral.get(1, 2),
            d.max_rel_deviation.unwrap_or(f64::NAN),
            d.bounds_hold()
        );
        print!("{}", d.bounds_csv());
        assert!(d.max_rel_deviation.unwrap_or(1.0) <= 1e-6);
    }
    Ok(())
}

fn main() -> fracgraph::Result<()> {
    run_example()
}
