//! Fractional gradient, divergence, integration by parts and norms.

use fracgraph::calculus::{
    divergence_s, frac_gradient, gradient_energy, hs_norm, ibp_residual, lambda1, lp_norm,
    sobolev_norm_s2, sup_norm, PotentialH,
};
use fracgraph::graph::{generate_standard, GeneratorParams, GraphKind};
use fracgraph::kernel::{frac_laplacian_apply, ws_spectral};
use fracgraph::spectral::eigendecompose;

pub fn run_example() -> fracgraph::Result<()> {
    let g = generate_standard(GraphKind::Cycle, &GeneratorParams::with_n(6))?;
    let k = ws_spectral(&eigendecompose(&g)?, 0.5)?;
    let u = [0.3, -1.0, 0.8, 0.1, -0.4, 0.6];
    let phi = [1.0, 0.5, -0.2, 0.0, 0.7, -0.9];

    let lap = frac_laplacian_apply(&k, &u)?;
    let div = divergence_s(&k, &frac_gradient(&k, &u)?)?;
    let defect = lap.iter().zip(&div).map(|(a, b)| (a + b).abs()).fold(0.0, f64::max);
    println!("max |(-Δ)^s u + div ∇^s u| = {defect:e}");
    println!("integration by parts residual = {:e}", ibp_residual(&k, &u, &phi)?);

    let h = PotentialH::ramp(&g, 1.0, 0.5, "0")?;
    let l1 = lambda1(&k, &h)?;
    println!("∫|∇^s u|² = {}", gradient_energy(&k, &u)?);
    println!("‖u‖_(s,2) = {}", sobolev_norm_s2(&k, &u)?);
    println!("‖u‖_H = {}", hs_norm(&k, &h, &u)?);
    println!("λ₁ = {}", l1.value);

    let mu0 = g.min_measure();
    let w = sobolev_norm_s2(&k, &u)?;
    println!("‖u‖_∞² = {} ≤ {}", sup_norm(&u).powi(2), w * w / mu0);
    for q in [3.0, 4.0, 6.0] {
        println!("‖u‖_{q} = {} ≤ {}", lp_norm(g.measure(), &u, q), mu0.powf((2.0 - q) / (2.0 * q)) * w);
    }
    Ok(())
}

fn main() -> fracgraph::Result<()> {
    run_example()
}
