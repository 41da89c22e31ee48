//! Fractional gradient and divergence, Sobolev and `𝓗_s` norms, and the
//! first eigenvalue `λ₁` of the `𝓗_s` Rayleigh quotient.
//!
//! All integrals `∫ · dμ` are exact weighted sums.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graph::WeightedGraph;
use crate::kernel::FracKernel;
use crate::spectral::sorted_symmetric_eigen;

/// `∇^s u`: for each vertex `x`, the components
/// `√(W_s(x, y) / (2μ(x))) (u(x) − u(y))` over `y ≠ x` in index order.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    components: Vec<Vec<f64>>,
    squared_length: Vec<f64>,
}

impl VectorField {
    /// Builds a field from raw per-vertex components (`n − 1` each).
    pub fn from_components(components: Vec<Vec<f64>>) -> Self {
        let squared_length = components
            .iter()
            .map(|c| c.iter().map(|v| v * v).sum())
            .collect();
        VectorField {
            components,
            squared_length,
        }
    }

    pub fn components(&self) -> &[Vec<f64>] {
        &self.components
    }

    /// Component of the field at `x` in the direction of vertex `y ≠ x`.
    pub fn component(&self, x: usize, y: usize) -> f64 {
        debug_assert_ne!(x, y);
        self.components[x][slot(x, y)]
    }

    /// `|∇^s u|²(x)`.
    pub fn squared_length(&self) -> &[f64] {
        &self.squared_length
    }

    /// Pointwise `F(x) · G(x)`.
    pub fn dot(&self, other: &VectorField) -> Vec<f64> {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.iter().zip(b).map(|(p, q)| p * q).sum())
            .collect()
    }
}

// Position of y in the component list of x (diagonal slot omitted).
fn slot(x: usize, y: usize) -> usize {
    if y < x {
        y
    } else {
        y - 1
    }
}

/// Positive potential `h` with `h₀ = inf h > 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PotentialH {
    values: Vec<f64>,
    h0: f64,
}

impl PotentialH {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        let h0 = values.iter().copied().fold(f64::INFINITY, f64::min);
        if !(h0 > 0.0) || values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonPositivePotential(h0));
        }
        Ok(PotentialH { values, h0 })
    }

    pub fn constant(n: usize, c: f64) -> Result<Self> {
        Self::new(vec![c; n])
    }

    /// Coercive ramp `h(x) = a + b · d(x, x₀)`.
    pub fn ramp(g: &WeightedGraph, a: f64, b: f64, center: &str) -> Result<Self> {
        let c = g.index_of(center)?;
        let values = g
            .bfs_distances(c)
            .into_iter()
            .map(|d| d.map(|d| a + b * d as f64).ok_or(Error::Disconnected))
            .collect::<Result<Vec<_>>>()?;
        Self::new(values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn h0(&self) -> f64 {
        self.h0
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// `∫ f dμ`.
pub fn integrate(measure: &[f64], f: &[f64]) -> f64 {
    f.iter().zip(measure).map(|(v, m)| v * m).sum()
}

/// `‖u‖_q = (Σ |u|^q μ)^{1/q}`.
pub fn lp_norm(measure: &[f64], u: &[f64], q: f64) -> f64 {
    u.iter()
        .zip(measure)
        .map(|(v, m)| v.abs().powf(q) * m)
        .sum::<f64>()
        .powf(1.0 / q)
}

pub fn sup_norm(u: &[f64]) -> f64 {
    u.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// `u⁺ = max(u, 0)`.
pub fn positive_part(u: &[f64]) -> Vec<f64> {
    u.iter().map(|v| v.max(0.0)).collect()
}

/// `u⁻ = min(u, 0)`, so that `u = u⁺ + u⁻`.
pub fn negative_part(u: &[f64]) -> Vec<f64> {
    u.iter().map(|v| v.min(0.0)).collect()
}

pub fn frac_gradient(k: &FracKernel, u: &[f64]) -> Result<VectorField> {
    let n = k.len();
    check_len(n, u.len())?;
    let components = (0..n)
        .map(|x| {
            let scale = 1.0 / (2.0 * k.measure()[x]);
            (0..n)
                .filter(|&y| y != x)
                .map(|y| (k.get(x, y) * scale).sqrt() * (u[x] - u[y]))
                .collect()
        })
        .collect();
    Ok(VectorField::from_components(components))
}

/// `∇^s u ∇^s v (x) = (1/(2μ(x))) Σ_{y≠x} W_s(x,y) (u(x)−u(y)) (v(x)−v(y))`.
pub fn frac_dot(k: &FracKernel, u: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    let n = k.len();
    check_len(n, u.len())?;
    check_len(n, v.len())?;
    Ok((0..n)
        .map(|x| {
            let sum: f64 = (0..n)
                .filter(|&y| y != x)
                .map(|y| k.get(x, y) * (u[x] - u[y]) * (v[x] - v[y]))
                .sum();
            sum / (2.0 * k.measure()[x])
        })
        .collect())
}

/// `div_s F(x) = −(1/μ(x)) Σ_y μ(y) ∇^s δ_x(y) · F(y)`.
///
/// `∇^s δ_x(y)` is non-zero only in the slot of `x` when `y ≠ x`, and in every
/// slot when `y = x`, which collapses the sum to two terms.
pub fn divergence_s(k: &FracKernel, f: &VectorField) -> Result<Vec<f64>> {
    let n = k.len();
    let mu = k.measure();
    if f.components.len() != n || f.components.iter().any(|c| c.len() + 1 != n) {
        return Err(Error::LayoutMismatch);
    }
    Ok((0..n)
        .map(|x| {
            let own: f64 = (0..n)
                .filter(|&z| z != x)
                .map(|z| (k.get(x, z) / (2.0 * mu[x])).sqrt() * f.component(x, z))
                .sum();
            let incoming: f64 = (0..n)
                .filter(|&y| y != x)
                .map(|y| mu[y] * (k.get(y, x) / (2.0 * mu[y])).sqrt() * f.component(y, x))
                .sum();
            -(mu[x] * own - incoming) / mu[x]
        })
        .collect())
}

/// `|∫ φ (−Δ)^s u dμ − ∫ ∇^s φ ∇^s u dμ|`.
pub fn ibp_residual(k: &FracKernel, u: &[f64], phi: &[f64]) -> Result<f64> {
    check_len(k.len(), phi.len())?;
    let lap = crate::kernel::frac_laplacian_apply(k, u)?;
    let left: f64 = phi
        .iter()
        .zip(&lap)
        .zip(k.measure())
        .map(|((p, l), m)| p * l * m)
        .sum();
    let right = integrate(k.measure(), &frac_dot(k, phi, u)?);
    Ok((left - right).abs())
}

/// `∫ |∇^s u|² dμ`.
pub fn gradient_energy(k: &FracKernel, u: &[f64]) -> Result<f64> {
    Ok(integrate(k.measure(), &frac_dot(k, u, u)?))
}

/// `‖u‖_{s,2} = (∫ (|∇^s u|² + u²) dμ)^{1/2}`.
pub fn sobolev_norm_s2(k: &FracKernel, u: &[f64]) -> Result<f64> {
    let grad = gradient_energy(k, u)?;
    let mass: f64 = u.iter().zip(k.measure()).map(|(v, m)| v * v * m).sum();
    Ok((grad + mass).sqrt())
}

/// `‖u‖_{𝓗_s} = (∫ (|∇^s u|² + h u²) dμ)^{1/2}`.
pub fn hs_norm(k: &FracKernel, h: &PotentialH, u: &[f64]) -> Result<f64> {
    Ok(hs_norm_sq(k, h, u)?.sqrt())
}

pub(crate) fn hs_norm_sq(k: &FracKernel, h: &PotentialH, u: &[f64]) -> Result<f64> {
    check_len(k.len(), h.len())?;
    if !(h.h0 > 0.0) {
        return Err(Error::NonPositivePotential(h.h0));
    }
    let grad = gradient_energy(k, u)?;
    let potential: f64 = u
        .iter()
        .zip(k.measure())
        .zip(&h.values)
        .map(|((v, m), hv)| hv * v * v * m)
        .sum();
    Ok(grad + potential)
}

/// Matrix of the quadratic form `u ↦ ∫ |∇^s u|² dμ`, i.e. the Laplacian of
/// the complete graph weighted by `W_s`.
pub fn stiffness_matrix(k: &FracKernel) -> DMatrix<f64> {
    let n = k.len();
    let mut a = -k.entries().clone();
    for x in 0..n {
        a[(x, x)] = k.row_sums()[x];
    }
    a
}

/// Matrix `A` of the `𝓗_s` form: stiffness plus `diag(h μ)`.
pub fn hs_form_matrix(k: &FracKernel, h: &PotentialH) -> Result<DMatrix<f64>> {
    check_len(k.len(), h.len())?;
    let mut a = stiffness_matrix(k);
    for x in 0..k.len() {
        a[(x, x)] += h.values[x] * k.measure()[x];
    }
    Ok(a)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lambda1 {
    pub value: f64,
    /// μ-normalized minimizer of the Rayleigh quotient.
    pub minimizer: Vec<f64>,
}

/// `λ₁ = inf ‖u‖²_{𝓗_s} / ‖u‖₂²`, the smallest eigenvalue of `A u = λ M u`.
pub fn lambda1(k: &FracKernel, h: &PotentialH) -> Result<Lambda1> {
    if !(h.h0 > 0.0) {
        return Err(Error::NonPositivePotential(h.h0));
    }
    let n = k.len();
    let mut a = hs_form_matrix(k, h)?;
    let inv_sqrt: Vec<f64> = k.measure().iter().map(|m| 1.0 / m.sqrt()).collect();
    for x in 0..n {
        for y in 0..n {
            a[(x, y)] *= inv_sqrt[x] * inv_sqrt[y];
        }
    }
    let (values, vectors) = sorted_symmetric_eigen(a)?;
    let minimizer = (0..n).map(|x| vectors[(x, 0)] * inv_sqrt[x]).collect();
    Ok(Lambda1 {
        value: values[0],
        minimizer,
    })
}

/// Norm and `λ₁` summary, serialized as
/// `{"s": …, "lambda1": …, "h0": …, "norms": {…}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub s: f64,
    pub lambda1: f64,
    pub h0: f64,
    pub norms: BTreeMap<String, f64>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_standard, GeneratorParams, GraphKind};
    use crate::kernel::{frac_laplacian_apply, ws_spectral};
    use crate::spectral::eigendecompose;

    fn kernel(kind: GraphKind, n: usize, s: f64) -> FracKernel {
        let g = generate_standard(kind, &GeneratorParams::with_n(n)).unwrap();
        ws_spectral(&eigendecompose(&g).unwrap(), s).unwrap()
    }

    const R: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn gradient_on_k2() {
        let k = kernel(GraphKind::Path, 2, 0.5);
        let f = frac_gradient(&k, &[1.0, 0.0]).unwrap();
        assert!((f.squared_length()[0] - 2f64.powf(-1.5)).abs() < 1e-15);
        assert!((gradient_energy(&k, &[1.0, 0.0]).unwrap() - R).abs() < 1e-15);
        let zero = frac_gradient(&k, &[3.0, 3.0]).unwrap();
        assert!(zero.squared_length().iter().all(|v| *v == 0.0));
    }

    #[test]
    fn dot_products() {
        let k = kernel(GraphKind::Path, 2, 0.5);
        let d = frac_dot(&k, &[1.0, 0.0], &[0.0, 1.0]).unwrap();
        assert!((d[0] + 2f64.powf(-1.5)).abs() < 1e-15);
        let c = frac_dot(&k, &[1.0, -2.0], &[4.0, 4.0]).unwrap();
        assert!(c.iter().all(|v| *v == 0.0));
        let k = kernel(GraphKind::Cycle, 5, 0.4);
        let (u, v) = ([0.1, -0.3, 0.7, 0.2, -1.0], [1.0, 0.5, -0.5, 0.25, 0.0]);
        assert_eq!(frac_dot(&k, &u, &v).unwrap(), frac_dot(&k, &v, &u).unwrap());
        let f = frac_gradient(&k, &u).unwrap();
        assert_eq!(f.squared_length().len(), 5);
        assert!(matches!(
            frac_dot(&k, &u[..3], &v),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn divergence_of_gradient_is_minus_laplacian() {
        let k = kernel(GraphKind::Cycle, 5, 0.6);
        let u = [0.4, -1.1, 0.9, 2.0, -0.3];
        let div = divergence_s(&k, &frac_gradient(&k, &u).unwrap()).unwrap();
        let lap = frac_laplacian_apply(&k, &u).unwrap();
        for (d, l) in div.iter().zip(&lap) {
            assert!((d + l).abs() < 1e-12);
        }
        let zero = VectorField::from_components(vec![vec![0.0; 4]; 5]);
        assert!(divergence_s(&k, &zero).unwrap().iter().all(|v| *v == 0.0));
        let bad = VectorField::from_components(vec![vec![0.0; 3]; 5]);
        assert!(matches!(divergence_s(&k, &bad), Err(Error::LayoutMismatch)));
    }

    #[test]
    fn ibp_on_k2() {
        let k = kernel(GraphKind::Path, 2, 0.5);
        let u = [1.0, 0.0];
        let lap = frac_laplacian_apply(&k, &u).unwrap();
        assert!((integrate(k.measure(), &[u[0] * lap[0], u[1] * lap[1]]) - R).abs() < 1e-15);
        assert!(ibp_residual(&k, &u, &u).unwrap() < 1e-15);
        assert!(ibp_residual(&k, &u, &[2.0, 2.0]).unwrap() < 1e-15);
    }

    #[test]
    fn norms_on_k2() {
        let k = kernel(GraphKind::Path, 2, 0.5);
        let u = [1.0, 0.0];
        assert_eq!(sobolev_norm_s2(&k, &[0.0, 0.0]).unwrap(), 0.0);
        assert!((sobolev_norm_s2(&k, &u).unwrap().powi(2) - (R + 1.0)).abs() < 1e-14);
        let one = PotentialH::constant(2, 1.0).unwrap();
        assert_eq!(hs_norm(&k, &one, &u).unwrap(), sobolev_norm_s2(&k, &u).unwrap());
        let two = PotentialH::constant(2, 2.0).unwrap();
        assert!((hs_norm(&k, &two, &u).unwrap().powi(2) - (R + 2.0)).abs() < 1e-14);
        assert!(matches!(
            PotentialH::constant(2, 0.0),
            Err(Error::NonPositivePotential(_))
        ));
        assert!(lp_norm(k.measure(), &u, 2.0) <= sobolev_norm_s2(&k, &u).unwrap());
    }

    #[test]
    fn lambda1_on_k2() {
        let k = kernel(GraphKind::Path, 2, 0.5);
        let h = PotentialH::constant(2, 1.0).unwrap();
        let l = lambda1(&k, &h).unwrap();
        assert!((l.value - 1.0).abs() < 1e-14);
        assert!((l.minimizer[0] - l.minimizer[1]).abs() < 1e-14);
        // second eigenvalue 1 + √2
        let a = hs_form_matrix(&k, &h).unwrap();
        let v = nalgebra::DVector::from_vec(vec![1.0, -1.0]);
        let av = &a * &v;
        assert!((av[0] - (1.0 + 2f64.sqrt())).abs() < 1e-14);
    }

    #[test]
    fn ramp_potential() {
        let g = generate_standard(GraphKind::Path, &GeneratorParams::with_n(4)).unwrap();
        let h = PotentialH::ramp(&g, 1.0, 2.0, "1").unwrap();
        assert_eq!(h.values(), [3.0, 1.0, 3.0, 5.0]);
        assert_eq!(h.h0(), 1.0);
    }
}
