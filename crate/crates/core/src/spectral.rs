//! Graph Laplacian, its μ-orthonormal eigenbasis, and the heat semigroup.
//!
//! The Laplacian is `Δu(x) = (1/μ(x)) Σ_{y∼x} w_xy (u(y) − u(x))`. It is
//! self-adjoint for `⟨u, v⟩_μ = Σ u v μ` and is diagonalized through the
//! symmetric matrix `M^{1/2} (−Δ) M^{−1/2}`, `M = diag(μ)`.

use std::fmt::Write as _;

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{check_len, Error, Result};
use crate::graph::WeightedGraph;

/// Default vertex cap for the dense eigensolver.
pub const DEFAULT_EIGEN_CAP: usize = 5000;

/// Heat-kernel entries below this value are reported as numerically suspect.
pub const NEGATIVE_ENTRY_TOLERANCE: f64 = 1e-12;

/// Matrix of `−Δ` in the vertex index basis.
pub fn mu_laplacian(g: &WeightedGraph) -> Result<DMatrix<f64>> {
    g.require_connected()?;
    let n = g.len();
    let mut l = DMatrix::zeros(n, n);
    for x in 0..n {
        let mu = g.mu(x);
        for &(y, w) in g.neighbors(x) {
            l[(x, y)] = -w / mu;
        }
        l[(x, x)] = g.normalized_degree(x);
    }
    Ok(l)
}

/// The symmetric form `M^{1/2} (−Δ) M^{−1/2}`.
fn symmetric_laplacian(g: &WeightedGraph) -> DMatrix<f64> {
    let n = g.len();
    let mut s = DMatrix::zeros(n, n);
    for x in 0..n {
        for &(y, w) in g.neighbors(x) {
            s[(x, y)] = -w / (g.mu(x) * g.mu(y)).sqrt();
        }
        s[(x, x)] = g.normalized_degree(x);
    }
    s
}

/// Symmetric eigendecomposition sorted ascending, with the sign convention
/// "first non-negligible entry positive" applied to every eigenvector.
pub(crate) fn sorted_symmetric_eigen(a: DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = a.nrows();
    let eig = SymmetricEigen::try_new(a, f64::EPSILON, 10_000 * n.max(1))
        .ok_or_else(|| Error::EigenFailure("symmetric QR iteration did not converge".into()))?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));

    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (k, &i) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(i);
        let scale = col.amax();
        let sign = col
            .iter()
            .find(|v| v.abs() > 1e-10 * scale)
            .map_or(1.0, |v| v.signum());
        vectors.set_column(k, &(col * sign));
    }
    Ok((values, vectors))
}

/// μ-orthonormal eigenpairs `(λ_k, φ_k)` of `−Δ`.
#[derive(Debug, Clone)]
pub struct Spectrum {
    graph: WeightedGraph,
    eigenvalues: Vec<f64>,
    // column k holds φ_k
    eigenvectors: DMatrix<f64>,
}

/// Eigendecomposition with the default size cap.
pub fn eigendecompose(g: &WeightedGraph) -> Result<Spectrum> {
    eigendecompose_with_cap(g, DEFAULT_EIGEN_CAP)
}

pub fn eigendecompose_with_cap(g: &WeightedGraph, cap: usize) -> Result<Spectrum> {
    g.require_connected()?;
    let n = g.len();
    if n > cap {
        return Err(Error::TooLarge { n, cap });
    }
    let sym = symmetric_laplacian(g);
    let scale = sym.amax().max(1.0);
    let (mut values, mut vectors) = sorted_symmetric_eigen(sym)?;

    let zero_tol = 1e-9 * scale;
    for value in &mut values {
        if value.abs() <= zero_tol {
            *value = 0.0;
        } else if *value < 0.0 {
            return Err(Error::EigenFailure(format!(
                "negative Laplacian eigenvalue {value:e}"
            )));
        }
    }
    for x in 0..n {
        let inv_sqrt_mu = 1.0 / g.mu(x).sqrt();
        vectors.row_mut(x).scale_mut(inv_sqrt_mu);
    }
    Ok(Spectrum {
        graph: g.clone(),
        eigenvalues: values,
        eigenvectors: vectors,
    })
}

impl Spectrum {
    pub fn graph(&self) -> &WeightedGraph {
        &self.graph
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `φ_k` as a column vector.
    pub fn eigenvector(&self, k: usize) -> Vec<f64> {
        self.eigenvectors.column(k).iter().copied().collect()
    }

    /// Matrix whose column `k` is `φ_k`.
    pub fn eigenvector_matrix(&self) -> &DMatrix<f64> {
        &self.eigenvectors
    }

    pub fn phi(&self, k: usize, x: usize) -> f64 {
        self.eigenvectors[(x, k)]
    }

    /// Coefficients `⟨u, φ_k⟩_μ`.
    pub fn coefficients(&self, u: &[f64]) -> Result<Vec<f64>> {
        check_len(self.len(), u.len())?;
        let mu = self.graph.measure();
        Ok((0..self.len())
            .map(|k| {
                self.eigenvectors
                    .column(k)
                    .iter()
                    .zip(u)
                    .zip(mu)
                    .map(|((p, v), m)| p * v * m)
                    .sum()
            })
            .collect())
    }

    /// `Σ_k g(λ_k) ⟨u, φ_k⟩_μ φ_k`.
    pub fn apply_function(&self, u: &[f64], g: impl Fn(f64) -> f64) -> Result<Vec<f64>> {
        let coeff = self.coefficients(u)?;
        let mut out = vec![0.0; self.len()];
        for (k, c) in coeff.iter().enumerate() {
            let factor = g(self.eigenvalues[k]) * c;
            for (x, o) in out.iter_mut().enumerate() {
                *o += factor * self.eigenvectors[(x, k)];
            }
        }
        Ok(out)
    }

    /// Spectral power `(−Δ)^s u = Σ_k λ_k^s ⟨u, φ_k⟩_μ φ_k`.
    pub fn power_apply(&self, s: f64, u: &[f64]) -> Result<Vec<f64>> {
        self.apply_function(u, |lambda| if lambda > 0.0 { lambda.powf(s) } else { 0.0 })
    }

    /// `Σ_k g(λ_k) φ_k(x) φ_k(y)` as a symmetric matrix, upper triangle mirrored.
    pub(crate) fn symmetric_sum(&self, g: impl Fn(f64) -> f64) -> DMatrix<f64> {
        let n = self.len();
        let weights: Vec<f64> = self.eigenvalues.iter().map(|&l| g(l)).collect();
        let mut out = DMatrix::zeros(n, n);
        for x in 0..n {
            for y in x..n {
                let value: f64 = (0..n)
                    .map(|k| weights[k] * self.eigenvectors[(x, k)] * self.eigenvectors[(y, k)])
                    .sum();
                out[(x, y)] = value;
                out[(y, x)] = value;
            }
        }
        out
    }

    /// `max |L − Σ_k λ_k φ_k φ_kᵀ M|`, the reconstruction error.
    pub fn reconstruction_defect(&self) -> Result<f64> {
        let l = mu_laplacian(&self.graph)?;
        let n = self.len();
        let mut sum = self.symmetric_sum(|l| l);
        for y in 0..n {
            sum.column_mut(y).scale_mut(self.graph.mu(y));
        }
        Ok((l - sum).amax())
    }

    /// CSV rows `k,lambda_k,phi_k(v_0),…,phi_k(v_{n-1})`.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for k in 0..self.len() {
            let _ = write!(out, "{},{}", k, self.eigenvalues[k]);
            for x in 0..self.len() {
                let _ = write!(out, ",{}", self.eigenvectors[(x, k)]);
            }
            out.push('\n');
        }
        out
    }
}

/// `p(t, x, y)` for all vertex pairs at one time.
#[derive(Debug, Clone)]
pub struct HeatMatrix {
    pub t: f64,
    /// Symmetric entries with round-off negatives clamped to zero.
    pub entries: DMatrix<f64>,
    /// Smallest entry before clamping.
    pub min_raw_entry: f64,
    /// Number of entries below `−NEGATIVE_ENTRY_TOLERANCE`.
    pub negative_entries: usize,
}

impl HeatMatrix {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.entries[(x, y)]
    }
}

/// Heat kernel `p(t, x, y) = Σ_k e^{−λ_k t} φ_k(x) φ_k(y)`.
pub fn heat_kernel(sp: &Spectrum, t: f64) -> Result<HeatMatrix> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    let mut entries = sp.symmetric_sum(|l| (-l * t).exp());
    let min_raw_entry = entries.min();
    let mut negative_entries = 0;
    for value in entries.iter_mut() {
        if *value < 0.0 {
            if *value < -NEGATIVE_ENTRY_TOLERANCE {
                negative_entries += 1;
            }
            *value = 0.0;
        }
    }
    if negative_entries > 0 {
        log::warn!(
            "heat kernel at t = {t} has {negative_entries} entries below -{NEGATIVE_ENTRY_TOLERANCE:e} (min {min_raw_entry:e})"
        );
    }
    Ok(HeatMatrix {
        t,
        entries,
        min_raw_entry,
        negative_entries,
    })
}

/// `e^{tΔ} u` through the eigenbasis.
pub fn semigroup_apply(sp: &Spectrum, t: f64, u: &[f64]) -> Result<Vec<f64>> {
    if !(t >= 0.0) {
        return Err(Error::NegativeTime(t));
    }
    sp.apply_function(u, |l| (-l * t).exp())
}

/// `e^{tΔ} u(x) = Σ_y p(t, x, y) u(y) μ(y)` from an assembled heat matrix.
pub fn heat_contract(heat: &HeatMatrix, g: &WeightedGraph, u: &[f64]) -> Result<Vec<f64>> {
    check_len(g.len(), u.len())?;
    let weighted = DVector::from_iterator(u.len(), u.iter().zip(g.measure()).map(|(a, m)| a * m));
    Ok((&heat.entries * weighted).iter().copied().collect())
}

/// `max_{t, x} |Σ_y p(t, x, y) μ(y) − 1|`.
pub fn mass_check(sp: &Spectrum, times: &[f64]) -> Result<f64> {
    let mu = sp.graph().measure();
    let mut worst = 0.0_f64;
    for &t in times {
        let heat = heat_kernel(sp, t)?;
        for x in 0..sp.len() {
            let mass: f64 = (0..sp.len()).map(|y| heat.get(x, y) * mu[y]).sum();
            worst = worst.max((mass - 1.0).abs());
        }
    }
    Ok(worst)
}

/// `n` points log-spaced between `lo` and `hi` inclusive.
pub fn logspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{build_graph, generate_standard, GeneratorParams, GraphKind};

    fn k2() -> WeightedGraph {
        generate_standard(GraphKind::Path, &GeneratorParams::with_n(2)).unwrap()
    }

    #[test]
    fn c4_spectrum() {
        for (mu, expected) in [(1.0, [0.0, 2.0, 2.0, 4.0]), (2.0, [0.0, 1.0, 1.0, 2.0])] {
            let params = GeneratorParams {
                mu: Some(mu),
                ..GeneratorParams::with_n(4)
            };
            let sp = eigendecompose(&generate_standard(GraphKind::Cycle, &params).unwrap()).unwrap();
            for (l, e) in sp.eigenvalues().iter().zip(expected) {
                assert!((l - e).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn laplacian_matrices() {
        let l = mu_laplacian(&k2()).unwrap();
        assert_eq!(l, DMatrix::from_row_slice(2, 2, &[1.0, -1.0, -1.0, 1.0]));

        let p3 = generate_standard(GraphKind::Path, &GeneratorParams::with_n(3)).unwrap();
        let l = mu_laplacian(&p3).unwrap();
        let u = DVector::from_vec(vec![0.3, -1.2, 2.5]);
        let lu = &l * &u;
        assert!((lu[1] - (2.0 * u[1] - u[0] - u[2])).abs() < 1e-15);
        let ones = &l * DVector::from_element(3, 1.0);
        assert!(ones.amax() == 0.0);
    }

    #[test]
    fn disconnected_is_rejected() {
        let g = build_graph([("a", 1.0), ("b", 1.0)], Vec::<(&str, &str, f64)>::new()).unwrap();
        assert!(matches!(mu_laplacian(&g), Err(Error::Disconnected)));
        assert!(matches!(eigendecompose(&g), Err(Error::Disconnected)));
    }

    #[test]
    fn size_cap() {
        let g = generate_standard(GraphKind::Path, &GeneratorParams::with_n(5)).unwrap();
        assert!(matches!(
            eigendecompose_with_cap(&g, 4),
            Err(Error::TooLarge { n: 5, cap: 4 })
        ));
    }

    #[test]
    fn k2_spectrum() {
        let sp = eigendecompose(&k2()).unwrap();
        assert_eq!(sp.eigenvalues()[0], 0.0);
        assert!((sp.eigenvalues()[1] - 2.0).abs() < 1e-14);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((sp.phi(0, 0) - h).abs() < 1e-14 && (sp.phi(0, 1) - h).abs() < 1e-14);
        assert!((sp.phi(1, 0) - h).abs() < 1e-14 && (sp.phi(1, 1) + h).abs() < 1e-14);
    }

    #[test]
    fn nonuniform_measure_orthonormality() {
        let g = build_graph(
            [("a", 0.5), ("b", 2.0), ("c", 1.5)],
            [("a", "b", 1.0), ("b", "c", 3.0), ("a", "c", 0.25)],
        )
        .unwrap();
        let sp = eigendecompose(&g).unwrap();
        for j in 0..3 {
            for k in 0..3 {
                let ip: f64 = (0..3).map(|x| sp.phi(j, x) * sp.phi(k, x) * g.mu(x)).sum();
                let expected = if j == k { 1.0 } else { 0.0 };
                assert!((ip - expected).abs() < 1e-13);
            }
        }
        // constant ground state 1/sqrt(Σμ)
        let c = 1.0 / g.total_measure().sqrt();
        assert!((0..3).all(|x| (sp.phi(0, x) - c).abs() < 1e-13));
        assert!(sp.reconstruction_defect().unwrap() < 1e-12);
    }

    #[test]
    fn k2_heat_kernel_closed_form() {
        let sp = eigendecompose(&k2()).unwrap();
        let p0 = heat_kernel(&sp, 0.0).unwrap();
        assert!((p0.get(0, 0) - 1.0).abs() < 1e-15 && p0.get(0, 1).abs() < 1e-15);
        for &t in &[0.1, 0.7, 3.0] {
            let p = heat_kernel(&sp, t).unwrap();
            let e = (-2.0 * t).exp();
            assert!((p.get(0, 0) - (1.0 + e) / 2.0).abs() < 1e-14);
            assert!((p.get(0, 1) - (1.0 - e) / 2.0).abs() < 1e-14);
            assert_eq!(p.get(0, 1), p.get(1, 0));
        }
        let far = heat_kernel(&sp, 200.0).unwrap();
        assert!(far.entries.iter().all(|&v| (v - 0.5).abs() < 1e-14));
        assert!(matches!(heat_kernel(&sp, -1.0), Err(Error::NegativeTime(_))));
    }

    #[test]
    fn semigroup_examples() {
        let sp = eigendecompose(&k2()).unwrap();
        let t = 2f64.ln() / 2.0;
        let v = semigroup_apply(&sp, t, &[1.0, 0.0]).unwrap();
        assert!((v[0] - 0.75).abs() < 1e-14 && (v[1] - 0.25).abs() < 1e-14);
        let c = semigroup_apply(&sp, 3.0, &[2.5, 2.5]).unwrap();
        assert!(c.iter().all(|v| (v - 2.5).abs() < 1e-14));
        let same = semigroup_apply(&sp, 0.0, &[0.3, -0.8]).unwrap();
        assert!((same[0] - 0.3).abs() < 1e-15 && (same[1] + 0.8).abs() < 1e-15);
        assert!(matches!(
            semigroup_apply(&sp, 1.0, &[1.0]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn mass_conservation_examples() {
        let sp = eigendecompose(&k2()).unwrap();
        assert!(mass_check(&sp, &[0.0, 0.5, 5.0]).unwrap() <= 1e-12);
        let p3 = generate_standard(GraphKind::Path, &GeneratorParams::with_n(3)).unwrap();
        assert!(mass_check(&eigendecompose(&p3).unwrap(), &[100.0]).unwrap() <= 1e-12);
        let c4 = generate_standard(GraphKind::Cycle, &GeneratorParams::with_n(4)).unwrap();
        let times = logspace(1e-3, 1e3, 20);
        assert!(mass_check(&eigendecompose(&c4).unwrap(), &times).unwrap() <= 1e-10);
    }

    #[test]
    fn csv_layout() {
        let sp = eigendecompose(&k2()).unwrap();
        let csv = sp.to_csv();
        let lines: Vec<_> = csv.lines().collect();
        assert_eq!(lines.len(), 2);
        assert!(lines[0].starts_with("0,0,"));
        assert_eq!(lines[1].split(',').count(), 4);
    }
}
