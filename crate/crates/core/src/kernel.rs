//! The discrete fractional kernel `W_s` and the operator `(−Δ)^s`.
//!
//! `W_s(x, y) = (s / Γ(1−s)) μ(x) μ(y) ∫₀^∞ p(t, x, y) t^{−1−s} dt` for
//! `x ≠ y`, and `(−Δ)^s u(x) = (1/μ(x)) Σ_{y≠x} W_s(x, y) (u(x) − u(y))`.
//!
//! Two independent constructions are provided. [`ws_spectral`] evaluates the
//! integral in closed form through the eigenbasis, giving
//! `W_s(x, y) = −μ(x) μ(y) Σ_k λ_k^s φ_k(x) φ_k(y)`. [`ws_quadrature`]
//! integrates the heat kernel numerically and serves as its oracle.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};
use crate::graph::WeightedGraph;
use crate::quadrature::integrate_vector;
use crate::spectral::{logspace, Spectrum};

/// `Γ(x)` for `x > 0`.
pub fn gamma_fn(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(Error::NonPositiveArgument(x));
    }
    Ok(statrs::function::gamma::gamma(x))
}

pub(crate) fn check_s(s: f64) -> Result<()> {
    if s > 0.0 && s < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidS(s))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelMethod {
    Spectral,
    Quadrature,
}

impl std::fmt::Display for KernelMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            KernelMethod::Spectral => "spectral",
            KernelMethod::Quadrature => "quadrature",
        })
    }
}

/// Symmetric kernel `W_s` with zero diagonal.
#[derive(Debug, Clone)]
pub struct FracKernel {
    s: f64,
    method: KernelMethod,
    ids: Vec<String>,
    measure: Vec<f64>,
    entries: DMatrix<f64>,
    row_sums: Vec<f64>,
}

impl FracKernel {
    fn new(s: f64, method: KernelMethod, g: &WeightedGraph, mut entries: DMatrix<f64>) -> Self {
        let n = g.len();
        for x in 0..n {
            entries[(x, x)] = 0.0;
        }
        let row_sums = (0..n).map(|x| entries.row(x).sum()).collect();
        FracKernel {
            s,
            method,
            ids: g.ids().to_vec(),
            measure: g.measure().to_vec(),
            entries,
            row_sums,
        }
    }

    pub fn s(&self) -> f64 {
        self.s
    }

    pub fn method(&self) -> KernelMethod {
        self.method
    }

    pub fn len(&self) -> usize {
        self.measure.len()
    }

    pub fn is_empty(&self) -> bool {
        self.measure.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn measure(&self) -> &[f64] {
        &self.measure
    }

    /// `W_s(x, y)`, zero on the diagonal.
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.entries[(x, y)]
    }

    pub fn entries(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// `Σ_{y≠x} W_s(x, y)`.
    pub fn row_sums(&self) -> &[f64] {
        &self.row_sums
    }

    /// CSV export: `s,method` header and values, then `x_id,y_id,W_s` rows
    /// for every ordered pair `x ≠ y`.
    pub fn to_csv(&self) -> String {
        let mut out = format!("s,method\n{},{}\nx_id,y_id,W_s\n", self.s, self.method);
        for x in 0..self.len() {
            for y in 0..self.len() {
                if x != y {
                    let _ = writeln!(out, "{},{},{}", self.ids[x], self.ids[y], self.get(x, y));
                }
            }
        }
        out
    }
}

/// `W_s` from the spectral power: the negated off-diagonal of `M · (−Δ)^s`.
pub fn ws_spectral(sp: &Spectrum, s: f64) -> Result<FracKernel> {
    check_s(s)?;
    let g = sp.graph();
    let mut entries = sp.symmetric_sum(|l| if l > 0.0 { l.powf(s) } else { 0.0 });
    let n = g.len();
    for x in 0..n {
        for y in 0..n {
            entries[(x, y)] *= -g.mu(x) * g.mu(y);
        }
    }
    Ok(FracKernel::new(s, KernelMethod::Spectral, g, entries))
}

/// Settings for [`ws_quadrature`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct QuadratureConfig {
    /// Boundary between the short-time and long-time integrals.
    pub split_point: f64,
    /// Initial Gauss–Kronrod panels on `(0, split]`.
    pub nodes_inner: usize,
    /// Initial Gauss–Kronrod panels on `[split, ∞)` after substitution.
    pub nodes_outer: usize,
    pub target_rel_tol: f64,
    /// Refinement cap per integral and row.
    pub max_panels: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            split_point: 1.0,
            nodes_inner: 8,
            nodes_outer: 8,
            target_rel_tol: 1e-10,
            max_panels: 5000,
        }
    }
}

impl QuadratureConfig {
    fn validate(&self) -> Result<()> {
        if self.nodes_inner < 8 || self.nodes_outer < 8 {
            return Err(Error::InvalidQuadrature("node counts must be at least 8".into()));
        }
        if !(self.target_rel_tol > 0.0) {
            return Err(Error::InvalidQuadrature("target_rel_tol must be positive".into()));
        }
        if !(self.split_point > 0.0 && self.split_point.is_finite()) {
            return Err(Error::InvalidQuadrature("split_point must be positive".into()));
        }
        Ok(())
    }
}

/// Short-time heat rows by uniformization:
/// `e^{−tL} = Σ_j Poisson(j; c t) Q^j` with the stochastic matrix
/// `Q = I − L / c`, `c = max_x (1/μ(x)) Σ_y w_xy`. Every term is
/// non-negative, so entries of size `O(t^{d(x,y)})` keep full relative
/// accuracy as `t → 0`.
struct ShortTimeRows {
    rate: f64,
    // ln j!
    log_factorial: Vec<f64>,
}

impl ShortTimeRows {
    fn new(g: &WeightedGraph, t_max: f64) -> Self {
        let rate = (0..g.len())
            .map(|x| g.normalized_degree(x))
            .fold(0.0, f64::max);
        let a = rate * t_max;
        let terms = g.len() + (a + 12.0 * a.sqrt()).ceil() as usize + 40;
        let mut log_factorial = Vec::with_capacity(terms + 1);
        log_factorial.push(0.0);
        for j in 1..=terms {
            log_factorial.push(log_factorial[j - 1] + (j as f64).ln());
        }
        ShortTimeRows {
            rate,
            log_factorial,
        }
    }

    fn terms(&self) -> usize {
        self.log_factorial.len()
    }

    /// `e_xᵀ Q^j` for `j = 0..terms`.
    fn powers(&self, g: &WeightedGraph, x: usize) -> Vec<Vec<f64>> {
        let n = g.len();
        let mut rows = Vec::with_capacity(self.terms());
        let mut row = vec![0.0; n];
        row[x] = 1.0;
        rows.push(row.clone());
        for _ in 1..self.terms() {
            let mut next = vec![0.0; n];
            for (z, &r) in row.iter().enumerate() {
                if r == 0.0 {
                    continue;
                }
                if self.rate > 0.0 {
                    next[z] += r * (1.0 - g.normalized_degree(z) / self.rate);
                    let scale = r / (g.mu(z) * self.rate);
                    for &(y, w) in g.neighbors(z) {
                        next[y] += scale * w;
                    }
                } else {
                    next[z] += r;
                }
            }
            rows.push(next.clone());
            row = next;
        }
        rows
    }

    /// Row `x` of `e^{−tL}`, i.e. `μ(y) p(t, x, y)` over `y`.
    fn row(&self, powers: &[Vec<f64>], t: f64) -> Vec<f64> {
        let n = powers[0].len();
        let a = self.rate * t;
        let mut out = vec![0.0; n];
        for (j, power) in powers.iter().enumerate() {
            let weight = if a == 0.0 {
                if j == 0 {
                    1.0
                } else {
                    0.0
                }
            } else {
                (-a + j as f64 * a.ln() - self.log_factorial[j]).exp()
            };
            if weight == 0.0 {
                continue;
            }
            for (o, p) in out.iter_mut().zip(power) {
                *o += weight * p;
            }
        }
        out
    }
}

/// `W_s` by numerical integration of the heat kernel.
///
/// The integral is split at `split_point`. On `(0, split]` the substitution
/// `t = v^{1/(1−s)}` turns the `t^{−s}` endpoint behaviour of adjacent pairs
/// into a bounded integrand, and heat rows come from uniformization. On
/// `[split, ∞)` the substitution `τ = t^{−s}` maps the tail onto the finite
/// interval `(0, split^{−s}]`, with heat rows from the spectrum.
pub fn ws_quadrature(sp: &Spectrum, s: f64, q: &QuadratureConfig) -> Result<FracKernel> {
    check_s(s)?;
    q.validate()?;
    let g = sp.graph();
    let n = g.len();
    let short = ShortTimeRows::new(g, q.split_point);
    let m = 1.0 / (1.0 - s);
    let v_max = q.split_point.powf(1.0 - s);
    let tau_max = q.split_point.powf(-s);
    let prefactor = s / gamma_fn(1.0 - s)?;
    let phi = sp.eigenvector_matrix();
    let lambda = sp.eigenvalues();

    let rows: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|x| -> Result<Vec<f64>> {
            let powers = short.powers(g, x);
            let inner = integrate_vector(
                |v| {
                    let t = v.powf(m);
                    let weight = m * v.powf(-m * s - 1.0);
                    let mut row = short.row(&powers, t);
                    row[x] = 0.0;
                    row.iter_mut().for_each(|r| *r *= weight);
                    row
                },
                0.0,
                v_max,
                q.nodes_inner,
                q.target_rel_tol,
                q.max_panels,
            )?;
            let outer = integrate_vector(
                |tau| {
                    let t = tau.powf(-1.0 / s);
                    let decay: Vec<f64> = lambda.iter().map(|l| (-l * t).exp()).collect();
                    (0..n)
                        .map(|y| {
                            if y == x {
                                return 0.0;
                            }
                            let p: f64 = (0..n).map(|k| decay[k] * phi[(x, k)] * phi[(y, k)]).sum();
                            g.mu(y) * p / s
                        })
                        .collect()
                },
                0.0,
                tau_max,
                q.nodes_outer,
                q.target_rel_tol,
                q.max_panels,
            )?;
            Ok(inner
                .iter()
                .zip(&outer)
                .map(|(a, b)| prefactor * g.mu(x) * (a + b))
                .collect())
        })
        .collect::<Result<_>>()?;

    let mut entries = DMatrix::zeros(n, n);
    for x in 0..n {
        for y in x + 1..n {
            entries[(x, y)] = rows[x][y];
            entries[(y, x)] = rows[x][y];
        }
    }
    Ok(FracKernel::new(s, KernelMethod::Quadrature, g, entries))
}

/// `(−Δ)^s u(x) = (1/μ(x)) Σ_{y≠x} W_s(x, y) (u(x) − u(y))`.
pub fn frac_laplacian_apply(k: &FracKernel, u: &[f64]) -> Result<Vec<f64>> {
    check_len(k.len(), u.len())?;
    Ok((0..k.len())
        .map(|x| {
            let sum: f64 = (0..k.len())
                .filter(|&y| y != x)
                .map(|y| k.get(x, y) * (u[x] - u[y]))
                .sum();
            sum / k.measure[x]
        })
        .collect())
}

/// The row-sum bound `C_{x,s}` with the maximizer it was evaluated at.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CxsBound {
    pub value: f64,
    /// `max_{t∈[0,1]} |∂_t p(t, x, x)|` on the evaluation grid.
    pub max_time_derivative: f64,
    pub argmax_t: f64,
}

fn time_grid() -> Vec<f64> {
    let mut grid = vec![0.0];
    grid.extend(logspace(1e-10, 1.0, 400));
    grid.extend((1..400).map(|i| i as f64 / 400.0));
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    grid
}

pub(crate) fn cxs_at(sp: &Spectrum, s: f64, x: usize) -> CxsBound {
    let mu = sp.graph().mu(x);
    let lambda = sp.eigenvalues();
    let weights: Vec<f64> = (0..sp.len()).map(|k| sp.phi(k, x).powi(2)).collect();
    let (argmax_t, max_time_derivative) = time_grid()
        .into_iter()
        .map(|t| {
            let d: f64 = lambda
                .iter()
                .zip(&weights)
                .map(|(l, w)| l * (-l * t).exp() * w)
                .sum();
            (t, d.abs())
        })
        .fold((0.0, f64::NEG_INFINITY), |best, cur| if cur.1 > best.1 { cur } else { best });
    // (1 − s) Γ(1 − s) = Γ(2 − s)
    let denominator = statrs::function::gamma::gamma(2.0 - s);
    CxsBound {
        value: mu / denominator * (mu * max_time_derivative).max(1.0),
        max_time_derivative,
        argmax_t,
    }
}

/// `C_{x,s} = μ(x) / ((1−s) Γ(1−s)) · max{μ(x) max_{t∈[0,1]} |∂_t p(t,x,x)|, 1}`.
///
/// The time maximum is taken over a dense grid on `[0, 1]` that is refined
/// logarithmically towards `t = 0`.
pub fn cxs_bound(g: &WeightedGraph, sp: &Spectrum, s: f64, x: &str) -> Result<CxsBound> {
    check_s(s)?;
    let ix = g.index_of(x)?;
    check_len(sp.len(), g.len())?;
    Ok(cxs_at(sp, s, ix))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VertexBound {
    pub id: String,
    pub row_sum: f64,
    pub c_xs: f64,
    pub slack: f64,
    pub argmax_t: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelDiagnostics {
    pub s: f64,
    pub method: KernelMethod,
    pub max_symmetry_defect: f64,
    pub min_off_diagonal: f64,
    pub max_diagonal: f64,
    pub vertices: Vec<VertexBound>,
    /// Largest `|W − W'| / |W'|` against a reference kernel, when supplied.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_rel_deviation: Option<f64>,
}

impl KernelDiagnostics {
    pub fn bounds_hold(&self) -> bool {
        self.vertices.iter().all(|v| v.slack >= 0.0)
    }

    /// CSV export `x_id,row_sum,C_xs`.
    pub fn bounds_csv(&self) -> String {
        let mut out = String::from("x_id,row_sum,C_xs\n");
        for v in &self.vertices {
            let _ = writeln!(out, "{},{},{}", v.id, v.row_sum, v.c_xs);
        }
        out
    }
}

/// Largest entrywise relative deviation `|a − b| / |b|` over `x ≠ y`.
pub fn max_rel_deviation(a: &FracKernel, b: &FracKernel) -> f64 {
    let n = a.len().min(b.len());
    let mut worst = 0.0_f64;
    for x in 0..n {
        for y in 0..n {
            if x != y {
                worst = worst.max((a.get(x, y) - b.get(x, y)).abs() / b.get(x, y).abs());
            }
        }
    }
    worst
}

/// Symmetry, positivity, row-sum bounds and, optionally, agreement with a
/// second kernel built by the other method.
pub fn kernel_diagnostics(
    k: &FracKernel,
    g: &WeightedGraph,
    sp: &Spectrum,
    reference: Option<&FracKernel>,
) -> KernelDiagnostics {
    let n = k.len();
    let mut max_symmetry_defect = 0.0_f64;
    let mut min_off_diagonal = f64::INFINITY;
    let mut max_diagonal = 0.0_f64;
    for x in 0..n {
        max_diagonal = max_diagonal.max(k.get(x, x).abs());
        for y in 0..n {
            if x != y {
                max_symmetry_defect = max_symmetry_defect.max((k.get(x, y) - k.get(y, x)).abs());
                min_off_diagonal = min_off_diagonal.min(k.get(x, y));
            }
        }
    }
    let vertices = (0..n)
        .map(|x| {
            let bound = cxs_at(sp, k.s, x);
            VertexBound {
                id: g.id(x).to_string(),
                row_sum: k.row_sums[x],
                c_xs: bound.value,
                slack: bound.value - k.row_sums[x],
                argmax_t: bound.argmax_t,
            }
        })
        .collect();
    KernelDiagnostics {
        s: k.s,
        method: k.method,
        max_symmetry_defect,
        min_off_diagonal,
        max_diagonal,
        vertices,
        max_rel_deviation: reference.map(|r| max_rel_deviation(k, r)),
    }
}
