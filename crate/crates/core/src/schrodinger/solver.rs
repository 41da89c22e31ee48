//! Nehari-constrained gradient descent for signed ground states.

use std::collections::BTreeMap;

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{sup_norm, PotentialH};
use crate::error::{Error, Result};
use crate::kernel::FracKernel;

use super::energy::{Branch, Functional};
use super::nonlinearity::Nonlinearity;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub tol_residual: f64,
    pub max_iters: usize,
    pub step: f64,
    pub backtrack: f64,
    pub nehari_bisect_tol: f64,
    pub seed: u64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol_residual: 1e-9,
            max_iters: 10_000,
            step: 0.1,
            backtrack: 0.5,
            nehari_bisect_tol: 1e-12,
            seed: 0,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: &str| Err(Error::InvalidSolverConfig(msg.to_string()));
        if !(self.tol_residual > 0.0) {
            return bad("tol_residual must be positive");
        }
        if self.max_iters == 0 {
            return bad("max_iters must be at least 1");
        }
        if !(self.step > 0.0 && self.step.is_finite()) {
            return bad("step must be positive");
        }
        if !(self.backtrack > 0.0 && self.backtrack < 1.0) {
            return bad("backtrack must lie in (0, 1)");
        }
        if !(self.nehari_bisect_tol > 0.0 && self.nehari_bisect_tol < 1.0) {
            return bad("nehari_bisect_tol must lie in (0, 1)");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub energy: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub u: Vec<f64>,
    pub branch: Branch,
    pub energy: f64,
    pub residual_inf: f64,
    pub nehari_defect: f64,
    pub iterations: usize,
    pub converged: bool,
    pub trace: Vec<TraceEntry>,
}

#[derive(Serialize)]
struct SolutionExport<'a> {
    branch: Branch,
    s: f64,
    energy: f64,
    residual_inf: f64,
    nehari_defect: f64,
    iterations: usize,
    converged: bool,
    u: BTreeMap<&'a str, f64>,
}

impl Solution {
    /// The export document
    /// `{"branch", "s", "energy", "residual_inf", "nehari_defect", "iterations", "converged", "u": {id: value}}`.
    pub fn to_json(&self, ids: &[String], s: f64) -> Result<String> {
        crate::error::check_len(self.u.len(), ids.len())?;
        let doc = SolutionExport {
            branch: self.branch,
            s,
            energy: self.energy,
            residual_inf: self.residual_inf,
            nehari_defect: self.nehari_defect,
            iterations: self.iterations,
            converged: self.converged,
            u: ids.iter().map(String::as_str).zip(self.u.iter().copied()).collect(),
        };
        serde_json::to_string_pretty(&doc).map_err(|e| Error::from_json(&e))
    }

    pub(crate) fn assemble(
        f: &Functional<'_>,
        u: Vec<f64>,
        branch: Branch,
        iterations: usize,
        converged: bool,
        trace: Vec<TraceEntry>,
    ) -> Result<Self> {
        Ok(Solution {
            energy: f.energy(&u, branch)?,
            residual_inf: f.residual_inf(&u, branch)?,
            nehari_defect: f.nehari_functional(&u, branch)?.abs(),
            u,
            branch,
            iterations,
            converged,
            trace,
        })
    }
}

/// `±(1 + 0.1 ξ)` with `ξ` uniform on `[0, 1]`; both branches draw the same `ξ`.
pub fn initial_guess(n: usize, branch: Branch, seed: u64) -> Vec<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| branch.sign() * (1.0 + 0.1 * rng.random::<f64>()))
        .collect()
}

fn axpy(u: &[f64], a: f64, g: &[f64]) -> Vec<f64> {
    u.iter().zip(g).map(|(x, y)| x + a * y).collect()
}

/// Signed ground state by projected gradient descent on the Nehari manifold.
pub fn ground_state_solve(
    k: &FracKernel,
    h: &PotentialH,
    nl: &Nonlinearity,
    branch: Branch,
    cfg: &SolverConfig,
) -> Result<Solution> {
    let f = Functional::new(k, h, nl)?;
    ground_state_from(&f, initial_guess(f.len(), branch, cfg.seed), branch, cfg)
}

/// Ground-state descent from a caller-supplied start.
pub fn ground_state_from(
    f: &Functional<'_>,
    start: Vec<f64>,
    branch: Branch,
    cfg: &SolverConfig,
) -> Result<Solution> {
    cfg.validate()?;
    if !(f.potential().h0() > 0.0) {
        return Err(Error::NonPositivePotential(f.potential().h0()));
    }
    let mut u = f.nehari_project(&start, branch, cfg.nehari_bisect_tol)?.scaled;
    let mut energy = f.energy(&u, branch)?;
    let mut grad = f.gradient(&u, branch)?;
    let mut residual = sup_norm(&grad);
    let mut trace = vec![TraceEntry { energy, residual }];
    let mut step = cfg.step;
    let min_step = cfg.step * 1e-14;

    let mut iterations = 0;
    while residual > cfg.tol_residual && iterations < cfg.max_iters {
        iterations += 1;
        let slack = 1e-14 * energy.abs().max(1.0);
        let mut accepted = None;
        while step >= min_step {
            let trial = axpy(&u, -step, &grad);
            if trial.iter().all(|&v| branch.part(v) == 0.0) {
                step *= cfg.backtrack;
                continue;
            }
            let projected = f.nehari_project(&trial, branch, cfg.nehari_bisect_tol)?.scaled;
            let e = f.energy(&projected, branch)?;
            let g = f.gradient(&projected, branch)?;
            let r = sup_norm(&g);
            if e < energy - slack || (e <= energy + slack && r < residual) {
                accepted = Some((projected, e, g, r));
                break;
            }
            step *= cfg.backtrack;
        }
        let Some((next, e, g, r)) = accepted else {
            log::warn!("ground-state descent stalled at residual {residual:e}");
            break;
        };
        u = next;
        energy = e;
        grad = g;
        residual = r;
        trace.push(TraceEntry { energy, residual });
        step = (step / cfg.backtrack).min(cfg.step);
    }
    let converged = residual <= cfg.tol_residual;
    if !converged {
        log::warn!("ground-state descent ended after {iterations} iterations at residual {residual:e}");
    }
    Solution::assemble(f, u, branch, iterations, converged, trace)
}

/// Damped Newton iteration on `J′ = 0`. Returns the final point and the
/// number of iterations taken.
pub(crate) fn newton_polish(
    f: &Functional<'_>,
    mut u: Vec<f64>,
    branch: Branch,
    tol: f64,
    max_iters: usize,
    trace: &mut Vec<TraceEntry>,
) -> Result<(Vec<f64>, usize)> {
    let mu = f.measure().to_vec();
    let mut grad = f.gradient(&u, branch)?;
    let mut residual = sup_norm(&grad);
    let mut iterations = 0;
    while residual > tol && iterations < max_iters {
        iterations += 1;
        let hess = f.hessian(&u, branch);
        let rhs = DVector::from_iterator(u.len(), grad.iter().zip(&mu).map(|(g, m)| -g * m));
        let Some(dir) = hess.lu().solve(&rhs) else {
            break;
        };
        let dir: Vec<f64> = dir.iter().copied().collect();
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..40 {
            let trial = axpy(&u, t, &dir);
            let g = f.gradient(&trial, branch)?;
            let r = sup_norm(&g);
            if r < residual {
                u = trial;
                grad = g;
                residual = r;
                improved = true;
                break;
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
        trace.push(TraceEntry {
            energy: f.energy(&u, branch)?,
            residual,
        });
    }
    Ok((u, iterations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_standard, GeneratorParams, GraphKind};
    use crate::kernel::ws_spectral;
    use crate::schrodinger::nonlinearity::{paper_example, power_nonlinearity};
    use crate::spectral::eigendecompose;

    fn kernel(kind: GraphKind, n: usize) -> FracKernel {
        let g = generate_standard(kind, &GeneratorParams::with_n(n)).unwrap();
        ws_spectral(&eigendecompose(&g).unwrap(), 0.5).unwrap()
    }

    /// Critical points of `J₊` on K₂ with `h ≡ 1`, cubic `f`, both entries
    /// positive: `(1, 1)` and the pair `a ≠ b` with `ab = W`,
    /// `a² + b² = 1 + W`.
    fn k2_critical_points(w: f64) -> Vec<[f64; 2]> {
        let sum = (1.0 + 3.0 * w).sqrt();
        let diff = (1.0 - w).sqrt();
        let (a, b) = ((sum + diff) / 2.0, (sum - diff) / 2.0);
        vec![[1.0, 1.0], [a, b], [b, a]]
    }

    #[test]
    fn k2_ground_state_is_the_asymmetric_pair() {
        let k = kernel(GraphKind::Path, 2);
        let h = PotentialH::constant(2, 1.0).unwrap();
        let nl = power_nonlinearity(3.0).unwrap();
        let f = Functional::new(&k, &h, &nl).unwrap();
        let w = k.get(0, 1);
        let points = k2_critical_points(w);
        for p in &points {
            assert!(f.residual_inf(p, Branch::Positive).unwrap() < 1e-14);
        }
        let levels: Vec<f64> = points.iter().map(|p| f.energy(p, Branch::Positive).unwrap()).collect();
        assert!((levels[0] - 0.5).abs() < 1e-14);
        let expected = (1.0 + 2.0 * w - w * w) / 4.0;
        assert!((levels[1] - expected).abs() < 1e-14);

        let sol = ground_state_solve(&k, &h, &nl, Branch::Positive, &SolverConfig::default()).unwrap();
        assert!(sol.converged);
        assert!(sol.residual_inf <= 1e-9);
        assert!((sol.energy - expected).abs() < 1e-10);
        let nearest = points[1..]
            .iter()
            .map(|p| (p[0] - sol.u[0]).abs().max((p[1] - sol.u[1]).abs()))
            .fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-8);

        let neg = ground_state_solve(&k, &h, &nl, Branch::Negative, &SolverConfig::default()).unwrap();
        assert!(neg.u.iter().zip(&sol.u).all(|(a, b)| *a == -b));
        assert_eq!(neg.energy, sol.energy);
    }

    #[test]
    fn p3_signed_solutions() {
        let k = kernel(GraphKind::Path, 3);
        let h = PotentialH::new(vec![1.0, 2.0, 1.0]).unwrap();
        for nl in [power_nonlinearity(3.0).unwrap(), paper_example()] {
            for branch in Branch::BOTH {
                let sol = ground_state_solve(&k, &h, &nl, branch, &SolverConfig::default()).unwrap();
                assert!(sol.converged, "{} {branch}", nl.name());
                assert!(sol.u.iter().all(|&v| branch.is_strict(v)));
                assert!(sol.energy > 0.0);
            }
        }
    }

    #[test]
    fn config_validation() {
        let mut cfg = SolverConfig::default();
        assert!(cfg.validate().is_ok());
        cfg.tol_residual = 0.0;
        assert!(matches!(cfg.validate(), Err(Error::InvalidSolverConfig(_))));
        let cfg = SolverConfig {
            max_iters: 0,
            ..SolverConfig::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn export_layout() {
        let k = kernel(GraphKind::Path, 2);
        let h = PotentialH::constant(2, 1.0).unwrap();
        let nl = power_nonlinearity(3.0).unwrap();
        let sol = ground_state_solve(&k, &h, &nl, Branch::Positive, &SolverConfig::default()).unwrap();
        let text = sol.to_json(k.ids(), 0.5).unwrap();
        let v: serde_json::Value = serde_json::from_str(&text).unwrap();
        for key in ["branch", "s", "energy", "residual_inf", "nehari_defect", "iterations", "u"] {
            assert!(v.get(key).is_some(), "{key}");
        }
        assert_eq!(v["branch"], "positive");
        assert_eq!(v["u"].as_object().unwrap().len(), 2);
    }
}
