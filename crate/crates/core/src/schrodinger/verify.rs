//! Independent certificates for solver output.

use serde::{Deserialize, Serialize};

use crate::calculus::{sup_norm, PotentialH};
use crate::error::Result;
use crate::kernel::FracKernel;
use crate::spectral::logspace;

use super::energy::{Branch, Functional};
use super::nonlinearity::Nonlinearity;
use super::solver::Solution;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VerifyOptions {
    pub residual_tol: f64,
    /// Relative to `‖u‖²_{𝓗_s}`.
    pub nehari_tol: f64,
    /// Allowed excess of `max_t J(tu)` over `J(u)`.
    pub ray_tol: f64,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            residual_tol: 1e-8,
            nehari_tol: 1e-8,
            ray_tol: 1e-8,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub branch: Branch,
    pub trivial: bool,
    pub residual_inf: f64,
    pub residual_ok: bool,
    /// `min u` on the positive branch, `−max u` on the negative one.
    pub sign_margin: f64,
    pub strict_sign: bool,
    pub nehari_defect: f64,
    pub nehari_ok: bool,
    pub energy: f64,
    pub energy_positive: bool,
    /// `max_t J(tu) − J(u)` over the scan grid.
    pub ray_excess: f64,
    pub ray_argmax: f64,
    pub ray_max_ok: bool,
}

impl VerificationReport {
    pub fn passed(&self) -> bool {
        !self.trivial
            && self.residual_ok
            && self.strict_sign
            && self.nehari_ok
            && self.energy_positive
            && self.ray_max_ok
    }
}

/// Ray grid: 4001 log-spaced points on `[1e−3, 1e3]` plus a fine linear
/// grid around `t = 1`.
pub fn ray_grid() -> Vec<f64> {
    let mut grid = logspace(1e-3, 1e3, 4001);
    grid.extend((0..=2000).map(|i| 0.9 + 0.2 * i as f64 / 2000.0));
    grid.push(1.0);
    grid
}

pub fn verify_solution(
    k: &FracKernel,
    h: &PotentialH,
    nl: &Nonlinearity,
    sol: &Solution,
) -> Result<VerificationReport> {
    verify_solution_with(k, h, nl, sol, &VerifyOptions::default())
}

pub fn verify_solution_with(
    k: &FracKernel,
    h: &PotentialH,
    nl: &Nonlinearity,
    sol: &Solution,
    opts: &VerifyOptions,
) -> Result<VerificationReport> {
    let f = Functional::new(k, h, nl)?;
    let u = &sol.u;
    let branch = sol.branch;
    let trivial = sup_norm(u) == 0.0;
    let residual_inf = f.residual_inf(u, branch)?;
    let sign_margin = u
        .iter()
        .map(|v| branch.sign() * v)
        .fold(f64::INFINITY, f64::min);
    let norm_sq = f.hs_norm_sq(u)?;
    let nehari_defect = f.nehari_functional(u, branch)?.abs();
    let energy = f.energy(u, branch)?;

    let mut ray_excess = f64::NEG_INFINITY;
    let mut ray_argmax = 1.0;
    for t in ray_grid() {
        let tu: Vec<f64> = u.iter().map(|v| t * v).collect();
        let e = f.energy(&tu, branch)?;
        if e - energy > ray_excess {
            ray_excess = e - energy;
            ray_argmax = t;
        }
    }

    Ok(VerificationReport {
        branch,
        trivial,
        residual_inf,
        residual_ok: residual_inf <= opts.residual_tol,
        sign_margin,
        strict_sign: sign_margin > 0.0,
        nehari_defect,
        nehari_ok: !trivial && nehari_defect <= opts.nehari_tol * norm_sq,
        energy,
        energy_positive: energy > 0.0,
        ray_excess,
        ray_argmax,
        ray_max_ok: !trivial && ray_excess <= opts.ray_tol,
    })
}
