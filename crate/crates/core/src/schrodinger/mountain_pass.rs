//! Discretized mountain-pass algorithm and the small-sphere barrier.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::calculus::{lambda1, sup_norm, PotentialH};
use crate::error::{Error, Result};
use crate::kernel::FracKernel;
use crate::spectral::logspace;

use super::energy::{Branch, Functional};
use super::nonlinearity::Nonlinearity;
use super::solver::{initial_guess, newton_polish, Solution, SolverConfig, TraceEntry};

pub const DEFAULT_PATH_NODES: usize = 21;

const ENDPOINT_CAP: f64 = 1_152_921_504_606_846_976.0; // 2^60
// path-normal residual at which the path phase hands over to Newton
const SWITCH_TOL: f64 = 1e-7;
// path iterations without a new lowest peak before handing over
const STAGNATION_LIMIT: usize = 200;
const NEWTON_ITERS: usize = 100;

/// Smallest `T = 2^k ≥ 1` with `J(T u₀) < 0`.
pub fn endpoint_scale(f: &Functional<'_>, u0: &[f64], branch: Branch) -> Result<f64> {
    let mut t = 1.0;
    loop {
        let scaled: Vec<f64> = u0.iter().map(|v| t * v).collect();
        if f.energy(&scaled, branch)? < 0.0 {
            return Ok(t);
        }
        t *= 2.0;
        if t > ENDPOINT_CAP {
            return Err(Error::BracketFailure(t));
        }
    }
}

fn hs_distance(f: &Functional<'_>, a: &[f64], b: &[f64]) -> f64 {
    let d: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    f.hs_norm_sq(&d).unwrap_or(0.0).max(0.0).sqrt()
}

/// Redistributes the interior nodes to equal `𝓗_s` chord length along the
/// polyline; endpoints stay fixed.
fn respace(f: &Functional<'_>, nodes: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let m = nodes.len();
    let mut cumulative = vec![0.0; m];
    for i in 1..m {
        cumulative[i] = cumulative[i - 1] + hs_distance(f, &nodes[i - 1], &nodes[i]);
    }
    let total = cumulative[m - 1];
    if !(total > 0.0) {
        return nodes.to_vec();
    }
    let mut out = Vec::with_capacity(m);
    out.push(nodes[0].clone());
    let mut seg = 0;
    for j in 1..m - 1 {
        let target = total * j as f64 / (m - 1) as f64;
        while seg + 1 < m - 1 && cumulative[seg + 1] < target {
            seg += 1;
        }
        let len = cumulative[seg + 1] - cumulative[seg];
        let theta = if len > 0.0 {
            ((target - cumulative[seg]) / len).clamp(0.0, 1.0)
        } else {
            0.0
        };
        out.push(
            nodes[seg]
                .iter()
                .zip(&nodes[seg + 1])
                .map(|(a, b)| a + theta * (b - a))
                .collect(),
        );
    }
    out.push(nodes[m - 1].clone());
    out
}

/// `g − ⟨g, τ⟩_μ τ` with `τ` the μ-normalized central-difference tangent.
fn path_normal(nodes: &[Vec<f64>], i: usize, g: &[f64], mu: &[f64]) -> Vec<f64> {
    let tangent: Vec<f64> = nodes[i + 1].iter().zip(&nodes[i - 1]).map(|(a, b)| a - b).collect();
    let norm_sq: f64 = tangent.iter().zip(mu).map(|(t, m)| t * t * m).sum();
    if !(norm_sq > 0.0) {
        return g.to_vec();
    }
    let along: f64 = g.iter().zip(&tangent).zip(mu).map(|((a, t), m)| a * t * m).sum::<f64>() / norm_sq;
    g.iter().zip(&tangent).map(|(a, t)| a - along * t).collect()
}

fn peak(energies: &[f64]) -> usize {
    let m = energies.len();
    (1..m - 1)
        .max_by(|&i, &j| energies[i].total_cmp(&energies[j]))
        .unwrap_or(1)
}

/// Mountain-pass critical point: path from `0` to `T u₀`, peak node moved by
/// damped gradient descent with equal-chord re-spacing, then Newton polish.
pub fn mountain_pass_solve(
    k: &FracKernel,
    h: &PotentialH,
    nl: &Nonlinearity,
    branch: Branch,
    cfg: &SolverConfig,
    path_nodes: usize,
) -> Result<Solution> {
    cfg.validate()?;
    if path_nodes < 3 {
        return Err(Error::InvalidSolverConfig("path_nodes must be at least 3".into()));
    }
    if !(h.h0() > 0.0) {
        return Err(Error::NonPositivePotential(h.h0()));
    }
    let f = Functional::new(k, h, nl)?;
    let u0 = initial_guess(f.len(), branch, cfg.seed);
    let t_end = endpoint_scale(&f, &u0, branch)?;

    let mut nodes: Vec<Vec<f64>> = (0..path_nodes)
        .map(|i| {
            let t = t_end * i as f64 / (path_nodes - 1) as f64;
            u0.iter().map(|v| t * v).collect()
        })
        .collect();
    let energy_of = |nodes: &[Vec<f64>]| -> Result<Vec<f64>> {
        nodes.iter().map(|u| f.energy(u, branch)).collect()
    };
    let mut energies = energy_of(&nodes)?;
    let mut trace = Vec::new();
    let mut step = cfg.step;
    let mut best_peak = f64::INFINITY;
    let mut since_best = 0;
    let switch_tol = SWITCH_TOL;

    let mu = f.measure().to_vec();
    let mut iterations = 0;
    while iterations < cfg.max_iters {
        let i = peak(&energies);
        let grad = f.gradient(&nodes[i], branch)?;
        let residual = sup_norm(&grad);
        trace.push(TraceEntry {
            energy: energies[i],
            residual,
        });
        if residual <= cfg.tol_residual {
            break;
        }
        // tangential motion is undone by re-spacing, so descend along the
        // path normal
        let normal = path_normal(&nodes, i, &grad, &mu);
        if sup_norm(&normal) <= switch_tol || since_best >= STAGNATION_LIMIT {
            break;
        }
        iterations += 1;
        let mut moved = false;
        while step >= cfg.step * 1e-12 {
            let trial: Vec<f64> = nodes[i].iter().zip(&normal).map(|(u, g)| u - step * g).collect();
            if f.energy(&trial, branch)? < energies[i] {
                nodes[i] = trial;
                moved = true;
                break;
            }
            step *= cfg.backtrack;
        }
        if !moved {
            break;
        }
        step = (step / cfg.backtrack).min(cfg.step);
        nodes = respace(&f, &nodes);
        energies = energy_of(&nodes)?;
        let top = energies[peak(&energies)];
        if top < best_peak - 1e-14 * best_peak.abs().max(1.0) {
            best_peak = top;
            since_best = 0;
        } else {
            since_best += 1;
        }
    }

    let start = nodes[peak(&energies)].clone();
    let (u, newton_iters) = newton_polish(&f, start, branch, cfg.tol_residual, NEWTON_ITERS, &mut trace)?;
    let residual = f.residual_inf(&u, branch)?;
    let nontrivial = sup_norm(&u) > 0.0;
    let converged = residual <= cfg.tol_residual && nontrivial;
    if !converged {
        log::warn!("mountain-pass solve ended at residual {residual:e}");
    }
    Solution::assemble(&f, u, branch, iterations + newton_iters, converged, trace)
}

/// Constants of the small-sphere estimate `J(u) > 0` on `‖u‖_{𝓗_s} = r`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierRadius {
    pub radius: f64,
    pub lambda1: f64,
    pub epsilon: f64,
    pub eta: f64,
    /// `‖u‖_∞ ≤ C₁ ‖u‖_{𝓗_s}`.
    pub c1: f64,
    /// `‖u‖₃³ ≤ C₂ ‖u‖³_{𝓗_s}` on the unit ball.
    pub c2: f64,
    /// Bound of `F` on `[0, C₁]` (mirrored for the negative branch).
    pub c3: f64,
}

/// `r = min{1, ε η³ / (4 λ₁ C₂ C₃)}` with `ε = λ₁/2`, `C₁ = 1/√(μ₀ λ₁)`,
/// `C₂ = C₁/λ₁`, `C₃ = max_{|y| ≤ C₁} max(F, y f/α)` and `η` the largest grid
/// point below which `max(F, y f/α) ≤ (λ₁ − ε) y²/2` holds.
pub fn barrier_radius(
    k: &FracKernel,
    h: &PotentialH,
    nl: &Nonlinearity,
    branch: Branch,
) -> Result<BarrierRadius> {
    let lambda1 = lambda1(k, h)?.value;
    let epsilon = 0.5 * lambda1;
    let mu0 = k.measure().iter().copied().fold(f64::INFINITY, f64::min);
    let c1 = 1.0 / (mu0 * lambda1).sqrt();
    let c2 = c1 / lambda1;
    let n = k.len();
    let sign = branch.sign();
    let bound = |x: usize, y: f64| -> f64 {
        let v = sign * y;
        nl.primitive(x, v).max(v * nl.f(x, v) / nl.alpha())
    };

    let mut c3 = 0.0_f64;
    for i in 1..=2000 {
        let y = c1 * i as f64 / 2000.0;
        for x in 0..n {
            c3 = c3.max(bound(x, y));
        }
    }

    let limit = 0.5 * (lambda1 - epsilon);
    let mut eta = 0.0;
    for y in logspace(1e-8, c1.max(1.0) * 10.0, 4000) {
        if (0..n).all(|x| bound(x, y) <= limit * y * y) {
            eta = y;
        } else {
            break;
        }
    }
    if !(eta > 0.0 && c3 > 0.0) {
        return Err(Error::InvalidParam(
            "no small-sphere estimate: the nonlinearity is not superquadratic near 0".into(),
        ));
    }
    let radius = 1f64.min(epsilon * eta.powi(3) / (4.0 * lambda1 * c2 * c3));
    Ok(BarrierRadius {
        radius,
        lambda1,
        epsilon,
        eta,
        c1,
        c2,
        c3,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BarrierReport {
    pub constants: BarrierRadius,
    pub samples: usize,
    pub min_energy: f64,
    pub holds: bool,
}

/// Samples `J` on the sphere `‖u‖_{𝓗_s} = r`; half the samples carry the
/// branch sign in every entry.
pub fn sphere_barrier_check(
    k: &FracKernel,
    h: &PotentialH,
    nl: &Nonlinearity,
    branch: Branch,
    samples: usize,
    seed: u64,
) -> Result<BarrierReport> {
    let constants = barrier_radius(k, h, nl, branch)?;
    let f = Functional::new(k, h, nl)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut min_energy = f64::INFINITY;
    for i in 0..samples {
        let mut u: Vec<f64> = (0..f.len()).map(|_| rng.random_range(-1.0..1.0)).collect();
        if i % 2 == 0 {
            u.iter_mut().for_each(|v| *v = branch.sign() * v.abs());
        }
        let norm = f.hs_norm_sq(&u)?.sqrt();
        if !(norm > 0.0) {
            continue;
        }
        u.iter_mut().for_each(|v| *v *= constants.radius / norm);
        min_energy = min_energy.min(f.energy(&u, branch)?);
    }
    Ok(BarrierReport {
        constants,
        samples,
        min_energy,
        holds: min_energy > 0.0,
    })
}
