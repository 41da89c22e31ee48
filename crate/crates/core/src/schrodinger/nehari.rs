//! Projection of a function onto the Nehari manifold along its ray.

use crate::calculus::PotentialH;
use crate::error::{Error, Result};
use crate::kernel::FracKernel;

use super::energy::{Branch, Functional};
use super::nonlinearity::Nonlinearity;

const BRACKET_CAP: f64 = 1_152_921_504_606_846_976.0; // 2^60

/// Default relative bisection tolerance.
pub const DEFAULT_BISECT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct NehariProjection {
    pub t0: f64,
    /// `t0 · u`.
    pub scaled: Vec<f64>,
}

impl Functional<'_> {
    /// `ḡ(t) = ‖u‖²_{𝓗_s} − Σ_{u^± ≠ 0} (u^±)² f(x, t u^±)/(t u^±) μ`, which
    /// equals `⟨J′(tu), tu⟩ / t²`.
    pub fn nehari_ray(&self, u: &[f64], norm_sq: f64, branch: Branch, t: f64) -> f64 {
        let nl = self.nonlinearity();
        let sum: f64 = u
            .iter()
            .zip(self.measure())
            .enumerate()
            .filter_map(|(x, (&v, &m))| {
                let p = branch.part(v);
                (p != 0.0).then(|| {
                    let tp = t * p;
                    p * p * nl.f(x, tp) / tp * m
                })
            })
            .sum();
        norm_sq - sum
    }

    /// Finds the unique `t0 > 0` with `t0 u` on the Nehari manifold by
    /// doubling/halving from `t = 1` and then bisecting to relative width
    /// `bisect_tol`.
    pub fn nehari_project(&self, u: &[f64], branch: Branch, bisect_tol: f64) -> Result<NehariProjection> {
        let norm_sq = self.hs_norm_sq(u)?;
        if u.iter().all(|&v| branch.part(v) == 0.0) {
            return Err(Error::WrongSignPart(match branch {
                Branch::Positive => "positive",
                Branch::Negative => "negative",
            }));
        }
        let g = |t: f64| self.nehari_ray(u, norm_sq, branch, t);

        let g1 = g(1.0);
        let (mut lo, mut hi) = if g1 == 0.0 {
            (1.0, 1.0)
        } else if g1 > 0.0 {
            let mut hi = 2.0;
            // NaN from overflow counts as "past the root"
            while g(hi) > 0.0 {
                hi *= 2.0;
                if hi > BRACKET_CAP {
                    return Err(Error::BracketFailure(hi));
                }
            }
            (hi / 2.0, hi)
        } else {
            let mut lo = 0.5;
            while !(g(lo) >= 0.0) {
                lo /= 2.0;
                if lo < 1.0 / BRACKET_CAP {
                    return Err(Error::BracketFailure(lo));
                }
            }
            (lo, 2.0 * lo)
        };

        while hi - lo > bisect_tol * hi {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if g(mid) > 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t0 = if g(lo).abs() <= g(hi).abs() { lo } else { hi };
        Ok(NehariProjection {
            t0,
            scaled: u.iter().map(|v| t0 * v).collect(),
        })
    }
}

/// One-off Nehari projection with the default bisection tolerance.
pub fn nehari_project(
    k: &FracKernel,
    h: &PotentialH,
    nl: &Nonlinearity,
    u: &[f64],
    branch: Branch,
) -> Result<NehariProjection> {
    Functional::new(k, h, nl)?.nehari_project(u, branch, DEFAULT_BISECT_TOL)
}
