//! The functionals `J_±(u) = ½‖u‖²_{𝓗_s} − ∫ F(x, u^±) dμ` and their
//! `L²(μ)` gradients.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::calculus::{hs_form_matrix, PotentialH};
use crate::error::{check_len, Error, Result};
use crate::kernel::FracKernel;

use super::nonlinearity::Nonlinearity;

/// Which signed part of `u` the functional reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Positive,
    Negative,
}

impl Branch {
    pub const BOTH: [Branch; 2] = [Branch::Positive, Branch::Negative];

    /// `u⁺ = max(u, 0)` or `u⁻ = min(u, 0)`.
    pub fn part(self, y: f64) -> f64 {
        match self {
            Branch::Positive => y.max(0.0),
            Branch::Negative => y.min(0.0),
        }
    }

    pub fn sign(self) -> f64 {
        match self {
            Branch::Positive => 1.0,
            Branch::Negative => -1.0,
        }
    }

    /// Whether `y` lies strictly inside the branch's half-line.
    pub fn is_strict(self, y: f64) -> bool {
        self.sign() * y > 0.0
    }
}

impl fmt::Display for Branch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Branch::Positive => "positive",
            Branch::Negative => "negative",
        })
    }
}

impl FromStr for Branch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "positive" | "pos" | "+" => Ok(Branch::Positive),
            "negative" | "neg" | "-" => Ok(Branch::Negative),
            other => Err(Error::InvalidParam(format!("unknown branch `{other}`"))),
        }
    }
}

/// A problem instance `(−Δ)^s u + h u = f(x, u)` with the `𝓗_s` form
/// matrix assembled once.
#[derive(Debug, Clone)]
pub struct Functional<'a> {
    kernel: &'a FracKernel,
    potential: &'a PotentialH,
    nonlinearity: &'a Nonlinearity,
    form: DMatrix<f64>,
}

impl<'a> Functional<'a> {
    pub fn new(k: &'a FracKernel, h: &'a PotentialH, nl: &'a Nonlinearity) -> Result<Self> {
        let form = hs_form_matrix(k, h)?;
        Ok(Functional {
            kernel: k,
            potential: h,
            nonlinearity: nl,
            form,
        })
    }

    pub fn kernel(&self) -> &FracKernel {
        self.kernel
    }

    pub fn potential(&self) -> &PotentialH {
        self.potential
    }

    pub fn nonlinearity(&self) -> &Nonlinearity {
        self.nonlinearity
    }

    pub fn len(&self) -> usize {
        self.kernel.len()
    }

    pub fn is_empty(&self) -> bool {
        self.kernel.is_empty()
    }

    pub fn measure(&self) -> &[f64] {
        self.kernel.measure()
    }

    /// `A u` with `uᵀ A u = ‖u‖²_{𝓗_s}`.
    pub(crate) fn form_apply(&self, u: &[f64]) -> Vec<f64> {
        let v = DVector::from_column_slice(u);
        (&self.form * v).iter().copied().collect()
    }

    pub fn hs_norm_sq(&self, u: &[f64]) -> Result<f64> {
        check_len(self.len(), u.len())?;
        Ok(self.form_apply(u).iter().zip(u).map(|(a, b)| a * b).sum())
    }

    pub fn energy(&self, u: &[f64], branch: Branch) -> Result<f64> {
        let quadratic = self.hs_norm_sq(u)?;
        let potential: f64 = u
            .iter()
            .zip(self.measure())
            .enumerate()
            .map(|(x, (&v, &m))| self.nonlinearity.primitive(x, branch.part(v)) * m)
            .sum();
        Ok(0.5 * quadratic - potential)
    }

    /// `(−Δ)^s u + h u − f(x, u^±)`.
    pub fn gradient(&self, u: &[f64], branch: Branch) -> Result<Vec<f64>> {
        check_len(self.len(), u.len())?;
        let au = self.form_apply(u);
        Ok(au
            .iter()
            .zip(u)
            .zip(self.measure())
            .enumerate()
            .map(|(x, ((a, &v), m))| a / m - self.nonlinearity.f(x, branch.part(v)))
            .collect())
    }

    /// `‖J′(u)‖_∞`, the pointwise residual of the equation.
    pub fn residual_inf(&self, u: &[f64], branch: Branch) -> Result<f64> {
        Ok(self
            .gradient(u, branch)?
            .iter()
            .fold(0.0_f64, |m, g| m.max(g.abs())))
    }

    /// `⟨J′(u), u⟩ = ‖u‖²_{𝓗_s} − ∫ f(x, u^±) u^± dμ`.
    pub fn nehari_functional(&self, u: &[f64], branch: Branch) -> Result<f64> {
        let quadratic = self.hs_norm_sq(u)?;
        let nonlinear: f64 = u
            .iter()
            .zip(self.measure())
            .enumerate()
            .map(|(x, (&v, &m))| {
                let p = branch.part(v);
                self.nonlinearity.f(x, p) * p * m
            })
            .sum();
        Ok(quadratic - nonlinear)
    }

    /// Euclidean Hessian `A − diag(μ ∂_y f(x, u^±) 1_{u^± ≠ 0})`.
    pub(crate) fn hessian(&self, u: &[f64], branch: Branch) -> DMatrix<f64> {
        let mut h = self.form.clone();
        for (x, (&v, &m)) in u.iter().zip(self.measure()).enumerate() {
            if branch.is_strict(v) {
                h[(x, x)] -= m * self.nonlinearity.derivative(x, v);
            } else if v == 0.0 {
                h[(x, x)] -= 0.5 * m * self.nonlinearity.derivative(x, 0.0);
            }
        }
        h
    }
}

/// `J_±(u)` for a one-off evaluation.
pub fn energy(
    k: &FracKernel,
    h: &PotentialH,
    nl: &Nonlinearity,
    u: &[f64],
    branch: Branch,
) -> Result<f64> {
    Functional::new(k, h, nl)?.energy(u, branch)
}

/// The `L²(μ)` gradient of `J_±` for a one-off evaluation.
pub fn energy_gradient(
    k: &FracKernel,
    h: &PotentialH,
    nl: &Nonlinearity,
    u: &[f64],
    branch: Branch,
) -> Result<Vec<f64>> {
    Functional::new(k, h, nl)?.gradient(u, branch)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate_standard, GeneratorParams, GraphKind};
    use crate::kernel::ws_spectral;
    use crate::schrodinger::nonlinearity::{paper_example, power_nonlinearity};
    use crate::spectral::eigendecompose;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn kernel(kind: GraphKind, n: usize) -> FracKernel {
        let g = generate_standard(kind, &GeneratorParams::with_n(n)).unwrap();
        ws_spectral(&eigendecompose(&g).unwrap(), 0.5).unwrap()
    }

    #[test]
    fn k2_constant_values() {
        let k = kernel(GraphKind::Path, 2);
        let h = PotentialH::constant(2, 1.0).unwrap();
        let nl = power_nonlinearity(3.0).unwrap();
        assert_eq!(energy(&k, &h, &nl, &[0.0, 0.0], Branch::Positive).unwrap(), 0.0);
        let j = energy(&k, &h, &nl, &[1.0, 1.0], Branch::Positive).unwrap();
        assert!((j - 0.5).abs() < 1e-14);
        let g = energy_gradient(&k, &h, &nl, &[1.0, 1.0], Branch::Positive).unwrap();
        assert!(g.iter().all(|v| v.abs() < 1e-14));
        let z = energy_gradient(&k, &h, &nl, &[0.0, 0.0], Branch::Negative).unwrap();
        assert!(z.iter().all(|v| *v == 0.0));
        assert!(matches!(
            energy(&k, &h, &nl, &[1.0], Branch::Positive),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn ray_scaling() {
        let k = kernel(GraphKind::Cycle, 4);
        let h = PotentialH::new(vec![1.0, 2.0, 1.5, 3.0]).unwrap();
        let nl = paper_example();
        let f = Functional::new(&k, &h, &nl).unwrap();
        let u = [0.4, -0.3, 0.9, 0.1];
        let norm = f.hs_norm_sq(&u).unwrap();
        for &t in &[0.1, 0.5, 1.0, 1.7] {
            let tu: Vec<f64> = u.iter().map(|v| t * v).collect();
            let expected = 0.5 * t * t * norm
                - tu.iter()
                    .zip(k.measure())
                    .map(|(v, m)| nl.primitive(0, v.max(0.0)) * m)
                    .sum::<f64>();
            assert!((f.energy(&tu, Branch::Positive).unwrap() - expected).abs() < 1e-13);
        }
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (kind, n) in [(GraphKind::Path, 3), (GraphKind::Star, 5)] {
            let k = kernel(kind, n);
            let h = PotentialH::constant(n, 1.3).unwrap();
            for nl in [paper_example(), power_nonlinearity(3.0).unwrap()] {
                let f = Functional::new(&k, &h, &nl).unwrap();
                for branch in Branch::BOTH {
                    for _ in 0..10 {
                        let u: Vec<f64> = (0..n).map(|_| rng.random_range(-1.2..1.2)).collect();
                        let phi: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
                        let eps = 1e-5;
                        let plus: Vec<f64> = u.iter().zip(&phi).map(|(a, b)| a + eps * b).collect();
                        let minus: Vec<f64> = u.iter().zip(&phi).map(|(a, b)| a - eps * b).collect();
                        let fd = (f.energy(&plus, branch).unwrap() - f.energy(&minus, branch).unwrap())
                            / (2.0 * eps);
                        let g = f.gradient(&u, branch).unwrap();
                        let pairing: f64 =
                            g.iter().zip(&phi).zip(k.measure()).map(|((a, b), m)| a * b * m).sum();
                        assert!((fd - pairing).abs() <= 1e-6 * pairing.abs().max(1.0));
                    }
                }
            }
        }
    }

    #[test]
    fn branch_parsing() {
        assert_eq!("positive".parse::<Branch>().unwrap(), Branch::Positive);
        assert_eq!("neg".parse::<Branch>().unwrap(), Branch::Negative);
        assert!("sideways".parse::<Branch>().is_err());
        assert_eq!(serde_json::to_string(&Branch::Negative).unwrap(), "\"negative\"");
        assert_eq!(Branch::Negative.part(0.3), 0.0);
        assert_eq!(Branch::Negative.part(-0.3), -0.3);
    }
}
