//! Nonlinear terms `f(x, y)` with their primitives `F(x, y) = ∫₀^y f(x, t) dt`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::logspace;

/// Scalar map `(vertex index, y) ↦ value`.
pub type ScalarFn = Arc<dyn Fn(usize, f64) -> f64 + Send + Sync>;

/// A nonlinearity together with its primitive and Ambrosetti–Rabinowitz
/// exponent `α > 2`.
#[derive(Clone)]
pub struct Nonlinearity {
    name: String,
    f: ScalarFn,
    primitive: ScalarFn,
    derivative: Option<ScalarFn>,
    alpha: f64,
    ar_floor: f64,
}

impl fmt::Debug for Nonlinearity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Nonlinearity")
            .field("name", &self.name)
            .field("alpha", &self.alpha)
            .field("ar_floor", &self.ar_floor)
            .field("exact_derivative", &self.derivative.is_some())
            .finish()
    }
}

impl Nonlinearity {
    pub fn custom(
        name: impl Into<String>,
        alpha: f64,
        f: impl Fn(usize, f64) -> f64 + Send + Sync + 'static,
        primitive: impl Fn(usize, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Nonlinearity {
            name: name.into(),
            f: Arc::new(f),
            primitive: Arc::new(primitive),
            derivative: None,
            alpha,
            ar_floor: 0.0,
        }
    }

    /// Supplies `∂_y f`; otherwise a central difference is used.
    pub fn with_derivative(
        mut self,
        df: impl Fn(usize, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        self.derivative = Some(Arc::new(df));
        self
    }

    /// Smallest `|y|` at which the numeric (F₃) check is applied.
    pub fn with_ar_floor(mut self, floor: f64) -> Self {
        self.ar_floor = floor;
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn ar_floor(&self) -> f64 {
        self.ar_floor
    }

    pub fn f(&self, x: usize, y: f64) -> f64 {
        (self.f)(x, y)
    }

    pub fn primitive(&self, x: usize, y: f64) -> f64 {
        (self.primitive)(x, y)
    }

    pub fn derivative(&self, x: usize, y: f64) -> f64 {
        match &self.derivative {
            Some(df) => df(x, y),
            None => {
                let h = 1e-6 * y.abs().max(1.0);
                (self.f(x, y + h) - self.f(x, y - h)) / (2.0 * h)
            }
        }
    }
}

/// `e^z − 1 − z` without cancellation for small `z`.
fn expm1_minus_id(z: f64) -> f64 {
    if z.abs() < 0.1 {
        let mut term = z;
        let mut sum = 0.0;
        for k in 2..30 {
            term *= z / k as f64;
            sum += term;
        }
        sum
    } else {
        z.exp_m1() - z
    }
}

/// `f(y) = |y|^{p−1} y`, `F(y) = |y|^{p+1} / (p + 1)`, `α = p + 1`.
pub fn power_nonlinearity(p: f64) -> Result<Nonlinearity> {
    if !(p > 1.0 && p.is_finite()) {
        return Err(Error::InvalidParam(format!("power_p needs p > 1, got {p}")));
    }
    let name = if p == 3.0 {
        "cubic".to_string()
    } else {
        format!("power_p({p})")
    };
    Ok(Nonlinearity::custom(
        name,
        p + 1.0,
        move |_, y| y.abs().powf(p - 1.0) * y,
        move |_, y| y.abs().powf(p + 1.0) / (p + 1.0),
    )
    .with_derivative(move |_, y| p * y.abs().powf(p - 1.0)))
}

/// The sign-asymmetric example `f(y) = y(e^{y²} − 1)` for `y ≥ 0` and
/// `f(y) = y³(e^{y⁴} − 1)` for `y < 0`.
pub fn paper_example() -> Nonlinearity {
    Nonlinearity::custom(
        "paper_example",
        2.5,
        |_, y| {
            if y >= 0.0 {
                y * (y * y).exp_m1()
            } else {
                y.powi(3) * y.powi(4).exp_m1()
            }
        },
        |_, y| {
            if y >= 0.0 {
                expm1_minus_id(y * y) / 2.0
            } else {
                expm1_minus_id(y.powi(4)) / 4.0
            }
        },
    )
    .with_derivative(|_, y| {
        if y >= 0.0 {
            let z = y * y;
            z.exp_m1() + 2.0 * z * z.exp()
        } else {
            let z = y.powi(4);
            3.0 * y * y * z.exp_m1() + 4.0 * y.powi(6) * z.exp()
        }
    })
    .with_ar_floor(0.05)
}

/// Nonlinearity selector as it appears in run configurations: either a bare
/// name or `{"name": "power_p", "p": 5}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum NonlinearitySpec {
    Name(String),
    Detailed {
        name: String,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        p: Option<f64>,
    },
}

impl NonlinearitySpec {
    pub fn build(&self) -> Result<Nonlinearity> {
        match self {
            NonlinearitySpec::Name(name) => builtin_nonlinearity(name, None),
            NonlinearitySpec::Detailed { name, p } => builtin_nonlinearity(name, *p),
        }
    }
}

/// `paper_example`, `cubic`, or `power_p` with parameter `p > 1`.
pub fn builtin_nonlinearity(name: &str, p: Option<f64>) -> Result<Nonlinearity> {
    match (name, p) {
        ("paper_example", None) => Ok(paper_example()),
        ("cubic", None) => power_nonlinearity(3.0),
        ("power_p", Some(p)) => power_nonlinearity(p),
        ("power_p", None) => Err(Error::InvalidParam("power_p needs parameter p".into())),
        ("paper_example" | "cubic", Some(_)) => Err(Error::InvalidParam(format!(
            "`{name}` takes no parameter"
        ))),
        (other, _) => Err(Error::UnknownName(other.to_string())),
    }
}

/// Numeric verdicts on (F₁)–(F₅). Grid checks can falsify the asymptotic
/// hypotheses but never certify them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub f1: bool,
    pub f2: bool,
    /// `max |f|` over the grid on `[−M, M]`.
    pub c_m: f64,
    pub f3: bool,
    pub alpha: f64,
    pub f4: bool,
    /// `max f(y)/y` over `0 < |y| ≤ 1e−3`.
    pub f4_limsup: f64,
    pub lambda1: f64,
    pub f5: bool,
    pub findings: Vec<String>,
}

impl HypothesisReport {
    /// (F₁)–(F₄), the hypotheses of the mountain-pass existence result.
    pub fn mountain_pass_ready(&self) -> bool {
        self.f1 && self.f2 && self.f3 && self.f4
    }

    pub fn all_hold(&self) -> bool {
        self.mountain_pass_ready() && self.f5
    }
}

/// Checks the hypotheses at vertex 0 (the builtins do not depend on `x`).
pub fn check_hypotheses(nl: &Nonlinearity, lambda1: f64, m: f64, grid_n: usize) -> HypothesisReport {
    check_hypotheses_at(nl, lambda1, m, grid_n, &[0])
}

/// Checks the hypotheses on `grid_n` points per half-line of `[−M, M]` at
/// every listed vertex.
pub fn check_hypotheses_at(
    nl: &Nonlinearity,
    lambda1: f64,
    m: f64,
    grid_n: usize,
    vertices: &[usize],
) -> HypothesisReport {
    let grid_n = grid_n.max(100);
    let positive: Vec<f64> = (1..=grid_n).map(|i| m * i as f64 / grid_n as f64).collect();
    let small = logspace(1e-8, 1e-3, 60);
    let mut findings = Vec::new();
    let (mut f1, mut f3, mut f5) = (true, true, true);
    let mut c_m = 0.0_f64;
    let mut f4_limsup = f64::NEG_INFINITY;

    for &x in vertices {
        if nl.f(x, 0.0) != 0.0 {
            f1 = false;
            findings.push(format!("F1: f({x}, 0) = {}", nl.f(x, 0.0)));
        }
        for sign in [1.0, -1.0] {
            let mut previous = f64::NEG_INFINITY;
            // walk each half-line in the direction of increasing y
            let ordered: Vec<f64> = if sign > 0.0 {
                positive.clone()
            } else {
                positive.iter().rev().map(|y| -y).collect()
            };
            for &y in &ordered {
                let fy = nl.f(x, y);
                c_m = c_m.max(fy.abs());
                if y.abs() >= nl.ar_floor {
                    let lhs = nl.alpha * nl.primitive(x, y);
                    let rhs = y * fy;
                    if !(lhs > 0.0 && lhs <= rhs * (1.0 + 1e-12)) {
                        if f3 {
                            findings.push(format!(
                                "F3: alpha*F = {lhs:e} vs y*f = {rhs:e} at x = {x}, y = {y}"
                            ));
                        }
                        f3 = false;
                    }
                }
                let ratio = fy / y.abs();
                if !(ratio > previous) {
                    if f5 {
                        findings.push(format!("F5: f/|y| not increasing at x = {x}, y = {y}"));
                    }
                    f5 = false;
                }
                previous = ratio;
            }
        }
        for &y in &small {
            for y in [y, -y] {
                f4_limsup = f4_limsup.max(nl.f(x, y) / y);
            }
        }
    }
    let f2 = c_m.is_finite();
    if !f2 {
        findings.push("F2: f unbounded on the grid".into());
    }
    let f4 = f4_limsup < lambda1;
    if !f4 {
        findings.push(format!("F4: limsup f/y = {f4_limsup} is not below lambda1 = {lambda1}"));
    }
    HypothesisReport {
        f1,
        f2,
        c_m,
        f3,
        alpha: nl.alpha,
        f4,
        f4_limsup,
        lambda1,
        f5,
        findings,
    }
}
