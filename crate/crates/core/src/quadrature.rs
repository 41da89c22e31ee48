//! Globally adaptive Gauss–Kronrod (7/15) integration of vector-valued
//! integrands on finite intervals.

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];

// Gauss weights for the nodes XGK[1], XGK[3], XGK[5] and the center.
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

struct Panel {
    a: f64,
    b: f64,
    kronrod: Vec<f64>,
    error: Vec<f64>,
}

fn gk15<F>(f: &F, a: f64, b: f64) -> Panel
where
    F: Fn(f64) -> Vec<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let dim = fc.len();
    let mut kronrod: Vec<f64> = fc.iter().map(|v| v * WGK[7]).collect();
    let mut gauss: Vec<f64> = fc.iter().map(|v| v * WG[3]).collect();
    for j in 0..7 {
        let dx = half * XGK[j];
        let lo = f(center - dx);
        let hi = f(center + dx);
        for i in 0..dim {
            let sum = lo[i] + hi[i];
            kronrod[i] += WGK[j] * sum;
            if j % 2 == 1 {
                gauss[i] += WG[j / 2] * sum;
            }
        }
    }
    let error = kronrod
        .iter_mut()
        .zip(&mut gauss)
        .map(|(k, g)| {
            *k *= half;
            *g *= half;
            (*k - *g).abs()
        })
        .collect();
    Panel {
        a,
        b,
        kronrod,
        error,
    }
}

/// Integrates `f` over `[a, b]` starting from `initial_panels` equal panels
/// and bisecting the worst panel until every component's estimated error is
/// below `rel_tol` times its magnitude.
///
/// Components whose integral is zero are judged against the largest
/// component instead.
pub fn integrate_vector<F>(
    f: F,
    a: f64,
    b: f64,
    initial_panels: usize,
    rel_tol: f64,
    max_panels: usize,
) -> Result<Vec<f64>>
where
    F: Fn(f64) -> Vec<f64>,
{
    let initial_panels = initial_panels.max(1);
    let width = (b - a) / initial_panels as f64;
    let mut panels: Vec<Panel> = (0..initial_panels)
        .map(|i| {
            let lo = a + width * i as f64;
            let hi = if i + 1 == initial_panels {
                b
            } else {
                a + width * (i + 1) as f64
            };
            gk15(&f, lo, hi)
        })
        .collect();
    let dim = panels[0].kronrod.len();

    loop {
        let mut total = vec![0.0; dim];
        let mut error = vec![0.0; dim];
        for p in &panels {
            for i in 0..dim {
                total[i] += p.kronrod[i];
                error[i] += p.error[i];
            }
        }
        let largest = total.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let scale: Vec<f64> = total
            .iter()
            .map(|v| if *v != 0.0 { v.abs() } else { largest })
            .collect();
        let achieved = (0..dim)
            .map(|i| if scale[i] > 0.0 { error[i] / scale[i] } else { 0.0 })
            .fold(0.0_f64, f64::max);
        if achieved <= rel_tol {
            return Ok(total);
        }
        if panels.len() >= max_panels {
            return Err(Error::QuadratureNotConverged {
                achieved,
                panels: panels.len(),
            });
        }

        let score = |p: &Panel| {
            (0..dim)
                .map(|i| if scale[i] > 0.0 { p.error[i] / scale[i] } else { 0.0 })
                .fold(0.0_f64, f64::max)
        };
        let worst = (0..panels.len())
            .max_by(|&i, &j| score(&panels[i]).total_cmp(&score(&panels[j])))
            .unwrap_or(0);
        let Panel { a: lo, b: hi, .. } = panels.swap_remove(worst);
        let mid = 0.5 * (lo + hi);
        if !(mid > lo && mid < hi) {
            return Err(Error::QuadratureNotConverged {
                achieved,
                panels: panels.len() + 1,
            });
        }
        panels.push(gk15(&f, lo, mid));
        panels.push(gk15(&f, mid, hi));
    }
}
