//! The smooth bump `ψ_ε` supported in `(-ε, ε)` and its Fourier transform
//! `Φ_ε(x) = ∫ ψ_ε(s) e^{2πixs} ds`, with derivatives.
//!
//! `Φ_ε(x) = Φ_1(εx)`, so a single table of `Φ_1^{(k)}` serves every `ε`.
//! The table is piecewise Chebyshev on `[0, Y_CUT]`; beyond `Y_CUT` the true
//! values are below the quadrature noise and are returned as exact zeros.

use std::f64::consts::PI;
use std::sync::OnceLock;

use serde::{Deserialize, Serialize};

use super::quadrature::composite;

/// Largest tabulated derivative order.
pub const MAX_DERIV: usize = 6;
/// Argument of `Φ_1` beyond which the envelope is taken to be zero.
pub const Y_CUT: f64 = 160.0;

const PANEL: f64 = 0.5;
const CHEB_DEG: usize = 24;

/// Unnormalized `exp(-1/(1-t^2))` on `(-1, 1)`.
pub fn bump_raw(t: f64) -> f64 {
    if t.abs() >= 1.0 {
        0.0
    } else {
        (-1.0 / (1.0 - t * t)).exp()
    }
}

struct Table {
    norm: f64,
    /// `coef[k][panel][j]`
    coef: Vec<Vec<[f64; CHEB_DEG + 1]>>,
}

fn s_rule() -> (Vec<f64>, Vec<f64>) {
    composite(0.0, 1.0, 192, 20)
}

/// `∫_{-1}^{1} exp(-1/(1-t^2)) dt`.
fn normalization() -> f64 {
    let (s, w) = s_rule();
    2.0 * s.iter().zip(&w).map(|(s, w)| w * bump_raw(*s)).sum::<f64>()
}

fn table() -> &'static Table {
    static T: OnceLock<Table> = OnceLock::new();
    T.get_or_init(build_table)
}

fn build_table() -> Table {
    let (s, w) = s_rule();
    let norm = normalization();
    let base: Vec<f64> = s.iter().zip(&w).map(|(s, w)| 2.0 * w * bump_raw(*s) / norm).collect();
    let pow: Vec<Vec<f64>> = (0..=MAX_DERIV)
        .map(|k| base.iter().zip(&s).map(|(b, s)| b * (2.0 * PI * s).powi(k as i32)).collect())
        .collect();
    let panels = (Y_CUT / PANEL).ceil() as usize;
    let n = CHEB_DEG + 1;
    let cheb_x: Vec<f64> = (0..n).map(|j| (PI * (j as f64 + 0.5) / n as f64).cos()).collect();
    let mut coef = vec![vec![[0.0; CHEB_DEG + 1]; panels]; MAX_DERIV + 1];
    let mut vals = vec![vec![0.0; n]; MAX_DERIV + 1];
    for p in 0..panels {
        let lo = p as f64 * PANEL;
        for (j, cx) in cheb_x.iter().enumerate() {
            let y = lo + 0.5 * PANEL * (cx + 1.0);
            let mut cs = [0.0; MAX_DERIV + 1];
            let mut sn = [0.0; MAX_DERIV + 1];
            for (i, si) in s.iter().enumerate() {
                let (sv, cv) = (2.0 * PI * y * si).sin_cos();
                for k in 0..=MAX_DERIV {
                    cs[k] += pow[k][i] * cv;
                    sn[k] += pow[k][i] * sv;
                }
            }
            for k in 0..=MAX_DERIV {
                vals[k][j] = if k % 2 == 0 {
                    sign_pow(k / 2) * cs[k]
                } else {
                    sign_pow(k.div_ceil(2)) * sn[k]
                };
            }
        }
        for k in 0..=MAX_DERIV {
            for m in 0..n {
                let mut c = 0.0;
                for j in 0..n {
                    c += vals[k][j] * (PI * m as f64 * (j as f64 + 0.5) / n as f64).cos();
                }
                coef[k][p][m] = c * 2.0 / n as f64 * if m == 0 { 0.5 } else { 1.0 };
            }
        }
    }
    Table { norm, coef }
}

fn sign_pow(e: usize) -> f64 {
    if e.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

fn clenshaw(c: &[f64; CHEB_DEG + 1], t: f64) -> f64 {
    let (mut b1, mut b2) = (0.0, 0.0);
    for &ck in c.iter().skip(1).rev() {
        let b0 = 2.0 * t * b1 - b2 + ck;
        b2 = b1;
        b1 = b0;
    }
    t * b1 - b2 + c[0]
}

/// `Φ_1^{(k)}(y)` for the unit bump.
pub fn phi1(y: f64, k: usize) -> f64 {
    assert!(k <= MAX_DERIV, "derivative order {k} exceeds {MAX_DERIV}");
    let a = y.abs();
    if a >= Y_CUT {
        return 0.0;
    }
    let t = table();
    let p = ((a / PANEL) as usize).min(t.coef[k].len() - 1);
    let u = 2.0 * (a - p as f64 * PANEL) / PANEL - 1.0;
    let v = clenshaw(&t.coef[k][p], u);
    if k % 2 == 1 && y < 0.0 {
        -v
    } else {
        v
    }
}

/// Smooth even envelope with unit-integral bump supported in `(-ε, ε)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Envelope {
    pub eps: f64,
}

impl Envelope {
    pub fn new(eps: f64) -> Self {
        assert!(eps > 0.0);
        Self { eps }
    }

    /// `Φ^{(k)}(x)`.
    pub fn deriv(&self, x: f64, k: usize) -> f64 {
        self.eps.powi(k as i32) * phi1(self.eps * x, k)
    }

    pub fn value(&self, x: f64) -> f64 {
        phi1(self.eps * x, 0)
    }

    /// The bump `ψ_ε(s)`, the transform of `Φ`.
    pub fn bump(&self, s: f64) -> f64 {
        bump_raw(s / self.eps) / (self.eps * table().norm)
    }

    /// `|x|` beyond which `Φ` and all its derivatives are zero.
    pub fn time_radius(&self) -> f64 {
        Y_CUT / self.eps
    }
}
