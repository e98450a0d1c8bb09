//! Reproducing kernel `K_J(x) = ∫_J e^{2πixt} dt` of the Paley–Wiener space
//! of a symmetric interval union `J`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::PwError;
use crate::regions::IntervalUnion;

/// Below this value of `|ω|·max(|u|,|v|)` the power series is used.
const SERIES_SWITCH: f64 = 4.0;

/// `∫_u^v t^k e^{iωt} dt` for `k = 0..=kmax`, written into `out`.
pub fn moments(u: f64, v: f64, omega: f64, kmax: usize, out: &mut [Complex64]) {
    let l = u.abs().max(v.abs());
    if (omega * l).abs() < SERIES_SWITCH {
        for (k, o) in out.iter_mut().enumerate().take(kmax + 1) {
            // Σ_m (iω)^m / m! · (v^{k+m+1} - u^{k+m+1}) / (k+m+1)
            let mut acc = Complex64::new(0.0, 0.0);
            let mut coef = Complex64::new(1.0, 0.0);
            let mut vp = v.powi(k as i32 + 1);
            let mut up = u.powi(k as i32 + 1);
            let mut lp = l.powi(k as i32 + 1);
            for m in 0..80 {
                let denom = (k + m + 1) as f64;
                acc += coef * ((vp - up) / denom);
                // Odd/even cancellation can zero single terms, so stop on a bound.
                let bound = coef.norm() * 2.0 * lp / denom;
                if bound <= 1e-17 * acc.norm() || bound < 1e-300 {
                    break;
                }
                lp *= l;
                coef *= Complex64::new(0.0, omega) / (m + 1) as f64;
                vp *= v;
                up *= u;
            }
            *o = acc;
        }
    } else {
        let iw = Complex64::new(0.0, omega);
        let ev = Complex64::from_polar(1.0, omega * v);
        let eu = Complex64::from_polar(1.0, omega * u);
        let mut prev = (ev - eu) / iw;
        out[0] = prev;
        let (mut vp, mut up) = (1.0, 1.0);
        for k in 1..=kmax {
            vp *= v;
            up *= u;
            prev = (ev * vp - eu * up - prev * k as f64) / iw;
            out[k] = prev;
        }
    }
}

/// Kernel of `PW_J` for symmetric `J`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RKernel {
    j: IntervalUnion,
}

impl RKernel {
    pub fn new(j: IntervalUnion) -> Result<Self, PwError> {
        if !j.is_symmetric() {
            return Err(PwError::AsymmetricSpectrum);
        }
        Ok(Self { j })
    }

    pub fn spectrum(&self) -> &IntervalUnion {
        &self.j
    }

    /// `K^{(k)}(x)` for `k = 0..=kmax`.
    pub fn derivs(&self, x: f64, kmax: usize, out: &mut [f64]) {
        let omega = 2.0 * PI * x;
        let mut m = [Complex64::new(0.0, 0.0); 16];
        assert!(kmax < m.len());
        out[..=kmax].iter_mut().for_each(|o| *o = 0.0);
        for &(u, v) in self.j.intervals() {
            moments(u, v, omega, kmax, &mut m);
            let mut ipow = Complex64::new(1.0, 0.0);
            let mut tp = 1.0;
            for k in 0..=kmax {
                out[k] += (ipow * m[k]).re * tp;
                ipow *= Complex64::new(0.0, 1.0);
                tp *= 2.0 * PI;
            }
        }
    }

    pub fn eval(&self, x: f64, k: usize) -> f64 {
        let mut out = [0.0; 16];
        self.derivs(x, k, &mut out);
        out[k]
    }

    pub fn value(&self, x: f64) -> f64 {
        self.eval(x, 0)
    }
}
