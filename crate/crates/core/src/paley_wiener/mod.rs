//! Paley–Wiener spaces on interval unions: reproducing kernels, biorthogonal
//! families, the smooth interpolant, seminorms and a density probe.

mod envelope;
mod gram;
mod interpolant;
mod kernel;
pub mod quadrature;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::Lattice2D;
use crate::regions::IntervalUnion;

pub use envelope::{bump_raw, phi1, Envelope, MAX_DERIV, Y_CUT};
pub use gram::{condition_estimate, gram_matrix, BiorthogonalSystem};
pub use interpolant::{envelope_fits, interpolate_schwartz, InterpolantData, SchwartzInterpolant, TimeFunction, FREQ_TOL};
pub use kernel::{moments, RKernel};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PwError {
    #[error("spectrum must be symmetric")]
    AsymmetricSpectrum,
    #[error("Gram condition estimate {cond:.3e} exceeds cap {cap:.3e}")]
    IllConditioned { cond: f64, cap: f64 },
    #[error("J + [-ε, ε] is not contained in the ambient spectrum")]
    EnvelopeTooWide,
    #[error("quadrature reached error {achieved:.3e} against tolerance {tol:.3e}")]
    QuadratureNotConverged { achieved: f64, tol: f64 },
    #[error("stored interpolant data has inconsistent sizes")]
    MalformedData,
}

/// Measured `sup_x |x^m f^{(k)}(x)|` on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeminormEstimate {
    pub m: usize,
    pub k: usize,
    pub radius: f64,
    pub step: f64,
    pub sup: f64,
    pub argmax: f64,
    /// Largest sampled value just beyond the grid, over one envelope width.
    pub tail: f64,
}

/// Grid maximizer refined by golden-section search on the neighbouring cell.
fn refine(g: impl Fn(f64) -> f64, x0: f64, step: f64, lo_bound: f64, hi_bound: f64) -> (f64, f64) {
    let mut a = (x0 - step).max(lo_bound);
    let mut b = (x0 + step).min(hi_bound);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - r * (b - a);
    let mut d = a + r * (b - a);
    let (mut fc, mut fd) = (g(c), g(d));
    for _ in 0..24 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - r * (b - a);
            fc = g(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + r * (b - a);
            fd = g(d);
        }
    }
    let f0 = g(x0);
    [(x0, f0), (c, fc), (d, fd)].into_iter().fold((x0, f0), |best, p| if p.1 > best.1 { p } else { best })
}

/// All seminorms `‖f‖_{m,k}` for `m <= max_m`, `k <= max_k` from one pass
/// over `[-R, R]` (or `[0, R]` when `even_or_odd` declares `|f^{(k)}|` even).
pub fn seminorm_table(
    f: &impl TimeFunction,
    max_m: usize,
    max_k: usize,
    radius: f64,
    step: f64,
    even_or_odd: bool,
) -> Vec<Vec<SeminormEstimate>> {
    let lo = if even_or_odd { 0.0 } else { -radius };
    let n = ((radius - lo) / step).round() as usize;
    let mut best = vec![vec![(0.0f64, 0.0f64); max_k + 1]; max_m + 1];
    let mut d = vec![0.0; max_k + 1];
    for i in 0..=n {
        let x = lo + step * i as f64;
        f.derivs(x, max_k, &mut d);
        let ax = x.abs();
        for (m, row) in best.iter_mut().enumerate() {
            let w = ax.powi(m as i32);
            for (k, cell) in row.iter_mut().enumerate() {
                let v = w * d[k].abs();
                if v > cell.1 {
                    *cell = (x, v);
                }
            }
        }
    }
    let tail_len = 8.0 * step.max(1.0);
    let mut tail = vec![vec![0.0f64; max_k + 1]; max_m + 1];
    let tn = (tail_len / (4.0 * step)).ceil() as usize;
    for i in 1..=tn {
        let x = radius + 4.0 * step * i as f64;
        f.derivs(x, max_k, &mut d);
        for (m, row) in tail.iter_mut().enumerate() {
            for (k, cell) in row.iter_mut().enumerate() {
                *cell = cell.max(x.powi(m as i32) * d[k].abs());
            }
        }
    }
    let mut out = Vec::with_capacity(max_m + 1);
    for m in 0..=max_m {
        let mut row = Vec::with_capacity(max_k + 1);
        for k in 0..=max_k {
            let (x0, v0) = best[m][k];
            let (argmax, sup) = if v0 > 0.0 {
                let g = |x: f64| {
                    let mut dd = vec![0.0; k + 1];
                    f.derivs(x, k, &mut dd);
                    x.abs().powi(m as i32) * dd[k].abs()
                };
                let (xr, vr) = refine(g, x0, step, lo, radius);
                if vr > v0 { (xr, vr) } else { (x0, v0) }
            } else {
                (x0, v0)
            };
            row.push(SeminormEstimate { m, k, radius, step, sup, argmax, tail: tail[m][k] });
        }
        out.push(row);
    }
    out
}

/// `‖f‖_{m,k}` measured on `[-R, R]` with step `δ`.
pub fn seminorm_estimate(f: &impl TimeFunction, m: usize, k: usize, radius: f64, step: f64) -> SeminormEstimate {
    let table = seminorm_table(f, m, k, radius, step, false);
    table[m][k]
}

/// One window of [`interpolation_probe`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeRow {
    pub window: f64,
    pub nodes: usize,
    /// Infinite when the Gram matrix is numerically singular.
    pub condition: f64,
    pub singular: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProbeReport {
    pub interval: (f64, f64),
    pub omega: IntervalUnion,
    pub omega_measure: f64,
    /// Density `|I| / |det Γ|` of the model set.
    pub threshold: f64,
    pub ratio: f64,
    pub rows: Vec<ProbeRow>,
}

impl ProbeReport {
    /// `max cond / min cond` over the windows.
    pub fn spread(&self) -> f64 {
        let c = self.rows.iter().map(|r| r.condition);
        c.clone().fold(0.0, f64::max) / c.fold(f64::INFINITY, f64::min)
    }

    /// Smallest ratio of consecutive condition numbers; a singular window
    /// counts as infinite growth.
    pub fn min_growth(&self) -> f64 {
        self.rows.windows(2).map(|w| w[1].condition / w[0].condition).fold(f64::INFINITY, f64::min)
    }
}

/// Conditioning of `PW_Ω` Gram systems on the model set
/// `{p1(γ) : p2(γ) ∈ I}` truncated to growing windows.
pub fn interpolation_probe(lattice: &Lattice2D, interval: (f64, f64), omega: &IntervalUnion, windows: &[f64]) -> Result<ProbeReport, PwError> {
    let kernel = RKernel::new(omega.clone())?;
    let threshold = (interval.1 - interval.0) / lattice.covolume();
    let mut rows = Vec::with_capacity(windows.len());
    for &r in windows {
        let mut nodes = Vec::new();
        lattice.scan_f64((-r, r), interval, 0.0, |_, _, x, y| {
            if x.abs() <= r && y >= interval.0 && y <= interval.1 {
                nodes.push(x);
            }
        });
        nodes.sort_by(f64::total_cmp);
        let g = gram_matrix(&kernel, &nodes);
        let condition = condition_estimate(&g);
        rows.push(ProbeRow { window: r, nodes: nodes.len(), condition, singular: !condition.is_finite() });
    }
    let m = omega.measure();
    Ok(ProbeReport {
        interval,
        omega: omega.clone(),
        omega_measure: m,
        threshold,
        ratio: m / threshold,
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seminorm_examples() {
        let zero = (|_: f64| 0.0,);
        assert_eq!(seminorm_estimate(&zero, 0, 0, 5.0, 0.1).sup, 0.0);
        let k = RKernel::new(IntervalUnion::symmetric(0.5)).unwrap();
        let s = seminorm_estimate(&k, 0, 0, 10.0, 0.01);
        assert!((s.sup - 1.0).abs() < 1e-12);
        assert!(s.argmax.abs() < 1e-6);
    }

    #[test]
    fn envelope_seminorm_stable_under_refinement() {
        let e = Envelope::new(0.25);
        let a = seminorm_estimate(&e, 2, 1, 200.0, 0.05).sup;
        let b = seminorm_estimate(&e, 2, 1, 200.0, 0.025).sup;
        assert!(a.is_finite() && a > 0.0);
        assert!(((a - b) / b).abs() < 0.01);
    }

    #[test]
    fn probe_empty_spectrum_singular() {
        let l = Lattice2D::default_lattice();
        let r = interpolation_probe(&l, (-0.5, 0.5), &IntervalUnion::empty(), &[5.0, 10.0]).unwrap();
        assert!(r.rows.iter().all(|row| row.singular));
    }
}
