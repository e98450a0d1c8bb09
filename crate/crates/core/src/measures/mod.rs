//! Atomic measures `μ = Σ_Γ φ̂(y) δ_x` and `μ̂ = |det Γ|⁻¹ Σ_{Γ*} φ(v) δ_u`,
//! their translation-bounded norm and the weighted summation formula.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{AlgebraicReal, Lattice2D};
use crate::paley_wiener::PwError;
use crate::regions::GeneratedSet;

pub const ATOM_TOL: f64 = 1e-9;
pub const SUPPORT_TOL: f64 = 1e-6;
const MATCH_TOL: f64 = 1e-9;
const SCAN_STEP: f64 = 0.01;
const QUIET_STRIPS: usize = 3;
const MAX_STRIPS: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error(transparent)]
    Pw(#[from] PwError),
    #[error("tail estimate {tail:.3e} exceeds tolerance {tol:.3e} for test function (x0 = {x0}, σ = {sigma})")]
    TruncationDominated { tail: f64, tol: f64, x0: f64, sigma: f64 },
    #[error("set window {set} does not cover measure window {measure}")]
    WindowMismatch { set: f64, measure: f64 },
    #[error("atoms carry no lattice provenance")]
    ProvenanceMissing,
    #[error("no decay within {0} unit strips")]
    NoDecay(usize),
    #[error("csv export failed: {0}")]
    Export(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MeasureSource {
    Mu,
    MuHat,
    Synthetic,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub position: f64,
    pub exact: Option<AlgebraicReal>,
    pub weight: f64,
    /// The other coordinate of the generating lattice point.
    pub transverse: Option<f64>,
    pub coeffs: Option<(i64, i64)>,
}

impl Atom {
    pub fn synthetic(position: f64, weight: f64) -> Self {
        Self { position, exact: None, weight, transverse: None, coeffs: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomicMeasure {
    /// Sorted by position.
    pub atoms: Vec<Atom>,
    pub window: f64,
    /// Bound on the transverse coordinate used in the enumeration.
    pub transverse_bound: f64,
    pub source: MeasureSource,
    pub dropped_max: f64,
    pub dropped_total: f64,
}

/// How far to enumerate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Enumeration {
    /// `|p_1| <= window`; the transverse bound is given or found by a decay scan.
    Window { window: f64, transverse: Option<f64> },
    /// `|m|, |n| <= k` in lattice coefficients.
    Coefficients { k: i64 },
}

impl AtomicMeasure {
    pub fn synthetic(mut atoms: Vec<Atom>, window: f64) -> Self {
        atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
        Self { atoms, window, transverse_bound: 0.0, source: MeasureSource::Synthetic, dropped_max: 0.0, dropped_total: 0.0 }
    }

    pub fn len(&self) -> usize {
        self.atoms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.atoms.is_empty()
    }

    pub fn positions(&self) -> Vec<f64> {
        self.atoms.iter().map(|a| a.position).collect()
    }

    /// Atoms at `-x` carry the same weight, within `tol`.
    pub fn is_symmetric(&self, tol: f64) -> bool {
        let n = self.atoms.len();
        (0..n).all(|i| {
            let (a, b) = (&self.atoms[i], &self.atoms[n - 1 - i]);
            (a.position + b.position).abs() <= MATCH_TOL * a.position.abs().max(1.0) && (a.weight - b.weight).abs() <= tol
        })
    }

    /// Counts of positive and negative weights.
    pub fn sign_pattern(&self) -> (usize, usize) {
        let pos = self.atoms.iter().filter(|a| a.weight > 0.0).count();
        (pos, self.atoms.len() - pos)
    }

    /// CSV with the float position, the exact coefficients on `1, √2, √3, √6`
    /// as numerator/denominator pairs (empty when unknown) and the weight.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), MeasureError> {
        let err = |e: csv::Error| MeasureError::Export(e.to_string());
        let mut wr = csv::Writer::from_writer(w);
        let mut header = vec!["position_float".to_string()];
        for c in ["a", "b", "c", "d"] {
            header.push(format!("position_exact_{c}_num"));
            header.push(format!("position_exact_{c}_den"));
        }
        header.push("weight".into());
        wr.write_record(&header).map_err(err)?;
        for a in &self.atoms {
            let mut row = vec![format!("{:.17e}", a.position)];
            match &a.exact {
                Some(x) => {
                    for q in x.coeffs() {
                        row.push(q.numer().to_string());
                        row.push(q.denom().to_string());
                    }
                }
                None => row.extend(std::iter::repeat_n(String::new(), 8)),
            }
            row.push(format!("{:.17e}", a.weight));
            wr.write_record(&row).map_err(err)?;
        }
        wr.flush().map_err(|e| MeasureError::Export(e.to_string()))
    }
}

/// Sum in a fixed pairwise order.
pub fn pairwise_sum(v: &[f64]) -> f64 {
    if v.len() <= 8 {
        return v.iter().sum();
    }
    let mid = v.len() / 2;
    pairwise_sum(&v[..mid]) + pairwise_sum(&v[mid..])
}

/// Start of the first run of [`QUIET_STRIPS`] unit strips `[k, k+1]` on which
/// `|f| <= tol` at every sample.
pub fn decay_bound(f: &impl Fn(f64) -> Result<f64, PwError>, tol: f64) -> Result<f64, MeasureError> {
    let per = (1.0 / SCAN_STEP).round() as usize;
    let mut quiet = 0;
    for k in 0..MAX_STRIPS {
        let mut loud = false;
        for i in 0..=per {
            if f(k as f64 + SCAN_STEP * i as f64)?.abs() > tol {
                loud = true;
                break;
            }
        }
        if loud {
            quiet = 0;
        } else {
            quiet += 1;
            if quiet == QUIET_STRIPS {
                return Ok((k + 1 - QUIET_STRIPS) as f64);
            }
        }
    }
    Err(MeasureError::NoDecay(MAX_STRIPS))
}

fn build(
    lattice: &Lattice2D,
    weight: &impl Fn(f64) -> Result<f64, PwError>,
    scale: f64,
    enumeration: Enumeration,
    atom_tol: f64,
    source: MeasureSource,
) -> Result<AtomicMeasure, MeasureError> {
    let mut raw: Vec<(i64, i64, f64, f64)> = Vec::new();
    let (window, tbound) = match enumeration {
        Enumeration::Window { window, transverse } => {
            let y = match transverse {
                Some(y) => y,
                None => decay_bound(weight, atom_tol / scale.max(f64::MIN_POSITIVE))?,
            };
            lattice.scan_f64((-window, window), (-y, y), 1e-9, |m, n, x, t| {
                if x.abs() <= window && t.abs() <= y {
                    raw.push((m, n, x, t));
                }
            });
            (window, y)
        }
        Enumeration::Coefficients { k } => {
            for m in -k..=k {
                for n in -k..=k {
                    let (x, t) = lattice.point_f64(m, n);
                    raw.push((m, n, x, t));
                }
            }
            // Largest square [-W, W]² whose lattice points all lie in the box.
            let (a, c) = lattice.coords_f64(1.0, 0.0);
            let (b, d) = lattice.coords_f64(0.0, 1.0);
            let w = k as f64 / (a.abs() + b.abs()).max(c.abs() + d.abs());
            (w, w)
        }
    };
    let mut atoms = Vec::with_capacity(raw.len());
    let (mut dropped_max, mut dropped_total) = (0.0f64, 0.0);
    for (m, n, x, t) in raw {
        let w = scale * weight(t)?;
        if w == 0.0 {
            continue;
        }
        if w.abs() <= atom_tol {
            dropped_max = dropped_max.max(w.abs());
            dropped_total += w.abs();
            continue;
        }
        let exact = lattice.point(m, n).x;
        atoms.push(Atom { position: x, exact: Some(exact), weight: w, transverse: Some(t), coeffs: Some((m, n)) });
    }
    atoms.sort_by(|a, b| a.position.total_cmp(&b.position));
    Ok(AtomicMeasure { atoms, window, transverse_bound: tbound, source, dropped_max, dropped_total })
}

/// `μ = Σ_{(x,y)∈Γ} φ̂(y) δ_x`.
pub fn build_mu(
    lattice: &Lattice2D,
    phi_hat: impl Fn(f64) -> Result<f64, PwError>,
    enumeration: Enumeration,
    atom_tol: f64,
) -> Result<AtomicMeasure, MeasureError> {
    build(lattice, &phi_hat, 1.0, enumeration, atom_tol, MeasureSource::Mu)
}

/// `μ̂ = |det Γ|⁻¹ Σ_{(u,v)∈Γ*} φ(v) δ_u`; `dual` is `Γ*`.
pub fn build_mu_hat(
    dual: &Lattice2D,
    phi: impl Fn(f64) -> f64,
    primal_covolume: f64,
    enumeration: Enumeration,
    atom_tol: f64,
) -> Result<AtomicMeasure, MeasureError> {
    let f = |v: f64| Ok(phi(v));
    build(dual, &f, 1.0 / primal_covolume, enumeration, atom_tol, MeasureSource::MuHat)
}

/// `sup_x Σ_{a ∈ [x, x+1]} |w_a|` over closed unit windows.
pub fn tb_norm(measure: &AtomicMeasure) -> f64 {
    let a = &measure.atoms;
    let mut best = 0.0f64;
    let mut j = 0;
    let mut run = 0.0;
    for i in 0..a.len() {
        if j < i {
            j = i;
            run = 0.0;
        }
        while j < a.len() && a[j].position <= a[i].position + 1.0 {
            run += a[j].weight.abs();
            j += 1;
        }
        best = best.max(run);
        run -= a[i].weight.abs();
    }
    best
}

/// `g(x) = exp(-π ((x - x₀)/σ)²)` with `ĝ(t) = σ exp(-π σ² t²) e^{-2πi x₀ t}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub x0: f64,
    pub sigma: f64,
}

impl TestFunction {
    pub fn new(x0: f64, sigma: f64) -> Self {
        Self { x0, sigma }
    }

    pub fn value(&self, x: f64) -> f64 {
        let z = (x - self.x0) / self.sigma;
        (-PI * z * z).exp()
    }

    pub fn fourier(&self, t: f64) -> Complex64 {
        let amp = self.sigma * (-PI * self.sigma * self.sigma * t * t).exp();
        Complex64::from_polar(amp, -2.0 * PI * self.x0 * t)
    }

    /// `n` Gaussians with centres spread over `[-3, 3]` and widths shuffled
    /// over `[0.5, 2]`.
    pub fn family(n: usize) -> Vec<Self> {
        let span = (n.max(2) - 1) as f64;
        (0..n)
            .map(|i| Self::new(-3.0 + 6.0 * i as f64 / span, 0.5 + 1.5 * ((7 * i) % n) as f64 / span))
            .collect()
    }

    /// `max |ĝ|` on `|t| >= r`.
    fn fourier_max_beyond(&self, r: f64) -> f64 {
        self.sigma * (-PI * self.sigma * self.sigma * r * r).exp()
    }

    /// `max |g|` on `|x| >= r`.
    fn value_max_beyond(&self, r: f64) -> f64 {
        let d = (r - self.x0.abs()).max(0.0) / self.sigma;
        (-PI * d * d).exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsfRow {
    pub test: TestFunction,
    pub lhs_re: f64,
    pub lhs_im: f64,
    pub rhs_re: f64,
    pub rhs_im: f64,
    pub abs_gap: f64,
    pub rel_gap: f64,
    pub lhs_tail: f64,
    pub rhs_tail: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PsfReport {
    pub tolerance: f64,
    pub rows: Vec<PsfRow>,
    pub pass: bool,
}

/// Tail bound `‖ν‖_tb · Σ_k 2 sup_{|t| ∈ [W+k, W+k+1]} |h|` for a decreasing
/// envelope of `h` beyond the window.
fn tail_bound(tb: f64, window: f64, sup_beyond: impl Fn(f64) -> f64) -> f64 {
    let mut s = 0.0;
    for k in 0..10_000 {
        let v = sup_beyond(window + k as f64);
        s += 2.0 * v;
        if v < 1e-300 || (k > 10 && v < 1e-18 * s) {
            break;
        }
    }
    tb * s
}

/// Both sides of `Σ_Λ μ(λ) ĝ(λ) = Σ_S μ̂(s) g(s)` by direct summation, with
/// tail estimates from the translation-bounded norms.
pub fn psf_check(mu: &AtomicMeasure, mu_hat: &AtomicMeasure, tests: &[TestFunction], rel_tol: f64) -> Result<PsfReport, MeasureError> {
    let tb_mu = tb_norm(mu);
    let tb_hat = tb_norm(mu_hat);
    let mut rows = Vec::with_capacity(tests.len());
    for &g in tests {
        let (re, im): (Vec<f64>, Vec<f64>) = mu
            .atoms
            .iter()
            .map(|a| {
                let z = g.fourier(a.position) * a.weight;
                (z.re, z.im)
            })
            .unzip();
        let lhs = Complex64::new(pairwise_sum(&re), pairwise_sum(&im));
        let terms: Vec<f64> = mu_hat.atoms.iter().map(|a| a.weight * g.value(a.position)).collect();
        let rhs = Complex64::new(pairwise_sum(&terms), 0.0);
        let lhs_tail = tail_bound(tb_mu, mu.window, |r| g.fourier_max_beyond(r)) + mu.dropped_total * g.sigma;
        let rhs_tail = tail_bound(tb_hat, mu_hat.window, |r| g.value_max_beyond(r)) + mu_hat.dropped_total;
        let scale = rhs.norm().max(f64::MIN_POSITIVE);
        let tail = lhs_tail.max(rhs_tail);
        if tail > rel_tol * scale {
            return Err(MeasureError::TruncationDominated { tail, tol: rel_tol * scale, x0: g.x0, sigma: g.sigma });
        }
        let abs_gap = (lhs - rhs).norm();
        let rel_gap = abs_gap / scale;
        rows.push(PsfRow {
            test: g,
            lhs_re: lhs.re,
            lhs_im: lhs.im,
            rhs_re: rhs.re,
            rhs_im: rhs.im,
            abs_gap,
            rel_gap,
            lhs_tail,
            rhs_tail,
            pass: rel_gap <= rel_tol,
        });
    }
    let pass = rows.iter().all(|r| r.pass);
    Ok(PsfReport { tolerance: rel_tol, rows, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SupportReport {
    pub ok: bool,
    /// Largest `|weight|` at a position outside the set.
    pub stray: f64,
    pub worst_position: Option<f64>,
    pub checked: usize,
}

/// Whether every atom heavier than `tol` sits on a point of `set`.
/// Points are matched by lattice coefficients when both sides carry them.
pub fn support_check(measure: &AtomicMeasure, set: &GeneratedSet, tol: f64) -> Result<SupportReport, MeasureError> {
    if set.window + MATCH_TOL < measure.window {
        return Err(MeasureError::WindowMismatch { set: set.window, measure: measure.window });
    }
    let by_coeff: std::collections::HashSet<(i64, i64)> = set.points.iter().map(|p| (p.m, p.n)).collect();
    let values = set.values_f64();
    let mut stray = 0.0f64;
    let mut worst = None;
    let mut checked = 0;
    for a in &measure.atoms {
        let member = match a.coeffs {
            Some(c) => by_coeff.contains(&c),
            None => {
                let i = values.partition_point(|&v| v < a.position - MATCH_TOL);
                values.get(i).is_some_and(|v| (v - a.position).abs() <= MATCH_TOL)
            }
        };
        checked += 1;
        if !member && a.weight.abs() > stray {
            stray = a.weight.abs();
            worst = Some(a.position);
        }
    }
    Ok(SupportReport { ok: stray <= tol, stray, worst_position: worst, checked })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GapRow {
    pub radius: f64,
    pub points: usize,
    /// Smallest gap between consecutive points of `(-R, R)`; infinite with
    /// fewer than two points.
    pub min_gap: f64,
}

/// Minimal consecutive gap of a sorted point list inside `(-R, R)` for each radius.
pub fn min_gap_profile(points: &[f64], radii: &[f64]) -> Vec<GapRow> {
    radii
        .iter()
        .map(|&r| {
            let inside: Vec<f64> = points.iter().copied().filter(|x| x.abs() < r).collect();
            let min_gap = inside.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min);
            GapRow { radius: r, points: inside.len(), min_gap }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Decomposition {
    pub threshold: f64,
    /// Atoms with `|p_2(γ)| <= threshold`: a model-set slice.
    pub mu1: AtomicMeasure,
    pub mu2: AtomicMeasure,
    pub tb_mu2: f64,
}

impl Decomposition {
    /// `μ_1 + μ_2 = μ` atom by atom: the parts are disjoint and their union
    /// reproduces every atom of `μ` bit for bit.
    pub fn is_exact_split(&self, mu: &AtomicMeasure) -> bool {
        let key = |a: &Atom| (a.coeffs, a.position.to_bits(), a.weight.to_bits());
        let mut parts: Vec<_> = self.mu1.atoms.iter().chain(&self.mu2.atoms).map(key).collect();
        let mut whole: Vec<_> = mu.atoms.iter().map(key).collect();
        parts.sort_unstable();
        whole.sort_unstable();
        parts == whole
    }
}

/// Splits `μ` by the transverse coordinate of each atom at `h_N`.
pub fn decompose_model(mu: &AtomicMeasure, stage: usize, h: &[f64]) -> Result<Decomposition, MeasureError> {
    if mu.atoms.iter().any(|a| a.transverse.is_none()) {
        return Err(MeasureError::ProvenanceMissing);
    }
    let threshold = if stage == 0 { 0.0 } else { h.get(stage - 1).copied().unwrap_or(f64::INFINITY) };
    let (a1, a2): (Vec<Atom>, Vec<Atom>) =
        mu.atoms.iter().cloned().partition(|a| a.transverse.is_some_and(|t| t.abs() <= threshold));
    let part = |atoms: Vec<Atom>| AtomicMeasure { atoms, dropped_max: 0.0, dropped_total: 0.0, ..mu.clone() };
    let mu1 = part(a1);
    let mu2 = part(a2);
    let tb_mu2 = tb_norm(&mu2);
    Ok(Decomposition { threshold, mu1, mu2, tb_mu2 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regions::{generate_set, SetKind, SetRequest, StaircaseSequences};

    fn gaussian(x: f64) -> f64 {
        (-PI * x * x).exp()
    }

    #[test]
    fn tb_norm_examples() {
        let empty = AtomicMeasure::synthetic(vec![], 10.0);
        assert_eq!(tb_norm(&empty), 0.0);
        let comb = AtomicMeasure::synthetic((-10..=10).map(|k| Atom::synthetic(k as f64, 1.0)).collect(), 10.0);
        assert_eq!(tb_norm(&comb), 2.0);
        let mixed = AtomicMeasure::synthetic(
            vec![Atom::synthetic(0.0, -1.0), Atom::synthetic(0.5, 2.0), Atom::synthetic(1.5, 4.0)],
            2.0,
        );
        assert_eq!(tb_norm(&mixed), 6.0);
    }

    #[test]
    fn zero_function_gives_empty_measures() {
        let l = Lattice2D::default_lattice();
        let e = Enumeration::Window { window: 5.0, transverse: Some(5.0) };
        assert!(build_mu(&l, |_| Ok(0.0), e, ATOM_TOL).unwrap().is_empty());
        assert!(build_mu_hat(&l.dual().unwrap(), |_| 0.0, l.covolume(), e, ATOM_TOL).unwrap().is_empty());
    }

    #[test]
    fn mu_hat_single_point_weight() {
        let l = Lattice2D::default_lattice();
        let d = l.dual().unwrap();
        let m = build_mu_hat(&d, gaussian, l.covolume(), Enumeration::Coefficients { k: 3 }, 0.0).unwrap();
        let (u, v) = d.point_f64(1, -2);
        let a = m.atoms.iter().find(|a| a.coeffs == Some((1, -2))).unwrap();
        assert_eq!(a.position, u);
        assert!((a.weight - gaussian(v) / l.covolume()).abs() < 1e-15);
    }

    #[test]
    fn mu_is_symmetric_and_linear() {
        let l = Lattice2D::default_lattice();
        let e = Enumeration::Window { window: 8.0, transverse: Some(3.0) };
        let f1 = |y: f64| Ok(gaussian(y));
        let f2 = |y: f64| Ok((-y * y).exp() * 0.5);
        let a = build_mu(&l, f1, e, 0.0).unwrap();
        let b = build_mu(&l, f2, e, 0.0).unwrap();
        let s = build_mu(&l, |y| Ok(gaussian(y) + 0.5 * (-y * y).exp()), e, 0.0).unwrap();
        assert!(a.is_symmetric(0.0));
        assert_eq!(a.len(), s.len());
        for ((x, y), z) in a.atoms.iter().zip(&b.atoms).zip(&s.atoms) {
            assert!((x.weight + y.weight - z.weight).abs() < 1e-15);
        }
    }

    #[test]
    fn decay_bound_of_gaussian() {
        let y = decay_bound(&|y: f64| Ok(gaussian(y)), 1e-9).unwrap();
        assert_eq!(y, 3.0);
    }

    #[test]
    fn gaussian_psf_baseline() {
        let l = Lattice2D::default_lattice();
        let d = l.dual().unwrap();
        let e = Enumeration::Coefficients { k: 40 };
        let mu = build_mu(&l, |y| Ok(gaussian(y)), e, 0.0).unwrap();
        let mh = build_mu_hat(&d, gaussian, l.covolume(), e, 0.0).unwrap();
        let tests = [TestFunction::new(0.0, 1.0), TestFunction::new(-2.5, 0.5), TestFunction::new(1.3, 2.0)];
        let r = psf_check(&mu, &mh, &tests, 1e-6).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.rows[0].lhs_im.abs() < 1e-12);
    }

    #[test]
    fn narrow_test_function_is_truncation_dominated() {
        let l = Lattice2D::default_lattice();
        let d = l.dual().unwrap();
        let e = Enumeration::Window { window: 12.0, transverse: Some(4.0) };
        let mu = build_mu(&l, |y| Ok(gaussian(y)), e, 0.0).unwrap();
        let mh = build_mu_hat(&d, gaussian, l.covolume(), e, 0.0).unwrap();
        let r = psf_check(&mu, &mh, &[TestFunction::new(0.3, 0.01)], 1e-3);
        assert!(matches!(r, Err(MeasureError::TruncationDominated { .. })));
    }

    #[test]
    fn support_examples() {
        let l = Lattice2D::default_lattice();
        let seqs = StaircaseSequences::default_primal();
        let set = generate_set(&SetRequest { kind: SetKind::Lambda, lattice: &l, seqs: &seqs, window: 5.0, transverse_cap: None }).unwrap();
        let empty = AtomicMeasure::synthetic(vec![], 5.0);
        let r = support_check(&empty, &set, SUPPORT_TOL).unwrap();
        assert!(r.ok && r.stray == 0.0);
        let bad = AtomicMeasure::synthetic(vec![Atom::synthetic(0.123456, 1.0)], 5.0);
        let r = support_check(&bad, &set, SUPPORT_TOL).unwrap();
        assert!(!r.ok && r.stray == 1.0);
        let wide = AtomicMeasure::synthetic(vec![], 50.0);
        assert!(matches!(support_check(&wide, &set, SUPPORT_TOL), Err(MeasureError::WindowMismatch { .. })));
    }

    #[test]
    fn gap_profile_nonincreasing() {
        let l = Lattice2D::default_lattice();
        let seqs = StaircaseSequences::default_primal();
        let set = generate_set(&SetRequest { kind: SetKind::Lambda, lattice: &l, seqs: &seqs, window: 64.0, transverse_cap: None }).unwrap();
        let p = min_gap_profile(&set.values_f64(), &[4.0, 16.0, 64.0]);
        assert!(p.iter().all(|r| r.min_gap > 0.0 && r.min_gap.is_finite()));
        assert!(p.windows(2).all(|w| w[1].min_gap <= w[0].min_gap));
    }

    #[test]
    fn first_strip_gap_is_model_set_gap() {
        // Inside |x| < a_1 = 4 the set is {p1(γ) : |p2(γ)| <= h_1}: the same slice
        // at every radius once the window holds two points.
        let l = Lattice2D::default_lattice();
        let mut pts = Vec::new();
        l.scan_f64((-4.0, 4.0), (-1.0, 1.0), 0.0, |_, _, x, y| {
            if x.abs() < 4.0 && y.abs() <= 1.0 {
                pts.push(x);
            }
        });
        pts.sort_by(f64::total_cmp);
        let p = min_gap_profile(&pts, &[3.0, 3.5, 4.0]);
        assert!(p.iter().all(|r| r.min_gap == p[0].min_gap));
    }

    #[test]
    fn decomposition_partitions() {
        let l = Lattice2D::default_lattice();
        let e = Enumeration::Window { window: 10.0, transverse: Some(3.0) };
        let mu = build_mu(&l, |y| Ok(gaussian(y)), e, 0.0).unwrap();
        let d = decompose_model(&mu, 2, &[0.5, 1.0, 2.0]).unwrap();
        assert_eq!(d.mu1.len() + d.mu2.len(), mu.len());
        let mut all: Vec<&Atom> = d.mu1.atoms.iter().chain(&d.mu2.atoms).collect();
        all.sort_by(|a, b| a.position.total_cmp(&b.position));
        for (a, b) in all.iter().zip(&mu.atoms) {
            assert_eq!(*a, b);
        }
        assert!(d.is_exact_split(&mu));
        let mut broken = d.clone();
        broken.mu2.atoms.pop();
        assert!(!broken.is_exact_split(&mu));
        let far = decompose_model(&mu, 3, &[0.5, 1.0, 5.0]).unwrap();
        assert!(far.mu2.is_empty() && far.tb_mu2 == 0.0);
        let syn = AtomicMeasure::synthetic(vec![Atom::synthetic(0.0, 1.0)], 1.0);
        assert!(matches!(decompose_model(&syn, 1, &[1.0]), Err(MeasureError::ProvenanceMissing)));
    }

    #[test]
    fn csv_columns() {
        let l = Lattice2D::default_lattice();
        let mu = build_mu(&l, |y| Ok(gaussian(y)), Enumeration::Coefficients { k: 1 }, 0.0).unwrap();
        let mut buf = Vec::new();
        mu.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("position_float,position_exact_a_num,position_exact_a_den"));
        assert_eq!(text.lines().count(), mu.len() + 1);
    }
}
