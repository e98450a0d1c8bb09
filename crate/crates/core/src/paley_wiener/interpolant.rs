//! The smooth interpolant `f(x) = Σ_λ c(λ) Φ(x - λ) φ_λ(x)` and its
//! Fourier transform.

use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::envelope::Envelope;
use super::gram::BiorthogonalSystem;
use super::kernel::RKernel;
use super::quadrature::mapped;
use super::PwError;
use crate::regions::IntervalUnion;

/// Anything whose derivatives can be sampled.
pub trait TimeFunction {
    /// Writes `f^{(k)}(x)` for `k = 0..=kmax` into `out`.
    fn derivs(&self, x: f64, kmax: usize, out: &mut [f64]);

    fn value(&self, x: f64) -> f64 {
        let mut o = [0.0];
        self.derivs(x, 0, &mut o);
        o[0]
    }
}

impl TimeFunction for Envelope {
    fn derivs(&self, x: f64, kmax: usize, out: &mut [f64]) {
        for (k, o) in out.iter_mut().enumerate().take(kmax + 1) {
            *o = self.deriv(x, k);
        }
    }
}

impl TimeFunction for RKernel {
    fn derivs(&self, x: f64, kmax: usize, out: &mut [f64]) {
        RKernel::derivs(self, x, kmax, out)
    }
}

impl<F: Fn(f64) -> f64> TimeFunction for (F,) {
    fn derivs(&self, x: f64, kmax: usize, out: &mut [f64]) {
        assert_eq!(kmax, 0, "closure functions carry no derivatives");
        out[0] = (self.0)(x);
    }
}

/// Absolute tolerance for the frequency-side quadrature, relative to the
/// data scale.
pub const FREQ_TOL: f64 = 1e-10;

const FREQ_ORDER: usize = 20;
const FREQ_CHECK_ORDER: usize = 14;
const MIN_PANELS: usize = 32;
const CHUNK_PANELS: usize = 48;

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Frequency-side panel sums over `(-ε, ε)`.
struct FreqPlan {
    edges: Vec<f64>,
    /// `prefix[p][μ]`: integral over the first `p` panels.
    prefix: Vec<Vec<Complex64>>,
    err: f64,
}

/// `f(x) = Σ_λ c(λ) Φ(x-λ) φ_λ(x)` with `spec(f) ⊂ J + [-ε, ε]`.
pub struct SchwartzInterpolant {
    system: Arc<BiorthogonalSystem>,
    envelope: Envelope,
    coeffs: Vec<f64>,
    active: Vec<usize>,
    freq: OnceLock<Result<FreqPlan, PwError>>,
}

impl Clone for SchwartzInterpolant {
    fn clone(&self) -> Self {
        Self::from_parts(self.system.clone(), self.envelope, self.coeffs.clone())
    }
}

impl std::fmt::Debug for SchwartzInterpolant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SchwartzInterpolant")
            .field("nodes", &self.system.len())
            .field("active", &self.active.len())
            .field("eps", &self.envelope.eps)
            .finish()
    }
}

/// Serialized form carrying everything needed to evaluate without solving.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpolantData {
    pub j: IntervalUnion,
    pub eps: f64,
    pub nodes: Vec<f64>,
    pub coeffs: Vec<f64>,
    pub condition: f64,
    /// Row-major `G^{-1}`.
    pub gram_inverse: Vec<f64>,
}

/// Solves the interpolation problem `f(λ) = c(λ)` on the node set.
pub fn interpolate_schwartz(
    j: &IntervalUnion,
    eps: f64,
    nodes: Vec<f64>,
    c: Vec<f64>,
    cond_cap: f64,
    ambient: Option<&IntervalUnion>,
) -> Result<SchwartzInterpolant, PwError> {
    if let Some(omega) = ambient {
        let padded = j.pad(eps).map_err(|_| PwError::EnvelopeTooWide)?;
        if !omega.contains_union(&padded) {
            return Err(PwError::EnvelopeTooWide);
        }
    }
    let kernel = RKernel::new(j.clone())?;
    let system = Arc::new(BiorthogonalSystem::new(kernel, nodes, cond_cap)?);
    Ok(SchwartzInterpolant::new(system, Envelope::new(eps), c))
}

impl SchwartzInterpolant {
    pub fn new(system: Arc<BiorthogonalSystem>, envelope: Envelope, coeffs: Vec<f64>) -> Self {
        assert_eq!(coeffs.len(), system.len());
        Self::from_parts(system, envelope, coeffs)
    }

    fn from_parts(system: Arc<BiorthogonalSystem>, envelope: Envelope, coeffs: Vec<f64>) -> Self {
        let active = (0..coeffs.len()).filter(|&i| coeffs[i] != 0.0).collect();
        Self { system, envelope, coeffs, active, freq: OnceLock::new() }
    }

    pub fn system(&self) -> &Arc<BiorthogonalSystem> {
        &self.system
    }

    pub fn envelope(&self) -> Envelope {
        self.envelope
    }

    pub fn nodes(&self) -> &[f64] {
        self.system.nodes()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// `J + [-ε, ε]`.
    pub fn spectrum(&self) -> IntervalUnion {
        self.system.kernel().spectrum().pad(self.envelope.eps).expect("ε > 0")
    }

    /// Same nodes and system, data scaled by `s`.
    pub fn scaled(&self, s: f64) -> Self {
        Self::from_parts(self.system.clone(), self.envelope, self.coeffs.iter().map(|c| c * s).collect())
    }

    /// Averages the data over `λ ↔ -λ`; nodes must be symmetric.
    pub fn symmetrized(&self) -> Self {
        let n = self.coeffs.len();
        let c = (0..n).map(|i| 0.5 * (self.coeffs[i] + self.coeffs[n - 1 - i])).collect();
        Self::from_parts(self.system.clone(), self.envelope, c)
    }

    /// `max_λ |f(λ) - c(λ)|`.
    pub fn node_residual(&self) -> f64 {
        self.nodes()
            .iter()
            .zip(&self.coeffs)
            .map(|(&x, c)| (self.value(x) - c).abs())
            .fold(0.0, f64::max)
    }

    /// Largest `|x|` where `f` can be nonzero.
    pub fn time_radius(&self) -> f64 {
        self.active
            .iter()
            .map(|&i| self.nodes()[i].abs())
            .fold(0.0f64, f64::max)
            + self.envelope.time_radius()
    }

    pub fn to_data(&self) -> InterpolantData {
        let inv = self.system.inverse();
        let n = inv.nrows();
        let mut rows = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                rows.push(inv[(i, j)]);
            }
        }
        InterpolantData {
            j: self.system.kernel().spectrum().clone(),
            eps: self.envelope.eps,
            nodes: self.nodes().to_vec(),
            coeffs: self.coeffs.clone(),
            condition: self.system.condition(),
            gram_inverse: rows,
        }
    }

    pub fn from_data(d: InterpolantData) -> Result<Self, PwError> {
        let n = d.nodes.len();
        if d.coeffs.len() != n || d.gram_inverse.len() != n * n {
            return Err(PwError::MalformedData);
        }
        let kernel = RKernel::new(d.j)?;
        let inv = DMatrix::from_row_slice(n, n, &d.gram_inverse);
        let system = BiorthogonalSystem::from_inverse(kernel, d.nodes, inv, d.condition);
        Ok(Self::from_parts(Arc::new(system), Envelope::new(d.eps), d.coeffs))
    }

    /// Fourier transform `f̂(t)`; exactly zero off `J + [-ε, ε]`.
    pub fn fourier(&self, t: f64) -> Result<Complex64, PwError> {
        let eps = self.envelope.eps;
        let j = self.system.kernel().spectrum();
        if self.active.is_empty() || j.distance_to(t) >= eps {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let plan = self.freq.get_or_init(|| self.build_plan()).as_ref().map_err(|e| e.clone())?;
        let n = self.system.len();
        let mut acc = vec![Complex64::new(0.0, 0.0); n];
        let mut err = 0.0;
        for &(u, v) in j.intervals() {
            let lo = (t - v).max(-eps);
            let hi = (t - u).min(eps);
            if lo >= hi {
                continue;
            }
            err += self.integrate_range(plan, lo, hi, &mut acc);
        }
        let tol = FREQ_TOL * self.scale();
        let total_err = err + plan.err;
        if total_err > tol {
            return Err(PwError::QuadratureNotConverged { achieved: total_err, tol });
        }
        let mut out = Complex64::new(0.0, 0.0);
        for (mu, a) in self.nodes().iter().zip(&acc) {
            out += Complex64::from_polar(1.0, -2.0 * PI * mu * t) * a;
        }
        Ok(out)
    }

    fn scale(&self) -> f64 {
        self.coeffs.iter().map(|c| c.abs()).sum::<f64>().max(1.0)
    }

    /// `g_μ(s) = Σ_λ B_{λμ} c_λ e^{-2πiλs}` for many `s`, as a pair of
    /// real matrices (rows `μ`, columns `s`).
    fn g_matrix(&self, s: &[f64]) -> (DMatrix<f64>, DMatrix<f64>) {
        let inv = self.system.inverse();
        let n = self.system.len();
        let na = self.active.len();
        let mut b_act = DMatrix::zeros(n, na);
        for (col, &i) in self.active.iter().enumerate() {
            b_act.set_column(col, &inv.column(i));
        }
        let mut ure = DMatrix::zeros(na, s.len());
        let mut uim = DMatrix::zeros(na, s.len());
        for (row, &i) in self.active.iter().enumerate() {
            let lam = self.nodes()[i];
            let c = self.coeffs[i];
            for (col, &sv) in s.iter().enumerate() {
                let (sn, cs) = (-2.0 * PI * lam * sv).sin_cos();
                ure[(row, col)] = c * cs;
                uim[(row, col)] = c * sn;
            }
        }
        (&b_act * ure, &b_act * uim)
    }

    /// Adds `∫ ψ(s) e^{2πiμs} g_μ(s) ds` over the nodes into `acc`.
    fn accumulate(&self, s: &[f64], w: &[f64], acc: &mut [Vec<Complex64>], group: &[usize]) {
        let (gre, gim) = self.g_matrix(s);
        for (col, (&sv, &wv)) in s.iter().zip(w).enumerate() {
            let b = wv * self.envelope.bump(sv);
            if b == 0.0 {
                continue;
            }
            let slot = &mut acc[group[col]];
            for (mu_i, mu) in self.nodes().iter().enumerate() {
                let e = Complex64::from_polar(b, 2.0 * PI * mu * sv);
                slot[mu_i] += e * Complex64::new(gre[(mu_i, col)], gim[(mu_i, col)]);
            }
        }
    }

    fn build_plan(&self) -> Result<FreqPlan, PwError> {
        let eps = self.envelope.eps;
        let n = self.system.len();
        let max_mu = self.nodes().iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let max_lam = self.active.iter().fold(0.0f64, |a, &i| a.max(self.nodes()[i].abs()));
        let omega = max_mu + max_lam + 1.0;
        let panels = ((2.0 * eps * omega).ceil() as usize).max(MIN_PANELS);
        let h = 2.0 * eps / panels as f64;
        let edges: Vec<f64> = (0..=panels).map(|p| -eps + h * p as f64).collect();
        let mut sums = vec![vec![Complex64::new(0.0, 0.0); n]; panels];
        let mut check = vec![vec![Complex64::new(0.0, 0.0); n]; panels];
        for start in (0..panels).step_by(CHUNK_PANELS) {
            let end = (start + CHUNK_PANELS).min(panels);
            for (order, target) in [(FREQ_ORDER, &mut sums), (FREQ_CHECK_ORDER, &mut check)] {
                let mut s = Vec::new();
                let mut w = Vec::new();
                let mut group = Vec::new();
                for p in start..end {
                    let (ps, pw) = mapped(edges[p], edges[p + 1], order);
                    group.extend(std::iter::repeat_n(p, order));
                    s.extend(ps);
                    w.extend(pw);
                }
                self.accumulate(&s, &w, target, &group);
            }
        }
        let mut err = 0.0;
        for (a, b) in sums.iter().zip(&check) {
            err += a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        }
        let mut prefix = vec![vec![Complex64::new(0.0, 0.0); n]; panels + 1];
        for p in 0..panels {
            for m in 0..n {
                prefix[p + 1][m] = prefix[p][m] + sums[p][m];
            }
        }
        Ok(FreqPlan { edges, prefix, err })
    }

    /// Integral over `[lo, hi] ⊂ [-ε, ε]` accumulated into `acc`; returns the
    /// error estimate of the partial panels.
    fn integrate_range(&self, plan: &FreqPlan, lo: f64, hi: f64, acc: &mut [Complex64]) -> f64 {
        let panels = plan.edges.len() - 1;
        let eps = self.envelope.eps;
        let h = 2.0 * eps / panels as f64;
        let p_lo = (((lo + eps) / h).ceil() as usize).min(panels);
        let p_hi = (((hi + eps) / h).floor() as usize).min(panels);
        let mut pieces = Vec::new();
        if p_lo <= p_hi {
            for (m, a) in acc.iter_mut().enumerate() {
                *a += plan.prefix[p_hi][m] - plan.prefix[p_lo][m];
            }
            pieces.push((lo, plan.edges[p_lo]));
            pieces.push((plan.edges[p_hi], hi));
        } else {
            pieces.push((lo, hi));
        }
        let mut err = 0.0;
        for (a, b) in pieces {
            if b - a <= 0.0 {
                continue;
            }
            let n = self.system.len();
            let mut fine = vec![vec![Complex64::new(0.0, 0.0); n]];
            let mut coarse = vec![vec![Complex64::new(0.0, 0.0); n]];
            let (s1, w1) = mapped(a, b, FREQ_ORDER);
            self.accumulate(&s1, &w1, &mut fine, &vec![0; s1.len()]);
            let (s2, w2) = mapped(a, b, FREQ_CHECK_ORDER);
            self.accumulate(&s2, &w2, &mut coarse, &vec![0; s2.len()]);
            for m in 0..n {
                acc[m] += fine[0][m];
            }
            err += fine[0].iter().zip(&coarse[0]).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max);
        }
        err
    }
}

impl TimeFunction for SchwartzInterpolant {
    fn derivs(&self, x: f64, kmax: usize, out: &mut [f64]) {
        out[..=kmax].iter_mut().for_each(|o| *o = 0.0);
        let rad = self.envelope.time_radius();
        let nodes = self.nodes();
        let near: Vec<usize> = self.active.iter().copied().filter(|&i| (x - nodes[i]).abs() < rad).collect();
        if near.is_empty() {
            return;
        }
        let n = nodes.len();
        let inv = self.system.inverse();
        // w_q = B (c ∘ Φ^{(q)}(x - Λ))
        let mut w = vec![vec![0.0; n]; kmax + 1];
        let mut phi = [0.0; 16];
        for &i in &near {
            self.envelope.derivs(x - nodes[i], kmax, &mut phi);
            let col = inv.column(i);
            for (q, wq) in w.iter_mut().enumerate() {
                let v = self.coeffs[i] * phi[q];
                if v != 0.0 {
                    for (m, wm) in wq.iter_mut().enumerate() {
                        *wm += col[m] * v;
                    }
                }
            }
        }
        let kernel = self.system.kernel();
        let mut kd = [0.0; 16];
        for (m, mu) in nodes.iter().enumerate() {
            kernel.derivs(x - mu, kmax, &mut kd);
            for k in 0..=kmax {
                let mut s = 0.0;
                for q in 0..=k {
                    s += binom(k, q) * kd[k - q] * w[q][m];
                }
                out[k] += s;
            }
        }
    }
}

/// Geometric containment `J + [-ε, ε] ⊂ Ω`.
pub fn envelope_fits(j: &IntervalUnion, eps: f64, omega: &IntervalUnion) -> bool {
    j.pad(eps).map(|p| omega.contains_union(&p)).unwrap_or(false)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::paley_wiener::quadrature::composite;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn sample_nodes(seed: u64, n: i32, step: f64) -> Vec<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let half: Vec<f64> = (1..=n).map(|k| k as f64 * step + rng.gen_range(-0.15..0.15) * step).collect();
        let mut nodes: Vec<f64> = half.iter().rev().map(|x| -x).collect();
        nodes.push(0.0);
        nodes.extend(half);
        nodes
    }

    fn build(nodes: Vec<f64>, c: Vec<f64>) -> SchwartzInterpolant {
        interpolate_schwartz(&IntervalUnion::symmetric(0.6), 0.3, nodes, c, 1e10, None).unwrap()
    }

    #[test]
    fn zero_data_is_zero() {
        let nodes = sample_nodes(1, 5, 1.0);
        let f = build(nodes.clone(), vec![0.0; nodes.len()]);
        for x in [-3.0, 0.0, 2.2] {
            assert_eq!(f.value(x), 0.0);
        }
        assert_eq!(f.fourier(0.1).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn indicator_data() {
        let nodes = sample_nodes(2, 8, 1.0);
        let mut c = vec![0.0; nodes.len()];
        c[5] = 1.0;
        let f = build(nodes.clone(), c.clone());
        for (x, cv) in nodes.iter().zip(&c) {
            assert!((f.value(*x) - cv).abs() < 1e-8);
        }
    }

    #[test]
    fn decaying_data_and_linearity() {
        let nodes = sample_nodes(3, 12, 1.0);
        let c: Vec<f64> = nodes.iter().map(|x| (-x.abs()).exp()).collect();
        let f = build(nodes.clone(), c.clone());
        assert!(f.node_residual() < 1e-8);
        let g = f.scaled(2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for _ in 0..50 {
            let x = rng.gen_range(-20.0..20.0);
            assert!((g.value(x) - 2.0 * f.value(x)).abs() < 1e-12);
        }
    }

    #[test]
    fn even_data_even_function() {
        let nodes = sample_nodes(5, 10, 1.1);
        let c: Vec<f64> = nodes.iter().map(|x| 1.0 / (1.0 + x * x)).collect();
        let f = build(nodes, c).symmetrized();
        let mut d1 = [0.0; 4];
        let mut d2 = [0.0; 4];
        for x in [0.3, 2.7, 9.9] {
            f.derivs(x, 3, &mut d1);
            f.derivs(-x, 3, &mut d2);
            for k in 0..4 {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                assert!((d1[k] - sign * d2[k]).abs() < 1e-12);
            }
        }
        let z = f.fourier(0.37).unwrap();
        assert!(z.im.abs() < 1e-12);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let nodes = sample_nodes(6, 6, 1.0);
        let c: Vec<f64> = nodes.iter().map(|x| (-0.3 * x * x).exp()).collect();
        let f = build(nodes, c);
        let h = 1e-4;
        let mut a = [0.0; 6];
        let mut b = [0.0; 6];
        let mut m = [0.0; 6];
        for x in [0.4, 3.3] {
            f.derivs(x + h, 4, &mut a);
            f.derivs(x - h, 4, &mut b);
            f.derivs(x, 5, &mut m);
            for k in 0..5 {
                assert!(((a[k] - b[k]) / (2.0 * h) - m[k + 1]).abs() < 1e-6 * (1.0 + m[k + 1].abs()));
            }
        }
    }

    #[test]
    fn fourier_matches_direct_transform() {
        let nodes = sample_nodes(7, 4, 1.2);
        let c: Vec<f64> = nodes.iter().map(|x| 1.0 / (1.0 + x.abs())).collect();
        let f = build(nodes, c);
        let r = f.time_radius();
        let (xs, ws) = composite(-r, r, 4 * r.ceil() as usize, 20);
        let vals: Vec<f64> = xs.iter().map(|&x| f.value(x)).collect();
        for i in 0..=18 {
            let t = -0.9 + 0.1 * i as f64;
            let direct: f64 = xs.iter().zip(&ws).zip(&vals).map(|((x, w), v)| w * v * (2.0 * PI * t * x).cos()).sum();
            let got = f.fourier(t).unwrap();
            assert!((got.re - direct).abs() < 1e-6, "t={t} got={} direct={direct}", got.re);
        }
        assert_eq!(f.fourier(0.95).unwrap(), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn data_round_trip() {
        let nodes = sample_nodes(8, 3, 1.0);
        let c: Vec<f64> = nodes.iter().map(|x| x * x).collect();
        let f = build(nodes, c);
        let g = SchwartzInterpolant::from_data(f.to_data()).unwrap();
        assert_eq!(f.value(1.234), g.value(1.234));
    }

    #[test]
    fn envelope_too_wide() {
        let r = interpolate_schwartz(
            &IntervalUnion::symmetric(0.6),
            0.3,
            vec![0.0],
            vec![1.0],
            1e10,
            Some(&IntervalUnion::symmetric(0.8)),
        );
        assert!(matches!(r, Err(PwError::EnvelopeTooWide)));
        assert!(envelope_fits(&IntervalUnion::symmetric(0.6), 0.3, &IntervalUnion::symmetric(0.9)));
    }
}
