//! Arithmetic progressions against projected lattice sets: exact counting,
//! three-term progressions and their lift to the lattice, saturation in
//! growing windows and a greedy cover probe.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{AlgebraicReal, Lattice2D};
use crate::regions::SetPoint;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ApError {
    #[error("progression difference is zero")]
    ZeroDifference,
}

/// `{a + k d : k ∈ ℤ}` with `a, d ∈ ℚ(√2, √3)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ap {
    pub a: AlgebraicReal,
    pub d: AlgebraicReal,
}

impl Ap {
    pub fn new(a: AlgebraicReal, d: AlgebraicReal) -> Result<Self, ApError> {
        if d.is_zero() {
            return Err(ApError::ZeroDifference);
        }
        Ok(Self { a, d })
    }

    pub fn rational(a_num: i64, a_den: i64, d_num: i64, d_den: i64) -> Result<Self, ApError> {
        Self::new(AlgebraicReal::from_ratio(a_num, a_den), AlgebraicReal::from_ratio(d_num, d_den))
    }

    /// The progression traced by `p_1(γ_0 + kδ)`.
    pub fn along_lattice(lattice: &Lattice2D, start: (i64, i64), step: (i64, i64)) -> Result<Self, ApError> {
        Self::new(lattice.point(start.0, start.1).x, lattice.point(step.0, step.1).x)
    }

    /// The index `k` with `x = a + k d`, decided in the field.
    pub fn index_of(&self, x: &AlgebraicReal) -> Option<i64> {
        let q = (x - &self.a).checked_div(&self.d)?;
        q.as_integer().and_then(|k| i64::try_from(k).ok())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum MatchMode {
    Exact,
    Tolerance { tau: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApMatch {
    pub index: i64,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApCount {
    pub count: usize,
    pub matches: Vec<ApMatch>,
}

/// Points of the list lying on the progression.
pub fn ap_count(points: &[AlgebraicReal], ap: &Ap, mode: MatchMode) -> ApCount {
    let a = ap.a.to_f64();
    let d = ap.d.to_f64();
    let mut matches = Vec::new();
    for p in points {
        let v = p.to_f64();
        let kf = (v - a) / d;
        let k = kf.round();
        match mode {
            MatchMode::Exact => {
                // Float screen with a wide margin; the decision is exact.
                if (kf - k).abs() > 1e-6 * kf.abs().max(1.0) {
                    continue;
                }
                if let Some(idx) = ap.index_of(p) {
                    matches.push(ApMatch { index: idx, value: v });
                }
            }
            MatchMode::Tolerance { tau } => {
                if (v - (a + k * d)).abs() <= tau {
                    matches.push(ApMatch { index: k as i64, value: v });
                }
            }
        }
    }
    ApCount { count: matches.len(), matches }
}

/// Exact progression counts within `[-R, R]` for each radius.
pub fn ap_saturation(points: &[SetPoint], ap: &Ap, radii: &[f64]) -> Vec<usize> {
    let (a, d) = (ap.a.to_f64(), ap.d.to_f64());
    let near: Vec<AlgebraicReal> = points
        .iter()
        .filter(|p| {
            let kf = (p.approx - a) / d;
            (kf - kf.round()).abs() <= 1e-6 * kf.abs().max(1.0)
        })
        .map(|p| p.value.clone())
        .collect();
    let hits = ap_count(&near, ap, MatchMode::Exact);
    radii.iter().map(|&r| hits.matches.iter().filter(|m| m.value.abs() <= r).count()).collect()
}

/// Three points with `2 p_1(γ_2) = p_1(γ_1) + p_1(γ_3)` exactly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApTriple {
    pub points: [(i64, i64); 3],
    pub values: [f64; 3],
    /// `2γ_2 = γ_1 + γ_3` in the lattice.
    pub lifts: bool,
    /// The line through the three points is not parallel to the x-axis.
    pub non_horizontal: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TripleReport {
    pub points: usize,
    pub triples: Vec<ApTriple>,
    pub violations: usize,
}

/// All exact three-term progressions `p_1 < p_2 < p_3` among the points,
/// with their lattice lift checked.
pub fn exact_ap_triples(points: &[SetPoint]) -> TripleReport {
    let mut sorted: Vec<&SetPoint> = points.iter().collect();
    sorted.sort_by(|a, b| a.approx.total_cmp(&b.approx));
    let vals: Vec<f64> = sorted.iter().map(|p| p.approx).collect();
    let two = AlgebraicReal::from_integer(2);
    let mut triples = Vec::new();
    for i in 0..sorted.len() {
        for k in i + 2..sorted.len() {
            let mid = 0.5 * (vals[i] + vals[k]);
            let tol = 1e-9 * mid.abs().max(1.0);
            let lo = vals.partition_point(|&v| v < mid - tol);
            for j in lo.max(i + 1)..k {
                if vals[j] > mid + tol {
                    break;
                }
                let (p1, p2, p3) = (sorted[i], sorted[j], sorted[k]);
                if &two * &p2.value != &p1.value + &p3.value {
                    continue;
                }
                let lifts = 2 * p2.m == p1.m + p3.m && 2 * p2.n == p1.n + p3.n;
                let non_horizontal = p1.transverse != p2.transverse || p2.transverse != p3.transverse;
                triples.push(ApTriple {
                    points: [(p1.m, p1.n), (p2.m, p2.n), (p3.m, p3.n)],
                    values: [p1.approx, p2.approx, p3.approx],
                    lifts,
                    non_horizontal,
                });
            }
        }
    }
    let violations = triples.iter().filter(|t| !t.lifts || !t.non_horizontal).count();
    TripleReport { points: points.len(), triples, violations }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverStep {
    pub start: f64,
    pub difference: f64,
    pub covered: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverReport {
    pub points: usize,
    pub covered: usize,
    pub fraction: f64,
    pub steps: Vec<CoverStep>,
    pub note: String,
}

const COVER_NOTE: &str = "greedy cover of a finite window; finite sets are always coverable, so this is trend evidence only";

/// Residue class of `d` holding the most points, as `(count, anchor)`.
fn best_class(points: &[f64], d: f64, tau: f64) -> (usize, f64) {
    let mut res: Vec<(f64, f64)> = points.iter().map(|&p| (p.rem_euclid(d), p)).collect();
    res.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = res.len();
    let mut best = (0, 0.0);
    let mut j = 0;
    // Sliding window over residues, wrapping once around the circle.
    for i in 0..n {
        if j < i {
            j = i;
        }
        while j < i + n {
            let r = if j < n { res[j].0 } else { res[j - n].0 + d };
            if r - res[i].0 <= tau {
                j += 1;
            } else {
                break;
            }
        }
        if j - i > best.0 {
            best = (j - i, res[i].1);
        }
    }
    best
}

/// Greedy cover by `k` progressions with differences from `diffs`, matching
/// within `tau`.
pub fn ap_cover_probe(points: &[f64], k: usize, diffs: &[f64], tau: f64) -> CoverReport {
    let total = points.len();
    let mut left: Vec<f64> = points.to_vec();
    let mut steps = Vec::new();
    for _ in 0..k {
        if left.is_empty() {
            break;
        }
        let mut best = (0usize, 0.0f64, 0.0f64);
        for &d in diffs {
            if !(d > 0.0) {
                continue;
            }
            let (c, a) = best_class(&left, d, tau);
            if c > best.0 {
                best = (c, a, d);
            }
        }
        if best.0 == 0 {
            break;
        }
        let (_, a, d) = best;
        let on = |p: f64| {
            let r = (p - a).rem_euclid(d);
            r <= tau || d - r <= tau
        };
        let before = left.len();
        left.retain(|&p| !on(p));
        steps.push(CoverStep { start: a, difference: d, covered: before - left.len() });
    }
    let covered = total - left.len();
    let fraction = if total == 0 { 1.0 } else { covered as f64 / total as f64 };
    CoverReport { points: total, covered, fraction, steps, note: COVER_NOTE.into() }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regions::{generate_set, SetKind, SetRequest, StaircaseSequences};

    fn ints(v: &[i64]) -> Vec<AlgebraicReal> {
        v.iter().map(|&k| AlgebraicReal::from_integer(k)).collect()
    }

    #[test]
    fn count_examples() {
        let ap = Ap::rational(0, 1, 1, 1).unwrap();
        assert_eq!(ap_count(&ints(&[0, 1, 2, 4]), &ap, MatchMode::Exact).count, 4);
        let pts = vec![AlgebraicReal::zero(), AlgebraicReal::sqrt2()];
        let ap = Ap::rational(0, 1, 1, 7).unwrap();
        assert_eq!(ap_count(&pts, &ap, MatchMode::Exact).count, 1);
        assert_eq!(Ap::rational(1, 1, 0, 1), Err(ApError::ZeroDifference));
    }

    #[test]
    fn exact_mode_rejects_near_misses() {
        // 1 + 1e-13 is within float reach of the progression but not on it.
        let near = AlgebraicReal::from_ratio(10_000_000_000_001, 10_000_000_000_000);
        let ap = Ap::rational(0, 1, 1, 1).unwrap();
        assert_eq!(ap_count(std::slice::from_ref(&near), &ap, MatchMode::Exact).count, 0);
        assert_eq!(ap_count(&[near], &ap, MatchMode::Tolerance { tau: 1e-9 }).count, 1);
    }

    #[test]
    fn lattice_progression_indices() {
        let l = Lattice2D::default_lattice();
        let ap = Ap::along_lattice(&l, (1, 0), (2, -1)).unwrap();
        for k in -3..=3 {
            let p = l.point(1 + 2 * k, -k).x;
            assert_eq!(ap.index_of(&p), Some(k));
        }
    }

    fn lambda(window: f64) -> Vec<SetPoint> {
        let l = Lattice2D::default_lattice();
        let s = StaircaseSequences::default_primal();
        generate_set(&SetRequest { kind: SetKind::Lambda, lattice: &l, seqs: &s, window, transverse_cap: None })
            .unwrap()
            .points
    }

    #[test]
    fn symmetric_triple_only() {
        let l = Lattice2D::default_lattice();
        let g = l.point(1, 0);
        let mk = |m: i64, n: i64| {
            let p = l.point(m, n);
            SetPoint { approx: p.x_f64(), transverse: p.y_f64(), value: p.x, m, n }
        };
        let pts = vec![mk(-1, 0), mk(0, 0), mk(1, 0)];
        let r = exact_ap_triples(&pts);
        assert_eq!(r.triples.len(), 1);
        assert_eq!(r.violations, 0);
        assert_eq!(r.triples[0].values[2], g.x_f64());
    }

    #[test]
    fn triples_match_cubic_brute_force() {
        let pts = lambda(16.0);
        let r = exact_ap_triples(&pts);
        assert_eq!(r.violations, 0);
        let mut brute = 0;
        let n = pts.len();
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let (a, b, c) = (&pts[i], &pts[j], &pts[k]);
                    if a.approx < b.approx && b.approx < c.approx && 2 * b.m == a.m + c.m && 2 * b.n == a.n + c.n {
                        brute += 1;
                    }
                }
            }
        }
        assert!(brute > 0);
        assert_eq!(r.triples.len(), brute);
    }

    #[test]
    fn saturation_counts_match_ap_count() {
        let pts = lambda(64.0);
        let l = Lattice2D::default_lattice();
        let ap = Ap::along_lattice(&l, (0, 0), (3, -2)).unwrap();
        let radii = [4.0, 16.0, 64.0];
        let sat = ap_saturation(&pts, &ap, &radii);
        assert!(sat.windows(2).all(|w| w[0] <= w[1]));
        for (r, c) in radii.iter().zip(&sat) {
            let inside: Vec<AlgebraicReal> = pts.iter().filter(|p| p.approx.abs() <= *r).map(|p| p.value.clone()).collect();
            assert_eq!(ap_count(&inside, &ap, MatchMode::Exact).count, *c);
        }
    }

    #[test]
    fn cover_examples() {
        let r = ap_cover_probe(&[], 3, &[1.0], 1e-9);
        assert_eq!(r.fraction, 1.0);
        let one: Vec<f64> = (0..20).map(|k| 0.3 + 0.7 * k as f64).collect();
        let r = ap_cover_probe(&one, 1, &[0.5, 0.7, 1.1], 1e-9);
        assert_eq!(r.fraction, 1.0);
        assert_eq!(r.steps[0].difference, 0.7);
    }
}
