//! Interval unions, the two-sequence staircase partition of the plane, and
//! the discrete sets obtained by projecting lattice points lying in either
//! part.

mod interval;

use std::cmp::Ordering;
use std::fmt;
use std::io::Write;

use num_rational::BigRational;
use num_traits::Zero;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::lattice::{AlgebraicReal, Lattice2D, Projection};

pub use interval::{IntervalUnion, GEOM_TOL};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum RegionError {
    #[error("negative pad/erode radius {0}")]
    NegativePad(f64),
    #[error("line is parallel to the x-axis")]
    HorizontalLine,
    #[error("sequence {name} is not strictly increasing and positive at index {index}")]
    NonMonotone { name: &'static str, index: usize },
    #[error("escape bound not confirmed within the available sequence terms")]
    EscapeUnverified,
    #[error("transverse extent of {0} is unbounded at this stage; supply a transverse cap")]
    UnboundedTransverse(SetKind),
    #[error("window radius must be positive, got {0}")]
    BadWindow(f64),
    #[error("csv export failed: {0}")]
    Export(String),
}

/// Lazily extended positive sequence, indexed from 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum SequenceRule {
    /// `scale * base^n`
    Power { scale: f64, base: f64 },
    /// `slope * n`
    Linear { slope: f64 },
    /// Finite list; terms past the end are treated as `+inf`.
    Explicit { terms: Vec<f64> },
}

impl SequenceRule {
    /// Term `n >= 1`, or `None` when an explicit list is exhausted.
    pub fn term(&self, n: usize) -> Option<f64> {
        debug_assert!(n >= 1);
        match self {
            SequenceRule::Power { scale, base } => Some(scale * base.powi(n as i32)),
            SequenceRule::Linear { slope } => Some(slope * n as f64),
            SequenceRule::Explicit { terms } => terms.get(n - 1).copied(),
        }
    }

    pub fn is_finite_list(&self) -> bool {
        matches!(self, SequenceRule::Explicit { .. })
    }

    fn check(&self, name: &'static str, prefix: usize) -> Result<(), RegionError> {
        let mut prev = 0.0;
        for n in 1..=prefix {
            let Some(t) = self.term(n) else { break };
            if !(t > prev) || !t.is_finite() {
                return Err(RegionError::NonMonotone { name, index: n });
            }
            prev = t;
        }
        Ok(())
    }
}

/// Which half of the staircase partition a point falls in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Part {
    A,
    B,
}

/// The sequences `0 = a_0 < a_1 < ...` and `0 < h_1 < h_2 < ...`.
///
/// `A = ∪_n {|x| >= a_{n-1}, |y| <= h_n}` and `B = ∪_n {|x| < a_n, |y| > h_n}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaircaseSequences {
    pub a: SequenceRule,
    pub h: SequenceRule,
}

const CHECK_PREFIX: usize = 40;

impl StaircaseSequences {
    pub fn new(a: SequenceRule, h: SequenceRule) -> Result<Self, RegionError> {
        a.check("a", CHECK_PREFIX)?;
        h.check("h", CHECK_PREFIX)?;
        Ok(Self { a, h })
    }

    /// `a_n = 4^n`, `h_n = n`.
    pub fn default_primal() -> Self {
        Self {
            a: SequenceRule::Power { scale: 1.0, base: 4.0 },
            h: SequenceRule::Linear { slope: 1.0 },
        }
    }

    /// Dual staircase with `a*_n = slope * n` and the given `h*` prefix.
    pub fn dual(a_slope: f64, h_star: Vec<f64>) -> Result<Self, RegionError> {
        Self::new(SequenceRule::Linear { slope: a_slope }, SequenceRule::Explicit { terms: h_star })
    }

    /// `a_n`, with `a_0 = 0`.
    pub fn a(&self, n: usize) -> Option<f64> {
        if n == 0 {
            Some(0.0)
        } else {
            self.a.term(n)
        }
    }

    pub fn h(&self, n: usize) -> Option<f64> {
        self.h.term(n)
    }

    /// Keeps only the first `n` strips of `B` (later `h` become `+inf`).
    pub fn truncated(&self, n: usize) -> Self {
        let terms = (1..=n).map_while(|k| self.h(k)).collect();
        Self { a: self.a.clone(), h: SequenceRule::Explicit { terms } }
    }

    /// Number of defined `h` terms, `None` if unbounded.
    pub fn h_len(&self) -> Option<usize> {
        match &self.h {
            SequenceRule::Explicit { terms } => Some(terms.len()),
            _ => None,
        }
    }

    /// `a_{n-1} / h_n` for `n = 1..=upto`.
    pub fn separation_ratios(&self, upto: usize) -> Vec<f64> {
        (1..=upto)
            .map_while(|n| Some(self.a(n - 1)? / self.h(n)?))
            .collect()
    }

    /// First index with `h_n >= t`, or `None` when the `h` terms run out first.
    fn first_h_at_least(&self, t: f64) -> Option<usize> {
        let mut n = 1;
        loop {
            let h = self.h(n)?;
            if h >= t {
                return Some(n);
            }
            n += 1;
        }
    }

    /// Index of the strip of `A` bounding `|y|`, together with the `a`
    /// threshold for membership of `B`.
    fn b_threshold(&self, ay: f64) -> f64 {
        match self.first_h_at_least(ay) {
            Some(n) => self.a(n - 1).unwrap_or(f64::INFINITY),
            None => self.a(self.h_len().unwrap_or(0)).unwrap_or(f64::INFINITY),
        }
    }

    /// Floating classification; `None` if within `tol` of a boundary.
    pub fn classify_f64(&self, x: f64, y: f64, tol: f64) -> Option<Part> {
        let (ax, ay) = (x.abs(), y.abs());
        let n0 = self.first_h_at_least(ay);
        if let Some(n) = n0 {
            if (self.h(n).unwrap() - ay).abs() <= tol {
                return None;
            }
            if n > 1 && (self.h(n - 1).unwrap() - ay).abs() <= tol {
                return None;
            }
        } else if let Some(last) = self.h_len().filter(|&l| l > 0) {
            if (self.h(last).unwrap() - ay).abs() <= tol {
                return None;
            }
        }
        let thr = self.b_threshold(ay);
        if (ax - thr).abs() <= tol {
            return None;
        }
        Some(if ax < thr { Part::B } else { Part::A })
    }

    /// Exact classification of a point with field coordinates.
    pub fn classify_exact(&self, x: &AlgebraicReal, y: &AlgebraicReal) -> Part {
        let ax = x.abs();
        let ay = y.abs();
        let mut n = 1;
        let thr = loop {
            match self.h(n) {
                Some(h) if f64_exact(h) >= ay => break self.a(n - 1),
                Some(_) => n += 1,
                None => break self.a(n - 1),
            }
        };
        match thr {
            Some(t) if ax >= f64_exact(t) => Part::A,
            _ => Part::B,
        }
    }

    /// Floating classification with an exact fallback near boundaries.
    pub fn classify(&self, x: f64, y: f64) -> Part {
        let tol = 1e-9 * x.abs().max(y.abs()).max(1.0);
        self.classify_f64(x, y, tol).unwrap_or_else(|| {
            self.classify_exact(&f64_exact(x), &f64_exact(y))
        })
    }
}

fn f64_exact(t: f64) -> AlgebraicReal {
    AlgebraicReal::from_rational(BigRational::from_float(t).unwrap_or_else(BigRational::zero))
}

/// Membership straight from the strip unions, checking strips `1..=max_n`.
pub fn classify_by_strips(seqs: &StaircaseSequences, x: f64, y: f64, max_n: usize) -> (bool, bool) {
    let (ax, ay) = (x.abs(), y.abs());
    let mut in_a = false;
    let mut in_b = false;
    for n in 1..=max_n {
        let a_prev = seqs.a(n - 1).unwrap_or(f64::INFINITY);
        let a_n = seqs.a(n).unwrap_or(f64::INFINITY);
        let h_n = seqs.h(n).unwrap_or(f64::INFINITY);
        in_a |= ax >= a_prev && ay <= h_n;
        in_b |= ax < a_n && ay > h_n;
    }
    (in_a, in_b)
}

/// The discrete sets produced by projecting lattice points of `A` or `B`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SetKind {
    /// `p1(Γ ∩ A)`
    Lambda,
    /// `p2(Γ ∩ B)`
    Q,
    /// `p1(Γ* ∩ A*)`
    S,
    /// `p2(Γ* ∩ B*)`
    Z,
    /// `p2(Γ* ∩ B*_n)`
    Zn(usize),
    /// `{p2(γ*) : |p1(γ*)| < a*_n}`
    Xn(usize),
}

impl SetKind {
    pub fn projection(self) -> Projection {
        match self {
            SetKind::Lambda | SetKind::S => Projection::P1,
            _ => Projection::P2,
        }
    }

    pub fn is_dual(self) -> bool {
        !matches!(self, SetKind::Lambda | SetKind::Q)
    }

    pub fn parse(s: &str) -> Option<Self> {
        let lower = s.to_ascii_lowercase();
        match lower.as_str() {
            "lambda" | "λ" => Some(SetKind::Lambda),
            "q" => Some(SetKind::Q),
            "s" => Some(SetKind::S),
            "z" => Some(SetKind::Z),
            _ => {
                let (head, idx) = lower.split_once('_').or_else(|| lower.split_at_checked(1))?;
                let n = idx.parse().ok()?;
                match head {
                    "z" => Some(SetKind::Zn(n)),
                    "x" => Some(SetKind::Xn(n)),
                    _ => None,
                }
            }
        }
    }
}

impl fmt::Display for SetKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SetKind::Lambda => write!(f, "Lambda"),
            SetKind::Q => write!(f, "Q"),
            SetKind::S => write!(f, "S"),
            SetKind::Z => write!(f, "Z"),
            SetKind::Zn(n) => write!(f, "Z_{n}"),
            SetKind::Xn(n) => write!(f, "X_{n}"),
        }
    }
}

/// One projected lattice point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SetPoint {
    pub value: AlgebraicReal,
    pub approx: f64,
    /// The other coordinate of the lattice point.
    pub transverse: f64,
    pub m: i64,
    pub n: i64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GeneratedSet {
    pub kind: SetKind,
    pub window: f64,
    pub seqs: StaircaseSequences,
    pub points: Vec<SetPoint>,
}

impl GeneratedSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn values_f64(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.approx).collect()
    }

    pub fn is_symmetric(&self) -> bool {
        let n = self.points.len();
        (0..n).all(|k| self.points[k].value == -&self.points[n - 1 - k].value)
    }

    /// CSV with the exact coefficients on `1, √2, √3, √6` and the float value.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), RegionError> {
        let err = |e: csv::Error| RegionError::Export(e.to_string());
        let mut wr = csv::Writer::from_writer(w);
        wr.write_record(["m", "n", "c1", "c_sqrt2", "c_sqrt3", "c_sqrt6", "value"]).map_err(err)?;
        for p in &self.points {
            let c = p.value.coeffs();
            wr.write_record([
                p.m.to_string(),
                p.n.to_string(),
                c[0].to_string(),
                c[1].to_string(),
                c[2].to_string(),
                c[3].to_string(),
                format!("{:.17e}", p.approx),
            ])
            .map_err(err)?;
        }
        wr.flush().map_err(|e| RegionError::Export(e.to_string()))
    }
}

/// Inputs to [`generate_set`].
#[derive(Debug, Clone)]
pub struct SetRequest<'a> {
    pub kind: SetKind,
    /// Γ for `Lambda`/`Q`, Γ* otherwise.
    pub lattice: &'a Lattice2D,
    /// Primal sequences for `Lambda`/`Q`, dual ones otherwise.
    pub seqs: &'a StaircaseSequences,
    pub window: f64,
    /// Bound on the non-projected coordinate where the region allows it to
    /// grow without limit (only `S` at a finite stage).
    pub transverse_cap: Option<f64>,
}

/// Exact projection of the lattice points of the requested region whose
/// projected coordinate lies in `[-R, R]`, sorted.
pub fn generate_set(req: &SetRequest<'_>) -> Result<GeneratedSet, RegionError> {
    let r = req.window;
    if !(r > 0.0) || !r.is_finite() {
        return Err(RegionError::BadWindow(r));
    }
    let seqs = match req.kind {
        SetKind::Zn(n) => req.seqs.truncated(n),
        _ => req.seqs.clone(),
    };
    // Which part is kept, and the bounding box in (x, y).
    enum Keep {
        Part(Part),
        Strip(f64),
    }
    let (keep, bx) = match req.kind {
        SetKind::Lambda | SetKind::S => {
            // Strips of A meeting |x| <= R are those with a_{n-1} <= R.
            let mut n = 1;
            while seqs.a(n).is_some_and(|a| a <= r) {
                n += 1;
            }
            let ymax = match seqs.h(n) {
                Some(h) => h,
                None => req.transverse_cap.ok_or(RegionError::UnboundedTransverse(req.kind))?,
            };
            (Keep::Part(Part::A), (r, ymax))
        }
        SetKind::Q | SetKind::Z | SetKind::Zn(_) => {
            let xmax = seqs.b_threshold(r);
            if !xmax.is_finite() {
                return Err(RegionError::UnboundedTransverse(req.kind));
            }
            (Keep::Part(Part::B), (xmax, r))
        }
        SetKind::Xn(n) => {
            let a = if n == 0 { 0.0 } else { seqs.a(n).unwrap_or(0.0) };
            (Keep::Strip(a), (a, r))
        }
    };
    let proj = req.kind.projection();
    let (xmax, ymax) = bx;
    let scale = xmax.max(ymax).max(1.0);
    let slack = 1e-9 * scale;
    let r_exact = f64_exact(r);
    let mut points = Vec::new();
    req.lattice.scan_f64((-xmax, xmax), (-ymax, ymax), slack, |m, n, px, py| {
        let (pv, tv) = match proj {
            Projection::P1 => (px, py),
            Projection::P2 => (py, px),
        };
        let mut exact_pt = None;
        let mut get_exact = || exact_pt.get_or_insert_with(|| req.lattice.point(m, n)).clone();
        let in_window = if (pv.abs() - r).abs() <= slack {
            let p = get_exact();
            let v = match proj {
                Projection::P1 => p.x,
                Projection::P2 => p.y,
            };
            v.abs() <= r_exact
        } else {
            pv.abs() <= r
        };
        if !in_window {
            return;
        }
        let keep_it = match keep {
            Keep::Part(part) => {
                let tol = 1e-9 * px.abs().max(py.abs()).max(1.0);
                let got = seqs.classify_f64(px, py, tol).unwrap_or_else(|| {
                    let p = get_exact();
                    seqs.classify_exact(&p.x, &p.y)
                });
                if got == Part::A {
                    if let (SetKind::Lambda | SetKind::S, Some(cap)) = (req.kind, req.transverse_cap) {
                        if seqs.h_len().is_some() && py.abs() > cap {
                            return;
                        }
                    }
                }
                got == part
            }
            Keep::Strip(a) => {
                if (px.abs() - a).abs() <= slack {
                    get_exact().x.abs() < f64_exact(a)
                } else {
                    px.abs() < a
                }
            }
        };
        if keep_it {
            let p = get_exact();
            let value = match proj {
                Projection::P1 => p.x,
                Projection::P2 => p.y,
            };
            points.push(SetPoint { value, approx: pv, transverse: tv, m, n });
        }
    });
    points.sort_by(cmp_points);
    Ok(GeneratedSet { kind: req.kind, window: r, seqs, points })
}

fn cmp_points(a: &SetPoint, b: &SetPoint) -> Ordering {
    let gap = (a.approx - b.approx).abs();
    if gap > 1e-9 * a.approx.abs().max(1.0) {
        a.approx.total_cmp(&b.approx)
    } else {
        a.value.cmp(&b.value)
    }
}

/// A line in the plane, given as `x = c*y + d` unless horizontal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Line {
    XOnY { c: f64, d: f64 },
    Horizontal { y: f64 },
}

/// Number of further terms checked after the first escaping stage.
const ESCAPE_CONFIRM: usize = 64;
const ESCAPE_MAX_STAGE: usize = 4096;

/// Radius `R` with `line ∩ A ⊂ {|x| <= R}`.
pub fn line_escape_bound(seqs: &StaircaseSequences, line: Line) -> Result<f64, RegionError> {
    let (c, d) = match line {
        Line::Horizontal { .. } => return Err(RegionError::HorizontalLine),
        Line::XOnY { c, d } => (c.abs(), d.abs()),
    };
    if c == 0.0 {
        return Ok(d);
    }
    let escapes = |n: usize| -> Option<bool> { Some(seqs.a(n - 1)? > c * seqs.h(n)? + d) };
    for n in 1..=ESCAPE_MAX_STAGE {
        match escapes(n) {
            None => break,
            Some(true) => {
                let confirmed = (n..n + ESCAPE_CONFIRM).all(|k| escapes(k).unwrap_or(false));
                if confirmed {
                    return Ok(if n == 1 { d } else { c * seqs.h(n - 1).unwrap() + d });
                }
            }
            Some(false) => {}
        }
    }
    Err(RegionError::EscapeUnverified)
}

/// Boundary polylines of `A` for plotting, through `n_strips` strips.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaircasePlot {
    pub a: Vec<f64>,
    pub h: Vec<f64>,
    /// Upper boundary from left to right; the lower one is its mirror in `y`.
    pub upper: Vec<[f64; 2]>,
    pub lower: Vec<[f64; 2]>,
}

pub fn staircase_plot(seqs: &StaircaseSequences, n_strips: usize) -> StaircasePlot {
    let a: Vec<f64> = (0..=n_strips).map_while(|n| seqs.a(n)).collect();
    let h: Vec<f64> = (1..=n_strips).map_while(|n| seqs.h(n)).collect();
    let k = h.len().min(a.len());
    let mut right = Vec::new();
    for n in 1..=k {
        right.push([a[n - 1], h[n - 1]]);
        if n < a.len() {
            right.push([a[n], h[n - 1]]);
        }
    }
    let mut upper: Vec<[f64; 2]> = right.iter().rev().map(|&[x, y]| [-x, y]).collect();
    upper.extend(right.iter().copied());
    upper.dedup();
    let lower = upper.iter().map(|&[x, y]| [x, -y]).collect();
    StaircasePlot { a, h, upper, lower }
}
