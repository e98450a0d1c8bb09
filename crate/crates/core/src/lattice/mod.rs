//! Planar lattices with exact generators in ℚ(√2, √3).

mod field;

pub use field::{alg_compare, AlgebraicReal};

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// One of the two coordinate projections of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Projection {
    /// `p₁(x, y) = x`
    P1,
    /// `p₂(x, y) = y`
    P2,
}

impl fmt::Display for Projection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Projection::P1 => write!(f, "p1"),
            Projection::P2 => write!(f, "p2"),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LatticeError {
    #[error("generator matrix is singular")]
    SingularLattice,
    #[error("projection {0} is not injective on the lattice")]
    ProjectionNotInjective(Projection),
}

/// A lattice point: integer coefficients and exact coordinates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticePoint {
    pub m: i64,
    pub n: i64,
    pub x: AlgebraicReal,
    pub y: AlgebraicReal,
}

impl LatticePoint {
    pub fn x_f64(&self) -> f64 {
        self.x.to_f64()
    }

    pub fn y_f64(&self) -> f64 {
        self.y.to_f64()
    }
}

/// Closed axis-aligned box `[x_lo, x_hi] × [y_lo, y_hi]` with rational corners.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LatticeBox {
    pub x_lo: BigRational,
    pub x_hi: BigRational,
    pub y_lo: BigRational,
    pub y_hi: BigRational,
}

impl LatticeBox {
    pub fn new(x_lo: BigRational, x_hi: BigRational, y_lo: BigRational, y_hi: BigRational) -> Self {
        Self { x_lo, x_hi, y_lo, y_hi }
    }

    /// Box with `f64` corners converted exactly to rationals.
    pub fn from_f64(x_lo: f64, x_hi: f64, y_lo: f64, y_hi: f64) -> Self {
        let r = |v: f64| BigRational::from_float(v).expect("finite box corner");
        Self::new(r(x_lo), r(x_hi), r(y_lo), r(y_hi))
    }

    /// `[-half_x, half_x] × [-half_y, half_y]`.
    pub fn centered(half_x: f64, half_y: f64) -> Self {
        Self::from_f64(-half_x, half_x, -half_y, half_y)
    }

    pub fn is_empty(&self) -> bool {
        self.x_lo > self.x_hi || self.y_lo > self.y_hi
    }

    fn bounds_f64(&self) -> [f64; 4] {
        [&self.x_lo, &self.x_hi, &self.y_lo, &self.y_hi].map(|q| q.to_f64().unwrap_or(f64::NAN))
    }
}

/// Full-rank planar lattice `Γ = G·ℤ²` whose coordinate projections are
/// injective on `Γ`. Columns of `G` are the basis vectors.
#[derive(Clone, Serialize, Deserialize)]
#[serde(try_from = "LatticeRepr", into = "LatticeRepr")]
pub struct Lattice2D {
    /// `gen[row][col]`.
    gen: [[AlgebraicReal; 2]; 2],
    det: AlgebraicReal,
    gen_f64: [[f64; 2]; 2],
    inv_f64: [[f64; 2]; 2],
}

impl PartialEq for Lattice2D {
    fn eq(&self, other: &Self) -> bool {
        self.gen == other.gen
    }
}

impl Eq for Lattice2D {}

#[derive(Serialize, Deserialize)]
struct LatticeRepr {
    /// Row-major `[g11, g12, g21, g22]`; columns are basis vectors.
    generators: [AlgebraicReal; 4],
}

impl TryFrom<LatticeRepr> for Lattice2D {
    type Error = LatticeError;
    fn try_from(r: LatticeRepr) -> Result<Self, Self::Error> {
        let [a, b, c, d] = r.generators;
        Lattice2D::new([[a, b], [c, d]])
    }
}

impl From<Lattice2D> for LatticeRepr {
    fn from(l: Lattice2D) -> Self {
        let [[a, b], [c, d]] = l.gen;
        LatticeRepr { generators: [a, b, c, d] }
    }
}

/// Whether two field elements are linearly independent over ℚ. Their
/// coordinate vectors in the basis `{1, √2, √3, √6}` must have rank two.
fn rationally_independent(u: &AlgebraicReal, v: &AlgebraicReal) -> bool {
    let (cu, cv) = (u.coeffs(), v.coeffs());
    (0..4).any(|i| (i + 1..4).any(|j| !(&cu[i] * &cv[j] - &cu[j] * &cv[i]).is_zero()))
}

impl Lattice2D {
    /// Validates a generator matrix (`gen[row][col]`, columns are basis vectors).
    pub fn new(gen: [[AlgebraicReal; 2]; 2]) -> Result<Self, LatticeError> {
        let det = &(&gen[0][0] * &gen[1][1]) - &(&gen[0][1] * &gen[1][0]);
        if det.is_zero() {
            return Err(LatticeError::SingularLattice);
        }
        if !rationally_independent(&gen[0][0], &gen[0][1]) {
            return Err(LatticeError::ProjectionNotInjective(Projection::P1));
        }
        if !rationally_independent(&gen[1][0], &gen[1][1]) {
            return Err(LatticeError::ProjectionNotInjective(Projection::P2));
        }
        let gen_f64 = [
            [gen[0][0].to_f64(), gen[0][1].to_f64()],
            [gen[1][0].to_f64(), gen[1][1].to_f64()],
        ];
        let d = det.to_f64();
        let inv_f64 = [
            [gen_f64[1][1] / d, -gen_f64[0][1] / d],
            [-gen_f64[1][0] / d, gen_f64[0][0] / d],
        ];
        Ok(Self { gen, det, gen_f64, inv_f64 })
    }

    /// Generators `[[1, √2], [√3, 1]]`: `p₁(Γ) = ℤ + ℤ√2`, `p₂(Γ) = ℤ√3 + ℤ`.
    pub fn default_lattice() -> Self {
        Self::new([
            [AlgebraicReal::one(), AlgebraicReal::sqrt2()],
            [AlgebraicReal::sqrt3(), AlgebraicReal::one()],
        ])
        .expect("default lattice is valid")
    }

    pub fn generators(&self) -> &[[AlgebraicReal; 2]; 2] {
        &self.gen
    }

    /// Signed determinant of the generator matrix.
    pub fn det(&self) -> &AlgebraicReal {
        &self.det
    }

    /// Covolume `|det G|`.
    pub fn covolume(&self) -> f64 {
        self.det.to_f64().abs()
    }

    /// Dual lattice with generators `G⁻ᵀ`, so `⟨γ, γ*⟩ ∈ ℤ`.
    pub fn dual(&self) -> Result<Lattice2D, LatticeError> {
        let inv_det = self.det.inverse().ok_or(LatticeError::SingularLattice)?;
        let g = &self.gen;
        Lattice2D::new([
            [&g[1][1] * &inv_det, -(&g[1][0] * &inv_det)],
            [-(&g[0][1] * &inv_det), &g[0][0] * &inv_det],
        ])
    }

    pub fn point(&self, m: i64, n: i64) -> LatticePoint {
        let g = &self.gen;
        LatticePoint {
            m,
            n,
            x: &g[0][0].scale_int(m) + &g[0][1].scale_int(n),
            y: &g[1][0].scale_int(m) + &g[1][1].scale_int(n),
        }
    }

    /// Floating coordinates of `G·(m, n)`.
    pub fn point_f64(&self, m: i64, n: i64) -> (f64, f64) {
        let g = &self.gen_f64;
        let (m, n) = (m as f64, n as f64);
        (g[0][0] * m + g[0][1] * n, g[1][0] * m + g[1][1] * n)
    }

    /// Approximate integer coefficients of a real point, `G⁻¹·(x, y)`.
    pub fn coords_f64(&self, x: f64, y: f64) -> (f64, f64) {
        let h = &self.inv_f64;
        (h[0][0] * x + h[0][1] * y, h[1][0] * x + h[1][1] * y)
    }

    /// Integer coefficients of `(x, y)` if it lies in the lattice.
    pub fn coefficients_of(&self, x: &AlgebraicReal, y: &AlgebraicReal) -> Option<(BigInt, BigInt)> {
        let g = &self.gen;
        let m = (&(&g[1][1] * x) - &(&g[0][1] * y)).checked_div(&self.det)?;
        let n = (&(&g[0][0] * y) - &(&g[1][0] * x)).checked_div(&self.det)?;
        Some((m.as_integer()?, n.as_integer()?))
    }

    pub fn contains(&self, x: &AlgebraicReal, y: &AlgebraicReal) -> bool {
        self.coefficients_of(x, y).is_some()
    }

    /// Inclusive integer ranges of `(m, n)` covering a real box, padded by one.
    pub fn coefficient_bounds(&self, x: (f64, f64), y: (f64, f64)) -> ((i64, i64), (i64, i64)) {
        let corners = [(x.0, y.0), (x.0, y.1), (x.1, y.0), (x.1, y.1)];
        let mut m_rng = (f64::INFINITY, f64::NEG_INFINITY);
        let mut n_rng = (f64::INFINITY, f64::NEG_INFINITY);
        for (cx, cy) in corners {
            let (m, n) = self.coords_f64(cx, cy);
            m_rng = (m_rng.0.min(m), m_rng.1.max(m));
            n_rng = (n_rng.0.min(n), n_rng.1.max(n));
        }
        (
            (m_rng.0.floor() as i64 - 1, m_rng.1.ceil() as i64 + 1),
            (n_rng.0.floor() as i64 - 1, n_rng.1.ceil() as i64 + 1),
        )
    }

    /// Calls `visit(m, n, x, y)` for every `(m, n)` whose floating image lies
    /// within `slack` of the box. Candidates are produced column by column, so
    /// the cost is proportional to the box area.
    pub fn scan_f64(
        &self,
        x: (f64, f64),
        y: (f64, f64),
        slack: f64,
        mut visit: impl FnMut(i64, i64, f64, f64),
    ) {
        if x.0 > x.1 || y.0 > y.1 {
            return;
        }
        let ((m_lo, m_hi), _) = self.coefficient_bounds(x, y);
        let g = &self.gen_f64;
        for m in m_lo..=m_hi {
            let mf = m as f64;
            // Solve each coordinate constraint for n.
            let mut n_lo = f64::NEG_INFINITY;
            let mut n_hi = f64::INFINITY;
            for (row, (lo, hi)) in [(0usize, x), (1usize, y)] {
                let base = g[row][0] * mf;
                let slope = g[row][1];
                let a = (lo - slack - base) / slope;
                let b = (hi + slack - base) / slope;
                n_lo = n_lo.max(a.min(b));
                n_hi = n_hi.min(a.max(b));
            }
            if n_lo > n_hi {
                continue;
            }
            for n in (n_lo.floor() as i64)..=(n_hi.ceil() as i64) {
                let (px, py) = self.point_f64(m, n);
                if px >= x.0 - slack && px <= x.1 + slack && py >= y.0 - slack && py <= y.1 + slack {
                    visit(m, n, px, py);
                }
            }
        }
    }

    /// Lattice points in the closed box, decided exactly, sorted by `(m, n)`.
    pub fn enumerate_box(&self, bx: &LatticeBox) -> Vec<LatticePoint> {
        if bx.is_empty() {
            return Vec::new();
        }
        let [x_lo, x_hi, y_lo, y_hi] = bx.bounds_f64();
        let scale = x_lo.abs().max(x_hi.abs()).max(y_lo.abs()).max(y_hi.abs()).max(1.0);
        let slack = 1e-9 * scale;
        let exact = [&bx.x_lo, &bx.x_hi, &bx.y_lo, &bx.y_hi].map(|q| AlgebraicReal::from_rational(q.clone()));
        let mut out = Vec::new();
        self.scan_f64((x_lo, x_hi), (y_lo, y_hi), slack, |m, n, px, py| {
            let near_edge = [px - x_lo, x_hi - px, py - y_lo, y_hi - py]
                .iter()
                .any(|d| d.abs() <= 2.0 * slack);
            let p = self.point(m, n);
            let inside = if near_edge {
                p.x >= exact[0] && p.x <= exact[1] && p.y >= exact[2] && p.y <= exact[3]
            } else {
                px >= x_lo && px <= x_hi && py >= y_lo && py <= y_hi
            };
            if inside {
                out.push(p);
            }
        });
        out.sort_by_key(|p| (p.m, p.n));
        out
    }

    /// Largest number of lattice points in any closed unit square, found by
    /// sliding a square over the points near the origin.
    pub fn max_points_per_unit_square(&self) -> usize {
        let mut pts = Vec::new();
        self.scan_f64((-3.0, 3.0), (-3.0, 3.0), 0.0, |_, _, x, y| pts.push((x, y)));
        let mut best = 0;
        for &(ax, _) in &pts {
            for &(_, by) in &pts {
                let count = pts
                    .iter()
                    .filter(|&&(x, y)| x >= ax && x <= ax + 1.0 && y >= by && y <= by + 1.0)
                    .count();
                best = best.max(count);
            }
        }
        best
    }
}

impl fmt::Debug for Lattice2D {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Lattice2D")
            .field("gen", &self.gen)
            .field("det", &self.det)
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn alg(a: i64, b: i64, c: i64, d: i64) -> AlgebraicReal {
        AlgebraicReal::from_ints(a, b, c, d)
    }

    #[test]
    fn construction_errors() {
        let id = Lattice2D::new([[alg(1, 0, 0, 0), alg(0, 0, 0, 0)], [alg(0, 0, 0, 0), alg(1, 0, 0, 0)]]);
        assert_eq!(id.unwrap_err(), LatticeError::ProjectionNotInjective(Projection::P1));
        let sing = Lattice2D::new([[alg(1, 0, 0, 0), alg(1, 0, 0, 0)], [alg(0, 0, 1, 0), alg(0, 0, 1, 0)]]);
        assert_eq!(sing.unwrap_err(), LatticeError::SingularLattice);
        let p2 = Lattice2D::new([[alg(1, 0, 0, 0), alg(0, 1, 0, 0)], [alg(2, 0, 0, 0), alg(3, 0, 0, 0)]]);
        assert_eq!(p2.unwrap_err(), LatticeError::ProjectionNotInjective(Projection::P2));
    }

    #[test]
    fn default_determinant() {
        let l = Lattice2D::default_lattice();
        assert_eq!(*l.det(), alg(1, 0, 0, -1));
    }

    #[test]
    fn dual_of_default_is_rationalized_inverse_transpose() {
        let l = Lattice2D::default_lattice();
        let d = l.dual().unwrap();
        // 1/(1-√6) = -(1+√6)/5, times [[1, -√3], [-√2, 1]].
        let inv = AlgebraicReal::from_ints(1, 0, 0, -1).inverse().unwrap();
        let expected = [
            [inv.clone(), -(&AlgebraicReal::sqrt3() * &inv)],
            [-(&AlgebraicReal::sqrt2() * &inv), inv.clone()],
        ];
        assert_eq!(d.generators(), &expected);
        assert_eq!(&(l.det() * d.det()), &AlgebraicReal::one());
        assert_eq!(d.dual().unwrap(), l);
    }

    #[test]
    fn dual_pairing_is_integral() {
        let l = Lattice2D::default_lattice();
        let d = l.dual().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..100 {
            let p = l.point(rng.gen_range(-30..=30), rng.gen_range(-30..=30));
            let q = d.point(rng.gen_range(-30..=30), rng.gen_range(-30..=30));
            let ip = &(&p.x * &q.x) + &(&p.y * &q.y);
            assert!(ip.as_integer().is_some(), "pairing {ip}");
        }
    }

    #[test]
    fn mutual_membership_after_double_dual() {
        let l = Lattice2D::default_lattice();
        let dd = l.dual().unwrap().dual().unwrap();
        for (m, n) in [(1, 0), (0, 1), (3, -7)] {
            let p = l.point(m, n);
            assert!(dd.contains(&p.x, &p.y));
            let q = dd.point(m, n);
            assert!(l.contains(&q.x, &q.y));
        }
        let half = AlgebraicReal::from_ratio(1, 2);
        assert!(!l.contains(&half, &AlgebraicReal::zero()));
    }

    #[test]
    fn box_enumeration_edge_cases() {
        let l = Lattice2D::default_lattice();
        let empty = LatticeBox::from_f64(1.0, -1.0, -1.0, 1.0);
        assert!(l.enumerate_box(&empty).is_empty());
        let tiny = l.enumerate_box(&LatticeBox::centered(0.1, 0.1));
        assert_eq!(tiny.len(), 1);
        assert_eq!((tiny[0].m, tiny[0].n), (0, 0));
    }

    #[test]
    fn box_enumeration_is_exact_at_edges() {
        let l = Lattice2D::default_lattice();
        // (1, 0) maps to (1, √3): closed box edge x = 1 must include it.
        let bx = LatticeBox::from_f64(1.0, 1.0, 1.0, 2.0);
        let pts = l.enumerate_box(&bx);
        assert_eq!(pts.iter().map(|p| (p.m, p.n)).collect::<Vec<_>>(), vec![(1, 0)]);
        let bx = LatticeBox::from_f64(1.0 + 1e-12, 2.0, 1.0, 2.0);
        assert!(l.enumerate_box(&bx).iter().all(|p| (p.m, p.n) != (1, 0)));
    }

    #[test]
    fn symmetric_box_is_closed_under_negation() {
        let l = Lattice2D::default_lattice();
        let pts = l.enumerate_box(&LatticeBox::centered(6.0, 4.5));
        for p in &pts {
            assert!(pts.iter().any(|q| q.m == -p.m && q.n == -p.n));
            let again = l.point(p.m, p.n);
            assert_eq!((&again.x, &again.y), (&p.x, &p.y));
        }
    }

    #[test]
    fn lattice_json_round_trip() {
        let l = Lattice2D::default_lattice().dual().unwrap();
        let json = serde_json::to_string(&l).unwrap();
        let back: Lattice2D = serde_json::from_str(&json).unwrap();
        assert_eq!(back, l);
        let bad = r#"{"generators":[[[1,1],[0,1],[0,1],[0,1]],[[0,1],[0,1],[0,1],[0,1]],[[0,1],[0,1],[0,1],[0,1]],[[1,1],[0,1],[0,1],[0,1]]]}"#;
        assert!(serde_json::from_str::<Lattice2D>(bad).is_err());
    }

    #[test]
    fn unit_square_capacity() {
        let l = Lattice2D::default_lattice();
        let m = l.max_points_per_unit_square();
        assert!((1..=4).contains(&m), "{m}");
    }
}
