//! Finite unions of closed intervals on the line.

use serde::{Deserialize, Serialize};

use super::RegionError;

/// Geometric tolerance used when comparing interval endpoints.
pub const GEOM_TOL: f64 = 1e-12;

/// Canonical finite union of disjoint closed intervals, sorted, with gaps
/// strictly positive between consecutive pieces.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "Vec<[f64; 2]>", into = "Vec<[f64; 2]>")]
pub struct IntervalUnion {
    intervals: Vec<(f64, f64)>,
}

impl From<Vec<[f64; 2]>> for IntervalUnion {
    fn from(v: Vec<[f64; 2]>) -> Self {
        IntervalUnion::new(v.into_iter().map(|[a, b]| (a, b)))
    }
}

impl From<IntervalUnion> for Vec<[f64; 2]> {
    fn from(u: IntervalUnion) -> Self {
        u.intervals.into_iter().map(|(a, b)| [a, b]).collect()
    }
}

impl IntervalUnion {
    /// Canonicalizes arbitrary input: drops reversed intervals, merges
    /// overlapping or touching pieces.
    pub fn new(intervals: impl IntoIterator<Item = (f64, f64)>) -> Self {
        let mut v: Vec<(f64, f64)> = intervals.into_iter().filter(|(a, b)| a <= b).collect();
        v.sort_by(|x, y| x.0.total_cmp(&y.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(v.len());
        for (a, b) in v {
            match merged.last_mut() {
                Some(last) if a <= last.1 => last.1 = last.1.max(b),
                _ => merged.push((a, b)),
            }
        }
        Self { intervals: merged }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn interval(a: f64, b: f64) -> Self {
        Self::new([(a, b)])
    }

    /// `[-r, r]`.
    pub fn symmetric(r: f64) -> Self {
        Self::interval(-r, r)
    }

    pub fn intervals(&self) -> &[(f64, f64)] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|(a, b)| b - a).sum()
    }

    /// Minkowski sum with `[-eps, eps]`.
    pub fn pad(&self, eps: f64) -> Result<Self, RegionError> {
        if eps < 0.0 {
            return Err(RegionError::NegativePad(eps));
        }
        Ok(Self::new(self.intervals.iter().map(|(a, b)| (a - eps, b + eps))))
    }

    /// Points whose `eps`-neighbourhood lies in the union. Pieces are
    /// separated by positive gaps, so erosion acts piecewise.
    pub fn erode(&self, eps: f64) -> Result<Self, RegionError> {
        if eps < 0.0 {
            return Err(RegionError::NegativePad(eps));
        }
        Ok(Self::new(self.intervals.iter().map(|(a, b)| (a + eps, b - eps))))
    }

    pub fn union(&self, other: &Self) -> Self {
        Self::new(self.intervals.iter().chain(&other.intervals).copied())
    }

    pub fn intersect(&self, other: &Self) -> Self {
        let mut out = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.intervals.len() && j < other.intervals.len() {
            let (a, b) = self.intervals[i];
            let (c, d) = other.intervals[j];
            let lo = a.max(c);
            let hi = b.min(d);
            if lo <= hi {
                out.push((lo, hi));
            }
            if b < d {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::new(out)
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|&(a, b)| a <= x && x <= b)
    }

    /// Whether `self` covers `other` up to [`GEOM_TOL`].
    pub fn contains_union(&self, other: &Self) -> bool {
        other.intervals.iter().all(|&(c, d)| {
            self.intervals
                .iter()
                .any(|&(a, b)| a <= c + GEOM_TOL && d <= b + GEOM_TOL)
        })
    }

    /// Mirror symmetry `U = -U` up to [`GEOM_TOL`].
    pub fn is_symmetric(&self) -> bool {
        let n = self.intervals.len();
        (0..n).all(|k| {
            let (a, b) = self.intervals[k];
            let (c, d) = self.intervals[n - 1 - k];
            (a + d).abs() <= GEOM_TOL && (b + c).abs() <= GEOM_TOL
        })
    }

    /// Distance from `x` to the union (zero inside); infinite when empty.
    pub fn distance_to(&self, x: f64) -> f64 {
        self.intervals
            .iter()
            .map(|&(a, b)| if x < a { a - x } else if x > b { x - b } else { 0.0 })
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest `|x|` over the union.
    pub fn radius(&self) -> f64 {
        self.intervals
            .iter()
            .map(|&(a, b)| a.abs().max(b.abs()))
            .fold(0.0, f64::max)
    }

    /// The piece containing `0`, if any.
    pub fn central_component(&self) -> Option<(f64, f64)> {
        self.intervals.iter().copied().find(|&(a, b)| a <= 0.0 && 0.0 <= b)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn measure_and_pad() {
        let u = IntervalUnion::new([(0.0, 1.0), (2.0, 3.0)]);
        assert_eq!(u.measure(), 2.0);
        let v = IntervalUnion::new([(0.0, 1.0), (1.4, 2.0)]).pad(0.25).unwrap();
        assert_eq!(v.intervals(), &[(-0.25, 2.25)]);
        assert!((v.measure() - 2.5).abs() < 1e-15);
        assert!(matches!(u.pad(-0.1), Err(RegionError::NegativePad(_))));
        assert!(matches!(u.erode(-0.1), Err(RegionError::NegativePad(_))));
    }

    #[test]
    fn symmetry_and_membership() {
        let u = IntervalUnion::new([(-2.0, -1.0), (1.0, 2.0)]);
        assert!(u.is_symmetric());
        assert!(!IntervalUnion::new([(-2.0, -1.0), (1.0, 2.5)]).is_symmetric());
        assert!(u.contains(1.0) && u.contains(-2.0) && !u.contains(0.0));
        assert_eq!(u.distance_to(0.0), 1.0);
        assert_eq!(u.central_component(), None);
        assert!(IntervalUnion::empty().is_symmetric());
    }

    #[test]
    fn erode_and_intersect() {
        let u = IntervalUnion::new([(-3.0, -1.0), (-0.5, 0.5), (1.0, 3.0)]);
        let e = u.erode(0.6).unwrap();
        assert_eq!(e.intervals().len(), 2);
        assert_eq!(u.erode(0.3).unwrap().intervals().len(), 3);
        let i = u.intersect(&IntervalUnion::interval(-1.5, 1.5));
        assert_eq!(i.intervals(), &[(-1.5, -1.0), (-0.5, 0.5), (1.0, 1.5)]);
        assert!(u.contains_union(&i));
    }

    fn arb_union() -> impl Strategy<Value = IntervalUnion> {
        prop::collection::vec((-10.0f64..10.0, 0.0f64..3.0), 0..6)
            .prop_map(|v| IntervalUnion::new(v.into_iter().map(|(a, w)| (a, a + w))))
    }

    proptest! {
        #[test]
        fn pad_then_erode_covers_original(u in arb_union(), eps in 0.0f64..1.0) {
            let back = u.pad(eps).unwrap().erode(eps).unwrap();
            prop_assert!(back.contains_union(&u));
        }

        #[test]
        fn measure_additive_on_disjoint(u in arb_union(), shift in 30.0f64..40.0) {
            let far = IntervalUnion::new(u.intervals().iter().map(|(a, b)| (a + shift, b + shift)));
            let joined = u.union(&far);
            prop_assert!((joined.measure() - u.measure() - far.measure()).abs() < 1e-9);
        }

        #[test]
        fn canonical_form(u in arb_union()) {
            for w in u.intervals().windows(2) {
                prop_assert!(w[0].1 < w[1].0);
            }
            prop_assert!(u.measure() >= 0.0);
        }
    }
}
