//! Exact arithmetic in the biquadratic field ℚ(√2, √3).
//!
//! Every element is stored as `a + b√2 + c√3 + d√6` with rational
//! coefficients. The basis `{1, √2, √3, √6}` is linearly independent over ℚ,
//! so equality is coefficient-wise and zero is the all-zero vector. Signs are
//! decided by a floating fast path with a rigorous error bound, falling back
//! to rational interval refinement with doubling precision.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::Serializer;
use serde::{Deserialize, Serialize};

const SQRT6: f64 = 2.449_489_742_783_178;

/// Element `a + b√2 + c√3 + d√6` of ℚ(√2, √3).
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct AlgebraicReal {
    coeffs: [BigRational; 4],
}

fn ratio(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

impl AlgebraicReal {
    pub fn new(a: BigRational, b: BigRational, c: BigRational, d: BigRational) -> Self {
        Self { coeffs: [a, b, c, d] }
    }

    /// Integer coefficients, `a + b√2 + c√3 + d√6`.
    pub fn from_ints(a: i64, b: i64, c: i64, d: i64) -> Self {
        Self::new(ratio(a, 1), ratio(b, 1), ratio(c, 1), ratio(d, 1))
    }

    pub fn zero() -> Self {
        Self::from_ints(0, 0, 0, 0)
    }

    pub fn one() -> Self {
        Self::from_ints(1, 0, 0, 0)
    }

    pub fn from_integer(v: i64) -> Self {
        Self::from_ints(v, 0, 0, 0)
    }

    pub fn from_rational(q: BigRational) -> Self {
        let z = BigRational::zero();
        Self::new(q, z.clone(), z.clone(), z)
    }

    /// `num / den` as a rational element. Panics if `den == 0`.
    pub fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(ratio(num, den))
    }

    pub fn sqrt2() -> Self {
        Self::from_ints(0, 1, 0, 0)
    }

    pub fn sqrt3() -> Self {
        Self::from_ints(0, 0, 1, 0)
    }

    pub fn sqrt6() -> Self {
        Self::from_ints(0, 0, 0, 1)
    }

    /// Coefficients of `1, √2, √3, √6`.
    pub fn coeffs(&self) -> &[BigRational; 4] {
        &self.coeffs
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Zero::is_zero)
    }

    pub fn is_rational(&self) -> bool {
        self.coeffs[1..].iter().all(Zero::is_zero)
    }

    /// The rational value if the irrational parts vanish.
    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then(|| &self.coeffs[0])
    }

    /// The integer value if this element is a rational integer.
    pub fn as_integer(&self) -> Option<BigInt> {
        self.as_rational()
            .filter(|q| q.is_integer())
            .map(|q| q.to_integer())
    }

    pub fn to_f64(&self) -> f64 {
        let [a, b, c, d] = self.coeffs.each_ref().map(rat_to_f64);
        a + b * std::f64::consts::SQRT_2 + c * 3f64.sqrt() + d * SQRT6
    }

    /// Image under √2 ↦ −√2.
    fn conj2(&self) -> Self {
        let [a, b, c, d] = &self.coeffs;
        Self::new(a.clone(), -b, c.clone(), -d)
    }

    /// Image under √3 ↦ −√3.
    fn conj3(&self) -> Self {
        let [a, b, c, d] = &self.coeffs;
        Self::new(a.clone(), b.clone(), -c, -d)
    }

    /// Field norm: product of the four Galois conjugates. Rational, and zero
    /// only for the zero element.
    pub fn norm(&self) -> BigRational {
        let p = self * &self.conj2();
        let n = &p * &p.conj3();
        debug_assert!(n.is_rational());
        n.coeffs[0].clone()
    }

    /// Multiplicative inverse by rationalizing against the three conjugates.
    pub fn inverse(&self) -> Option<Self> {
        if self.is_zero() {
            return None;
        }
        let c2 = self.conj2();
        let c3 = self.conj3();
        let c23 = c2.conj3();
        let others = &(&c2 * &c3) * &c23;
        let n = (self * &others).coeffs[0].clone();
        Some(others.scale(&n.recip()))
    }

    pub fn checked_div(&self, rhs: &Self) -> Option<Self> {
        rhs.inverse().map(|inv| self * &inv)
    }

    pub fn scale(&self, q: &BigRational) -> Self {
        Self {
            coeffs: self.coeffs.each_ref().map(|c| c * q),
        }
    }

    pub fn scale_int(&self, k: i64) -> Self {
        if k == 1 {
            return self.clone();
        }
        self.scale(&ratio(k, 1))
    }

    pub fn abs(&self) -> Self {
        if self.signum() < 0 {
            -self
        } else {
            self.clone()
        }
    }

    /// Exact sign: −1, 0 or 1.
    pub fn signum(&self) -> i32 {
        if self.is_zero() {
            return 0;
        }
        let approx: [f64; 4] = self.coeffs.each_ref().map(rat_to_f64);
        if approx.iter().all(|v| v.is_finite()) {
            let w = [1.0, std::f64::consts::SQRT_2, 3f64.sqrt(), SQRT6];
            let value: f64 = approx.iter().zip(w).map(|(c, s)| c * s).sum();
            let scale: f64 = approx.iter().zip(w).map(|(c, s)| c.abs() * s).sum();
            // Conversion, constant and summation errors are all below 16 ulps of the scale.
            if value.abs() > scale * 16.0 * f64::EPSILON {
                return if value > 0.0 { 1 } else { -1 };
            }
        }
        self.signum_refined()
    }

    fn signum_refined(&self) -> i32 {
        let mut bits = 64u32;
        loop {
            let (lo, hi) = self.enclosure(bits);
            if lo.is_positive() {
                return 1;
            }
            if hi.is_negative() {
                return -1;
            }
            // Nonzero field elements are nonzero reals, so this terminates.
            bits *= 2;
        }
    }

    /// Rational interval containing the value, with √k enclosed to `bits` bits.
    pub fn enclosure(&self, bits: u32) -> (BigRational, BigRational) {
        let scale = BigInt::one() << bits;
        let mut lo = self.coeffs[0].clone();
        let mut hi = self.coeffs[0].clone();
        for (coeff, k) in self.coeffs[1..].iter().zip([2u32, 3, 6]) {
            if coeff.is_zero() {
                continue;
            }
            let floor = (BigInt::from(k) * &scale * &scale).sqrt();
            let r_lo = BigRational::new(floor.clone(), scale.clone());
            let r_hi = BigRational::new(floor + 1, scale.clone());
            if coeff.is_positive() {
                lo += coeff * &r_lo;
                hi += coeff * &r_hi;
            } else {
                lo += coeff * &r_hi;
                hi += coeff * &r_lo;
            }
        }
        (lo, hi)
    }

    /// Largest integer `≤ self`.
    pub fn floor(&self) -> BigInt {
        if let Some(q) = self.as_rational() {
            return q.floor().to_integer();
        }
        let guess = BigInt::from(self.to_f64().floor() as i64);
        let mut k = guess;
        while AlgebraicReal::from_rational(BigRational::from_integer(k.clone())) > *self {
            k -= 1;
        }
        while AlgebraicReal::from_rational(BigRational::from_integer(&k + 1)) <= *self {
            k += 1;
        }
        k
    }
}

fn rat_to_f64(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or_else(|| {
        if q.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        }
    })
}

impl Default for AlgebraicReal {
    fn default() -> Self {
        Self::zero()
    }
}

impl PartialOrd for AlgebraicReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for AlgebraicReal {
    fn cmp(&self, other: &Self) -> Ordering {
        if self == other {
            return Ordering::Equal;
        }
        match (self - other).signum() {
            1 => Ordering::Greater,
            -1 => Ordering::Less,
            _ => Ordering::Equal,
        }
    }
}

/// Exact comparison of two field elements.
pub fn alg_compare(u: &AlgebraicReal, v: &AlgebraicReal) -> Ordering {
    u.cmp(v)
}

impl<'a> Add<&'a AlgebraicReal> for &'a AlgebraicReal {
    type Output = AlgebraicReal;
    fn add(self, rhs: &AlgebraicReal) -> AlgebraicReal {
        AlgebraicReal {
            coeffs: std::array::from_fn(|i| &self.coeffs[i] + &rhs.coeffs[i]),
        }
    }
}

impl<'a> Sub<&'a AlgebraicReal> for &'a AlgebraicReal {
    type Output = AlgebraicReal;
    fn sub(self, rhs: &AlgebraicReal) -> AlgebraicReal {
        AlgebraicReal {
            coeffs: std::array::from_fn(|i| &self.coeffs[i] - &rhs.coeffs[i]),
        }
    }
}

impl<'a> Mul<&'a AlgebraicReal> for &'a AlgebraicReal {
    type Output = AlgebraicReal;
    fn mul(self, rhs: &AlgebraicReal) -> AlgebraicReal {
        let [a, b, c, d] = &self.coeffs;
        let [e, f, g, h] = &rhs.coeffs;
        let two = ratio(2, 1);
        let three = ratio(3, 1);
        let six = ratio(6, 1);
        AlgebraicReal::new(
            a * e + &two * (b * f) + &three * (c * g) + &six * (d * h),
            a * f + b * e + &three * (c * h + d * g),
            a * g + c * e + &two * (b * h + d * f),
            a * h + d * e + b * g + c * f,
        )
    }
}

impl<'a> Div<&'a AlgebraicReal> for &'a AlgebraicReal {
    type Output = AlgebraicReal;
    /// Panics on division by zero; see [`AlgebraicReal::checked_div`].
    fn div(self, rhs: &AlgebraicReal) -> AlgebraicReal {
        self.checked_div(rhs).expect("division by zero in ℚ(√2,√3)")
    }
}

impl Neg for &AlgebraicReal {
    type Output = AlgebraicReal;
    fn neg(self) -> AlgebraicReal {
        AlgebraicReal {
            coeffs: self.coeffs.each_ref().map(|c| -c),
        }
    }
}

impl Neg for AlgebraicReal {
    type Output = AlgebraicReal;
    fn neg(self) -> AlgebraicReal {
        -&self
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl $tr<AlgebraicReal> for AlgebraicReal {
            type Output = AlgebraicReal;
            fn $method(self, rhs: AlgebraicReal) -> AlgebraicReal {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $tr<&'a AlgebraicReal> for AlgebraicReal {
            type Output = AlgebraicReal;
            fn $method(self, rhs: &AlgebraicReal) -> AlgebraicReal {
                (&self).$method(rhs)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);
forward_owned!(Div, div);

impl AddAssign<&AlgebraicReal> for AlgebraicReal {
    fn add_assign(&mut self, rhs: &AlgebraicReal) {
        for (c, r) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *c += r;
        }
    }
}

impl SubAssign<&AlgebraicReal> for AlgebraicReal {
    fn sub_assign(&mut self, rhs: &AlgebraicReal) {
        for (c, r) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *c -= r;
        }
    }
}

impl fmt::Display for AlgebraicReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (c, name) in self.coeffs.iter().zip(["", "√2", "√3", "√6"]) {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            let mag = c.abs();
            if name.is_empty() {
                write!(f, "{mag}")?;
            } else if mag.is_one() {
                write!(f, "{name}")?;
            } else {
                write!(f, "{mag}{name}")?;
            }
            first = false;
        }
        Ok(())
    }
}

impl fmt::Debug for AlgebraicReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "AlgebraicReal({self} ≈ {:.6})", self.to_f64())
    }
}

/// Integer component of a serialized rational; numbers when they fit in
/// `i64`, decimal strings otherwise.
#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum IntRepr {
    Small(i64),
    Big(String),
}

impl IntRepr {
    fn from_bigint(v: &BigInt) -> Self {
        match v.to_i64() {
            Some(s) => IntRepr::Small(s),
            None => IntRepr::Big(v.to_string()),
        }
    }

    fn to_bigint(&self) -> Result<BigInt, String> {
        match self {
            IntRepr::Small(v) => Ok(BigInt::from(*v)),
            IntRepr::Big(s) => s.parse().map_err(|_| format!("invalid integer {s:?}")),
        }
    }
}

/// Serialized as `[[num, den], [num, den], [num, den], [num, den]]` for the
/// coefficients of `1, √2, √3, √6`.
impl Serialize for AlgebraicReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let quad: Vec<[IntRepr; 2]> = self
            .coeffs
            .iter()
            .map(|q| [IntRepr::from_bigint(q.numer()), IntRepr::from_bigint(q.denom())])
            .collect();
        quad.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for AlgebraicReal {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let quad: Vec<[IntRepr; 2]> = Vec::deserialize(deserializer)?;
        if quad.len() != 4 {
            return Err(de::Error::invalid_length(quad.len(), &"four rational coefficients"));
        }
        let mut coeffs: [BigRational; 4] = Default::default();
        for (slot, [n, d]) in coeffs.iter_mut().zip(&quad) {
            let n = n.to_bigint().map_err(de::Error::custom)?;
            let d = d.to_bigint().map_err(de::Error::custom)?;
            if d.sign() == Sign::NoSign {
                return Err(de::Error::custom("zero denominator"));
            }
            *slot = BigRational::new(n, d);
        }
        Ok(Self { coeffs })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn elem(v: [(i64, i64); 4]) -> AlgebraicReal {
        AlgebraicReal::new(
            ratio(v[0].0, v[0].1),
            ratio(v[1].0, v[1].1),
            ratio(v[2].0, v[2].1),
            ratio(v[3].0, v[3].1),
        )
    }

    #[test]
    fn compare_examples() {
        let z = AlgebraicReal::zero();
        assert_eq!(alg_compare(&z, &z), Ordering::Equal);
        let lhs = AlgebraicReal::sqrt2() + AlgebraicReal::sqrt3();
        assert_eq!(alg_compare(&lhs, &AlgebraicReal::sqrt6()), Ordering::Greater);
        let two_sqrt2 = AlgebraicReal::from_ints(0, 2, 0, 0);
        assert_eq!(
            alg_compare(&AlgebraicReal::from_integer(3), &two_sqrt2),
            Ordering::Greater
        );
    }

    #[test]
    fn near_cancellation_needs_refinement() {
        // (1+√2)^40 sits within 1e-15 of an integer, beyond f64 resolution.
        let mut p = AlgebraicReal::one();
        let u = AlgebraicReal::from_ints(1, 1, 0, 0);
        for _ in 0..40 {
            p = &p * &u;
        }
        let nearest = AlgebraicReal::from_rational(BigRational::from_integer(p.floor()));
        assert_eq!((&p - &nearest).signum(), 1);
        let next = &nearest + &AlgebraicReal::one();
        assert_eq!((&p - &next).signum(), -1);
    }

    #[test]
    fn inverse_and_norm() {
        let x = AlgebraicReal::from_ints(1, 0, 0, -1); // 1 - √6
        let inv = x.inverse().unwrap();
        // 1/(1-√6) = -(1+√6)/5
        assert_eq!(inv, elem([(-1, 5), (0, 1), (0, 1), (-1, 5)]));
        assert_eq!(&x * &inv, AlgebraicReal::one());
        assert!(AlgebraicReal::zero().inverse().is_none());
        assert_eq!(AlgebraicReal::sqrt2().norm(), ratio(4, 1));
    }

    #[test]
    fn display_and_json() {
        let x = elem([(1, 2), (-1, 1), (0, 1), (3, 4)]);
        assert_eq!(x.to_string(), "1/2 - √2 + 3/4√6");
        let json = serde_json::to_string(&x).unwrap();
        assert_eq!(json, "[[1,2],[-1,1],[0,1],[3,4]]");
        let back: AlgebraicReal = serde_json::from_str(&json).unwrap();
        assert_eq!(back, x);
        assert!(serde_json::from_str::<AlgebraicReal>("[[1,0],[0,1],[0,1],[0,1]]").is_err());
        assert!(serde_json::from_str::<AlgebraicReal>("[[1,1]]").is_err());
    }

    #[test]
    fn floor_of_irrationals() {
        assert_eq!(AlgebraicReal::sqrt2().floor(), BigInt::from(1));
        assert_eq!((-AlgebraicReal::sqrt6()).floor(), BigInt::from(-3));
        assert_eq!(AlgebraicReal::from_ratio(-7, 2).floor(), BigInt::from(-4));
    }

    fn arb_elem() -> impl Strategy<Value = AlgebraicReal> {
        let coeff = (-50i64..=50, 1i64..=12);
        [coeff.clone(), coeff.clone(), coeff.clone(), coeff].prop_map(elem)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(1000))]

        #[test]
        fn field_round_trips(u in arb_elem(), v in arb_elem()) {
            prop_assert_eq!(&(&u + &v) - &v, u.clone());
            if !v.is_zero() {
                prop_assert_eq!(&(&u * &v) / &v, u);
            }
        }

        #[test]
        fn compare_agrees_with_floats(u in arb_elem(), v in arb_elem()) {
            let (fu, fv) = (u.to_f64(), v.to_f64());
            if (fu - fv).abs() > 1e-6 {
                prop_assert_eq!(alg_compare(&u, &v), fu.partial_cmp(&fv).unwrap());
            }
            prop_assert_eq!(alg_compare(&u, &v) == Ordering::Equal, u == v);
        }
    }
}
