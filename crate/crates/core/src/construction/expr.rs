use num_complex::Complex64;

use crate::paley_wiener::{Envelope, PwError, SchwartzInterpolant, TimeFunction, MAX_DERIV};
use crate::regions::IntervalUnion;

/// `φ_n = φ_0 - f_1 - ... - f_n` where `φ̂_0` is a unit-mass bump on
/// `(-r_0, r_0)`.
#[derive(Debug, Clone)]
pub struct FunctionExpr {
    base: Envelope,
    terms: Vec<SchwartzInterpolant>,
}

impl FunctionExpr {
    /// `φ_0(x) = Φ_1(r_0 x)`, so `φ_0(0) = 1` and `spec(φ_0) = [-r_0, r_0]`.
    pub fn bump(radius: f64) -> Self {
        Self { base: Envelope::new(radius), terms: Vec::new() }
    }

    pub fn base_radius(&self) -> f64 {
        self.base.eps
    }

    pub fn terms(&self) -> &[SchwartzInterpolant] {
        &self.terms
    }

    pub fn stage(&self) -> usize {
        self.terms.len()
    }

    pub(crate) fn push(&mut self, f: SchwartzInterpolant) {
        self.terms.push(f);
    }

    /// The expression with only the first `n` terms.
    pub fn truncated(&self, n: usize) -> Self {
        Self { base: self.base, terms: self.terms[..n.min(self.terms.len())].to_vec() }
    }

    /// Closed sets containing the frequency support of each term, base first.
    pub fn term_spectra(&self) -> Vec<IntervalUnion> {
        let mut out = vec![IntervalUnion::symmetric(self.base.eps)];
        out.extend(self.terms.iter().map(|f| f.spectrum()));
        out
    }

    /// Largest `|x|` where `φ_n` can be nonzero.
    pub fn time_radius(&self) -> f64 {
        self.terms.iter().map(|f| f.time_radius()).fold(self.base.time_radius(), f64::max)
    }

    /// `φ̂_n(t)`, real because `φ_n` is real and even.
    pub fn fourier(&self, t: f64) -> Result<f64, PwError> {
        let mut v = self.base.bump(t);
        for f in &self.terms {
            let z: Complex64 = f.fourier(t)?;
            v -= z.re;
        }
        Ok(v)
    }
}

impl TimeFunction for FunctionExpr {
    fn derivs(&self, x: f64, kmax: usize, out: &mut [f64]) {
        assert!(kmax <= MAX_DERIV);
        self.base.derivs(x, kmax, out);
        let mut t = [0.0; MAX_DERIV + 1];
        for f in &self.terms {
            f.derivs(x, kmax, &mut t);
            for k in 0..=kmax {
                out[k] -= t[k];
            }
        }
    }
}
