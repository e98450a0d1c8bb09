//! Gauss–Legendre rules, composite and adaptive.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use super::PwError;

/// Nodes and weights of the `n`-point rule on `[-1, 1]`, ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    static CACHE: OnceLock<Mutex<HashMap<usize, (Vec<f64>, Vec<f64>)>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(r) = cache.lock().unwrap().get(&n) {
        return r.clone();
    }
    let rule = compute_gl(n);
    cache.lock().unwrap().insert(n, rule.clone());
    rule
}

fn compute_gl(n: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(n >= 1);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { z } else { p1 };
            let pm = if n == 1 { 1.0 } else { p0 };
            dp = nf * (z * p - pm) / (z * z - 1.0);
            let dz = p / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            dp = 1.0;
            z = 0.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n == 1 {
        w[0] = 2.0;
    }
    (x, w)
}

/// Composite rule with `panels` equal panels of `order` points on `[a, b]`.
pub fn composite(a: f64, b: f64, panels: usize, order: usize) -> (Vec<f64>, Vec<f64>) {
    let (gx, gw) = gauss_legendre(order);
    let h = (b - a) / panels as f64;
    let mut xs = Vec::with_capacity(panels * order);
    let mut ws = Vec::with_capacity(panels * order);
    for p in 0..panels {
        let lo = a + h * p as f64;
        let mid = lo + 0.5 * h;
        for (x, w) in gx.iter().zip(&gw) {
            xs.push(mid + 0.5 * h * x);
            ws.push(0.5 * h * w);
        }
    }
    (xs, ws)
}

/// Rule of `order` points mapped to `[a, b]`.
pub fn mapped(a: f64, b: f64, order: usize) -> (Vec<f64>, Vec<f64>) {
    composite(a, b, 1, order)
}

/// Rule value and `Σ w |f|` (the roundoff scale).
fn panel(f: &impl Fn(f64) -> f64, a: f64, b: f64, order: usize) -> (f64, f64) {
    let (x, w) = mapped(a, b, order);
    x.iter().zip(&w).fold((0.0, 0.0), |(s, sa), (x, w)| {
        let v = f(*x);
        (s + w * v, sa + w * v.abs())
    })
}

/// Adaptive bisection comparing 10- and 20-point rules per panel.
/// Returns the value and the accumulated error estimate.
pub fn adaptive(f: impl Fn(f64) -> f64, a: f64, b: f64, tol: f64, max_depth: u32) -> Result<(f64, f64), PwError> {
    if a == b {
        return Ok((0.0, 0.0));
    }
    let mut total = 0.0;
    let mut err = 0.0;
    let mut stack = vec![(a, b, 0u32)];
    let mut failed = false;
    while let Some((lo, hi, depth)) = stack.pop() {
        let (coarse, _) = panel(&f, lo, hi, 10);
        let (fine, fine_abs) = panel(&f, lo, hi, 20);
        let e = (fine - coarse).abs();
        let local_tol = (tol * (hi - lo) / (b - a)).max(64.0 * f64::EPSILON * fine_abs);
        if e <= local_tol || depth >= max_depth {
            if depth >= max_depth && e > local_tol {
                failed = true;
            }
            total += fine;
            err += e;
        } else {
            let mid = 0.5 * (lo + hi);
            stack.push((mid, hi, depth + 1));
            stack.push((lo, mid, depth + 1));
        }
    }
    if failed && err > tol {
        return Err(PwError::QuadratureNotConverged { achieved: err, tol });
    }
    Ok((total, err))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_on_polynomials() {
        for n in [1, 2, 5, 16, 20] {
            let (x, w) = gauss_legendre(n);
            let sum: f64 = w.iter().sum();
            assert!((sum - 2.0).abs() < 1e-14, "n={n}");
            let deg = 2 * n - 1;
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(deg as i32 - 1)).sum();
            let exact = if (deg - 1) % 2 == 0 { 2.0 / deg as f64 } else { 0.0 };
            assert!((q - exact).abs() < 1e-13, "n={n}");
        }
    }

    #[test]
    fn adaptive_handles_oscillation() {
        let (v, _) = adaptive(|x| (40.0 * x).cos(), 0.0, 3.0, 1e-12, 30).unwrap();
        assert!((v - (120.0f64).sin() / 40.0).abs() < 1e-11);
    }

    #[test]
    fn adaptive_reports_failure() {
        let r = adaptive(|x| if x < 0.3 { 0.0 } else { 1.0 }, 0.0, 1.0, 1e-14, 2);
        assert!(matches!(r, Err(PwError::QuadratureNotConverged { .. })));
    }
}
