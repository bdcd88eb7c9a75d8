//! Bessel functions of the first kind and the roots of their derivatives.

use std::f64::consts::PI;
use std::sync::Mutex;

use crate::error::{domain, Error, Result};

/// `J_n(x)` for integer order `n`.
///
/// Evaluates the integral representation `(1/2π)∫₀^{2π} cos(nθ − x·sinθ) dθ`
/// with the trapezoid rule, which converges geometrically for periodic
/// analytic integrands once the node count exceeds the order and argument
/// plus a margin that grows like `|x|^{1/3}` (the turning-point width).
pub fn bessel_j(n: i32, x: f64) -> f64 {
    if n < 0 {
        let v = bessel_j(-n, x);
        return if n % 2 == 0 { v } else { -v };
    }
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    let ax = x.abs();
    let m = (n as f64 + ax + 40.0 + 15.0 * ax.cbrt()).ceil() as usize;
    // The integrand is even about θ = π, so sum half the period.
    let h = PI / m as f64;
    let nf = n as f64;
    let mut s = 0.5 * (1.0 + (nf * PI).cos());
    for k in 1..m {
        let th = k as f64 * h;
        s += (nf * th - x * th.sin()).cos();
    }
    s / m as f64
}

/// `J_n'(x) = (J_{n−1}(x) − J_{n+1}(x)) / 2`.
pub fn bessel_j_prime(n: i32, x: f64) -> f64 {
    0.5 * (bessel_j(n - 1, x) - bessel_j(n + 1, x))
}

const ROOT_RESIDUAL: f64 = 1e-12;

/// Refines a bracketed sign change of `J_n'` and returns the root.
fn refine_prime_root(n: i32, mut lo: f64, mut hi: f64) -> Result<f64> {
    let mut flo = bessel_j_prime(n, lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        let fm = bessel_j_prime(n, mid);
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm > 0.0) == (flo > 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-6 {
            break;
        }
    }
    // Newton on J_n' using J_n'' = −J_n'/x − (1 − n²/x²)·J_n.
    let nf = n as f64;
    let mut x = 0.5 * (lo + hi);
    for _ in 0..50 {
        let jp = bessel_j_prime(n, x);
        if jp.abs() < ROOT_RESIDUAL * 1e-2 {
            break;
        }
        let jpp = -jp / x - (1.0 - nf * nf / (x * x)) * bessel_j(n, x);
        if jpp == 0.0 {
            break;
        }
        let next = x - jp / jpp;
        if !(next > lo && next < hi) {
            break;
        }
        let done = (next - x).abs() <= 1e-15 * x;
        x = next;
        if done {
            break;
        }
    }
    let residual = bessel_j_prime(n, x).abs();
    if residual < ROOT_RESIDUAL {
        Ok(x)
    } else {
        Err(Error::Convergence {
            what: format!("root of J_{n}' near {x}"),
            bound: residual,
        })
    }
}

/// Finds the next positive root of `J_n'` strictly greater than `after`.
fn next_prime_root(n: i32, after: Option<f64>) -> Result<f64> {
    let nf = n as f64;
    // Lower bounds: j'_{n,1} > sqrt(n(n+2)) for n ≥ 1, and consecutive roots are
    // separated by more than π − 0.2 once past the first.
    let (mut x, step) = match after {
        None if n == 0 => (1.0, 0.25),
        None => ((nf * (nf + 2.0)).sqrt(), 0.25),
        Some(r) => (r + PI - 0.2, 0.25),
    };
    let mut fx = bessel_j_prime(n, x);
    for _ in 0..100_000 {
        let y = x + step;
        let fy = bessel_j_prime(n, y);
        if fx == 0.0 {
            return Ok(x);
        }
        if (fx > 0.0) != (fy > 0.0) {
            return refine_prime_root(n, x, y);
        }
        x = y;
        fx = fy;
    }
    Err(Error::Convergence {
        what: format!("bracketing a root of J_{n}'"),
        bound: f64::INFINITY,
    })
}

/// First `count` positive roots `α` of `J_n'(α·a_c) = 0` (for `n = 0` the trivial root is excluded).
pub fn bessel_prime_roots(n: u32, a_c: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(domain!("root count must be >= 1"));
    }
    crate::error::require_positive("a_c", a_c)?;
    let mut out = Vec::with_capacity(count);
    let mut last = None;
    for _ in 0..count {
        let r = next_prime_root(n as i32, last)?;
        out.push(r / a_c);
        last = Some(r);
    }
    Ok(out)
}

/// Lazily extended cache of derivative roots per order for a fixed duct radius.
///
/// Each order holds dimensionless roots `x = α·a_c`, extended on demand up to
/// `max_roots`. Safe to share between threads.
#[derive(Debug)]
pub struct BesselRootTable {
    a_c: f64,
    max_roots: usize,
    orders: Vec<Mutex<Vec<f64>>>,
}

impl Clone for BesselRootTable {
    fn clone(&self) -> Self {
        Self {
            a_c: self.a_c,
            max_roots: self.max_roots,
            orders: self
                .orders
                .iter()
                .map(|m| Mutex::new(m.lock().map(|v| v.clone()).unwrap_or_default()))
                .collect(),
        }
    }
}

impl BesselRootTable {
    pub fn new(a_c: f64, max_n: u32, max_roots: usize) -> Self {
        Self {
            a_c,
            max_roots,
            orders: (0..=max_n).map(|_| Mutex::new(Vec::new())).collect(),
        }
    }

    pub fn a_c(&self) -> f64 {
        self.a_c
    }

    pub fn max_n(&self) -> u32 {
        (self.orders.len() - 1) as u32
    }

    pub fn max_roots(&self) -> usize {
        self.max_roots
    }

    /// Root `k` (0-based) of order `n` as `α`, or `None` past `max_roots`.
    pub fn root(&self, n: u32, k: usize) -> Result<Option<f64>> {
        if k >= self.max_roots {
            return Ok(None);
        }
        let slot = self
            .orders
            .get(n as usize)
            .ok_or_else(|| domain!("order {n} exceeds table limit {}", self.max_n()))?;
        let mut roots = slot
            .lock()
            .map_err(|_| Error::Numeric("root table lock poisoned".into()))?;
        while roots.len() <= k {
            let next = next_prime_root(n as i32, roots.last().copied())?;
            roots.push(next);
        }
        Ok(Some(roots[k] / self.a_c))
    }

    /// Fills order `n` with all `max_roots` roots and returns them as `α`.
    pub fn roots(&self, n: u32) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(self.max_roots);
        for k in 0..self.max_roots {
            if let Some(a) = self.root(n, k)? {
                out.push(a);
            }
        }
        Ok(out)
    }
}
