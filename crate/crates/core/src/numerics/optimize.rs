//! Bounded scalar minimization: optional grid pre-scan, then Brent's
//! golden-section/parabolic search on the bracket around the best grid point.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::Scalar;

/// Default number of points in the coarse pre-scan.
pub const DEFAULT_SCAN_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BracketSearch<T> {
    pub lo: T,
    pub hi: T,
    pub tol: T,
    pub max_iter: usize,
    /// Grid points evaluated before refinement; 0 skips the scan.
    pub scan_points: usize,
}

impl<T: Scalar> BracketSearch<T> {
    pub fn new(lo: T, hi: T) -> Self {
        Self {
            lo,
            hi,
            tol: T::lit(1e-10).max(T::epsilon() * T::lit(100.0)),
            max_iter: 200,
            scan_points: DEFAULT_SCAN_POINTS,
        }
    }

    pub fn with_tol(mut self, tol: T) -> Self {
        self.tol = tol;
        self
    }

    pub fn with_scan(mut self, points: usize) -> Self {
        self.scan_points = points;
        self
    }

    pub fn with_max_iter(mut self, max_iter: usize) -> Self {
        self.max_iter = max_iter;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.lo < self.hi) || !self.lo.is_finite() || !self.hi.is_finite() {
            return Err(domain(format!("bracket requires lo < hi, got [{}, {}]", self.lo, self.hi)));
        }
        if !(self.tol > T::zero()) {
            return Err(domain("bracket tolerance must be positive"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Minimum<T> {
    pub argmin: T,
    pub min_value: T,
}

/// Minimize `objective` on `[lo, hi]`.
///
/// Non-finite objective values are treated as +∞. When the best value is at
/// an end of the bracket that end is returned.
pub fn minimize_scalar<T, F>(mut objective: F, bracket: &BracketSearch<T>) -> Result<Minimum<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    bracket.validate()?;
    let mut eval = |x: T| {
        let y = objective(x);
        if y.is_nan() {
            T::infinity()
        } else {
            y
        }
    };

    let (lo, hi) = (bracket.lo, bracket.hi);
    let (mut a, mut b) = (lo, hi);
    let mut best = Minimum {
        argmin: lo,
        min_value: eval(lo),
    };
    let f_hi = eval(hi);
    if f_hi < best.min_value {
        best = Minimum {
            argmin: hi,
            min_value: f_hi,
        };
    }

    if bracket.scan_points >= 2 {
        let n = bracket.scan_points;
        let step = (hi - lo) / T::from_usize_lossy(n - 1);
        let mut best_i = 0usize;
        let mut best_f = T::infinity();
        for i in 0..n {
            let x = if i == n - 1 { hi } else { lo + step * T::from_usize_lossy(i) };
            let y = eval(x);
            if y < best_f {
                best_f = y;
                best_i = i;
            }
        }
        if !best_f.is_finite() {
            return Err(Error::Estimation(
                "objective is not finite at any pre-scan grid point".into(),
            ));
        }
        let xi = lo + step * T::from_usize_lossy(best_i);
        if best_f < best.min_value {
            best = Minimum {
                argmin: xi,
                min_value: best_f,
            };
        }
        a = (xi - step).max(lo);
        b = (xi + step).min(hi);
    }

    let refined = brent(&mut eval, a, b, bracket.tol, bracket.max_iter)?;
    if refined.min_value <= best.min_value {
        best = refined;
    }
    Ok(best)
}

fn brent<T, F>(f: &mut F, lo: T, hi: T, tol: T, max_iter: usize) -> Result<Minimum<T>>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let golden = T::lit(0.381_966_011_250_105_1);
    let half = T::lit(0.5);
    let two = T::lit(2.0);
    let (mut a, mut b) = (lo, hi);
    let mut x = a + golden * (b - a);
    let (mut w, mut v) = (x, x);
    let mut fx = f(x);
    let (mut fw, mut fv) = (fx, fx);
    let mut d = T::zero();
    let mut e = T::zero();
    let eps = T::epsilon().sqrt();

    for _ in 0..max_iter {
        let xm = half * (a + b);
        let tol1 = eps * x.abs() + tol / T::lit(3.0);
        let tol2 = two * tol1;
        if (x - xm).abs() <= tol2 - half * (b - a) {
            return Ok(Minimum {
                argmin: x,
                min_value: fx,
            });
        }
        let mut golden_step = true;
        if e.abs() > tol1 {
            let r = (x - w) * (fx - fv);
            let mut q = (x - v) * (fx - fw);
            let mut p = (x - v) * q - (x - w) * r;
            q = two * (q - r);
            if q > T::zero() {
                p = -p;
            }
            q = q.abs();
            let e_prev = e;
            e = d;
            if p.abs() < (half * q * e_prev).abs() && p > q * (a - x) && p < q * (b - x) {
                d = p / q;
                let u = x + d;
                if u - a < tol2 || b - u < tol2 {
                    d = if xm >= x { tol1 } else { -tol1 };
                }
                golden_step = false;
            }
        }
        if golden_step {
            e = if x >= xm { a - x } else { b - x };
            d = golden * e;
        }
        let u = if d.abs() >= tol1 {
            x + d
        } else if d > T::zero() {
            x + tol1
        } else {
            x - tol1
        };
        let fu = f(u);
        if fu <= fx {
            if u >= x {
                a = x;
            } else {
                b = x;
            }
            v = w;
            fv = fw;
            w = x;
            fw = fx;
            x = u;
            fx = fu;
        } else {
            if u < x {
                a = u;
            } else {
                b = u;
            }
            if fu <= fw || w == x {
                v = w;
                fv = fw;
                w = u;
                fw = fu;
            } else if fu <= fv || v == x || v == w {
                v = u;
                fv = fu;
            }
        }
    }
    Err(Error::Convergence {
        iterations: max_iter,
        best_x: x.as_f64(),
        best_f: fx.as_f64(),
    })
}
