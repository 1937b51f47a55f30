//! Finite-difference derivatives with two-sided and lateral stencils.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::Scalar;

/// Which side of `x` the stencil may sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    TwoSided,
    /// Only points at or below x.
    Left,
    /// Only points at or above x.
    Right,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Stencil<T> {
    pub h: T,
    /// 1 or 2.
    pub order: u8,
    pub side: Side,
}

impl<T: Scalar> Stencil<T> {
    pub fn new(h: T, order: u8, side: Side) -> Self {
        Self { h, order, side }
    }

    /// Offsets (in units of h) and coefficients; the derivative is Σ cₖ f(x + oₖh) / h^order.
    fn weights(&self) -> Result<&'static [(i32, f64)]> {
        const C1: [(i32, f64); 2] = [(1, 0.5), (-1, -0.5)];
        const R1: [(i32, f64); 3] = [(0, -1.5), (1, 2.0), (2, -0.5)];
        const L1: [(i32, f64); 3] = [(0, 1.5), (-1, -2.0), (-2, 0.5)];
        const C2: [(i32, f64); 3] = [(1, 1.0), (0, -2.0), (-1, 1.0)];
        const R2: [(i32, f64); 4] = [(0, 2.0), (1, -5.0), (2, 4.0), (3, -1.0)];
        const L2: [(i32, f64); 4] = [(0, 2.0), (-1, -5.0), (-2, 4.0), (-3, -1.0)];
        Ok(match (self.order, self.side) {
            (1, Side::TwoSided) => &C1,
            (1, Side::Right) => &R1,
            (1, Side::Left) => &L1,
            (2, Side::TwoSided) => &C2,
            (2, Side::Right) => &R2,
            (2, Side::Left) => &L2,
            (o, _) => return Err(domain(format!("derivative order must be 1 or 2, got {o}"))),
        })
    }
}

/// Finite-difference derivative of `f` at `x` with no domain restriction.
pub fn central_diff<T, F>(f: F, x: T, stencil: Stencil<T>) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    central_diff_in(f, x, stencil, (T::neg_infinity(), T::infinity()))
}

/// Finite-difference derivative restricted to the closed interval `domain`.
pub fn central_diff_in<T, F>(mut f: F, x: T, stencil: Stencil<T>, domain_: (T, T)) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    if !(stencil.h > T::zero()) {
        return Err(domain("finite-difference step must be positive"));
    }
    let weights = stencil.weights()?;
    let mut acc = T::zero();
    for &(offset, c) in weights {
        let p = x + T::lit(offset as f64) * stencil.h;
        if p < domain_.0 || p > domain_.1 {
            return Err(domain(format!(
                "stencil point {p} leaves the domain [{}, {}]",
                domain_.0, domain_.1
            )));
        }
        let y = f(p);
        if !y.is_finite() {
            return Err(domain(format!("function not finite at stencil point {p}")));
        }
        acc = acc + T::lit(c) * y;
    }
    Ok(match stencil.order {
        1 => acc / stencil.h,
        _ => acc / (stencil.h * stencil.h),
    })
}

/// One Richardson step on the O(h²) stencils: (4 D(h/2) − D(h)) / 3.
pub fn richardson_diff<T, F>(mut f: F, x: T, stencil: Stencil<T>, domain_: (T, T)) -> Result<T>
where
    T: Scalar,
    F: FnMut(T) -> T,
{
    let coarse = central_diff_in(&mut f, x, stencil, domain_)?;
    let fine = central_diff_in(
        &mut f,
        x,
        Stencil {
            h: stencil.h * T::lit(0.5),
            ..stencil
        },
        domain_,
    )?;
    Ok((T::lit(4.0) * fine - coarse) / T::lit(3.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn square_first_and_second() {
        let d1 = central_diff(|x: f64| x * x, 1.0, Stencil::new(1e-3, 1, Side::TwoSided)).unwrap();
        assert!((d1 - 2.0).abs() < 1e-9);
        for side in [Side::TwoSided, Side::Left, Side::Right] {
            let d2 = central_diff(|x: f64| x * x, 0.0, Stencil::new(1e-3, 2, side)).unwrap();
            assert!((d2 - 2.0).abs() < 1e-5, "{side:?}: {d2}");
        }
    }

    #[test]
    fn right_sided_exp_within_taylor_bound() {
        // one-sided 3-point remainder is h²/3 · f'''(ξ) ≈ 3.3e-9 at h = 1e-4
        let d = central_diff(f64::exp, 0.0, Stencil::new(1e-4, 1, Side::Right)).unwrap();
        assert!((d - 1.0).abs() < 1e-6);
        let d = central_diff(f64::exp, 0.0, Stencil::new(1e-4, 1, Side::Left)).unwrap();
        assert!((d - 1.0).abs() < 1e-6);
    }

    #[test]
    fn stencil_outside_domain_is_rejected() {
        let r = central_diff_in(|x: f64| x.sqrt(), 0.0, Stencil::new(1e-4, 1, Side::TwoSided), (0.0, 1.0));
        assert!(r.is_err());
        let r = central_diff_in(|x: f64| x.powf(1.5), 0.0, Stencil::new(1e-4, 1, Side::Right), (0.0, 1.0));
        assert!(r.unwrap().abs() < 1e-1);
    }

    #[test]
    fn richardson_improves_cubic() {
        let f = |x: f64| x.powi(4);
        let s = Stencil::new(1e-2, 1, Side::Right);
        let plain = central_diff(f, 1.0, s).unwrap();
        let rich = richardson_diff(f, 1.0, s, (f64::NEG_INFINITY, f64::INFINITY)).unwrap();
        assert!((rich - 4.0).abs() < (plain - 4.0).abs());
    }

    #[test]
    fn bad_order() {
        assert!(central_diff(|x: f64| x, 0.0, Stencil::new(1e-3, 3, Side::TwoSided)).is_err());
    }
}
