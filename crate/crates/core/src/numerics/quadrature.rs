//! Tensor-product Gauss–Legendre quadrature on the open unit square.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::Scalar;

/// Default number of nodes per axis.
pub const DEFAULT_ORDER: usize = 128;

/// Gauss–Legendre nodes (ascending) and weights on [-1, 1].
pub fn gauss_legendre<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1, "quadrature order must be positive");
    let mut nodes = vec![0.0f64; n];
    let mut weights = vec![0.0f64; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n.
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 1.0;
        for _ in 0..100 {
            let (p, d) = legendre_with_derivative(n, x);
            dp = d;
            let dx = p / d;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        let (_, d) = legendre_with_derivative(n, x);
        if d.is_finite() {
            dp = d;
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
    (
        nodes.into_iter().map(T::lit).collect(),
        weights.into_iter().map(T::lit).collect(),
    )
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let nf = n as f64;
    let d = nf * (x * p1 - p0) / (x * x - 1.0);
    (p1, d)
}

/// Nodes and weights of a tensor-product rule mapped onto (0, 1)².
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct QuadratureGrid<T> {
    pub nodes_u: Vec<T>,
    pub nodes_v: Vec<T>,
    pub weights_u: Vec<T>,
    pub weights_v: Vec<T>,
    pub order: usize,
}

impl<T: Scalar> QuadratureGrid<T> {
    /// Same Gauss–Legendre order on both axes.
    pub fn gauss_legendre(order: usize) -> Result<Self> {
        Self::with_orders(order, order)
    }

    pub fn with_orders(order_u: usize, order_v: usize) -> Result<Self> {
        if order_u == 0 || order_v == 0 {
            return Err(domain("quadrature order must be at least 1"));
        }
        let (nodes_u, weights_u) = unit_interval_rule::<T>(order_u);
        let (nodes_v, weights_v) = if order_v == order_u {
            (nodes_u.clone(), weights_u.clone())
        } else {
            unit_interval_rule::<T>(order_v)
        };
        Ok(Self {
            nodes_u,
            nodes_v,
            weights_u,
            weights_v,
            order: order_u.max(order_v),
        })
    }

    /// Σᵢⱼ wᵢ wⱼ g(i, j), with a non-finite term reported at its node.
    pub fn sum_indexed<F>(&self, mut g: F) -> Result<T>
    where
        F: FnMut(usize, usize) -> T,
    {
        let mut total = T::zero();
        for (i, &wu) in self.weights_u.iter().enumerate() {
            let mut row = T::zero();
            for (j, &wv) in self.weights_v.iter().enumerate() {
                let value = g(i, j);
                if !value.is_finite() {
                    return Err(Error::Integration {
                        u: self.nodes_u[i].as_f64(),
                        v: self.nodes_v[j].as_f64(),
                        value: value.as_f64(),
                    });
                }
                row = row + wv * value;
            }
            total = total + wu * row;
        }
        Ok(total)
    }
}

impl<T: Scalar> Default for QuadratureGrid<T> {
    fn default() -> Self {
        Self::gauss_legendre(DEFAULT_ORDER).expect("default order is positive")
    }
}

fn unit_interval_rule<T: Scalar>(n: usize) -> (Vec<T>, Vec<T>) {
    let (x, w) = gauss_legendre::<T>(n);
    let half = T::lit(0.5);
    (
        x.into_iter().map(|x| (x + T::one()) * half).collect(),
        w.into_iter().map(|w| w * half).collect(),
    )
}

/// ∬_{(0,1)²} f(u, v) du dv on the given grid.
pub fn integrate2d<T, F>(f: F, grid: &QuadratureGrid<T>) -> Result<T>
where
    T: Scalar,
    F: Fn(T, T) -> T,
{
    grid.sum_indexed(|i, j| f(grid.nodes_u[i], grid.nodes_v[j]))
}
