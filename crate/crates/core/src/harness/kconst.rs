//! Decay constants for (family, marginal pair, grid order) requests.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::copulas::Family;
use crate::decay::{k_constants, DecayConstants};
use crate::error::Result;
use crate::marginals::Marginal;
use crate::numerics::QuadratureGrid;
use crate::output::to_json_g17;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KconstRequest {
    pub family: Family,
    pub marginal0: Marginal<f64>,
    pub marginaln: Marginal<f64>,
    pub order: usize,
}

pub fn kconst(req: &KconstRequest) -> Result<DecayConstants<f64>> {
    let grid = QuadratureGrid::gauss_legendre(req.order)?;
    k_constants(req.family, &req.marginal0, &req.marginaln, &grid)
}

/// Evaluates the requests concurrently; results keep the request order.
pub fn kconst_table(reqs: &[KconstRequest]) -> Vec<Result<DecayConstants<f64>>> {
    reqs.par_iter().map(kconst).collect()
}

/// The constants as JSON (the `kconst` command's output).
pub fn kconst_command(req: &KconstRequest) -> Result<String> {
    to_json_g17(&kconst(req)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(family: Family, m: Marginal<f64>) -> KconstRequest {
        KconstRequest {
            family,
            marginal0: m,
            marginaln: m,
            order: 64,
        }
    }

    #[test]
    fn json_output_carries_the_constants() {
        let s = kconst_command(&req(Family::Amh, Marginal::ExponentialScale { lambda: 1.0 })).unwrap();
        let c: DecayConstants<f64> = serde_json::from_str(&s).unwrap();
        assert!((c.k1() - 0.25).abs() < 1e-4);
        assert!((c.k2() - 1.0 / 18.0).abs() < 1e-4);
    }

    #[test]
    fn table_keeps_order_and_errors() {
        let n = Marginal::standard_normal();
        let out = kconst_table(&[req(Family::Gaussian, n), req(Family::W, n), req(Family::Fgm, n)]);
        assert!((out[0].as_ref().unwrap().k1() - 1.0).abs() < 1e-3);
        assert!(out[1].is_err());
        // FGM with N(0,1) margins: K1 = (∫ u(1−u)/φ(Φ⁻¹u) du)² = (1/√π)²
        assert!((out[2].as_ref().unwrap().k1() - 1.0 / std::f64::consts::PI).abs() < 1e-4);
    }
}
