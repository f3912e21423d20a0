use alloc::vec::Vec;

use super::flow_map::FlowMapState;
use super::tensor::{load3, mul3, store3, transpose3};
use crate::norms::{NormEngine, NormsError};

/// Sup-in-time spatial `H^s` distances of `∇η`, `a` and `a aᵀ` from the
/// identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CofactorDistances {
    pub grad: f64,
    pub cofactor: f64,
    pub cofactor_gram: f64,
}

impl CofactorDistances {
    pub fn max(&self) -> f64 {
        self.grad.max(self.cofactor).max(self.cofactor_gram)
    }
}

fn minus_identity(t: &mut [f64]) {
    for chunk in t.chunks_exact_mut(9) {
        chunk[0] -= 1.0;
        chunk[4] -= 1.0;
        chunk[8] -= 1.0;
    }
}

pub fn cofactor_distances(engine: &NormEngine, flow: &FlowMapState, s: f64) -> Result<CofactorDistances, NormsError> {
    crate::norms::spatial_order_check(s)?;
    let layer = flow.grad_field().layer();
    let emb = engine.embedding(layer);
    let mut out = CofactorDistances {
        grad: 0.0,
        cofactor: 0.0,
        cofactor_gram: 0.0,
    };
    for n in 0..=flow.frozen_index() {
        let mut g: Vec<f64> = flow.grad(n).to_vec();
        let a = flow.cofactor(n);
        let mut gram = a.to_vec();
        for (src, dst) in a.chunks_exact(9).zip(gram.chunks_exact_mut(9)) {
            let m = load3(src);
            store3(&mul3(&m, &transpose3(&m)), dst);
        }
        let mut am = a.to_vec();
        minus_identity(&mut g);
        minus_identity(&mut am);
        minus_identity(&mut gram);
        out.grad = out.grad.max(emb.norm(&g, 9, s));
        out.cofactor = out.cofactor.max(emb.norm(&am, 9, s));
        out.cofactor_gram = out.cofactor_gram.max(emb.norm(&gram, 9, s));
    }
    Ok(out)
}
