use super::HTable;
use crate::RealJet;

/// A named identity and the largest coefficient of its defect.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: String,
    pub residual: f64,
}

/// `J^ν_σ h_{ν...} = sign · h_{partner...}`.
fn j_partner(sigma: usize) -> (usize, f64) {
    if sigma % 2 == 0 {
        (sigma + 1, 1.0)
    } else {
        (sigma - 1, -1.0)
    }
}

/// Checks the identities forced on entries carrying the index `1`.
pub fn verify_index1_redundancy(h: &HTable) -> Vec<IdentityCheck> {
    let n = h.n();
    let mut out = Vec::new();
    let mut worst = |name: &str, r: f64| {
        if let Some(c) = out.iter_mut().find(|c: &&mut IdentityCheck| c.name == name) {
            c.residual = c.residual.max(r);
        } else {
            out.push(IdentityCheck { name: name.to_string(), residual: r });
        }
    };

    for s in 1..n {
        worst("h_1s = 0", h.jet(&[1, s]).max_abs());
    }
    let h1n = h.jet(&[1, n]);
    worst("h_1n = 1", h1n.max_abs_diff(&RealJet::one(h1n.num_vars(), h1n.order())));

    if h.pmax() >= 3 {
        for s in 1..=n {
            worst("h_11s = 0", h.jet(&[1, 1, s]).max_abs());
        }
        worst("h_1nn = 0", h.jet(&[1, n, n]).max_abs());
        for sigma in 2..n {
            let (nu, sg) = j_partner(sigma);
            let want = h.jet(&[nu, n]).scale(&-sg);
            worst("h_1σn = -J h_τn", h.jet(&[1, sigma, n]).max_abs_diff(&want));
            for tau in sigma..n {
                let (nu_t, sg_t) = j_partner(tau);
                let want = &h.jet(&[nu, tau]).scale(&-sg) - &h.jet(&[sigma, nu_t]).scale(&sg_t);
                worst("h_1στ = -J h_ντ - J h_σν", h.jet(&[1, sigma, tau]).max_abs_diff(&want));
            }
        }
    }
    out
}
