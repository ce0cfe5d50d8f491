use std::collections::BTreeMap;

use nalgebra::DMatrix;

use super::{HTable, MultiIndex, SemibasicBasis};
use crate::error::{Error, Result};
use crate::frames::MCPullback;
use crate::jets::JetForm;
use crate::{RealJet, RealJetMatrix};

/// The inverse coefficients `k^{st}` and `k^{stu}` along the section.
#[derive(Debug, Clone)]
pub struct KTable {
    n: usize,
    k2: RealJetMatrix,
    k3: BTreeMap<MultiIndex, RealJet>,
    symmetry_residual: f64,
}

impl KTable {
    pub fn n(&self) -> usize {
        self.n
    }

    /// `k^{st}` as a jet, indices in `1..=n`.
    pub fn k2(&self, s: usize, t: usize) -> &RealJet {
        self.k2.get(s - 1, t - 1)
    }

    pub fn k3(&self, s: usize, t: usize, u: usize) -> &RealJet {
        &self.k3[&MultiIndex::new(vec![s, t, u])]
    }

    /// `k` at the origin; accepts two or three indices.
    pub fn at0(&self, idx: &[usize]) -> f64 {
        match idx.len() {
            2 => self.k2(idx[0], idx[1]).constant_term(),
            3 => self.k3(idx[0], idx[1], idx[2]).constant_term(),
            _ => panic!("k is available at orders 2 and 3"),
        }
    }

    pub fn symmetry_residual(&self) -> f64 {
        self.symmetry_residual
    }

    /// `|h k - I|` at the origin.
    pub fn inverse_defect(&self, h: &HTable) -> f64 {
        let n = self.n;
        let hm = DMatrix::from_fn(n, n, |s, t| h.at0(&[s + 1, t + 1]));
        let km = DMatrix::from_fn(n, n, |s, t| self.at0(&[s + 1, t + 1]));
        (hm * km - DMatrix::identity(n, n)).abs().max()
    }
}

/// `k^{st} = (h⁻¹)^{st}` and the third-order coefficients defined by
/// `k^{stu} ω^{n+1}_u = -dk^{st} + k^{st}(ω^{n+1}_{n+1} + ω^0_0) - k^{us} ω^t_u - k^{ut} ω^s_u`.
pub fn compute_k(mc: &MCPullback, h: &HTable) -> Result<KTable> {
    let n = h.n();
    let h0 = DMatrix::from_fn(n, n, |s, t| h.at0(&[s + 1, t + 1]));
    let sv = h0.clone().singular_values();
    if sv.min() <= 1e-12 * sv.max().max(1.0) {
        return Err(Error::Degenerate("the matrix (h_st) is singular at the origin".into()));
    }
    let k2 = h.h2_matrix().inverse()?;
    let basis = SemibasicBasis::new(mc)?;
    let diag = mc.w(n + 1, n + 1) + mc.w(0, 0);

    let mut sums: BTreeMap<MultiIndex, Vec<RealJet>> = BTreeMap::new();
    for s in 1..=n {
        for t in s..=n {
            let kst = k2.get(s - 1, t - 1);
            let mut rhs = &diag.scale_by(kst) - &JetForm::differential(kst);
            for u in 1..=n {
                rhs = &rhs - &mc.w(t, u).scale_by(k2.get(u - 1, s - 1));
                rhs = &rhs - &mc.w(s, u).scale_by(k2.get(u - 1, t - 1));
            }
            let c = basis.expand(&rhs);
            for w in 1..=n {
                let mut acc = RealJet::zero(rhs.num_vars(), rhs.order());
                for (u0, cu) in c.iter().enumerate() {
                    acc = &acc + &(cu * k2.get(u0, w - 1));
                }
                sums.entry(MultiIndex::new(vec![s, t, w])).or_default().push(acc);
            }
        }
    }
    let mut k3 = BTreeMap::new();
    let mut spread: f64 = 0.0;
    for (key, all) in sums {
        let mut mean = all[0].clone();
        for v in &all[1..] {
            mean = &mean + v;
        }
        let mean = mean.scale(&(1.0 / all.len() as f64));
        for v in &all {
            spread = spread.max(v.max_abs_diff(&mean));
        }
        k3.insert(key, mean);
    }
    Ok(KTable { n, k2, k3, symmetry_residual: spread })
}
