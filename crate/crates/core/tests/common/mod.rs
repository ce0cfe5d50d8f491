//! Independent expansion of the third- and fourth-order structure equations,
//! solved against the semi-basic forms by a direct jet-matrix inversion.

use std::collections::BTreeMap;

use crproj::frames::MCPullback;
use crproj::{RealForm, RealJet, RealJetMatrix};

pub type H2 = BTreeMap<(usize, usize), RealJet>;
pub type H3 = BTreeMap<(usize, usize, usize), RealJet>;
pub type H4 = BTreeMap<[usize; 4], RealJet>;

pub struct Oracle<'a> {
    mc: &'a MCPullback,
    n: usize,
    winv: RealJetMatrix,
}

impl<'a> Oracle<'a> {
    pub fn new(mc: &'a MCPullback) -> Self {
        let winv = mc.semibasic_matrix().inverse().expect("semi-basic forms are a coframe");
        Oracle { mc, n: mc.n(), winv }
    }

    /// Coefficients `c_t`, `t = 1..=n`, of `xi = c_t ω^t_0`, keyed by `t`.
    fn expand(&self, xi: &RealForm) -> Vec<RealJet> {
        (0..self.n)
            .map(|t| {
                let mut acc = RealJet::zero(xi.num_vars(), xi.order());
                for i in 0..xi.num_vars() {
                    acc = &acc + &(xi.component(i) * self.winv.get(i, t));
                }
                acc
            })
            .collect()
    }

    fn w(&self, j: usize, k: usize) -> &RealForm {
        self.mc.w(j, k)
    }

    pub fn h2(&self) -> H2 {
        let mut out = BTreeMap::new();
        for s in 1..=self.n {
            for (t, c) in self.expand(self.w(self.n + 1, s)).into_iter().enumerate() {
                out.insert((s, t + 1), c);
            }
        }
        out
    }

    pub fn h3(&self, h2: &H2) -> H3 {
        let n = self.n;
        let trace = self.w(0, 0) + self.w(n + 1, n + 1);
        let mut out = BTreeMap::new();
        for r in 1..=n {
            for s in 1..=n {
                let hrs = &h2[&(r, s)];
                let mut form = &RealForm::differential(hrs) + &trace.scale_by(hrs);
                for t in 1..=n {
                    form = &form - &self.w(t, s).scale_by(&h2[&(r, t)]);
                    form = &form - &self.w(t, r).scale_by(&h2[&(t, s)]);
                }
                for (t, c) in self.expand(&form).into_iter().enumerate() {
                    out.insert((r, s, t + 1), c);
                }
            }
        }
        out
    }

    pub fn h4(&self, h2: &H2, h3: &H3) -> H4 {
        let n = self.n;
        let weight = &(self.w(0, 0) + self.w(0, 0)) + self.w(n + 1, n + 1);
        let mut out = BTreeMap::new();
        for r in 1..=n {
            for s in r..=n {
                for t in s..=n {
                    let hrst = &h3[&(r, s, t)];
                    let mut form = &RealForm::differential(hrst) + &weight.scale_by(hrst);
                    for u in 1..=n {
                        form = &form - &self.w(u, r).scale_by(&h3[&(u, s, t)]);
                        form = &form - &self.w(u, s).scale_by(&h3[&(r, u, t)]);
                        form = &form - &self.w(u, t).scale_by(&h3[&(r, s, u)]);
                        let quad = &(&(&h2[&(r, s)] * &h2[&(t, u)]) + &(&h2[&(s, t)] * &h2[&(r, u)]))
                            + &(&h2[&(t, r)] * &h2[&(s, u)]);
                        form = &form - &self.w(u, n + 1).scale_by(&quad);
                    }
                    form = &form + &self.w(0, t).scale_by(&h2[&(r, s)]);
                    form = &form + &self.w(0, r).scale_by(&h2[&(s, t)]);
                    form = &form + &self.w(0, s).scale_by(&h2[&(t, r)]);
                    for (u, c) in self.expand(&form).into_iter().enumerate() {
                        let mut idx = [r, s, t, u + 1];
                        idx.sort();
                        out.insert(idx, c);
                    }
                }
            }
        }
        out
    }
}

/// Coefficient difference over the common truncation order.
pub fn jet_diff(a: &RealJet, b: &RealJet) -> f64 {
    let order = a.order().min(b.order());
    a.truncate(order).max_abs_diff(&b.truncate(order))
}
