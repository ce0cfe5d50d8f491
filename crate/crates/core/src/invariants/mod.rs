//! The real invariants `h_{s_1...s_p}` along a section and the complex
//! coefficient families derived from them.
//!
//! Real indices follow the frame: `0` and `1` for `e_0, e_1`, `2α, 2α+1` for
//! the complex tangent directions, `n = 2m` and `n+1`. Multi-indices range
//! over `1..=n`.

mod kcoeffs;
mod redundancy;
mod second_order;
mod third_order;

pub use kcoeffs::{compute_k, KTable};
pub use redundancy::{verify_index1_redundancy, IdentityCheck};
pub use second_order::{h_to_p, levi_from_germ, p_jets, wirtinger_hessian, PJets};
pub use third_order::{compute_p3, p3_from_omega, ThirdOrderData};

use std::collections::BTreeMap;
use std::fmt;

use crate::error::{Error, Result};
use crate::frames::MCPullback;
use crate::jets::{JetForm, JetMatrix};
use crate::{RealForm, RealJet, RealJetMatrix};

/// A sorted multi-index over `1..=n`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MultiIndex(Vec<usize>);

impl MultiIndex {
    pub fn new(mut idx: Vec<usize>) -> Self {
        idx.sort_unstable();
        MultiIndex(idx)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn with(&self, t: usize) -> Self {
        let mut v = self.0.clone();
        v.push(t);
        MultiIndex::new(v)
    }

    /// Drops the entry at `pos`.
    pub fn without(&self, pos: usize) -> Self {
        let mut v = self.0.clone();
        v.remove(pos);
        MultiIndex(v)
    }

    /// Sub-index on the positions flagged by `mask`, and its complement.
    pub fn split(&self, mask: u32) -> (Self, Self) {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        for (i, &s) in self.0.iter().enumerate() {
            if mask & (1 << i) != 0 {
                a.push(s);
            } else {
                b.push(s);
            }
        }
        (MultiIndex(a), MultiIndex(b))
    }

    /// All sorted multi-indices of length `p` over `1..=n`.
    pub fn all(n: usize, p: usize) -> Vec<MultiIndex> {
        fn rec(n: usize, p: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<MultiIndex>) {
            if cur.len() == p {
                out.push(MultiIndex(cur.clone()));
                return;
            }
            for s in start..=n {
                cur.push(s);
                rec(n, p, s, cur, out);
                cur.pop();
            }
        }
        let mut out = Vec::new();
        rec(n, p, 1, &mut Vec::new(), &mut out);
        out
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|s| s.to_string()).collect();
        write!(f, "{}", parts.join(","))
    }
}

/// Expansion of semi-basic one-forms in the basis `{ω^1_0, ..., ω^n_0}`.
#[derive(Debug, Clone)]
pub struct SemibasicBasis {
    inverse: RealJetMatrix,
}

impl SemibasicBasis {
    pub fn new(mc: &MCPullback) -> Result<Self> {
        let w = mc.semibasic_matrix();
        let inverse =
            w.inverse().map_err(|_| Error::Consistency("semi-basic forms are dependent at the origin".into()))?;
        Ok(SemibasicBasis { inverse })
    }

    /// Coefficients `c_t` (position `t - 1`) with `ξ = Σ c_t ω^t_0`.
    pub fn expand(&self, xi: &RealForm) -> Vec<RealJet> {
        let n = self.inverse.cols();
        (0..n)
            .map(|t| {
                let mut acc = RealJet::zero(xi.num_vars(), xi.order().min(self.inverse.order()));
                for (i, c) in xi.components().iter().enumerate() {
                    let w = self.inverse.get(i, t);
                    if c.is_zero() || w.is_zero() {
                        continue;
                    }
                    acc = &acc + &(c * w);
                }
                acc
            })
            .collect()
    }
}

/// The functions `h_{s_1...s_p}` along a section, for `2 <= p <= p_max`.
#[derive(Debug, Clone)]
pub struct HTable {
    n: usize,
    pmax: usize,
    entries: BTreeMap<MultiIndex, RealJet>,
    symmetry_residual: BTreeMap<usize, f64>,
    recursion_residual: BTreeMap<usize, f64>,
}

impl HTable {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn pmax(&self) -> usize {
        self.pmax
    }

    pub fn get(&self, idx: &[usize]) -> Option<&RealJet> {
        self.entries.get(&MultiIndex::new(idx.to_vec()))
    }

    /// The jet `h_idx`; panics if the order was not computed.
    pub fn jet(&self, idx: &[usize]) -> &RealJet {
        self.get(idx).unwrap_or_else(|| panic!("h{idx:?} not computed"))
    }

    /// `h_idx` at the origin. Single indices read as zero.
    pub fn at0(&self, idx: &[usize]) -> f64 {
        if idx.len() < 2 {
            return 0.0;
        }
        self.jet(idx).constant_term()
    }

    pub fn entries(&self) -> impl Iterator<Item = (&MultiIndex, &RealJet)> {
        self.entries.iter()
    }

    /// Largest disagreement among the redundant estimates of each order.
    pub fn symmetry_residual(&self, p: usize) -> f64 {
        self.symmetry_residual.get(&p).copied().unwrap_or(0.0)
    }

    /// Largest coefficient of `RHS - h_{S t} ω^t_0` when producing order `p`.
    pub fn recursion_residual(&self, p: usize) -> f64 {
        self.recursion_residual.get(&p).copied().unwrap_or(0.0)
    }

    fn lookup(&self, idx: &MultiIndex) -> Option<&RealJet> {
        if idx.len() < 2 {
            None
        } else {
            self.entries.get(idx)
        }
    }

    /// The `n×n` matrix of second-order jets.
    pub fn h2_matrix(&self) -> RealJetMatrix {
        JetMatrix::from_fn(self.n, self.n, |s, t| self.jet(&[s + 1, t + 1]).clone())
    }
}

/// Records averaged estimates and their spread.
struct Estimates {
    sums: BTreeMap<MultiIndex, (RealJet, Vec<RealJet>)>,
}

impl Estimates {
    fn new() -> Self {
        Estimates { sums: BTreeMap::new() }
    }

    fn add(&mut self, key: MultiIndex, value: RealJet) {
        self.sums
            .entry(key)
            .and_modify(|(sum, all)| {
                *sum = &*sum + &value;
                all.push(value.clone());
            })
            .or_insert_with(|| (value.clone(), vec![value]));
    }

    fn finish(self) -> (BTreeMap<MultiIndex, RealJet>, f64) {
        let mut out = BTreeMap::new();
        let mut spread: f64 = 0.0;
        for (k, (sum, all)) in self.sums {
            let mean = sum.scale(&(1.0 / all.len() as f64));
            for v in &all {
                spread = spread.max(v.max_abs_diff(&mean));
            }
            out.insert(k, mean);
        }
        (out, spread)
    }
}

/// Solves `ω^{n+1}_s = h_{st} ω^t_0`.
pub fn solve_h2(mc: &MCPullback, basis: &SemibasicBasis) -> Result<HTable> {
    let n = mc.n();
    let mut est = Estimates::new();
    for s in 1..=n {
        let coeffs = basis.expand(mc.w(n + 1, s));
        for (t0, c) in coeffs.into_iter().enumerate() {
            est.add(MultiIndex::new(vec![s, t0 + 1]), c);
        }
    }
    let (entries, spread) = est.finish();
    let mut table =
        HTable { n, pmax: 2, entries, symmetry_residual: BTreeMap::new(), recursion_residual: BTreeMap::new() };
    table.symmetry_residual.insert(2, spread);
    let mut worst: f64 = 0.0;
    for s in 1..=n {
        let mut acc = mc.w(n + 1, s).clone();
        for t in 1..=n {
            acc = &acc - &mc.w(t, 0).scale_by(table.jet(&[s, t]));
        }
        worst = worst.max(acc.max_abs());
    }
    table.recursion_residual.insert(2, worst);
    Ok(table)
}

/// The right-hand side of the recursion producing `h_{S t} ω^t_0`.
pub fn recursion_rhs(mc: &MCPullback, table: &HTable, s: &MultiIndex) -> RealForm {
    let n = table.n;
    let p = s.len();
    let h_s = table.lookup(s).expect("h_S present");
    let mut rhs = JetForm::differential(h_s);
    let diag = &mc.w(0, 0).scale(&((p - 1) as f64)) + mc.w(n + 1, n + 1);
    rhs = &rhs + &diag.scale_by(h_s);

    for i in 0..p {
        let rest = s.without(i);
        let si = s.as_slice()[i];
        if p > 2 {
            if let Some(h) = table.lookup(&rest) {
                rhs = &rhs + &mc.w(0, si).scale_by(h).scale(&((p - 2) as f64));
            }
        }
        for t in 1..=n {
            let h = table.lookup(&rest.with(t)).expect("lower order present");
            if h.is_zero() || mc.w(t, si).is_zero() {
                continue;
            }
            rhs = &rhs - &mc.w(t, si).scale_by(h);
        }
    }

    for mask in 1u32..(1 << p) - 1 {
        let j = mask.count_ones() as usize;
        if j > p - 2 {
            continue;
        }
        let (first, second) = s.split(mask);
        let Some(h_second) = table.lookup(&second) else { continue };
        if j >= 2 {
            if let Some(h_first) = table.lookup(&first) {
                let coeff = &(h_first * h_second).scale(&((j - 1) as f64));
                rhs = &rhs + &mc.w(0, n + 1).scale_by(coeff);
            }
        }
        for t in 1..=n {
            let h = table.lookup(&first.with(t)).expect("lower order present");
            if h.is_zero() || mc.w(t, n + 1).is_zero() {
                continue;
            }
            rhs = &rhs - &mc.w(t, n + 1).scale_by(&(h * h_second));
        }
    }
    rhs
}

/// Extends the table by one order.
pub fn recurse_h(mc: &MCPullback, basis: &SemibasicBasis, table: &mut HTable) -> Result<()> {
    let p = table.pmax;
    let n = table.n;
    let keys = MultiIndex::all(n, p);
    if table.jet(keys[0].as_slice()).order() == 0 {
        return Err(Error::InsufficientOrder(format!(
            "order-{p} invariants are constants; cannot produce order {}",
            p + 1
        )));
    }
    let mut est = Estimates::new();
    let mut rhs_all = Vec::with_capacity(keys.len());
    for s in &keys {
        let rhs = recursion_rhs(mc, table, s);
        for (t0, c) in basis.expand(&rhs).into_iter().enumerate() {
            est.add(s.with(t0 + 1), c);
        }
        rhs_all.push(rhs);
    }
    let (entries, spread) = est.finish();
    table.entries.extend(entries);
    table.pmax = p + 1;
    table.symmetry_residual.insert(p + 1, spread);
    let mut worst: f64 = 0.0;
    for (s, rhs) in keys.iter().zip(rhs_all) {
        let mut acc = rhs;
        for t in 1..=n {
            acc = &acc - &mc.w(t, 0).scale_by(table.jet(s.with(t).as_slice()));
        }
        worst = worst.max(acc.max_abs());
    }
    table.recursion_residual.insert(p + 1, worst);
    Ok(())
}

/// Computes `h^(2), ..., h^(pmax)` along the section.
pub fn compute_h(mc: &MCPullback, pmax: usize) -> Result<HTable> {
    if pmax < 2 {
        return Err(Error::Config(format!("p_max = {pmax}, need p_max >= 2")));
    }
    let basis = SemibasicBasis::new(mc)?;
    let mut table = solve_h2(mc, &basis)?;
    while table.pmax < pmax {
        recurse_h(mc, &basis, &mut table)?;
    }
    Ok(table)
}
