use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use super::{p_jets, HTable};
use crate::convexity::{max_norm, SecondOrderData};
use crate::error::{Error, Result};
use crate::frames::MCPullback;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Largest `|P_{αm}|`, `|P_{mm}|` at the origin accepted as adapted.
pub const ADAPTED_TOLERANCE: f64 = 1e-8;

/// Third-order coefficients at the origin of an adapted section.
#[derive(Debug, Clone, PartialEq)]
pub struct ThirdOrderData {
    /// `P_{αβm}`.
    pub pabm: DMatrix<Complex64>,
    /// `P_{αβ̄m}`.
    pub pabbar_m: DMatrix<Complex64>,
    /// `P_{αmm}`.
    pub pamm: DVector<Complex64>,
    /// `P_{mmm}`.
    pub pmmm: Complex64,
}

impl ThirdOrderData {
    pub fn zeros(k: usize) -> Self {
        ThirdOrderData {
            pabm: DMatrix::zeros(k, k),
            pabbar_m: DMatrix::zeros(k, k),
            pamm: DVector::zeros(k),
            pmmm: Complex64::new(0.0, 0.0),
        }
    }

    /// `max(|P_{αβm} - P_{βαm}|, |P̄_{αβ̄m} + P_{βᾱm}|, |Re P_{mmm}|)`.
    pub fn symmetry_residual(&self) -> f64 {
        let a = max_norm(&(&self.pabm - self.pabm.transpose()));
        let b = max_norm(&(self.pabbar_m.adjoint() + &self.pabbar_m));
        a.max(b).max(self.pmmm.re.abs())
    }

    pub fn max_abs(&self) -> f64 {
        max_norm(&self.pabm).max(max_norm(&self.pabbar_m)).max(max_norm(&self.pamm)).max(self.pmmm.norm())
    }

    /// Per-family maximum differences: `[αβm, αβ̄m, αmm, mmm]`.
    pub fn family_diff(&self, other: &Self) -> [f64; 4] {
        [
            max_norm(&(&self.pabm - &other.pabm)),
            max_norm(&(&self.pabbar_m - &other.pabbar_m)),
            max_norm(&(&self.pamm - &other.pamm)),
            (self.pmmm - other.pmmm).norm(),
        ]
    }
}

/// `P_{αβm}, P_{αβ̄m}, P_{αmm}, P_{mmm}` from `h^(3)` on an adapted section.
pub fn compute_p3(h: &HTable) -> Result<ThirdOrderData> {
    if h.pmax() < 3 {
        return Err(Error::InsufficientOrder("third-order invariants need p_max >= 3".into()));
    }
    let pj = p_jets(h);
    let off = pj.pam.iter().map(|j| j.constant_term().norm()).fold(pj.pmm.constant_term().norm(), f64::max);
    if off > ADAPTED_TOLERANCE {
        return Err(Error::Consistency(format!("frame not adapted: |P_am|, |P_mm| reach {off:.3e}")));
    }
    let n = h.n();
    let m = n / 2;
    let k = m - 1;
    let h3 = |a: usize, b: usize, c: usize| h.at0(&[a, b, c]);
    let mut out = ThirdOrderData::zeros(k);
    for a in 1..m {
        let (ar, ai) = (2 * a, 2 * a + 1);
        for b in 1..m {
            let (br, bi) = (2 * b, 2 * b + 1);
            let (rr, ii, ri, ir) = (h3(ar, br, n), h3(ai, bi, n), h3(ar, bi, n), h3(ai, br, n));
            out.pabm[(a - 1, b - 1)] = Complex64::new(0.5 * (ir + ri), 0.5 * (rr - ii));
            out.pabbar_m[(a - 1, b - 1)] = Complex64::new(0.5 * (ir - ri), 0.5 * (rr + ii));
        }
        out.pamm[a - 1] = Complex64::new(h3(ai, n, n), h3(ar, n, n));
    }
    out.pmmm = -2.0 * I * h3(n, n, n);
    Ok(out)
}

/// Reads the third-order coefficients off the complex structure equations at
/// the origin. Also returns the largest defect: the `ω^1_0` components and the
/// disagreement between the two appearances of `P_{αmm}`.
pub fn p3_from_omega(mc: &MCPullback, data: &SecondOrderData) -> Result<(ThirdOrderData, f64)> {
    let m = mc.m();
    let k = m - 1;
    let nv = mc.num_vars();
    let at0 = |b: usize, a: usize| DVector::from_vec(mc.big(b, a).at_origin());
    let mut basis = DMatrix::<Complex64>::zeros(nv, 2 * m);
    for b in 1..m {
        let v = at0(b, 0);
        basis.set_column(b - 1, &v);
        basis.set_column(k + b - 1, &v.map(|c| c.conj()));
    }
    basis.set_column(2 * k, &at0(m, 0));
    let w10 = DVector::from_vec(mc.w(1, 0).at_origin()).map(|x| Complex64::new(x, 0.0));
    basis.set_column(2 * k + 1, &w10);
    let lu = basis.lu();
    let solve = |xi: &DVector<Complex64>| {
        lu.solve(xi).ok_or_else(|| Error::Consistency("complex semi-basic forms are dependent".into()))
    };

    let mut out = ThirdOrderData::zeros(k);
    let mut defect: f64 = 0.0;
    for a in 1..m {
        let mut xi = at0(0, a);
        for b in 1..m {
            xi += at0(b, m) * data.p[(a - 1, b - 1)];
            xi += at0(b, m).map(|c| c.conj()) * data.l[(a - 1, b - 1)];
        }
        let c = solve(&xi)?;
        for b in 0..k {
            out.pabm[(a - 1, b)] = -c[b];
            out.pabbar_m[(a - 1, b)] = -c[k + b];
        }
        out.pamm[a - 1] = -c[2 * k];
        defect = defect.max(c[2 * k + 1].norm());
    }
    let o0m = at0(0, m);
    let xi = (&o0m - o0m.map(|c| c.conj())) * Complex64::new(-2.0, 0.0);
    let c = solve(&xi)?;
    for a in 0..k {
        defect = defect.max((c[a] - out.pamm[a]).norm());
        defect = defect.max((c[k + a] + out.pamm[a].conj()).norm());
    }
    out.pmmm = -c[2 * k];
    defect = defect.max(c[2 * k + 1].norm());
    Ok((out, defect))
}
