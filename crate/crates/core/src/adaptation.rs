//! Fibre motions and the reduction to the adapted bundle, on which
//! `P_{αm} = 0` and `P_{mm} = 0`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::convexity::{max_norm, SecondOrderData};
use crate::error::{Error, Result};
use crate::frames::{build_section_with_motion, pullback_mc, MCPullback};
use crate::invariants::{compute_h, p_jets, HTable};
use crate::surface_io::SurfaceGerm;
use crate::{ComplexJet, ComplexJetMatrix};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// A change of frame `f̃_a = g^b_a f_b` preserving the flag
/// `f_0 ∈ span{f_0..f_{m-1}} ⊂ W`.
#[derive(Debug, Clone, PartialEq)]
pub struct FibreMotion {
    pub g00: Complex64,
    /// `g^α_β`, row `α`, column `β`.
    pub gab: DMatrix<Complex64>,
    pub gmm: Complex64,
    pub g0a: DVector<Complex64>,
    pub g0m: Complex64,
    pub gam: DVector<Complex64>,
}

impl FibreMotion {
    pub fn identity(m: usize) -> Self {
        let k = m - 1;
        FibreMotion {
            g00: ONE,
            gab: DMatrix::identity(k, k),
            gmm: ONE,
            g0a: DVector::zeros(k),
            g0m: ZERO,
            gam: DVector::zeros(k),
        }
    }

    pub fn block(g00: Complex64, gab: DMatrix<Complex64>, gmm: Complex64) -> Self {
        let k = gab.nrows();
        FibreMotion { g00, gab, gmm, g0a: DVector::zeros(k), g0m: ZERO, gam: DVector::zeros(k) }
    }

    pub fn shear(g0a: DVector<Complex64>, g0m: Complex64, gam: DVector<Complex64>) -> Self {
        let k = g0a.len();
        FibreMotion { g00: ONE, gab: DMatrix::identity(k, k), gmm: ONE, g0a, g0m, gam }
    }

    pub fn m(&self) -> usize {
        self.gab.nrows() + 1
    }

    pub fn is_block(&self) -> bool {
        self.g0a.iter().chain(self.gam.iter()).all(|z| *z == ZERO) && self.g0m == ZERO
    }

    pub fn is_shear(&self) -> bool {
        self.g00 == ONE && self.gmm == ONE && self.gab == DMatrix::identity(self.m() - 1, self.m() - 1)
    }

    /// The full `(m+1)×(m+1)` upper block-triangular matrix.
    pub fn matrix(&self) -> DMatrix<Complex64> {
        let m = self.m();
        let mut g = DMatrix::zeros(m + 1, m + 1);
        g[(0, 0)] = self.g00;
        g[(m, m)] = self.gmm;
        g[(0, m)] = self.g0m;
        for a in 1..m {
            g[(0, a)] = self.g0a[a - 1];
            g[(a, m)] = self.gam[a - 1];
            for b in 1..m {
                g[(a, b)] = self.gab[(a - 1, b - 1)];
            }
        }
        g
    }

    pub fn from_matrix(g: &DMatrix<Complex64>) -> Result<Self> {
        let m = g.nrows() - 1;
        let lower = (0..=m).flat_map(|r| (0..r).map(move |c| (r, c)));
        let lower_off = lower.filter(|&(r, c)| !(r < m && c > 0)).map(|rc| g[rc].norm()).fold(0.0, f64::max);
        if lower_off > 0.0 || (1..m).any(|a| g[(m, a)] != ZERO) {
            return Err(Error::Consistency("matrix is not a fibre motion".into()));
        }
        let k = m - 1;
        Ok(FibreMotion {
            g00: g[(0, 0)],
            gab: g.view((1, 1), (k, k)).into_owned(),
            gmm: g[(m, m)],
            g0a: DVector::from_fn(k, |a, _| g[(0, a + 1)]),
            g0m: g[(0, m)],
            gam: DVector::from_fn(k, |a, _| g[(a + 1, m)]),
        })
    }

    /// `self · other`.
    pub fn compose(&self, other: &Self) -> Result<Self> {
        Self::from_matrix(&(self.matrix() * other.matrix()))
    }

    pub fn is_invertible(&self) -> bool {
        self.g00.norm() > 1e-14 && self.gmm.norm() > 1e-14 && self.gab.determinant().norm() > 1e-14
    }

    /// A constant jet matrix in `num_vars` variables.
    pub fn to_jet_matrix(&self, num_vars: usize, order: u32) -> ComplexJetMatrix {
        let g = self.matrix();
        ComplexJetMatrix::from_fn(g.nrows(), g.ncols(), |r, c| ComplexJet::constant(num_vars, order, g[(r, c)]))
    }
}

/// Block transformation law of `(P, L)`.
pub fn apply_block(data: &SecondOrderData, g: &FibreMotion) -> Result<SecondOrderData> {
    if !g.is_invertible() {
        return Err(Error::Singular("block fibre motion is not invertible".into()));
    }
    let a = &g.gab;
    let p = a.transpose() * &data.p * a / (g.g00 * g.gmm);
    let l = a.transpose() * &data.l * a.map(|z| z.conj()) / (g.g00.conj() * g.gmm);
    Ok(SecondOrderData::new(p, l))
}

/// `P_{αm}` and `P_{mm}` at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct MixedTerms {
    pub pam: DVector<Complex64>,
    pub pmm: Complex64,
}

impl MixedTerms {
    pub fn from_table(h: &HTable) -> Self {
        let pj = p_jets(h);
        MixedTerms {
            pam: DVector::from_iterator(pj.pam.len(), pj.pam.iter().map(|j| j.constant_term())),
            pmm: pj.pmm.constant_term(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        max_norm(&self.pam).max(self.pmm.norm())
    }
}

/// Shear transformation law; `(P, L)` are unchanged.
pub fn apply_shear(data: &SecondOrderData, mixed: &MixedTerms, g: &FibreMotion) -> (SecondOrderData, MixedTerms) {
    let gbar = g.gam.map(|z| z.conj());
    let pam = &mixed.pam + &g.g0a + &data.p * &g.gam + &data.l * &gbar;
    let lin: Complex64 = mixed.pam.iter().zip(g.gam.iter()).map(|(a, b)| a * b).sum();
    let quad = (g.gam.transpose() * &data.p * &g.gam + g.gam.transpose() * &data.l * &gbar)[(0, 0)];
    let pmm = mixed.pmm - 2.0 * (lin - lin.conj()) - (quad - quad.conj()) - 2.0 * (g.g0m - g.g0m.conj());
    (SecondOrderData::new(data.p.clone(), data.l.clone()), MixedTerms { pam, pmm })
}

/// `g^0_α + P_{αβ} g^β_m + P_{αβ̄} ḡ^β_m`, which must vanish for motions
/// preserving the adapted bundle.
pub fn normg0_residual(data: &SecondOrderData, g: &FibreMotion) -> f64 {
    let v = &g.g0a + &data.p * &g.gam + &data.l * g.gam.map(|z| z.conj());
    max_norm(&v)
}

/// A section of the adapted bundle together with its invariants.
#[derive(Debug, Clone)]
pub struct Adapted {
    /// The motion at the origin.
    pub motion: FibreMotion,
    /// The motion along the section.
    pub motion_jet: ComplexJetMatrix,
    pub mc: MCPullback,
    pub table: HTable,
}

/// The shear `g^0_α = -P_{αm}`, `g^0_m = P_{mm}/4`, `g^α_m = 0` along the section.
pub fn adapting_shear(h: &HTable, m: usize) -> ComplexJetMatrix {
    let pj = p_jets(h);
    let nv = pj.pmm.num_vars();
    let order = pj.pmm.order();
    let mut g = ComplexJetMatrix::identity(m + 1, nv, order);
    for a in 1..m {
        g.set(0, a, -&pj.pam[a - 1]);
    }
    g.set(0, m, pj.pmm.scale(&Complex64::new(0.25, 0.0)));
    g
}

/// Rebuilds the section with `g` folded in and recomputes the invariants.
pub fn rebuild(germ: &SurfaceGerm, g: &ComplexJetMatrix, pmax: usize) -> Result<(MCPullback, HTable)> {
    let mc = pullback_mc(&build_section_with_motion(germ, g)?)?;
    let table = compute_h(&mc, pmax)?;
    Ok((mc, table))
}

/// Moves the canonical section into the adapted bundle.
pub fn adapt_to_ps(germ: &SurfaceGerm, mc: &MCPullback, h: &HTable) -> Result<Adapted> {
    let m = germ.m();
    let pmax = h.pmax();
    let g = adapting_shear(h, m);
    let g0 = DMatrix::from_fn(m + 1, m + 1, |r, c| g.get(r, c).constant_term());
    let motion = FibreMotion::from_matrix(&g0)?;
    let trivial = (0..=m).all(|r| (0..=m).all(|c| r == c || g.get(r, c).is_zero()));
    if trivial {
        return Ok(Adapted { motion, motion_jet: g, mc: mc.clone(), table: h.clone() });
    }
    let (mc, table) = rebuild(germ, &g, pmax)?;
    Ok(Adapted { motion, motion_jet: g, mc, table })
}

/// Residuals of the structure equations satisfied on the adapted bundle.
#[derive(Debug, Clone, PartialEq)]
pub struct AdaptedFrameCheck {
    /// `|ω^n_1|`.
    pub w_n_1: f64,
    /// `|ω^{n+1}_1 - ω^n_0|`.
    pub w_np1_1: f64,
    /// `|ω^{n+1}_σ - h_{στ} ω^τ_0|`.
    pub w_np1_sigma: f64,
    /// `max(|ω^{n+1}_n - ω^1_0|, |ω^n_{n+1} + ω^1_0|)`.
    pub w_np1_n: f64,
}

impl AdaptedFrameCheck {
    pub fn max(&self) -> f64 {
        self.w_n_1.max(self.w_np1_1).max(self.w_np1_sigma).max(self.w_np1_n)
    }

    pub fn passes(&self, tol: f64) -> bool {
        self.max() < tol
    }
}

/// Checks the adapted-frame identities at the origin.
pub fn corollary_cps_check(mc: &MCPullback, h: &HTable) -> AdaptedFrameCheck {
    let n = mc.n();
    let at0 = |v: Vec<f64>| v.into_iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let diff0 = |a: &crate::RealForm, b: &crate::RealForm| at0((a - b).at_origin());
    let mut sigma: f64 = 0.0;
    for s in 2..n {
        let mut rhs = crate::RealForm::zero(mc.num_vars(), mc.order());
        for t in 2..n {
            rhs = &rhs + &mc.w(t, 0).scale(&h.at0(&[s, t]));
        }
        sigma = sigma.max(diff0(mc.w(n + 1, s), &rhs));
    }
    let w10 = mc.w(1, 0);
    AdaptedFrameCheck {
        w_n_1: at0(mc.w(n, 1).at_origin()),
        w_np1_1: diff0(mc.w(n + 1, 1), mc.w(n, 0)),
        w_np1_sigma: sigma,
        w_np1_n: diff0(mc.w(n + 1, n), w10).max(at0((mc.w(n, n + 1) + w10).at_origin())),
    }
}
