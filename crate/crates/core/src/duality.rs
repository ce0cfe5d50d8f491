//! Dual-hypersurface invariants and self-duality checks.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::adaptation::{apply_block, rebuild, Adapted, FibreMotion};
use crate::convexity::{hermitian_eigenvalues, invert_pl, max_norm, SecondOrderData, EIGEN_TOLERANCE};
use crate::error::{Error, Result};
use crate::invariants::{compute_k, compute_p3, KTable, MultiIndex, ThirdOrderData};
use crate::surface_io::SurfaceGerm;

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Residual below which an orbit match is accepted.
pub const MATCH_TOLERANCE: f64 = 1e-6;
const STARTS: usize = 16;
const MAX_ITER: usize = 400;

/// The index permutation `ν` on `0..=n+1`.
pub fn nu(s: usize, n: usize) -> usize {
    assert!(n % 2 == 0 && s <= n + 1, "index {s} out of range for n = {n}");
    match s {
        0 => n + 1,
        1 => n,
        _ if s == n => 1,
        _ if s == n + 1 => 0,
        _ if s % 2 == 0 => s + 1,
        _ => s - 1,
    }
}

/// Second-order dual data.
#[derive(Debug, Clone)]
pub struct DualData {
    /// The inverse data `Q`, `M`.
    pub inverse: SecondOrderData,
    /// `(P*, L*) = (Q, -M)`.
    pub dual: SecondOrderData,
}

pub fn dual_second_order(data: &SecondOrderData) -> Result<DualData> {
    let inverse = invert_pl(data)?;
    let q = inverse.q.clone().expect("inverse present");
    let mm = inverse.mm.clone().expect("inverse present");
    Ok(DualData { inverse, dual: SecondOrderData::new(q, -mm) })
}

/// `Q^{αβm}`, `Q^{αβ̄m}`, `Q^{αmm}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DualThirdOrder {
    pub qabm: DMatrix<Complex64>,
    pub qabbar_m: DMatrix<Complex64>,
    pub qamm: DVector<Complex64>,
}

impl DualThirdOrder {
    pub fn max_abs(&self) -> f64 {
        max_norm(&self.qabm).max(max_norm(&self.qabbar_m)).max(max_norm(&self.qamm))
    }
}

fn conj(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.map(|z| z.conj())
}

/// The third-order dual coefficients from adapted `P3` and the inverse data.
pub fn dual_third_order(p3: &ThirdOrderData, q: &DMatrix<Complex64>, mm: &DMatrix<Complex64>) -> DualThirdOrder {
    let pa = &p3.pabm;
    let pb = &p3.pabbar_m;
    let qabm = q * pa * q + q * pb * mm.transpose() - mm * conj(pa) * mm.transpose() + mm * pb.transpose() * q;
    let qabbar_m = q * pa * mm - q * pb * conj(q) + mm * conj(pa) * conj(q) + mm * pb.transpose() * mm;
    let qamm = q * &p3.pamm - mm * p3.pamm.map(|z| z.conj());
    DualThirdOrder { qabm, qabbar_m, qamm }
}

/// Outcome of an orbit search.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MatchOutcome {
    Match,
    NoMatch,
    Indeterminate,
}

impl MatchOutcome {
    pub fn as_str(self) -> &'static str {
        match self {
            MatchOutcome::Match => "match",
            MatchOutcome::NoMatch => "no_match",
            MatchOutcome::Indeterminate => "indeterminate",
        }
    }
}

#[derive(Debug, Clone)]
pub struct SecondOrderMatch {
    pub outcome: MatchOutcome,
    pub residual: f64,
    pub motion: FibreMotion,
    /// Why the orbits cannot meet, for [`MatchOutcome::NoMatch`].
    pub obstruction: Option<String>,
}

/// Block motion with `g^m_m = t g^0_0`, from real parameters
/// `(Re g00, Im g00, t, Re/Im g^α_β ...)`.
fn motion_from_params(x: &[f64], k: usize) -> FibreMotion {
    let g00 = Complex64::new(x[0], x[1]);
    let gmm = g00 * x[2];
    let gab = DMatrix::from_fn(k, k, |a, b| Complex64::new(x[3 + 2 * (a * k + b)], x[4 + 2 * (a * k + b)]));
    FibreMotion::block(g00, gab, gmm)
}

fn params_from_motion(g: &FibreMotion) -> Vec<f64> {
    let k = g.gab.nrows();
    let mut x = vec![g.g00.re, g.g00.im, (g.gmm / g.g00).re];
    for a in 0..k {
        for b in 0..k {
            x.push(g.gab[(a, b)].re);
            x.push(g.gab[(a, b)].im);
        }
    }
    x
}

fn residual_vector(data: &SecondOrderData, target: &SecondOrderData, x: &[f64]) -> Option<DVector<f64>> {
    let g = motion_from_params(x, data.dim());
    let moved = apply_block(data, &g).ok()?;
    let dp = &moved.p - &target.p;
    let dl = &moved.l - &target.l;
    let vals: Vec<f64> = dp.iter().chain(dl.iter()).flat_map(|z| [z.re, z.im]).collect();
    let v = DVector::from_vec(vals);
    v.iter().all(|x| x.is_finite()).then_some(v)
}

/// Damped Gauss–Newton on `|r(x)|²`.
fn levenberg_marquardt(data: &SecondOrderData, target: &SecondOrderData, mut x: Vec<f64>) -> (f64, Vec<f64>) {
    let Some(mut r) = residual_vector(data, target, &x) else {
        return (f64::INFINITY, x);
    };
    let mut cost = r.norm_squared();
    let mut lambda = 1e-3;
    let d = x.len();
    for _ in 0..MAX_ITER {
        if cost < 1e-30 {
            break;
        }
        let mut jac = DMatrix::zeros(r.len(), d);
        for j in 0..d {
            let h = 1e-7 * (1.0 + x[j].abs());
            let mut xp = x.clone();
            let mut xm = x.clone();
            xp[j] += h;
            xm[j] -= h;
            let (Some(rp), Some(rm)) = (residual_vector(data, target, &xp), residual_vector(data, target, &xm)) else {
                return (cost, x);
            };
            jac.set_column(j, &((rp - rm) / (2.0 * h)));
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * &r;
        let mut accepted = false;
        while lambda < 1e12 {
            let mut a = jtj.clone();
            for i in 0..d {
                a[(i, i)] += lambda * (1.0 + jtj[(i, i)]);
            }
            let Some(step) = a.lu().solve(&(-&jtr)) else {
                lambda *= 10.0;
                continue;
            };
            let xn: Vec<f64> = x.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            if let Some(rn) = residual_vector(data, target, &xn) {
                let cn = rn.norm_squared();
                if cn < cost {
                    let small = step.norm() < 1e-15 * (1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt());
                    x = xn;
                    r = rn;
                    cost = cn;
                    lambda = (lambda * 0.3).max(1e-12);
                    accepted = !small;
                    break;
                }
            }
            lambda *= 10.0;
        }
        if !accepted {
            break;
        }
    }
    (cost, x)
}

fn inertia_unordered(ev: &[f64]) -> (usize, usize, usize) {
    let pos = ev.iter().filter(|&&e| e > EIGEN_TOLERANCE).count();
    let neg = ev.iter().filter(|&&e| e < -EIGEN_TOLERANCE).count();
    (pos.max(neg), pos.min(neg), ev.len() - pos - neg)
}

fn rank(a: &DMatrix<Complex64>) -> usize {
    let sv = a.clone().singular_values();
    let scale = sv.max().max(1.0);
    sv.iter().filter(|&&s| s > 1e-9 * scale).count()
}

/// An orbit invariant separating `(P, L)` from `target`, if any.
fn orbit_obstruction(data: &SecondOrderData, target: &SecondOrderData) -> Option<String> {
    let a = inertia_unordered(&hermitian_eigenvalues(&data.l.map(|z| I * z)));
    let b = inertia_unordered(&hermitian_eigenvalues(&target.l.map(|z| I * z)));
    if a != b {
        return Some(format!("Levi inertia {a:?} differs from dual inertia {b:?}"));
    }
    let (ra, rb) = (rank(&data.p), rank(&target.p));
    if ra != rb {
        return Some(format!("rank P = {ra} differs from rank Q = {rb}"));
    }
    None
}

/// Takagi factorization `A = V diag(σ) Vᵀ` of a complex symmetric matrix,
/// `σ` descending, read off the real form `[[Re A, Im A], [Im A, -Re A]]`.
fn takagi(a: &DMatrix<Complex64>) -> (Vec<f64>, DMatrix<Complex64>) {
    let k = a.nrows();
    let real = DMatrix::from_fn(2 * k, 2 * k, |r, c| {
        let z = a[(r % k, c % k)];
        match (r < k, c < k) {
            (true, true) => z.re,
            (false, false) => -z.re,
            _ => z.im,
        }
    });
    let eig = real.symmetric_eigen();
    let mut order: Vec<usize> = (0..2 * k).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let mut sigma = Vec::with_capacity(k);
    let mut cols: Vec<DVector<Complex64>> = Vec::with_capacity(k);
    for i in order {
        if cols.len() == k {
            break;
        }
        let e = eig.eigenvectors.column(i);
        let mut v = DVector::from_fn(k, |r, _| Complex64::new(e[r], e[r + k]));
        for c in &cols {
            let proj = c.dotc(&v);
            v -= c * proj;
        }
        let norm = v.norm();
        if norm > 0.5 {
            cols.push(v / Complex64::new(norm, 0.0));
            sigma.push(eig.eigenvalues[i].max(0.0));
        }
    }
    (sigma, DMatrix::from_columns(&cols))
}

/// `C` with `C*C = σ iL` for the sign `σ` making it positive, if `iL` is definite.
fn levi_factor(l: &DMatrix<Complex64>) -> Option<(f64, DMatrix<Complex64>)> {
    let h = l.map(|z| I * z);
    let ev = hermitian_eigenvalues(&h);
    let sign = if ev.iter().all(|&e| e > EIGEN_TOLERANCE) {
        1.0
    } else if ev.iter().all(|&e| e < -EIGEN_TOLERANCE) {
        -1.0
    } else {
        return None;
    };
    let chol = nalgebra::Cholesky::new(h * Complex64::new(sign, 0.0))?;
    Some((sign, chol.l().adjoint()))
}

enum ClosedForm {
    Motion(FibreMotion),
    Obstructed(String),
}

/// For definite `L` the block orbit is decided by the Takagi values of `P`
/// after normalizing `iL` to `±I`; when they agree the motion is explicit.
fn closed_form_match(data: &SecondOrderData, target: &SecondOrderData) -> Option<ClosedForm> {
    let (s1, c) = levi_factor(&data.l)?;
    let (s2, d) = levi_factor(&target.l)?;
    let c_inv = c.try_inverse()?;
    let d_inv = d.clone().try_inverse()?;
    let normalize = |p: &DMatrix<Complex64>, inv: &DMatrix<Complex64>| {
        let bar = inv.map(|z| z.conj());
        bar.transpose() * p * bar
    };
    let (sig1, v1) = takagi(&normalize(&data.p, &c_inv));
    let (sig2, v2) = takagi(&normalize(&target.p, &d_inv));
    let scale = 1.0 + sig1.iter().chain(&sig2).fold(0.0f64, |a, &b| a.max(b));
    if sig1.iter().zip(&sig2).any(|(a, b)| (a - b).abs() > 1e-7 * scale) {
        return Some(ClosedForm::Obstructed(format!("normalized Takagi values {sig1:?} differ from dual {sig2:?}")));
    }
    let y = v1.map(|z| z.conj()) * v2.transpose();
    let w = c_inv * y.map(|z| z.conj()) * d;
    let eps = s1 * s2;
    let g00 = if eps > 0.0 { Complex64::new(1.0, 0.0) } else { I };
    Some(ClosedForm::Motion(FibreMotion::block(g00, w.map(|z| z.conj()), g00 * eps)))
}

/// Searches the block orbit of `(P, L)` for `(Q, -M)`.
pub fn selfdual_second_order(data: &SecondOrderData, seed: u64) -> Result<SecondOrderMatch> {
    let target = dual_second_order(data)?.dual;
    let k = data.dim();
    if let Some(why) = orbit_obstruction(data, &target) {
        let motion = FibreMotion::identity(k + 1);
        let residual =
            residual_vector(data, &target, &params_from_motion(&motion)).map(|r| r.norm()).unwrap_or(f64::INFINITY);
        return Ok(SecondOrderMatch { outcome: MatchOutcome::NoMatch, residual, motion, obstruction: Some(why) });
    }
    let mut best = (f64::INFINITY, params_from_motion(&FibreMotion::identity(k + 1)));
    match closed_form_match(data, &target) {
        Some(ClosedForm::Obstructed(why)) => {
            let residual = residual_vector(data, &target, &best.1).map(|r| r.norm()).unwrap_or(f64::INFINITY);
            let motion = FibreMotion::identity(k + 1);
            return Ok(SecondOrderMatch { outcome: MatchOutcome::NoMatch, residual, motion, obstruction: Some(why) });
        }
        Some(ClosedForm::Motion(g)) => {
            best = levenberg_marquardt(data, &target, params_from_motion(&g));
        }
        None => {}
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for start in 0..STARTS {
        if best.0.sqrt() < 1e-12 {
            break;
        }
        let x0 = if start == 0 {
            params_from_motion(&FibreMotion::identity(k + 1))
        } else {
            let mut x: Vec<f64> = (0..3 + 2 * k * k).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            if start % 2 == 0 {
                x[2] = -x[2].abs();
            }
            x
        };
        let (cost, x) = levenberg_marquardt(data, &target, x0);
        if cost < best.0 {
            best = (cost, x);
        }
    }
    let residual = best.0.sqrt();
    let outcome = if residual < MATCH_TOLERANCE { MatchOutcome::Match } else { MatchOutcome::Indeterminate };
    Ok(SecondOrderMatch { outcome, residual, motion: motion_from_params(&best.1, k), obstruction: None })
}

/// Per-family third-order comparison `[αβm, αβ̄m, αmm, mmm]`.
#[derive(Debug, Clone)]
pub struct ThirdOrderComparison {
    pub residuals: [f64; 4],
    pub transported: ThirdOrderData,
    pub dual: DualThirdOrder,
}

/// The adapted section moved by a constant block motion.
fn moved_adapted(
    germ: &SurfaceGerm,
    adapted: &Adapted,
    g: &FibreMotion,
) -> Result<(crate::frames::MCPullback, crate::invariants::HTable)> {
    let gj = g.to_jet_matrix(adapted.motion_jet.get(0, 0).num_vars(), adapted.motion_jet.order());
    let total = adapted.motion_jet.checked_mul(&gj)?;
    rebuild(germ, &total, adapted.table.pmax())
}

/// Transports `P3` by the matching motion and compares with the dual family.
pub fn selfdual_third_order(
    germ: &SurfaceGerm,
    adapted: &Adapted,
    data: &SecondOrderData,
    g: &FibreMotion,
) -> Result<ThirdOrderComparison> {
    let inv = invert_pl(data)?;
    let p3 = compute_p3(&adapted.table)?;
    let dual = dual_third_order(&p3, inv.q.as_ref().unwrap(), inv.mm.as_ref().unwrap());
    let (_, table) = moved_adapted(germ, adapted, g)?;
    let transported = compute_p3(&table)?;
    let residuals = [
        max_norm(&(&transported.pabm - &dual.qabm)),
        max_norm(&(&transported.pabbar_m + &dual.qabbar_m)),
        max_norm(&(&transported.pamm - &dual.qamm)),
        (transported.pmmm - p3.pmmm).norm(),
    ];
    Ok(ThirdOrderComparison { residuals, transported, dual })
}

/// Largest `|h_{s...}(e·g) - k^{ν(s)...}(e)|` at orders 2 and 3.
#[derive(Debug, Clone)]
pub struct HVersionComparison {
    pub order2: f64,
    pub order3: Option<f64>,
}

pub fn selfdual_h_version(germ: &SurfaceGerm, adapted: &Adapted, g: &FibreMotion) -> Result<HVersionComparison> {
    let k: KTable = compute_k(&adapted.mc, &adapted.table)?;
    let (_, moved) = moved_adapted(germ, adapted, g)?;
    let n = moved.n();
    let relabel = |idx: &[usize]| idx.iter().map(|&s| nu(s, n)).collect::<Vec<_>>();
    let mut order2: f64 = 0.0;
    for key in MultiIndex::all(n, 2) {
        let s = key.as_slice();
        order2 = order2.max((moved.at0(s) - k.at0(&relabel(s))).abs());
    }
    let order3 = (moved.pmax() >= 3).then(|| {
        MultiIndex::all(n, 3)
            .iter()
            .map(|key| (moved.at0(key.as_slice()) - k.at0(&relabel(key.as_slice()))).abs())
            .fold(0.0, f64::max)
    });
    Ok(HVersionComparison { order2, order3 })
}

/// Rejects data outside the domain of the dual constructions.
pub fn require_sclc(data: &SecondOrderData, seed: u64) -> Result<()> {
    let r = crate::convexity::sclc_test(data, seed)?;
    if r.sclc {
        Ok(())
    } else {
        Err(Error::NotSclc(format!("SCLC margin {:.3e} is not positive", r.margin)))
    }
}
