//! Levi-form analysis: strong pseudoconvexity, strong ℂ-linear convexity and
//! the inverse data `(Q, M)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Tolerance for a zero eigenvalue of `iL`.
pub const EIGEN_TOLERANCE: f64 = 1e-9;
/// An SCLC margin at or below this value counts as failure.
pub const MARGIN_THRESHOLD: f64 = 1e-7;
/// Largest accepted condition number for the matrices inverted by [`invert_pl`].
pub const CONDITION_LIMIT: f64 = 1e12;

const SAMPLES: usize = 4096;
const DESCENTS: usize = 64;
const SCAN_POINTS: usize = 8192;

/// Largest entry modulus.
pub fn max_norm<R: nalgebra::Dim, C: nalgebra::Dim, S: nalgebra::RawStorage<Complex64, R, C>>(
    a: &nalgebra::Matrix<Complex64, R, C, S>,
) -> f64 {
    a.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Second-order data `P = (P_{αβ})`, `L = (P_{αβ̄})` with optional inverse data.
#[derive(Debug, Clone, PartialEq)]
pub struct SecondOrderData {
    pub p: DMatrix<Complex64>,
    pub l: DMatrix<Complex64>,
    pub q: Option<DMatrix<Complex64>>,
    pub mm: Option<DMatrix<Complex64>>,
}

impl SecondOrderData {
    pub fn new(p: DMatrix<Complex64>, l: DMatrix<Complex64>) -> Self {
        SecondOrderData { p, l, q: None, mm: None }
    }

    pub fn dim(&self) -> usize {
        self.p.nrows()
    }

    /// `max(|Pᵀ - P|, |L̄ᵀ + L|)`.
    pub fn symmetry_defect(&self) -> f64 {
        let a = max_norm(&(&self.p - self.p.transpose()));
        let b = max_norm(&(self.l.adjoint() + &self.l));
        a.max(b)
    }

    /// `P(z, z) = P_{αβ} z^α z^β`.
    pub fn p_form(&self, z: &DVector<Complex64>) -> Complex64 {
        (z.transpose() * &self.p * z)[(0, 0)]
    }

    /// `L(z, z̄) = P_{αβ̄} z^α z̄^β`.
    pub fn l_form(&self, z: &DVector<Complex64>) -> Complex64 {
        (z.transpose() * &self.l * z.map(|c| c.conj()))[(0, 0)]
    }

    /// `|L(z, z̄)| - |Im P(z, z)|`.
    pub fn sclc_gap(&self, z: &DVector<Complex64>) -> f64 {
        self.l_form(z).norm() - self.p_form(z).im.abs()
    }

    /// The block matrix `[[P, L], [Lᵀ, -P̄]]`.
    pub fn block(&self) -> DMatrix<Complex64> {
        let k = self.dim();
        let mut b = DMatrix::zeros(2 * k, 2 * k);
        b.view_mut((0, 0), (k, k)).copy_from(&self.p);
        b.view_mut((0, k), (k, k)).copy_from(&self.l);
        b.view_mut((k, 0), (k, k)).copy_from(&self.l.transpose());
        b.view_mut((k, k), (k, k)).copy_from(&(-self.p.map(|c| c.conj())));
        b
    }

    /// `i (zᵀ, z̄ᵀ) B (z, z̄)ᵀ` for the block matrix `B`.
    pub fn sclc2_value(&self, z: &DVector<Complex64>) -> Complex64 {
        let k = self.dim();
        let mut v = DVector::zeros(2 * k);
        for a in 0..k {
            v[a] = z[a];
            v[k + a] = z[a].conj();
        }
        I * (v.transpose() * self.block() * &v)[(0, 0)]
    }
}

/// Sign pattern of `iL`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LeviClass {
    DefinitePositive,
    DefiniteNegative,
    Indefinite,
    Degenerate,
}

impl LeviClass {
    pub fn as_str(self) -> &'static str {
        match self {
            LeviClass::DefinitePositive => "definite_positive",
            LeviClass::DefiniteNegative => "definite_negative",
            LeviClass::Indefinite => "indefinite",
            LeviClass::Degenerate => "degenerate",
        }
    }

    pub fn is_definite(self) -> bool {
        matches!(self, LeviClass::DefinitePositive | LeviClass::DefiniteNegative)
    }
}

#[derive(Debug, Clone)]
pub struct Pseudoconvexity {
    /// Eigenvalues of `iL`, ascending.
    pub eigenvalues: Vec<f64>,
    pub class: LeviClass,
}

impl Pseudoconvexity {
    /// Counts of positive, negative and zero eigenvalues.
    pub fn inertia(&self) -> (usize, usize, usize) {
        inertia(&self.eigenvalues)
    }
}

fn inertia(ev: &[f64]) -> (usize, usize, usize) {
    let pos = ev.iter().filter(|&&e| e > EIGEN_TOLERANCE).count();
    let neg = ev.iter().filter(|&&e| e < -EIGEN_TOLERANCE).count();
    (pos, neg, ev.len() - pos - neg)
}

/// Eigenvalues of the Hermitian part of `h`, ascending.
pub fn hermitian_eigenvalues(h: &DMatrix<Complex64>) -> Vec<f64> {
    let herm = (h + h.adjoint()) * Complex64::new(0.5, 0.0);
    let mut ev: Vec<f64> = herm.symmetric_eigenvalues().iter().copied().collect();
    ev.sort_by(f64::total_cmp);
    ev
}

pub fn pseudoconvexity(data: &SecondOrderData) -> Pseudoconvexity {
    let eigenvalues = hermitian_eigenvalues(&data.l.map(|c| I * c));
    let (pos, neg, zero) = inertia(&eigenvalues);
    let class = if zero > 0 {
        LeviClass::Degenerate
    } else if neg == 0 {
        LeviClass::DefinitePositive
    } else if pos == 0 {
        LeviClass::DefiniteNegative
    } else {
        LeviClass::Indefinite
    };
    Pseudoconvexity { eigenvalues, class }
}

#[derive(Debug, Clone)]
pub struct SclcReport {
    pub sclc: bool,
    /// Estimated `min |L(z,z̄)| - |Im P(z,z)|` over unit `z`.
    pub margin: f64,
    /// The unit vector attaining the estimate.
    pub witness: DVector<Complex64>,
}

fn normalize(z: &mut DVector<Complex64>) {
    let n = z.norm();
    *z /= Complex64::new(n, 0.0);
}

fn random_unit(k: usize, rng: &mut ChaCha8Rng) -> DVector<Complex64> {
    let mut z = DVector::from_fn(k, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    normalize(&mut z);
    z
}

fn descend(data: &SecondOrderData, start: DVector<Complex64>, rng: &mut ChaCha8Rng) -> (f64, DVector<Complex64>) {
    let k = start.len();
    let mut best = start;
    let mut val = data.sclc_gap(&best);
    let mut step = 0.1;
    while step > 1e-10 {
        let mut improved = false;
        for _ in 0..4 * k {
            let mut cand = &best + random_unit(k, rng) * Complex64::new(step, 0.0);
            normalize(&mut cand);
            let v = data.sclc_gap(&cand);
            if v < val {
                val = v;
                best = cand;
                improved = true;
            }
        }
        if !improved {
            step *= 0.5;
        }
    }
    (val, best)
}

fn scan_one_dim(data: &SecondOrderData) -> (f64, DVector<Complex64>) {
    let at = |t: f64| DVector::from_element(1, Complex64::from_polar(1.0, t));
    let gap = |t: f64| data.sclc_gap(&at(t));
    let h = std::f64::consts::PI / SCAN_POINTS as f64;
    let (mut tb, mut vb) = (0.0, gap(0.0));
    for i in 1..SCAN_POINTS {
        let t = i as f64 * h;
        let v = gap(t);
        if v < vb {
            tb = t;
            vb = v;
        }
    }
    let (mut lo, mut hi) = (tb - h, tb + h);
    for _ in 0..100 {
        let a = lo + (hi - lo) / 3.0;
        let b = hi - (hi - lo) / 3.0;
        if gap(a) < gap(b) {
            hi = b;
        } else {
            lo = a;
        }
    }
    let t = 0.5 * (lo + hi);
    if gap(t) < vb {
        (gap(t), at(t))
    } else {
        (vb, at(tb))
    }
}

/// Samples the SCLC margin over the unit sphere of `ℂ^{m-1}`.
pub fn sclc_test(data: &SecondOrderData, seed: u64) -> Result<SclcReport> {
    let pc = pseudoconvexity(data);
    if !pc.class.is_definite() {
        return Err(Error::NotSclc(format!("Levi form is {}, not strongly pseudoconvex", pc.class.as_str())));
    }
    let k = data.dim();
    let (margin, witness) = if k == 1 {
        scan_one_dim(data)
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut samples: Vec<(f64, DVector<Complex64>)> = (0..SAMPLES)
            .map(|_| {
                let z = random_unit(k, &mut rng);
                (data.sclc_gap(&z), z)
            })
            .collect();
        samples.sort_by(|a, b| a.0.total_cmp(&b.0));
        samples
            .into_iter()
            .take(DESCENTS)
            .map(|(_, z)| descend(data, z, &mut rng))
            .min_by(|a, b| a.0.total_cmp(&b.0))
            .expect("at least one descent")
    };
    Ok(SclcReport { sclc: margin > MARGIN_THRESHOLD, margin, witness })
}

fn condition_number(a: &DMatrix<Complex64>) -> f64 {
    let sv = a.clone().singular_values();
    let max = sv.max();
    let min = sv.min();
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

fn guarded_inverse(a: &DMatrix<Complex64>, what: &str) -> Result<DMatrix<Complex64>> {
    let kappa = condition_number(a);
    if !(kappa <= CONDITION_LIMIT) {
        return Err(Error::Singular(format!("{what} has condition number {kappa:.3e}")));
    }
    a.clone().try_inverse().ok_or_else(|| Error::Singular(format!("{what} is not invertible")))
}

/// The inverse block data `Q`, `M` with `[[P, L], [Lᵀ, -P̄]]⁻¹ = [[Q, M], [Mᵀ, -Q̄]]`.
pub fn invert_pl(data: &SecondOrderData) -> Result<SecondOrderData> {
    let p = &data.p;
    let l = &data.l;
    let pbar = p.map(|c| c.conj());
    let lbar = l.map(|c| c.conj());
    let linv = guarded_inverse(l, "L")?;
    let a = (&linv * p).map(|c| c.conj());
    let q = &a * guarded_inverse(&(p * &a - l), "P (L⁻¹P)̄ - L")?;
    let mm = guarded_inverse(&(&pbar * &linv * p - &lbar), "P̄ L⁻¹ P - L̄")?;
    let out = SecondOrderData { p: p.clone(), l: l.clone(), q: Some(q), mm: Some(mm) };
    let defect = block_inverse_defect(&out);
    if !(defect < 1e-9 * (1.0 + data.block().norm())) {
        return Err(Error::Singular(format!("block inverse check failed by {defect:.3e}")));
    }
    Ok(out)
}

/// `|[[P, L], [Lᵀ, -P̄]]·[[Q, M], [Mᵀ, -Q̄]] - I|` (infinite when `Q` or `M` is missing).
pub fn block_inverse_defect(data: &SecondOrderData) -> f64 {
    let (Some(q), Some(mm)) = (&data.q, &data.mm) else {
        return f64::INFINITY;
    };
    let inv = SecondOrderData::new(q.clone(), mm.clone()).block();
    let prod = data.block() * inv;
    max_norm(&(prod - DMatrix::identity(2 * data.dim(), 2 * data.dim())))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(k: usize, c: Complex64) -> DMatrix<Complex64> {
        DMatrix::from_diagonal_element(k, k, c)
    }

    fn quadric(k: usize) -> SecondOrderData {
        SecondOrderData::new(DMatrix::zeros(k, k), diag(k, -I))
    }

    #[test]
    fn classification() {
        assert_eq!(pseudoconvexity(&quadric(3)).class, LeviClass::DefinitePositive);
        assert_eq!(pseudoconvexity(&quadric(3)).eigenvalues, vec![1.0, 1.0, 1.0]);
        let mut l = diag(2, -I);
        l[(1, 1)] = I;
        let d = SecondOrderData::new(DMatrix::zeros(2, 2), l);
        assert_eq!(pseudoconvexity(&d).class, LeviClass::Indefinite);
        let d = SecondOrderData::new(diag(1, Complex64::new(1.0, 0.0)), DMatrix::zeros(1, 1));
        assert_eq!(pseudoconvexity(&d).class, LeviClass::Degenerate);
        let d = SecondOrderData::new(DMatrix::zeros(2, 2), diag(2, I));
        assert_eq!(pseudoconvexity(&d).class, LeviClass::DefiniteNegative);
    }

    #[test]
    fn quadric_is_sclc() {
        let r = sclc_test(&quadric(2), 7).unwrap();
        assert!(r.sclc);
        assert!((r.margin - 1.0).abs() < 1e-9);
    }

    #[test]
    fn large_p_fails_with_witness() {
        let d = SecondOrderData::new(diag(2, 2.0 * I), diag(2, -I));
        let r = sclc_test(&d, 1).unwrap();
        assert!(!r.sclc);
        assert!(d.sclc_gap(&r.witness) < 0.0);
        assert!((r.margin + 1.0).abs() < 1e-6);
    }

    #[test]
    fn one_dimensional_scan_matches_closed_form() {
        for (p, l) in [(Complex64::new(0.3, 0.4), 1.0), (Complex64::new(-1.2, 0.1), 0.7)] {
            let d = SecondOrderData::new(diag(1, p), diag(1, -I * l));
            let r = sclc_test(&d, 0).unwrap();
            assert!((r.margin - (l - p.norm())).abs() < 1e-12);
            assert_eq!(r.sclc, p.norm() < l);
        }
    }

    #[test]
    fn non_pseudoconvex_is_rejected() {
        let d = SecondOrderData::new(DMatrix::zeros(1, 1), DMatrix::zeros(1, 1));
        assert!(matches!(sclc_test(&d, 0), Err(Error::NotSclc(_))));
    }

    #[test]
    fn sclc2_agrees_with_sclc() {
        let d = SecondOrderData::new(
            DMatrix::from_row_slice(
                2,
                2,
                &[
                    Complex64::new(0.2, 0.1),
                    Complex64::new(0.0, 0.3),
                    Complex64::new(0.0, 0.3),
                    Complex64::new(-0.1, 0.0),
                ],
            ),
            diag(2, -I),
        );
        let z = DVector::from_vec(vec![Complex64::new(0.6, 0.0), Complex64::new(0.0, 0.8)]);
        let v = d.sclc2_value(&z);
        let want = 2.0 * (-d.p_form(&z).im + (I * d.l_form(&z)).re);
        assert!((v - want).norm() < 1e-12);
    }

    #[test]
    fn quadric_inverse() {
        let d = invert_pl(&quadric(2)).unwrap();
        assert!(d.q.as_ref().unwrap().norm() < 1e-15);
        assert!((d.mm.as_ref().unwrap() - diag(2, I)).norm() < 1e-15);
    }

    #[test]
    fn singular_l_is_rejected() {
        let mut l = diag(2, -I);
        l[(1, 1)] = Complex64::new(0.0, 0.0);
        let d = SecondOrderData::new(DMatrix::zeros(2, 2), l);
        assert!(matches!(invert_pl(&d), Err(Error::Singular(_))));
    }
}
