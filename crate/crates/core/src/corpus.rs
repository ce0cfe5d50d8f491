//! Seeded random germs, second-order data and fibre motions for tests and
//! the command line.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::adaptation::FibreMotion;
use crate::convexity::SecondOrderData;
use crate::error::Result;
use crate::jets::Exponent;
use crate::surface_io::{hyperquadric, SurfaceGerm};
use crate::RealJet;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn normal(rng: &mut ChaCha8Rng) -> f64 {
    rng.sample(StandardNormal)
}

fn cnormal(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(normal(rng), normal(rng))
}

fn monomials(nv: usize, lo: u32, hi: u32) -> Vec<Vec<u32>> {
    fn rec(nv: usize, left: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>, lo: u32) {
        if cur.len() == nv {
            if cur.iter().sum::<u32>() >= lo {
                out.push(cur.clone());
            }
            return;
        }
        for e in 0..=left {
            cur.push(e);
            rec(nv, left - e, cur, out, lo);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(nv, hi, &mut Vec::new(), &mut out, lo);
    out
}

/// `f` with independent normal coefficients of size `scale / degree!` in
/// every monomial of degree `2..=order`.
pub fn random_germ(m: usize, order: u32, scale: f64, rng: &mut ChaCha8Rng) -> Result<SurfaceGerm> {
    let nv = 2 * m - 1;
    let mut f = RealJet::zero(nv, order);
    for e in monomials(nv, 2, order) {
        let deg: u32 = e.iter().sum();
        let fact: f64 = (1..=deg).map(f64::from).product();
        f.insert(Exponent::from_slice(&e)?, scale * normal(rng) / fact);
    }
    SurfaceGerm::new(m, f)
}

/// The hyperquadric perturbed by `random_germ(.., scale, ..)`.
pub fn random_perturbed_quadric(m: usize, order: u32, scale: f64, rng: &mut ChaCha8Rng) -> Result<SurfaceGerm> {
    let q = hyperquadric(m, order)?;
    let p = random_germ(m, order, scale, rng)?;
    SurfaceGerm::new(m, q.f() + p.f())
}

/// Random data with `iL` positive definite and `|P| < λ_min(iL)`, hence SCLC.
pub fn random_sclc_data(k: usize, rng: &mut ChaCha8Rng) -> SecondOrderData {
    let a = DMatrix::from_fn(k, k, |_, _| cnormal(rng) * 0.5);
    let h = &a * a.adjoint() + DMatrix::identity(k, k);
    let lmin = crate::convexity::hermitian_eigenvalues(&h)[0];
    let b = DMatrix::from_fn(k, k, |_, _| cnormal(rng));
    let sym = (&b + b.transpose()) * Complex64::new(0.5, 0.0);
    let norm = sym.clone().singular_values().max().max(1e-300);
    let frac = 0.9 * rng.random::<f64>();
    let p = sym * Complex64::new(frac * lmin / norm, 0.0);
    let l = h * Complex64::new(0.0, -1.0);
    SecondOrderData::new(p, l)
}

/// A random invertible block motion with `g^m_m / g^0_0` real.
pub fn random_block_motion(k: usize, rng: &mut ChaCha8Rng) -> FibreMotion {
    let g00 = Complex64::from_polar(0.5 + rng.random::<f64>(), 6.3 * rng.random::<f64>());
    let t = (0.5 + rng.random::<f64>()) * if rng.random::<bool>() { 1.0 } else { -1.0 };
    let gab = DMatrix::identity(k, k) + DMatrix::from_fn(k, k, |_, _| cnormal(rng) * 0.3);
    FibreMotion::block(g00, gab, g00 * t)
}

/// A random shear motion.
pub fn random_shear_motion(k: usize, rng: &mut ChaCha8Rng) -> FibreMotion {
    FibreMotion::shear(
        DVector::from_fn(k, |_, _| cnormal(rng) * 0.5),
        cnormal(rng) * 0.5,
        DVector::from_fn(k, |_, _| cnormal(rng) * 0.5),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::convexity::sclc_test;

    #[test]
    fn germs_are_deterministic() {
        let a = random_germ(2, 5, 1.0, &mut rng(1)).unwrap();
        let b = random_germ(2, 5, 1.0, &mut rng(1)).unwrap();
        assert_eq!(a.f(), b.f());
        assert_eq!(a.f().len(), monomials(3, 2, 5).len());
    }

    #[test]
    fn sclc_data_is_sclc() {
        let mut r = rng(9);
        for k in 1..4 {
            let d = random_sclc_data(k, &mut r);
            assert!(d.symmetry_defect() < 1e-12);
            assert!(sclc_test(&d, 0).unwrap().sclc);
        }
    }
}
