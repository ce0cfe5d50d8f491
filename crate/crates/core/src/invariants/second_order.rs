use nalgebra::DMatrix;
use num_complex::Complex64;

use super::HTable;
use crate::convexity::SecondOrderData;
use crate::surface_io::{x_var, y_var, SurfaceGerm};
use crate::{ComplexJet, RealJet};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Second-order complex coefficients as jets along the section.
#[derive(Debug, Clone)]
pub struct PJets {
    /// `P_{αβ}`, indexed from zero.
    pub p: Vec<Vec<ComplexJet>>,
    /// `P_{αβ̄}`.
    pub l: Vec<Vec<ComplexJet>>,
    /// `P_{αm}`.
    pub pam: Vec<ComplexJet>,
    /// `P_{mm}`, purely imaginary.
    pub pmm: ComplexJet,
}

fn cx(re: &RealJet, im: &RealJet) -> ComplexJet {
    ComplexJet::from_parts(re, im)
}

/// Builds `P_{αβ}, P_{αβ̄}, P_{αm}, P_{mm}` from `h^(2)`.
pub fn p_jets(h: &HTable) -> PJets {
    let n = h.n();
    let m = n / 2;
    let half = 0.5;
    let mut p = Vec::with_capacity(m - 1);
    let mut l = Vec::with_capacity(m - 1);
    for a in 1..m {
        let (ar, ai) = (2 * a, 2 * a + 1);
        let mut prow = Vec::with_capacity(m - 1);
        let mut lrow = Vec::with_capacity(m - 1);
        for b in 1..m {
            let (br, bi) = (2 * b, 2 * b + 1);
            let rr = h.jet(&[ar, br]);
            let ii = h.jet(&[ai, bi]);
            let ri = h.jet(&[ar, bi]);
            let ir = h.jet(&[ai, br]);
            prow.push(cx(&(ri + ir).scale(&half), &(rr - ii).scale(&half)));
            lrow.push(cx(&(ir - ri).scale(&half), &(rr + ii).scale(&half)));
        }
        p.push(prow);
        l.push(lrow);
    }
    let pam = (1..m).map(|a| cx(h.jet(&[n, 2 * a + 1]), h.jet(&[n, 2 * a]))).collect();
    let hnn = h.jet(&[n, n]);
    let pmm = cx(&RealJet::zero(hnn.num_vars(), hnn.order()), &hnn.scale(&-2.0));
    PJets { p, l, pam, pmm }
}

/// `P_{αβ}` and `P_{αβ̄}` at the origin.
pub fn h_to_p(h: &HTable) -> SecondOrderData {
    let j = p_jets(h);
    let k = j.p.len();
    SecondOrderData::new(
        DMatrix::from_fn(k, k, |a, b| j.p[a][b].constant_term()),
        DMatrix::from_fn(k, k, |a, b| j.l[a][b].constant_term()),
    )
}

/// Wirtinger second derivatives `(f_{z^α z^β}, f_{z^α z̄^β})` at the origin.
pub fn wirtinger_hessian(germ: &SurfaceGerm) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let m = germ.m();
    let f = germ.f();
    let nv = germ.dim();
    let d2 = |i: usize, j: usize| {
        let mut e = vec![0u32; nv];
        e[i] += 1;
        e[j] += 1;
        f.derivative_at_origin(&e)
    };
    let k = m - 1;
    let mut fzz = DMatrix::zeros(k, k);
    let mut fzzb = DMatrix::zeros(k, k);
    for a in 1..m {
        for b in 1..m {
            let (xa, ya, xb, yb) = (x_var(a), y_var(a), x_var(b), y_var(b));
            let sum = d2(xa, xb);
            let yy = d2(ya, yb);
            let xy = d2(xa, yb);
            let yx = d2(ya, xb);
            fzz[(a - 1, b - 1)] = Complex64::new(0.25 * (sum - yy), -0.25 * (xy + yx));
            fzzb[(a - 1, b - 1)] = Complex64::new(0.25 * (sum + yy), 0.25 * (xy - yx));
        }
    }
    (fzz, fzzb)
}

/// `(P, L)` recovered from the Wirtinger Hessian of the graphing function.
pub fn levi_from_germ(germ: &SurfaceGerm) -> SecondOrderData {
    let (fzz, fzzb) = wirtinger_hessian(germ);
    // f_zz = -(i/2) P and f_zz̄ = -(i/2) L
    SecondOrderData::new(fzz * (2.0 * I), fzzb * (2.0 * I))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frames::{build_section, pullback_mc};
    use crate::invariants::compute_h;
    use crate::surface_io::{hyperquadric, parse_surface};

    fn data(g: &SurfaceGerm) -> (SecondOrderData, PJets) {
        let h = compute_h(&pullback_mc(&build_section(g).unwrap()).unwrap(), 2).unwrap();
        (h_to_p(&h), p_jets(&h))
    }

    #[test]
    fn quadric_values() {
        let (d, j) = data(&hyperquadric(3, 4).unwrap());
        for a in 0..2 {
            for b in 0..2 {
                assert!(d.p[(a, b)].norm() < 1e-12);
                let want = if a == b { -I } else { Complex64::new(0.0, 0.0) };
                assert!((d.l[(a, b)] - want).norm() < 1e-12);
            }
            assert!(j.pam[a].constant_term().norm() < 1e-12);
        }
        assert!(j.pmm.constant_term().norm() < 1e-12);
    }

    #[test]
    fn x1y1_values() {
        let (d, _) = data(&parse_surface("x1*y1", 2, 4).unwrap());
        assert!((d.p[(0, 0)] - 1.0).norm() < 1e-12);
        assert!(d.l[(0, 0)].norm() < 1e-12);
    }

    #[test]
    fn wirtinger_cross_check() {
        let g = parse_surface(
            "0.3*x1^2 - 0.7*x1*y1 + 1.1*y1^2 + 0.2*x1*x2 - 0.6*y1*y2 + 0.5*x1*y2 - 0.4*x2^2 + y2^2 + 0.8*x1*xm - 0.3*y2*xm + 0.45*xm^2",
            3,
            4,
        )
        .unwrap();
        let (d, j) = data(&g);
        let w = levi_from_germ(&g);
        assert!((&d.p - &w.p).norm() < 1e-10);
        assert!((&d.l - &w.l).norm() < 1e-10);
        let il = d.l.map(|z| z * I);
        assert!((&il - il.adjoint()).norm() < 1e-12);
        assert!((j.pmm.constant_term().re).abs() < 1e-15);
        let pam0 = j.pam[1].constant_term();
        let want =
            Complex64::new(g.f().derivative_at_origin(&[0, 0, 0, 1, 1]), g.f().derivative_at_origin(&[0, 0, 1, 0, 1]));
        assert!((pam0 - want).norm() < 1e-12);
    }
}
