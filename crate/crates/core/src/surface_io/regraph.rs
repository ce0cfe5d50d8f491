use nalgebra::DMatrix;

use super::{x_var, xm_var, y_var, SurfaceGerm};
use crate::error::{Error, Result};
use crate::jets::{Exponent, Jet};
use crate::Complex64;

const DET_TOLERANCE: f64 = 1e-12;

/// An invertible linear map on homogeneous coordinates `[z^0 : ... : z^m]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectiveMap {
    matrix: DMatrix<Complex64>,
}

impl ProjectiveMap {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() < 3 {
            return Err(Error::InvalidGerm(format!(
                "projective map must be square of size >= 3, got {}x{}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        if matrix.determinant().norm() <= DET_TOLERANCE {
            return Err(Error::Singular("projective map is not invertible".into()));
        }
        Ok(ProjectiveMap { matrix })
    }

    pub fn identity(m: usize) -> Self {
        ProjectiveMap { matrix: DMatrix::identity(m + 1, m + 1) }
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn m(&self) -> usize {
        self.matrix.nrows() - 1
    }

    pub fn inverse(&self) -> Self {
        ProjectiveMap { matrix: self.matrix.clone().try_inverse().expect("checked invertible at construction") }
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &ProjectiveMap) -> Self {
        ProjectiveMap { matrix: &self.matrix * &other.matrix }
    }
}

/// The hermitian matrix of the model quadric form.
pub fn quadric_matrix(m: usize) -> DMatrix<Complex64> {
    let mut q = DMatrix::identity(m + 1, m + 1);
    q[(0, 0)] = Complex64::new(0.0, 0.0);
    q[(m, m)] = Complex64::new(0.0, 0.0);
    q[(m, 0)] = Complex64::i();
    q[(0, m)] = -Complex64::i();
    q
}

/// `exp(Q K)` for the anti-hermitian part `K` of `k`, an element of the
/// stabilizer of the model quadric form `Q`.
pub fn quadric_automorphism(k: &DMatrix<Complex64>) -> Result<ProjectiveMap> {
    let m = k.nrows() - 1;
    let anti = (k - k.adjoint()) * Complex64::new(0.5, 0.0);
    ProjectiveMap::new((quadric_matrix(m) * anti).exp())
}

/// A re-graphed germ together with the full projective map that carries the
/// original germ onto it (the given map followed by the renormalization).
#[derive(Debug, Clone)]
pub struct Regraphed {
    pub germ: SurfaceGerm,
    pub normalized_map: ProjectiveMap,
}

/// The germ of `A(S)` at `A[1:0:...:0]`, brought back to normal position.
pub fn regraph(germ: &SurfaceGerm, a: &ProjectiveMap) -> Result<SurfaceGerm> {
    regraph_with_map(germ, a).map(|r| r.germ)
}

pub fn regraph_with_map(germ: &SurfaceGerm, a: &ProjectiveMap) -> Result<Regraphed> {
    let m = germ.m();
    if a.m() != m {
        return Err(Error::InvalidGerm(format!("map acts on P^{}, germ lives in P^{m}", a.m())));
    }
    let nv = germ.dim();
    let order = germ.order();
    let i = Complex64::i();
    let c = |v: Complex64| Jet::constant(nv, order, v);
    let var = |k: usize| Jet::<f64>::var(nv, order, k).to_complex();

    let mut w: Vec<Jet<Complex64>> = vec![c(Complex64::new(1.0, 0.0))];
    for alpha in 1..m {
        w.push(&var(x_var(alpha)) + &var(y_var(alpha)).scale(&i));
    }
    w.push(&var(xm_var(m)) + &germ.f().to_complex().scale(&i));

    let mat = a.matrix();
    let zeta: Vec<Jet<Complex64>> = (0..=m)
        .map(|r| w.iter().enumerate().fold(Jet::zero(nv, order), |acc, (col, wc)| &acc + &wc.scale(&mat[(r, col)])))
        .collect();

    if zeta[0].constant_term().norm() <= DET_TOLERANCE {
        return Err(Error::Singular("image base point leaves the affine chart z^0 = 1".into()));
    }
    let inv0 = zeta[0].reciprocal()?;
    let mut shift = Vec::with_capacity(m);
    let eta: Vec<Jet<Complex64>> = zeta[1..]
        .iter()
        .map(|zj| {
            let mut e = zj * &inv0;
            shift.push(e.constant_term());
            e.insert(Exponent::ZERO, Complex64::new(0.0, 0.0));
            e
        })
        .collect();

    let mut tangent = DMatrix::<Complex64>::zeros(m, m);
    for (j, ej) in eta.iter().enumerate() {
        for alpha in 1..m {
            tangent[(j, alpha - 1)] = ej.coeff(Exponent::unit(x_var(alpha)));
        }
        tangent[(j, m - 1)] = ej.coeff(Exponent::unit(xm_var(m)));
    }
    if tangent.determinant().norm() <= DET_TOLERANCE {
        return Err(Error::Singular("image tangent hyperplane is degenerate in the chart".into()));
    }
    let cmat = tangent
        .try_inverse()
        .ok_or_else(|| Error::Singular("image tangent hyperplane is degenerate in the chart".into()))?;

    let xi: Vec<Jet<Complex64>> = (0..m)
        .map(|k| eta.iter().enumerate().fold(Jet::zero(nv, order), |acc, (j, ej)| &acc + &ej.scale(&cmat[(k, j)])))
        .collect();

    // Real coordinates of the image point; linear part is the identity.
    let mut coords = vec![Jet::zero(nv, order); nv];
    for alpha in 1..m {
        coords[x_var(alpha)] = xi[alpha - 1].re();
        coords[y_var(alpha)] = xi[alpha - 1].im();
    }
    coords[xm_var(m)] = xi[m - 1].re();
    let nonlinear: Vec<Jet<f64>> = coords
        .into_iter()
        .map(|mut j| {
            j.insert(Exponent::ZERO, 0.0);
            for k in 0..nv {
                j.insert(Exponent::unit(k), 0.0);
            }
            j
        })
        .collect();

    let ident: Vec<Jet<f64>> = (0..nv).map(|k| Jet::var(nv, order, k)).collect();
    let mut inverse = ident.clone();
    for _ in 0..order {
        let next: Vec<Jet<f64>> = nonlinear
            .iter()
            .zip(&ident)
            .map(|(nl, id)| nl.compose(&inverse).map(|v| id - &v))
            .collect::<std::result::Result<_, _>>()?;
        inverse = next;
    }
    let f_new = xi[m - 1].im().compose(&inverse)?;
    let germ = SurfaceGerm::new_cleaned(m, f_new)?;

    let mut b = DMatrix::<Complex64>::zeros(m + 1, m + 1);
    b[(0, 0)] = Complex64::new(1.0, 0.0);
    for r in 0..m {
        let mut off = Complex64::new(0.0, 0.0);
        for j in 0..m {
            b[(r + 1, j + 1)] = cmat[(r, j)];
            off -= cmat[(r, j)] * shift[j];
        }
        b[(r + 1, 0)] = off;
    }
    let normalized_map = ProjectiveMap::new(b * mat)?;
    Ok(Regraphed { germ, normalized_map })
}
