//! The canonical local section of the frame bundle along a germ and the
//! pulled-back Maurer–Cartan forms.
//!
//! Jets here carry one variable beyond the germ's: a fibre phase `θ` for the
//! scalar motion `e^{iθ}`. Along `θ` the section only rotates each complex
//! frame vector, so `ω` gains `J dθ` and nothing else depends on `θ`.

use crate::error::{Error, Result};
use crate::jets::{Jet, JetForm, JetMatrix};
use crate::surface_io::{x_var, xm_var, y_var, SurfaceGerm};
use crate::{Complex64, ComplexForm, ComplexJetMatrix, RealForm, RealJet, RealJetMatrix};

/// Index of the fibre-phase variable.
pub fn theta_var(m: usize) -> usize {
    2 * m - 1
}

/// A local section `e(u)` of the frame bundle, with its dual coframe.
#[derive(Debug, Clone)]
pub struct FrameSection {
    m: usize,
    frame: RealJetMatrix,
    coframe: RealJetMatrix,
    delta: RealJet,
}

impl FrameSection {
    pub fn m(&self) -> usize {
        self.m
    }

    /// Frame matrix; column `j` is `e_j` in the coordinates `(x^0, y^0, ..., x^m, y^m)`.
    pub fn frame(&self) -> &RealJetMatrix {
        &self.frame
    }

    /// Coframe matrix; row `j` is `e^j`.
    pub fn coframe(&self) -> &RealJetMatrix {
        &self.coframe
    }

    pub fn delta(&self) -> &RealJet {
        &self.delta
    }

    pub fn num_vars(&self) -> usize {
        2 * self.m
    }

    /// Largest coefficient of `⟨e^j, e_k⟩ - δ^j_k`.
    pub fn duality_defect(&self) -> f64 {
        let prod = self.coframe.checked_mul(&self.frame).expect("square");
        let n = prod.rows();
        let id = JetMatrix::identity(n, self.num_vars(), prod.order());
        (0..n)
            .flat_map(|r| (0..n).map(move |c| (r, c)))
            .map(|(r, c)| prod.get(r, c).max_abs_diff(id.get(r, c)))
            .fold(0.0, f64::max)
    }

    /// Largest coefficient of `J e_{2a} - e_{2a+1}`.
    pub fn complex_structure_defect(&self) -> f64 {
        let n = self.frame.rows();
        let mut worst: f64 = 0.0;
        for a in 0..=self.m {
            for b in 0..=self.m {
                let je_x = -self.frame.get(2 * b + 1, 2 * a);
                let je_y = self.frame.get(2 * b, 2 * a);
                worst = worst.max(je_x.max_abs_diff(self.frame.get(2 * b, 2 * a + 1)));
                worst = worst.max(je_y.max_abs_diff(self.frame.get(2 * b + 1, 2 * a + 1)));
            }
        }
        debug_assert_eq!(n, 2 * self.m + 2);
        worst
    }
}

/// The explicit section along the graph of `f`.
pub fn build_section(germ: &SurfaceGerm) -> Result<FrameSection> {
    let m = germ.m();
    let nv = 2 * m;
    let order = germ.order() - 1;
    let f = germ.f().extend_vars(nv).truncate(order);
    let full = germ.f().extend_vars(nv);
    let fx = |alpha: usize| full.partial(x_var(alpha));
    let fy = |alpha: usize| full.partial(y_var(alpha));
    let fxm = full.partial(xm_var(m));
    let one = Jet::one(nv, order);
    let delta = (&one + &(&fxm * &fxm)).reciprocal()?;
    let var = |k: usize| Jet::var(nv, order, k);

    let size = 2 * m + 2;
    let mut e = JetMatrix::zeros(size, size, nv, order);
    let (xm_row, ym_row) = (2 * m, 2 * m + 1);

    e.set(0, 0, one.clone());
    e.set(1, 1, one.clone());
    for alpha in 1..m {
        let (xr, yr) = (2 * alpha, 2 * alpha + 1);
        e.set(xr, 0, var(x_var(alpha)));
        e.set(yr, 0, var(y_var(alpha)));
        e.set(xr, 1, -&var(y_var(alpha)));
        e.set(yr, 1, var(x_var(alpha)));

        let a = &delta * &(&fy(alpha) - &(&fx(alpha) * &fxm));
        let b = &delta * &(&fx(alpha) + &(&fy(alpha) * &fxm));
        e.set(xr, 2 * alpha, one.clone());
        e.set(xm_row, 2 * alpha, a.clone());
        e.set(ym_row, 2 * alpha, b.clone());
        e.set(yr, 2 * alpha + 1, one.clone());
        e.set(xm_row, 2 * alpha + 1, -&b);
        e.set(ym_row, 2 * alpha + 1, a);
    }
    e.set(xm_row, 0, var(xm_var(m)));
    e.set(ym_row, 0, f.clone());
    e.set(xm_row, 1, -&f);
    e.set(ym_row, 1, var(xm_var(m)));
    e.set(xm_row, 2 * m, one.clone());
    e.set(ym_row, 2 * m, fxm.clone());
    e.set(ym_row, 2 * m + 1, one.clone());
    e.set(xm_row, 2 * m + 1, -&fxm);

    let coframe = e.inverse()?;
    Ok(FrameSection { m, frame: e, coframe, delta })
}

/// The section `e(u) · g(u)` for a fibre motion given as a complex matrix of
/// jets acting on the complex frame `(f_0, ..., f_m)` by `f̃_a = g^b_a f_b`.
pub fn build_section_with_motion(germ: &SurfaceGerm, g: &ComplexJetMatrix) -> Result<FrameSection> {
    let base = build_section(germ)?;
    let m = germ.m();
    if g.rows() != m + 1 || g.cols() != m + 1 {
        return Err(Error::Consistency(format!(
            "fibre motion is {}x{}, expected {}x{}",
            g.rows(),
            g.cols(),
            m + 1,
            m + 1
        )));
    }
    let nv = 2 * m;
    let g = g.map(|j| if j.num_vars() < nv { j.extend_vars(nv) } else { j.clone() });
    let frame = base.frame.checked_mul(&g.realify())?;
    let coframe = frame.inverse()?;
    Ok(FrameSection { m, frame, coframe, delta: base.delta })
}

/// Pulled-back Maurer–Cartan forms along a section.
#[derive(Debug, Clone)]
pub struct MCPullback {
    m: usize,
    omega: Vec<Vec<RealForm>>,
    omega_c: Vec<Vec<ComplexForm>>,
}

pub fn pullback_mc(section: &FrameSection) -> Result<MCPullback> {
    let m = section.m;
    let mut omega = section.frame.maurer_cartan()?;
    let nv = section.num_vars();
    let order = omega[0][0].order();
    let dtheta = JetForm::coordinate(nv, order, theta_var(m));
    for a in 0..=m {
        omega[2 * a + 1][2 * a] = &omega[2 * a + 1][2 * a] + &dtheta;
        omega[2 * a][2 * a + 1] = &omega[2 * a][2 * a + 1] - &dtheta;
    }
    Ok(MCPullback::from_real(m, omega))
}

impl MCPullback {
    fn from_real(m: usize, omega: Vec<Vec<RealForm>>) -> Self {
        let i = Complex64::i();
        let omega_c = (0..=m)
            .map(|b| {
                (0..=m)
                    .map(|a| &omega[2 * b][2 * a].to_complex() + &omega[2 * b + 1][2 * a].to_complex().scale(&i))
                    .collect()
            })
            .collect();
        MCPullback { m, omega, omega_c }
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// The index `n = 2m`; real indices run over `0..=n+1`.
    pub fn n(&self) -> usize {
        2 * self.m
    }

    pub fn num_vars(&self) -> usize {
        2 * self.m
    }

    pub fn order(&self) -> u32 {
        self.omega.iter().flatten().map(JetForm::order).min().unwrap_or(0)
    }

    /// `ω^j_k`.
    pub fn w(&self, j: usize, k: usize) -> &RealForm {
        &self.omega[j][k]
    }

    /// `Ω^b_a`.
    pub fn big(&self, b: usize, a: usize) -> &ComplexForm {
        &self.omega_c[b][a]
    }

    /// Overwrites a component, deliberately breaking the structure; used to
    /// exercise the verification suite.
    pub fn inject_fault(&mut self, j: usize, k: usize, eps: f64) {
        let nv = self.num_vars();
        let order = self.omega[j][k].order();
        let bump = JetForm::coordinate(nv, order, 0).scale(&eps);
        self.omega[j][k] = &self.omega[j][k] + &bump;
        let rebuilt = MCPullback::from_real(self.m, std::mem::take(&mut self.omega));
        *self = rebuilt;
    }

    /// Largest violation of `ω^{2a}_{2b} = ω^{2a+1}_{2b+1}`, `ω^{2a}_{2b+1} = -ω^{2a+1}_{2b}`.
    pub fn complex_structure_residual(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..=self.m {
            for b in 0..=self.m {
                let d1 = &self.omega[2 * a][2 * b] - &self.omega[2 * a + 1][2 * b + 1];
                let d2 = &self.omega[2 * a][2 * b + 1] + &self.omega[2 * a + 1][2 * b];
                worst = worst.max(d1.max_abs()).max(d2.max_abs());
            }
        }
        worst
    }

    /// Largest coefficient of `ω^{n+1}_0`.
    pub fn contact_residual(&self) -> f64 {
        self.omega[self.n() + 1][0].max_abs()
    }

    /// Largest coefficient of `dω^j_k + ω^j_l ∧ ω^l_k`.
    pub fn maurer_cartan_residual(&self) -> f64 {
        let size = self.n() + 2;
        let mut worst: f64 = 0.0;
        for j in 0..size {
            for k in 0..size {
                let mut acc = self.omega[j][k].exterior_derivative();
                for l in 0..size {
                    if self.omega[j][l].is_zero() || self.omega[l][k].is_zero() {
                        continue;
                    }
                    acc = &acc + &self.omega[j][l].wedge(&self.omega[l][k]);
                }
                worst = worst.max(acc.max_abs());
            }
        }
        worst
    }

    /// Largest coefficient of `dΩ^b_a + Ω^b_c ∧ Ω^c_a`.
    pub fn complex_maurer_cartan_residual(&self) -> f64 {
        let size = self.m + 1;
        let mut worst: f64 = 0.0;
        for b in 0..size {
            for a in 0..size {
                let mut acc = self.omega_c[b][a].exterior_derivative();
                for c in 0..size {
                    acc = &acc + &self.omega_c[b][c].wedge(&self.omega_c[c][a]);
                }
                worst = worst.max(acc.max_abs());
            }
        }
        worst
    }

    /// Rank at the origin of `{ω^0_0, ω^1_0, ..., ω^n_0}` against the
    /// coordinate differentials.
    pub fn semibasic_rank(&self) -> usize {
        let rows: Vec<Vec<f64>> = (0..=self.n()).map(|t| self.omega[t][0].at_origin()).collect();
        let mat = nalgebra::DMatrix::from_fn(rows.len(), self.num_vars(), |r, c| rows[r][c]);
        mat.rank(1e-10)
    }

    /// The semi-basic coefficient matrix `W[t][i]`, component `i` of `ω^t_0`
    /// for `t = 1..=n`.
    pub fn semibasic_matrix(&self) -> RealJetMatrix {
        let n = self.n();
        JetMatrix::from_fn(n, self.num_vars(), |t, i| self.omega[t + 1][0].component(i).clone())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface_io::{hyperquadric, parse_surface};

    fn assert_form_eq(a: &RealForm, b: &RealForm, tol: f64) {
        assert!((a - b).max_abs() < tol, "forms differ: {a:?} vs {b:?}");
    }

    #[test]
    fn flat_germ_gives_coordinate_frame_and_flat_curvature() {
        let g = SurfaceGerm::flat(2, 4).unwrap();
        let s = build_section(&g).unwrap();
        assert_eq!(s.frame().get(2, 2), &Jet::one(4, 3));
        assert!(s.frame().get(4, 2).is_zero());
        let mc = pullback_mc(&s).unwrap();
        let n = mc.n();
        let dtheta = JetForm::coordinate(mc.num_vars(), mc.order(), theta_var(2));
        for t in 2..n {
            assert!(mc.w(n + 1, t).max_abs() < 1e-15);
        }
        assert_form_eq(mc.w(n + 1, n), &dtheta, 1e-15);
        assert_form_eq(mc.w(1, 0), &dtheta, 1e-15);
        for sigma in 2..n {
            assert!(mc.w(n, sigma).max_abs() < 1e-15);
        }
    }

    #[test]
    fn coframe_is_dual_on_the_quadric() {
        let s = build_section(&hyperquadric(3, 5).unwrap()).unwrap();
        assert!(s.duality_defect() < 1e-10);
        assert!(s.complex_structure_defect() < 1e-15);
    }

    #[test]
    fn frame_at_origin_is_the_coordinate_frame() {
        let g = parse_surface("x1*y1 - 0.3*x1^2 + 2*x1*xm + xm^2*y1", 2, 5).unwrap();
        let s = build_section(&g).unwrap();
        let at0 = s.frame().at_origin();
        for r in 0..6 {
            for c in 0..6 {
                let expected = if r == c { 1.0 } else { 0.0 };
                assert_eq!(at0[r * 6 + c], expected, "entry {r},{c}");
            }
        }
    }

    #[test]
    fn omega_at_origin_matches_the_explicit_table() {
        let g = parse_surface("x1*y1 - 0.3*x1^2 + 2*x1*xm + 0.7*xm^2 + y1^3", 2, 5).unwrap();
        let s = build_section(&g).unwrap();
        let mc = pullback_mc(&s).unwrap();
        let nv = mc.num_vars();
        let o = mc.order();
        let at0 = |form: &RealForm| form.truncate(0);
        let dx = |k: usize| JetForm::coordinate(nv, 0, k);
        let df = |k: usize| {
            let d = g.f().extend_vars(nv).partial(k);
            JetForm::differential(&d).truncate(0)
        };
        let n = mc.n();
        let (x1, y1, xm) = (x_var(1), y_var(1), xm_var(2));
        assert_form_eq(&at0(mc.w(2, 0)), &dx(x1), 1e-14);
        assert_form_eq(&at0(mc.w(3, 0)), &dx(y1), 1e-14);
        assert_form_eq(&at0(mc.w(2, 1)), &-&dx(y1), 1e-14);
        assert_form_eq(&at0(mc.w(3, 1)), &dx(x1), 1e-14);
        assert_form_eq(&at0(mc.w(n, 0)), &dx(xm), 1e-14);
        assert_form_eq(&at0(mc.w(n, 2)), &df(y1), 1e-14);
        assert_form_eq(&at0(mc.w(n, 3)), &-&df(x1), 1e-14);
        let dtheta = dx(theta_var(2));
        assert_form_eq(&at0(mc.w(1, 0)), &dtheta, 1e-14);
        assert_form_eq(&at0(mc.w(n, n + 1)), &(&-&df(xm) - &dtheta), 1e-14);
        assert_form_eq(&at0(mc.w(n + 1, 2)), &df(x1), 1e-14);
        assert_form_eq(&at0(mc.w(n + 1, 3)), &df(y1), 1e-14);
        assert_form_eq(&at0(mc.w(n + 1, n)), &(&df(xm) + &dtheta), 1e-14);
        assert!(o >= 2);
    }

    #[test]
    fn structure_equations_hold_for_a_generic_germ() {
        let g =
            parse_surface("x1*y1 - 0.3*x1^2 + 0.5*x1*xm + 0.7*xm^2 + y1^3 - 0.2*x1*y1*xm + 0.1*x1^4", 2, 5).unwrap();
        let mc = pullback_mc(&build_section(&g).unwrap()).unwrap();
        assert!(mc.complex_structure_residual() < 1e-12);
        assert!(mc.contact_residual() < 1e-12);
        assert!(mc.maurer_cartan_residual() < 1e-9);
        assert!(mc.complex_maurer_cartan_residual() < 1e-9);
        assert_eq!(mc.semibasic_rank(), mc.num_vars());
    }

    #[test]
    fn fault_injection_breaks_the_structure() {
        let g = hyperquadric(2, 4).unwrap();
        let mut mc = pullback_mc(&build_section(&g).unwrap()).unwrap();
        mc.inject_fault(2, 2, 1e-3);
        assert!(mc.complex_structure_residual() > 1e-4);
    }
}
