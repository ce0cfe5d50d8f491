//! End-to-end analysis of a germ: invariants, adaptation, convexity, duality
//! and the structural verification suite.

use crate::adaptation::{adapt_to_ps, corollary_cps_check, Adapted, MixedTerms};
use crate::convexity::{pseudoconvexity, sclc_test, Pseudoconvexity, SclcReport, SecondOrderData};
use crate::duality::{
    dual_second_order, dual_third_order, require_sclc, selfdual_h_version, selfdual_second_order, selfdual_third_order,
    DualData, DualThirdOrder, HVersionComparison, MatchOutcome, SecondOrderMatch, ThirdOrderComparison,
};
use crate::error::{Error, Result};
use crate::frames::{build_section, pullback_mc, MCPullback};
use crate::invariants::{
    compute_h, compute_p3, h_to_p, levi_from_germ, p3_from_omega, verify_index1_redundancy, HTable, ThirdOrderData,
};
use crate::surface_io::SurfaceGerm;

/// Run parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    /// Jet truncation order `N`.
    pub order: u32,
    /// Highest invariant order.
    pub pmax: usize,
    pub tol_structural: f64,
    pub tol_derivative: f64,
    pub tol_orbit: f64,
    pub seed: u64,
}

impl Default for Config {
    fn default() -> Self {
        Config { order: 6, pmax: 4, tol_structural: 1e-8, tol_derivative: 1e-10, tol_orbit: 1e-6, seed: 0 }
    }
}

impl Config {
    pub fn validate(&self) -> Result<()> {
        if self.pmax < 2 {
            return Err(Error::Config(format!("p_max = {} but p_max >= 2 is required", self.pmax)));
        }
        if (self.order as usize) < self.pmax + 1 {
            return Err(Error::Config(format!(
                "jet order N = {} but N >= p_max + 1 = {} is required (p_max >= 2)",
                self.order,
                self.pmax + 1
            )));
        }
        for (name, t) in
            [("structural", self.tol_structural), ("derivative", self.tol_derivative), ("orbit", self.tol_orbit)]
        {
            if !(t > 0.0 && t.is_finite()) {
                return Err(Error::Config(format!("{name} tolerance must be positive, got {t}")));
            }
        }
        Ok(())
    }
}

/// An injected perturbation `ω^j_k += eps dx_0` of the canonical section.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Fault {
    pub j: usize,
    pub k: usize,
    pub eps: f64,
}

/// Invariants of a germ on its canonical and adapted sections.
#[derive(Debug, Clone)]
pub struct Analysis {
    pub germ: SurfaceGerm,
    pub config: Config,
    pub mc: MCPullback,
    pub table: HTable,
    pub data: SecondOrderData,
    pub mixed: MixedTerms,
    pub adapted: Adapted,
    pub p3: Option<ThirdOrderData>,
}

fn tag<T>(module: &'static str) -> impl FnOnce(Error) -> Result<T> {
    move |e| Err(e.in_module(module))
}

pub fn analyze(germ: &SurfaceGerm, config: &Config) -> Result<Analysis> {
    analyze_with_fault(germ, config, None)
}

pub fn analyze_with_fault(germ: &SurfaceGerm, config: &Config, fault: Option<Fault>) -> Result<Analysis> {
    let effective = Config { order: germ.order(), ..config.clone() };
    effective.validate()?;
    let section = build_section(germ).or_else(tag("frames"))?;
    let mut mc = pullback_mc(&section).or_else(tag("frames"))?;
    if let Some(f) = fault {
        let size = mc.n() + 2;
        if f.j >= size || f.k >= size {
            return Err(Error::Config(format!("fault index ({}, {}) outside 0..{size}", f.j, f.k)));
        }
        mc.inject_fault(f.j, f.k, f.eps);
    }
    let table = compute_h(&mc, config.pmax).or_else(tag("invariants"))?;
    let data = h_to_p(&table);
    let mixed = MixedTerms::from_table(&table);
    let adapted = adapt_to_ps(germ, &mc, &table).or_else(tag("adaptation"))?;
    let p3 = if config.pmax >= 3 { Some(compute_p3(&adapted.table).or_else(tag("invariants"))?) } else { None };
    Ok(Analysis { germ: germ.clone(), config: effective, mc, table, data, mixed, adapted, p3 })
}

/// Levi-form classification and the SCLC test when it applies.
#[derive(Debug, Clone)]
pub struct ConvexityResult {
    pub levi: Pseudoconvexity,
    pub sclc: Option<SclcReport>,
}

pub fn convexity(a: &Analysis) -> ConvexityResult {
    let levi = pseudoconvexity(&a.data);
    let sclc = levi.class.is_definite().then(|| sclc_test(&a.data, a.config.seed).expect("definite Levi form"));
    ConvexityResult { levi, sclc }
}

#[derive(Debug, Clone)]
pub struct DualResult {
    pub dual: DualData,
    pub third: Option<DualThirdOrder>,
}

pub fn dual(a: &Analysis) -> Result<DualResult> {
    require_sclc(&a.data, a.config.seed).or_else(tag("convexity"))?;
    let dual = dual_second_order(&a.data).or_else(tag("duality"))?;
    let third =
        a.p3.as_ref()
            .map(|p3| dual_third_order(p3, dual.inverse.q.as_ref().unwrap(), dual.inverse.mm.as_ref().unwrap()));
    Ok(DualResult { dual, third })
}

#[derive(Debug, Clone)]
pub struct SelfDualResult {
    pub order2: SecondOrderMatch,
    pub order3: Option<ThirdOrderComparison>,
    pub h_version: Option<HVersionComparison>,
}

pub fn selfdual(a: &Analysis) -> Result<SelfDualResult> {
    require_sclc(&a.data, a.config.seed).or_else(tag("convexity"))?;
    let order2 = selfdual_second_order(&a.data, a.config.seed).or_else(tag("duality"))?;
    let matched = order2.outcome == MatchOutcome::Match;
    let order3 = if matched && a.p3.is_some() {
        Some(selfdual_third_order(&a.germ, &a.adapted, &a.data, &order2.motion).or_else(tag("duality"))?)
    } else {
        None
    };
    let h_version = if matched {
        Some(selfdual_h_version(&a.germ, &a.adapted, &order2.motion).or_else(tag("duality"))?)
    } else {
        None
    };
    Ok(SelfDualResult { order2, order3, h_version })
}

/// One line of the verification suite.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub residual: f64,
    pub tolerance: f64,
}

impl Check {
    fn new(name: impl Into<String>, residual: f64, tolerance: f64) -> Self {
        Check { name: name.into(), residual, tolerance }
    }

    pub fn passed(&self) -> bool {
        self.residual <= self.tolerance
    }
}

/// Structural identities of the canonical and adapted sections.
pub fn verification_checks(a: &Analysis) -> Vec<Check> {
    let ts = a.config.tol_structural;
    let td = a.config.tol_derivative;
    let mc = &a.mc;
    let n = mc.n();
    let mut out = vec![
        Check::new("complex structure of omega", mc.complex_structure_residual(), ts),
        Check::new("contact form omega^{n+1}_0 = 0", mc.contact_residual(), ts),
        Check::new("Maurer-Cartan equation (real)", mc.maurer_cartan_residual(), ts),
        Check::new("Maurer-Cartan equation (complex)", mc.complex_maurer_cartan_residual(), ts),
        Check::new("semi-basic forms independent", (mc.semibasic_rank() as f64 - n as f64).abs(), 0.0),
    ];
    for p in 2..=a.table.pmax() {
        out.push(Check::new(format!("order-{p} symmetry"), a.table.symmetry_residual(p), ts));
        out.push(Check::new(format!("order-{p} defining identity"), a.table.recursion_residual(p), ts));
    }
    for c in verify_index1_redundancy(&a.table) {
        let tol = if c.name.starts_with("h_1s") || c.name.starts_with("h_1n =") { 1e-12 } else { ts };
        out.push(Check::new(c.name, c.residual, tol));
    }
    let w = levi_from_germ(&a.germ);
    out.push(Check::new("Wirtinger check of P", crate::convexity::max_norm(&(&a.data.p - &w.p)), td));
    out.push(Check::new("Wirtinger check of L", crate::convexity::max_norm(&(&a.data.l - &w.l)), td));
    out.push(Check::new("iL Hermitian, P symmetric", a.data.symmetry_defect(), ts));
    let adapted = MixedTerms::from_table(&a.adapted.table);
    out.push(Check::new("adapted: P_am = P_mm = 0", adapted.max_abs(), 1e-9));
    let cps = corollary_cps_check(&a.adapted.mc, &a.adapted.table);
    out.push(Check::new("adapted: omega^n_1 = 0", cps.w_n_1, ts));
    out.push(Check::new("adapted: omega^{n+1}_1 = omega^n_0", cps.w_np1_1, ts));
    out.push(Check::new("adapted: omega^{n+1}_sigma = h_st omega^t_0", cps.w_np1_sigma, ts));
    out.push(Check::new("adapted: omega^{n+1}_n = omega^1_0 = -omega^n_{n+1}", cps.w_np1_n, ts));
    if let Some(p3) = &a.p3 {
        out.push(Check::new("third-order symmetries", p3.symmetry_residual(), ts));
        let adapted_data = h_to_p(&a.adapted.table);
        let residual = match p3_from_omega(&a.adapted.mc, &adapted_data) {
            Ok((omega_p3, defect)) => p3.family_diff(&omega_p3).into_iter().fold(defect, f64::max),
            Err(_) => f64::INFINITY,
        };
        out.push(Check::new("third order from structure equations", residual, ts));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::surface_io::{hyperquadric, parse_surface};

    #[test]
    fn config_validation() {
        assert!(Config::default().validate().is_ok());
        let bad = Config { order: 1, ..Config::default() };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let bad = Config { pmax: 1, ..Config::default() };
        assert!(matches!(bad.validate(), Err(Error::Config(_))));
        let bad = Config { tol_orbit: 0.0, ..Config::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn quadric_suite_passes() {
        let a = analyze(&hyperquadric(2, 6).unwrap(), &Config::default()).unwrap();
        for c in verification_checks(&a) {
            assert!(c.passed(), "{c:?}");
        }
    }

    #[test]
    fn fault_is_named() {
        let g = hyperquadric(2, 6).unwrap();
        let a = analyze_with_fault(&g, &Config::default(), Some(Fault { j: 3, k: 2, eps: 1e-3 })).unwrap();
        let failed: Vec<_> = verification_checks(&a).into_iter().filter(|c| !c.passed()).collect();
        assert!(failed.iter().any(|c| c.name.starts_with("Maurer-Cartan")), "{failed:?}");
    }

    #[test]
    fn x1y1_is_not_sclc() {
        let a = analyze(&parse_surface("x1*y1", 2, 6).unwrap(), &Config::default()).unwrap();
        assert!(convexity(&a).sclc.is_none());
        let err = dual(&a).unwrap_err();
        assert!(matches!(err.root(), Error::NotSclc(_)));
        assert_eq!(err.kind(), crate::error::ErrorKind::Domain);
    }

    #[test]
    fn quadric_selfdual() {
        let a = analyze(&hyperquadric(3, 6).unwrap(), &Config::default()).unwrap();
        let s = selfdual(&a).unwrap();
        assert_eq!(s.order2.outcome, MatchOutcome::Match);
        assert!(s.order2.residual < 1e-9);
        assert!(s.order3.unwrap().residuals.iter().all(|&r| r < 1e-10));
        let h = s.h_version.unwrap();
        assert!(h.order2 < 1e-10);
        assert!(h.order3.unwrap() < 1e-10);
    }
}
