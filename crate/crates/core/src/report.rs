//! Machine-readable reports. Numbers carry 12 significant digits and complex
//! values are written as `[re, im]`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde_json::{json, Map, Value};

use crate::adaptation::FibreMotion;
use crate::invariants::{verify_index1_redundancy, ThirdOrderData};
use crate::pipeline::{Analysis, Check, ConvexityResult, DualResult, SelfDualResult};

/// `x` rounded to 12 significant digits.
pub fn sig12(x: f64) -> f64 {
    if x == 0.0 {
        return 0.0;
    }
    if !x.is_finite() {
        return x;
    }
    format!("{x:.11e}").parse().unwrap_or(x)
}

fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(sig12(x))
    } else {
        json!(x.to_string())
    }
}

pub fn complex(z: Complex64) -> Value {
    json!([num(z.re), num(z.im)])
}

pub fn cmatrix(a: &DMatrix<Complex64>) -> Value {
    Value::Array((0..a.nrows()).map(|r| Value::Array((0..a.ncols()).map(|c| complex(a[(r, c)])).collect())).collect())
}

pub fn cvector(v: &DVector<Complex64>) -> Value {
    Value::Array(v.iter().map(|z| complex(*z)).collect())
}

pub fn motion(g: &FibreMotion) -> Value {
    json!({
        "g00": complex(g.g00),
        "gab": cmatrix(&g.gab),
        "gmm": complex(g.gmm),
        "g0a": cvector(&g.g0a),
        "g0m": complex(g.g0m),
        "gam": cvector(&g.gam),
    })
}

pub fn third_order(p3: &ThirdOrderData) -> Value {
    json!({
        "P_abm": cmatrix(&p3.pabm),
        "P_abbar_m": cmatrix(&p3.pabbar_m),
        "P_amm": cvector(&p3.pamm),
        "P_mmm": complex(p3.pmmm),
    })
}

pub fn invariants(a: &Analysis) -> Value {
    let mut h = Map::new();
    for (k, j) in a.table.entries() {
        h.insert(k.to_string(), num(j.constant_term()));
    }
    let redundancy: Map<String, Value> =
        verify_index1_redundancy(&a.table).into_iter().map(|c| (c.name, num(c.residual))).collect();
    let residuals: Map<String, Value> = (2..=a.table.pmax())
        .map(|p| {
            (
                p.to_string(),
                json!({
                    "symmetry": num(a.table.symmetry_residual(p)),
                    "defining_identity": num(a.table.recursion_residual(p)),
                }),
            )
        })
        .collect();
    json!({
        "m": a.germ.m(),
        "order": a.config.order,
        "p_max": a.table.pmax(),
        "h": Value::Object(h),
        "P": cmatrix(&a.data.p),
        "L": cmatrix(&a.data.l),
        "P_am": cvector(&a.mixed.pam),
        "P_mm": complex(a.mixed.pmm),
        "adaptation": motion(&a.adapted.motion),
        "P3": a.p3.as_ref().map(third_order).unwrap_or(Value::Null),
        "redundancy": Value::Object(redundancy),
        "residuals": Value::Object(residuals),
    })
}

pub fn convexity(c: &ConvexityResult) -> Value {
    json!({
        "eigenvalues": Value::Array(c.levi.eigenvalues.iter().map(|&e| num(e)).collect()),
        "classification": c.levi.class.as_str(),
        "sclc": c.sclc.as_ref().map(|s| s.sclc).unwrap_or(false),
        "margin": c.sclc.as_ref().map(|s| num(s.margin)).unwrap_or(Value::Null),
        "witness": c.sclc.as_ref().map(|s| cvector(&s.witness)).unwrap_or(Value::Null),
    })
}

pub fn dual(d: &DualResult) -> Value {
    json!({
        "Q": cmatrix(d.dual.inverse.q.as_ref().unwrap()),
        "M": cmatrix(d.dual.inverse.mm.as_ref().unwrap()),
        "P_star": cmatrix(&d.dual.dual.p),
        "L_star": cmatrix(&d.dual.dual.l),
        "block_inverse_defect": num(crate::convexity::block_inverse_defect(&d.dual.inverse)),
        "Q3": d.third.as_ref().map(|t| json!({
            "Q_abm": cmatrix(&t.qabm),
            "Q_abbar_m": cmatrix(&t.qabbar_m),
            "Q_amm": cvector(&t.qamm),
        })).unwrap_or(Value::Null),
    })
}

pub fn selfdual(s: &SelfDualResult) -> Value {
    json!({
        "order2": {
            "match": s.order2.outcome.as_str(),
            "residual": num(s.order2.residual),
            "motion": motion(&s.order2.motion),
            "obstruction": s.order2.obstruction.clone(),
        },
        "order3": s.order3.as_ref().map(|c| json!({
            "residuals": {
                "abm": num(c.residuals[0]),
                "abbar_m": num(c.residuals[1]),
                "amm": num(c.residuals[2]),
                "mmm": num(c.residuals[3]),
            }
        })).unwrap_or(Value::Null),
        "h_version": s.h_version.as_ref().map(|h| json!({
            "residuals": {
                "order2": num(h.order2),
                "order3": h.order3.map(num).unwrap_or(Value::Null),
            }
        })).unwrap_or(Value::Null),
    })
}

pub fn verify(checks: &[Check]) -> Value {
    let all = checks.iter().all(Check::passed);
    json!({
        "pass": all,
        "checks": Value::Array(checks.iter().map(|c| json!({
            "name": c.name,
            "residual": num(c.residual),
            "tolerance": num(c.tolerance),
            "pass": c.passed(),
        })).collect()),
    })
}

/// One line per check: `PASS name  residual=... tol=...`.
pub fn verify_text(checks: &[Check]) -> String {
    let mut s = String::new();
    for c in checks {
        s.push_str(&format!(
            "{} {:<48} residual={:.11e} tol={:.3e}\n",
            if c.passed() { "PASS" } else { "FAIL" },
            c.name,
            c.residual,
            c.tolerance
        ));
    }
    s
}

/// Flattens a report into `path = value` lines.
pub fn to_text(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(map) => {
                for (k, x) in map {
                    let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&p, x, out);
                }
            }
            _ => out.push_str(&format!("{prefix} = {v}\n")),
        }
    }
    let mut out = String::new();
    walk("", v, &mut out);
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_digits() {
        assert_eq!(sig12(1.0 / 3.0), 0.333333333333);
        assert_eq!(sig12(-2.0e-20 / 3.0), -6.66666666667e-21);
        assert_eq!(sig12(-0.0).to_bits(), 0.0f64.to_bits());
    }

    #[test]
    fn text_flattening() {
        let v = json!({"a": {"b": 1, "c": [1, 2]}, "d": "x"});
        assert_eq!(to_text(&v), "a.b = 1\na.c = [1,2]\nd = \"x\"\n");
    }
}
