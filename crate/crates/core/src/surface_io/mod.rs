//! Hypersurface germs in graph form `y^m = f(x^1, y^1, ..., x^{m-1}, y^{m-1}, x^m)`.
//!
//! Variables are ordered `(x1, y1, ..., x{m-1}, y{m-1}, xm)`.

mod parser;
mod regraph;

pub use parser::parse_expression;
pub use regraph::{quadric_automorphism, quadric_matrix, regraph, regraph_with_map, ProjectiveMap, Regraphed};

use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jets::{Exponent, Jet, MAX_VARS};
use crate::Complex64;

/// Coefficients below this magnitude in the constant and linear part are
/// treated as round-off and removed.
pub const GRAPH_FORM_TOLERANCE: f64 = 1e-10;

/// A real hypersurface germ `y^m = f` in normal position at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceGerm {
    m: usize,
    f: Jet<f64>,
}

/// Index of `x{alpha}` among the germ variables.
pub fn x_var(alpha: usize) -> usize {
    2 * (alpha - 1)
}

/// Index of `y{alpha}` among the germ variables.
pub fn y_var(alpha: usize) -> usize {
    2 * alpha - 1
}

/// Index of `xm` among the germ variables.
pub fn xm_var(m: usize) -> usize {
    2 * m - 2
}

/// Resolves a variable name (`x1`, `y2`, `xm`, or `x{m}`) to its index.
pub fn var_index(m: usize, name: &str) -> Option<usize> {
    if name == "xm" {
        return Some(xm_var(m));
    }
    let (head, tail) = name.split_at(1);
    let k: usize = tail.parse().ok()?;
    match head {
        "x" if k >= 1 && k < m => Some(x_var(k)),
        "x" if k == m => Some(xm_var(m)),
        "y" if k >= 1 && k < m => Some(y_var(k)),
        _ => None,
    }
}

pub fn var_name(m: usize, i: usize) -> String {
    if i == xm_var(m) {
        "xm".to_string()
    } else if i % 2 == 0 {
        format!("x{}", i / 2 + 1)
    } else {
        format!("y{}", i.div_ceil(2))
    }
}

impl SurfaceGerm {
    /// Validates the graph-form conditions and wraps `f`.
    pub fn new(m: usize, f: Jet<f64>) -> Result<Self> {
        if m < 2 {
            return Err(Error::InvalidGerm(format!("m = {m}, need m >= 2")));
        }
        if 2 * m > MAX_VARS {
            return Err(Error::InvalidGerm(format!("m = {m} exceeds the supported maximum")));
        }
        if f.num_vars() != 2 * m - 1 {
            return Err(Error::InvalidGerm(format!("f has {} variables, expected {}", f.num_vars(), 2 * m - 1)));
        }
        if f.order() < 2 {
            return Err(Error::InvalidGerm(format!("order {} < 2", f.order())));
        }
        if f.constant_term().abs() > 0.0 {
            return Err(Error::InvalidGerm("nonzero constant term".into()));
        }
        for i in 0..f.num_vars() {
            if f.coeff(Exponent::unit(i)) != 0.0 {
                return Err(Error::InvalidGerm(format!("nonzero linear part in {}", var_name(m, i))));
            }
        }
        Ok(SurfaceGerm { m, f })
    }

    /// Like [`SurfaceGerm::new`], but first removes round-off below
    /// [`GRAPH_FORM_TOLERANCE`] from the constant and linear coefficients.
    pub fn new_cleaned(m: usize, mut f: Jet<f64>) -> Result<Self> {
        let mut low = vec![Exponent::ZERO];
        low.extend((0..f.num_vars()).map(Exponent::unit));
        for e in low {
            if f.coeff(e).abs() <= GRAPH_FORM_TOLERANCE {
                f.insert(e, 0.0);
            }
        }
        Self::new(m, f)
    }

    /// The flat germ `f = 0`.
    pub fn flat(m: usize, order: u32) -> Result<Self> {
        Self::new(m, Jet::zero(2 * m - 1, order))
    }

    pub fn m(&self) -> usize {
        self.m
    }

    /// Real dimension `2m - 1` of the hypersurface.
    pub fn dim(&self) -> usize {
        2 * self.m - 1
    }

    pub fn order(&self) -> u32 {
        self.f.order()
    }

    pub fn f(&self) -> &Jet<f64> {
        &self.f
    }

    /// Prints `f` in the parser's grammar.
    pub fn to_expression(&self) -> String {
        let mut out = String::new();
        for (e, c) in self.f.terms() {
            if out.is_empty() {
                if *c < 0.0 {
                    out.push('-');
                }
            } else {
                out.push_str(if *c < 0.0 { " - " } else { " + " });
            }
            write!(out, "{:?}", c.abs()).expect("write to string");
            for (i, k) in e.to_vec(self.dim()).into_iter().enumerate() {
                match k {
                    0 => {}
                    1 => write!(out, "*{}", var_name(self.m, i)).expect("write to string"),
                    _ => write!(out, "*{}^{}", var_name(self.m, i), k).expect("write to string"),
                }
            }
        }
        if out.is_empty() {
            out.push('0');
        }
        out
    }

    pub fn to_file_format(&self) -> SurfaceFile {
        SurfaceFile {
            m: self.m,
            order: self.order(),
            coeffs: self.f.terms().map(|(e, c)| CoeffEntry { exp: e.to_vec(self.dim()), val: *c }).collect(),
        }
    }

    pub fn from_file_format(file: &SurfaceFile) -> Result<Self> {
        if file.m < 2 {
            return Err(Error::MalformedFile(format!("m = {} < 2", file.m)));
        }
        let nvars = 2 * file.m - 1;
        let f = Jet::from_terms(nvars, file.order, file.coeffs.iter().map(|c| (c.exp.clone(), c.val)))
            .map_err(|e| Error::MalformedFile(e.to_string()))?;
        Self::new(file.m, f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_file_format()).expect("serializable")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let file: SurfaceFile = serde_json::from_str(text).map_err(|e| Error::MalformedFile(e.to_string()))?;
        Self::from_file_format(&file)
    }
}

/// On-disk representation of a germ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurfaceFile {
    pub m: usize,
    pub order: u32,
    pub coeffs: Vec<CoeffEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoeffEntry {
    pub exp: Vec<u32>,
    pub val: f64,
}

/// Parses an expression and validates it as a germ.
pub fn parse_surface(text: &str, m: usize, order: u32) -> Result<SurfaceGerm> {
    SurfaceGerm::new(m, parse_expression(text, m, order)?)
}

pub fn load_surface(path: impl AsRef<Path>) -> Result<SurfaceGerm> {
    SurfaceGerm::from_json(&std::fs::read_to_string(path)?)
}

pub fn save_surface(germ: &SurfaceGerm, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, germ.to_json())?;
    Ok(())
}

/// The model quadric `q = 0` at `[1:0:...:0]`, where
/// `q(z) = i(z^0 z̄^m - z^m z̄^0) + Σ |z^α|²`.
pub fn hyperquadric(m: usize, order: u32) -> Result<SurfaceGerm> {
    let nvars = 2 * m - 1;
    let mut f = Jet::zero(nvars, order);
    for alpha in 1..m {
        for v in [x_var(alpha), y_var(alpha)] {
            f = &f - &(&Jet::var(nvars, order, v) * &Jet::var(nvars, order, v)).scale(&0.5);
        }
    }
    SurfaceGerm::new(m, f)
}

/// Evaluates the hermitian form of the model quadric on homogeneous coordinates.
pub fn quadric_form(z: &[Complex64]) -> f64 {
    let m = z.len() - 1;
    let i = Complex64::i();
    let mut q = i * (z[0] * z[m].conj() - z[m] * z[0].conj());
    for za in &z[1..m] {
        q += za * za.conj();
    }
    q.re
}
