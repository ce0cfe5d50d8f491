use num_complex::Complex64;

use super::{Jet, JetError, JetForm};
use crate::scalar::Coefficient;

/// A dense matrix of jets, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct JetMatrix<T> {
    rows: usize,
    cols: usize,
    entries: Vec<Jet<T>>,
}

impl<T: Coefficient> JetMatrix<T> {
    pub fn zeros(rows: usize, cols: usize, num_vars: usize, order: u32) -> Self {
        JetMatrix { rows, cols, entries: vec![Jet::zero(num_vars, order); rows * cols] }
    }

    pub fn identity(n: usize, num_vars: usize, order: u32) -> Self {
        let mut m = Self::zeros(n, n, num_vars, order);
        for i in 0..n {
            m.set(i, i, Jet::one(num_vars, order));
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Jet<T>) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        JetMatrix { rows, cols, entries }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &Jet<T> {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: Jet<T>) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn map<U: Coefficient>(&self, f: impl Fn(&Jet<T>) -> Jet<U>) -> JetMatrix<U> {
        JetMatrix { rows: self.rows, cols: self.cols, entries: self.entries.iter().map(f).collect() }
    }

    pub fn truncate(&self, order: u32) -> Self {
        self.map(|e| e.truncate(order))
    }

    pub fn order(&self) -> u32 {
        self.entries.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn max_abs(&self) -> f64 {
        self.entries.iter().map(Jet::max_abs).fold(0.0, f64::max)
    }

    /// Constant terms as a row-major vector.
    pub fn at_origin(&self) -> Vec<T> {
        self.entries.iter().map(Jet::constant_term).collect()
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self, JetError> {
        if self.cols != other.rows {
            return Err(JetError::Shape(format!("{}x{} times {}x{}", self.rows, self.cols, other.rows, other.cols)));
        }
        let mut out = Vec::with_capacity(self.rows * other.cols);
        for r in 0..self.rows {
            for c in 0..other.cols {
                let mut acc: Option<Jet<T>> = None;
                for k in 0..self.cols {
                    let a = self.get(r, k);
                    let b = other.get(k, c);
                    if a.is_zero() || b.is_zero() {
                        let z = Jet::zero(a.num_vars(), a.order().min(b.order()));
                        acc = Some(match acc {
                            Some(s) => &s + &z,
                            None => z,
                        });
                        continue;
                    }
                    let p = a.checked_mul(b)?;
                    acc = Some(match acc {
                        Some(s) => &s + &p,
                        None => p,
                    });
                }
                out.push(acc.expect("nonempty inner dimension"));
            }
        }
        Ok(JetMatrix { rows: self.rows, cols: other.cols, entries: out })
    }

    /// Gauss-Jordan inverse, pivoting on the largest constant term.
    pub fn inverse(&self) -> Result<Self, JetError> {
        if self.rows != self.cols {
            return Err(JetError::Shape(format!("{}x{} is not square", self.rows, self.cols)));
        }
        let n = self.rows;
        let nv = self.entries.first().map(Jet::num_vars).unwrap_or(0);
        let mut a = self.clone();
        let mut inv = Self::identity(n, nv, self.order());
        for col in 0..n {
            let (pivot, mag) = (col..n)
                .map(|r| (r, a.get(r, col).constant_term().magnitude()))
                .fold((col, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
            if mag <= 0.0 {
                return Err(JetError::SingularMatrix);
            }
            a.swap_rows(col, pivot);
            inv.swap_rows(col, pivot);
            let p = a.get(col, col).reciprocal()?;
            a.scale_row(col, &p);
            inv.scale_row(col, &p);
            for r in 0..n {
                if r == col || a.get(r, col).is_zero() {
                    continue;
                }
                let factor = a.get(r, col).clone();
                a.sub_row_multiple(r, col, &factor);
                inv.sub_row_multiple(r, col, &factor);
            }
        }
        Ok(inv)
    }

    fn swap_rows(&mut self, i: usize, j: usize) {
        if i == j {
            return;
        }
        for c in 0..self.cols {
            self.entries.swap(i * self.cols + c, j * self.cols + c);
        }
    }

    fn scale_row(&mut self, r: usize, s: &Jet<T>) {
        for c in 0..self.cols {
            let v = self.get(r, c) * s;
            self.set(r, c, v);
        }
    }

    fn sub_row_multiple(&mut self, target: usize, source: usize, factor: &Jet<T>) {
        for c in 0..self.cols {
            let src = self.get(source, c);
            if src.is_zero() {
                continue;
            }
            let v = self.get(target, c) - &(factor * src);
            self.set(target, c, v);
        }
    }

    /// The matrix of one-forms `M⁻¹ dM`.
    pub fn maurer_cartan(&self) -> Result<Vec<Vec<JetForm<T>>>, JetError> {
        let inv = self.inverse()?;
        let n = self.rows;
        let d: Vec<JetForm<T>> = self.entries.iter().map(JetForm::differential).collect();
        let nv = self.entries.first().map(Jet::num_vars).unwrap_or(0);
        let mut out = vec![vec![JetForm::zero(nv, self.order().saturating_sub(1)); n]; n];
        for (j, row) in out.iter_mut().enumerate() {
            for (k, slot) in row.iter_mut().enumerate() {
                let mut acc = JetForm::zero(nv, self.order().saturating_sub(1));
                for l in 0..n {
                    let e = inv.get(j, l);
                    let de = &d[l * n + k];
                    if e.is_zero() || de.is_zero() {
                        continue;
                    }
                    acc = &acc + &de.scale_by(e);
                }
                *slot = acc;
            }
        }
        Ok(out)
    }
}

impl JetMatrix<Complex64> {
    /// Real `2r×2c` form, each entry `a+ib` becoming `[[a, -b], [b, a]]`.
    pub fn realify(&self) -> JetMatrix<f64> {
        JetMatrix::from_fn(2 * self.rows, 2 * self.cols, |r, c| {
            let z = self.get(r / 2, c / 2);
            match (r % 2, c % 2) {
                (0, 0) | (1, 1) => z.re(),
                (0, 1) => -&z.im(),
                _ => z.im(),
            }
        })
    }
}
