use std::ops::{Add, Neg, Sub};

use num_complex::Complex64;

use super::Jet;
use crate::scalar::Coefficient;

/// A one-form `Σ a_i dx_i` with jet coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct JetForm<T> {
    components: Vec<Jet<T>>,
}

impl<T: Coefficient> JetForm<T> {
    pub fn zero(num_vars: usize, order: u32) -> Self {
        JetForm { components: vec![Jet::zero(num_vars, order); num_vars] }
    }

    /// Builds a form from its components; there must be one per variable.
    pub fn from_components(components: Vec<Jet<T>>) -> Self {
        let n = components.len();
        assert!(components.iter().all(|c| c.num_vars() == n), "form arity mismatch");
        JetForm { components }
    }

    /// The differential `dF`.
    pub fn differential(f: &Jet<T>) -> Self {
        let n = f.num_vars();
        JetForm { components: (0..n).map(|i| f.partial(i)).collect() }
    }

    /// The coordinate differential `dx_var`.
    pub fn coordinate(num_vars: usize, order: u32, var: usize) -> Self {
        let mut form = Self::zero(num_vars, order);
        form.components[var] = Jet::one(num_vars, order);
        form
    }

    pub fn num_vars(&self) -> usize {
        self.components.len()
    }

    pub fn order(&self) -> u32 {
        self.components.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn component(&self, i: usize) -> &Jet<T> {
        &self.components[i]
    }

    pub fn components(&self) -> &[Jet<T>] {
        &self.components
    }

    pub fn map<U: Coefficient>(&self, f: impl Fn(&Jet<T>) -> Jet<U>) -> JetForm<U> {
        JetForm { components: self.components.iter().map(f).collect() }
    }

    pub fn scale_by(&self, g: &Jet<T>) -> Self {
        self.map(|c| c * g)
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|c| c.scale(s))
    }

    pub fn truncate(&self, order: u32) -> Self {
        self.map(|c| c.truncate(order))
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Jet::is_zero)
    }

    pub fn max_abs(&self) -> f64 {
        self.components.iter().map(Jet::max_abs).fold(0.0, f64::max)
    }

    /// Coefficients of the form at the origin.
    pub fn at_origin(&self) -> Vec<T> {
        self.components.iter().map(Jet::constant_term).collect()
    }

    /// Exterior derivative `dα`.
    pub fn exterior_derivative(&self) -> TwoForm<T> {
        let n = self.num_vars();
        let order = self.order().saturating_sub(1);
        let mut out = TwoForm::zero(n, order);
        for j in 0..n {
            for i in (j + 1)..n {
                let c = &self.components[i].partial(j) - &self.components[j].partial(i);
                out.set(j, i, c);
            }
        }
        out
    }

    pub fn wedge(&self, other: &Self) -> TwoForm<T> {
        let n = self.num_vars();
        assert_eq!(n, other.num_vars(), "form arity mismatch");
        let order = self.order().min(other.order());
        let mut out = TwoForm::zero(n, order);
        for j in 0..n {
            for i in (j + 1)..n {
                let c = &(&self.components[j] * &other.components[i]) - &(&self.components[i] * &other.components[j]);
                out.set(j, i, c);
            }
        }
        out
    }
}

impl JetForm<Complex64> {
    pub fn conj(&self) -> Self {
        self.map(Jet::conj)
    }

    pub fn re(&self) -> JetForm<f64> {
        self.map(Jet::re)
    }

    pub fn im(&self) -> JetForm<f64> {
        self.map(Jet::im)
    }
}

impl JetForm<f64> {
    pub fn to_complex(&self) -> JetForm<Complex64> {
        self.map(Jet::to_complex)
    }
}

impl<T: Coefficient> Add for &JetForm<T> {
    type Output = JetForm<T>;
    fn add(self, rhs: &JetForm<T>) -> JetForm<T> {
        assert_eq!(self.num_vars(), rhs.num_vars(), "form arity mismatch");
        JetForm { components: self.components.iter().zip(&rhs.components).map(|(a, b)| a + b).collect() }
    }
}

impl<T: Coefficient> Sub for &JetForm<T> {
    type Output = JetForm<T>;
    fn sub(self, rhs: &JetForm<T>) -> JetForm<T> {
        assert_eq!(self.num_vars(), rhs.num_vars(), "form arity mismatch");
        JetForm { components: self.components.iter().zip(&rhs.components).map(|(a, b)| a - b).collect() }
    }
}

impl<T: Coefficient> Neg for &JetForm<T> {
    type Output = JetForm<T>;
    fn neg(self) -> JetForm<T> {
        self.map(|c| -c)
    }
}

/// A two-form stored by its coefficients on `dx_j ∧ dx_i` for `j < i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoForm<T> {
    num_vars: usize,
    coeffs: Vec<Jet<T>>,
}

impl<T: Coefficient> TwoForm<T> {
    pub fn zero(num_vars: usize, order: u32) -> Self {
        let pairs = num_vars * num_vars.saturating_sub(1) / 2;
        TwoForm { num_vars, coeffs: vec![Jet::zero(num_vars, order); pairs] }
    }

    fn slot(&self, j: usize, i: usize) -> usize {
        debug_assert!(j < i && i < self.num_vars);
        j * (2 * self.num_vars - j - 1) / 2 + (i - j - 1)
    }

    fn set(&mut self, j: usize, i: usize, c: Jet<T>) {
        let s = self.slot(j, i);
        self.coeffs[s] = c;
    }

    /// Coefficient on `dx_j ∧ dx_i`, antisymmetric in the indices.
    pub fn get(&self, j: usize, i: usize) -> Jet<T> {
        match j.cmp(&i) {
            std::cmp::Ordering::Less => self.coeffs[self.slot(j, i)].clone(),
            std::cmp::Ordering::Greater => -&self.coeffs[self.slot(i, j)],
            std::cmp::Ordering::Equal => Jet::zero(self.num_vars, self.order()),
        }
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn order(&self) -> u32 {
        self.coeffs.iter().map(Jet::order).min().unwrap_or(0)
    }

    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(Jet::max_abs).fold(0.0, f64::max)
    }

    pub fn truncate(&self, order: u32) -> Self {
        TwoForm { num_vars: self.num_vars, coeffs: self.coeffs.iter().map(|c| c.truncate(order)).collect() }
    }

    pub fn scale_by(&self, g: &Jet<T>) -> Self {
        TwoForm { num_vars: self.num_vars, coeffs: self.coeffs.iter().map(|c| c * g).collect() }
    }
}

impl<T: Coefficient> Add for &TwoForm<T> {
    type Output = TwoForm<T>;
    fn add(self, rhs: &TwoForm<T>) -> TwoForm<T> {
        assert_eq!(self.num_vars, rhs.num_vars, "form arity mismatch");
        TwoForm { num_vars: self.num_vars, coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a + b).collect() }
    }
}

impl<T: Coefficient> Sub for &TwoForm<T> {
    type Output = TwoForm<T>;
    fn sub(self, rhs: &TwoForm<T>) -> TwoForm<T> {
        assert_eq!(self.num_vars, rhs.num_vars, "form arity mismatch");
        TwoForm { num_vars: self.num_vars, coeffs: self.coeffs.iter().zip(&rhs.coeffs).map(|(a, b)| a - b).collect() }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn d_of_d_vanishes() {
        let x = Jet::<f64>::var(3, 5, 0);
        let y = Jet::<f64>::var(3, 5, 1);
        let z = Jet::<f64>::var(3, 5, 2);
        let f = &(&(&x * &y) * &z) + &(&(&x * &x) * &(&y * &y));
        let ddf = JetForm::differential(&f).exterior_derivative();
        assert_eq!(ddf.max_abs(), 0.0);
    }

    #[test]
    fn wedge_is_antisymmetric() {
        let x = Jet::<f64>::var(2, 3, 0);
        let y = Jet::<f64>::var(2, 3, 1);
        let a = JetForm::from_components(vec![x.clone(), &y * &y]);
        let b = JetForm::from_components(vec![Jet::one(2, 3), &x * &y]);
        let ab = a.wedge(&b);
        let ba = b.wedge(&a);
        assert_eq!((&ab + &ba).max_abs(), 0.0);
        assert!(a.wedge(&a).max_abs() == 0.0);
        // x dx ∧ ... picks up x·xy − y²·1 on dx∧dy
        let expected = &(&x * &(&x * &y)) - &(&y * &y);
        assert_eq!(ab.get(0, 1), expected);
        assert_eq!(ab.get(1, 0), -&expected);
    }

    #[test]
    fn exterior_derivative_of_x_dy() {
        let x = Jet::<f64>::var(2, 3, 0);
        let form = JetForm::from_components(vec![Jet::zero(2, 3), x]);
        let d = form.exterior_derivative();
        assert_eq!(d.get(0, 1), Jet::one(2, 2));
    }
}
