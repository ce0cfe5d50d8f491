//! Truncated multivariate power series.
//!
//! A [`Jet`] is a Taylor polynomial in `num_vars` variables whose terms of
//! total degree above `order` have been discarded. Binary operations truncate
//! to the smaller of the two orders, so precision is never silently extended.

mod form;
mod matrix;

pub use form::{JetForm, TwoForm};
pub use matrix::JetMatrix;

use std::collections::{BTreeMap, HashMap};
use std::ops::{Add, Mul, Neg, Sub};

use thiserror::Error;

use crate::scalar::Coefficient;

/// Maximum number of variables a jet can carry.
pub const MAX_VARS: usize = 12;
/// Maximum truncation order.
pub const MAX_ORDER: u32 = 31;

const BITS: u32 = 5;
const FIELD: u64 = (1 << BITS) - 1;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum JetError {
    #[error("jets have {left} and {right} variables")]
    MismatchedVars { left: usize, right: usize },
    #[error("constant term is zero; jet is not invertible")]
    ZeroConstantTerm,
    #[error("substitution {0} has a nonzero constant term")]
    NonzeroConstantSubstitution(usize),
    #[error("expected {expected} substitutions, got {got}")]
    SubstitutionCount { expected: usize, got: usize },
    #[error("{0} variables exceeds the supported maximum of {MAX_VARS}")]
    TooManyVars(usize),
    #[error("order {0} exceeds the supported maximum of {MAX_ORDER}")]
    OrderTooLarge(u32),
    #[error("exponent vector has length {got}, expected {expected}")]
    ExponentLength { expected: usize, got: usize },
    #[error("monomial of degree {degree} exceeds truncation order {order}")]
    DegreeExceedsOrder { degree: u32, order: u32 },
    #[error("variable index {index} out of range for {num_vars} variables")]
    VarOutOfRange { index: usize, num_vars: usize },
    #[error("matrix is singular at the origin")]
    SingularMatrix,
    #[error("matrix dimensions {0}")]
    Shape(String),
}

/// Exponent multi-index packed five bits per variable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Exponent(u64);

impl Exponent {
    pub const ZERO: Exponent = Exponent(0);

    pub fn unit(var: usize) -> Self {
        Exponent(1 << (BITS as usize * var))
    }

    pub fn from_slice(exps: &[u32]) -> Result<Self, JetError> {
        if exps.len() > MAX_VARS {
            return Err(JetError::TooManyVars(exps.len()));
        }
        let mut packed = 0u64;
        for (i, &k) in exps.iter().enumerate() {
            if k > MAX_ORDER {
                return Err(JetError::OrderTooLarge(k));
            }
            packed |= (k as u64) << (BITS as usize * i);
        }
        Ok(Exponent(packed))
    }

    #[inline]
    pub fn get(self, var: usize) -> u32 {
        ((self.0 >> (BITS as usize * var)) & FIELD) as u32
    }

    #[inline]
    pub fn degree(self) -> u32 {
        let mut rest = self.0;
        let mut d = 0;
        while rest != 0 {
            d += (rest & FIELD) as u32;
            rest >>= BITS;
        }
        d
    }

    pub fn to_vec(self, num_vars: usize) -> Vec<u32> {
        (0..num_vars).map(|i| self.get(i)).collect()
    }

    /// Sum of exponents. The caller guarantees the total degree stays within
    /// `MAX_ORDER`, which keeps every field from overflowing.
    #[inline]
    fn plus(self, other: Exponent) -> Exponent {
        Exponent(self.0 + other.0)
    }

    #[inline]
    fn minus_unit(self, var: usize) -> Exponent {
        Exponent(self.0 - (1 << (BITS as usize * var)))
    }

    /// Highest variable index with a nonzero exponent, plus one.
    fn span(self) -> usize {
        let mut rest = self.0;
        let mut n = 0;
        while rest != 0 {
            rest >>= BITS;
            n += 1;
        }
        n
    }
}

/// A truncated power series in `num_vars` variables.
#[derive(Debug, Clone, PartialEq)]
pub struct Jet<T> {
    num_vars: usize,
    order: u32,
    terms: BTreeMap<Exponent, T>,
}

impl<T: Coefficient> Jet<T> {
    pub fn zero(num_vars: usize, order: u32) -> Self {
        assert!(num_vars <= MAX_VARS, "too many jet variables");
        assert!(order <= MAX_ORDER, "jet order too large");
        Jet { num_vars, order, terms: BTreeMap::new() }
    }

    pub fn constant(num_vars: usize, order: u32, c: T) -> Self {
        let mut j = Self::zero(num_vars, order);
        j.insert(Exponent::ZERO, c);
        j
    }

    pub fn one(num_vars: usize, order: u32) -> Self {
        Self::constant(num_vars, order, T::one())
    }

    /// The coordinate function `x_var`.
    pub fn var(num_vars: usize, order: u32, var: usize) -> Self {
        assert!(var < num_vars, "variable index out of range");
        let mut j = Self::zero(num_vars, order);
        j.insert(Exponent::unit(var), T::one());
        j
    }

    /// Builds a jet from explicit exponent vectors, validating every term.
    pub fn from_terms<I>(num_vars: usize, order: u32, terms: I) -> Result<Self, JetError>
    where
        I: IntoIterator<Item = (Vec<u32>, T)>,
    {
        if num_vars > MAX_VARS {
            return Err(JetError::TooManyVars(num_vars));
        }
        if order > MAX_ORDER {
            return Err(JetError::OrderTooLarge(order));
        }
        let mut j = Self::zero(num_vars, order);
        for (exp, c) in terms {
            if exp.len() != num_vars {
                return Err(JetError::ExponentLength { expected: num_vars, got: exp.len() });
            }
            let degree: u32 = exp.iter().sum();
            if degree > order {
                return Err(JetError::DegreeExceedsOrder { degree, order });
            }
            let e = Exponent::from_slice(&exp)?;
            let merged = j.coeff(e) + c;
            j.insert(e, merged);
        }
        Ok(j)
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn order(&self) -> u32 {
        self.order
    }

    pub fn terms(&self) -> impl Iterator<Item = (Exponent, &T)> {
        self.terms.iter().map(|(e, c)| (*e, c))
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Sets a coefficient. Terms above the truncation order are dropped and
    /// exact zeros are not stored.
    pub fn insert(&mut self, e: Exponent, c: T) {
        if e.degree() > self.order {
            return;
        }
        debug_assert!(e.span() <= self.num_vars);
        if c.is_zero() {
            self.terms.remove(&e);
        } else {
            self.terms.insert(e, c);
        }
    }

    pub fn coeff(&self, e: Exponent) -> T {
        self.terms.get(&e).cloned().unwrap_or_else(T::zero)
    }

    pub fn constant_term(&self) -> T {
        self.coeff(Exponent::ZERO)
    }

    /// Coefficient lookup by explicit exponent vector.
    pub fn coeff_of(&self, exps: &[u32]) -> T {
        match Exponent::from_slice(exps) {
            Ok(e) => self.coeff(e),
            Err(_) => T::zero(),
        }
    }

    /// Lowers the truncation order (never raises it).
    pub fn truncate(&self, order: u32) -> Self {
        let order = order.min(self.order);
        Jet {
            num_vars: self.num_vars,
            order,
            terms: self.terms.iter().filter(|(e, _)| e.degree() <= order).map(|(e, c)| (*e, c.clone())).collect(),
        }
    }

    /// Reinterprets the jet with more variables appended after the existing ones.
    pub fn extend_vars(&self, num_vars: usize) -> Self {
        assert!(num_vars >= self.num_vars && num_vars <= MAX_VARS);
        Jet { num_vars, order: self.order, terms: self.terms.clone() }
    }

    pub fn map<U: Coefficient>(&self, f: impl Fn(&T) -> U) -> Jet<U> {
        let mut out = Jet::zero(self.num_vars, self.order);
        for (e, c) in &self.terms {
            out.insert(*e, f(c));
        }
        out
    }

    pub fn scale(&self, s: &T) -> Self {
        self.map(|c| c.clone() * s.clone())
    }

    fn check_vars(&self, other: &Self) -> Result<(), JetError> {
        if self.num_vars != other.num_vars {
            Err(JetError::MismatchedVars { left: self.num_vars, right: other.num_vars })
        } else {
            Ok(())
        }
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self, JetError> {
        self.check_vars(other)?;
        Ok(self.combine(other, |a, b| a + b))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self, JetError> {
        self.check_vars(other)?;
        Ok(self.combine(other, |a, b| a - b))
    }

    fn combine(&self, other: &Self, op: impl Fn(T, T) -> T) -> Self {
        let order = self.order.min(other.order);
        let mut out = self.truncate(order);
        for (e, c) in &other.terms {
            if e.degree() > order {
                continue;
            }
            let v = op(out.coeff(*e), c.clone());
            out.insert(*e, v);
        }
        out
    }

    /// Cauchy product truncated at the smaller order.
    pub fn checked_mul(&self, other: &Self) -> Result<Self, JetError> {
        self.check_vars(other)?;
        let order = self.order.min(other.order);
        let mut out = Jet::zero(self.num_vars, order);
        if self.is_zero() || other.is_zero() {
            return Ok(out);
        }
        let mut rhs: Vec<(Exponent, u32, &T)> = other.terms.iter().map(|(e, c)| (*e, e.degree(), c)).collect();
        rhs.sort_by_key(|t| t.1);
        let mut acc: HashMap<Exponent, T> = HashMap::with_capacity(self.len() * 2);
        for (ea, ca) in &self.terms {
            let da = ea.degree();
            if da > order {
                continue;
            }
            for (eb, db, cb) in &rhs {
                if da + db > order {
                    break;
                }
                let prod = ca.clone() * (*cb).clone();
                acc.entry(ea.plus(*eb)).and_modify(|v| *v = v.clone() + prod.clone()).or_insert(prod);
            }
        }
        for (e, c) in acc {
            out.insert(e, c);
        }
        Ok(out)
    }

    /// Multiplicative inverse, defined when the constant term is nonzero.
    pub fn reciprocal(&self) -> Result<Self, JetError> {
        let a0 = self.constant_term();
        if a0.is_zero() {
            return Err(JetError::ZeroConstantTerm);
        }
        let inv0 = T::one() / a0.clone();
        let mut step = self.clone();
        step.insert(Exponent::ZERO, T::zero());
        let step = step.scale(&(-inv0.clone()));
        let mut sum = Jet::one(self.num_vars, self.order);
        let mut power = Jet::one(self.num_vars, self.order);
        for _ in 0..self.order {
            power = &power * &step;
            if power.is_zero() {
                break;
            }
            sum = &sum + &power;
        }
        Ok(sum.scale(&inv0))
    }

    pub fn checked_div(&self, other: &Self) -> Result<Self, JetError> {
        self.check_vars(other)?;
        Ok(self * &other.reciprocal()?)
    }

    /// Formal partial derivative; the order drops by one.
    pub fn partial(&self, var: usize) -> Self {
        assert!(var < self.num_vars, "variable index out of range");
        let mut out = Jet::zero(self.num_vars, self.order.saturating_sub(1));
        if self.order == 0 {
            return out;
        }
        for (e, c) in &self.terms {
            let k = e.get(var);
            if k > 0 {
                out.insert(e.minus_unit(var), c.clone() * T::from_int(k as i64));
            }
        }
        out
    }

    /// Formal composition `self(subs[0], ..., subs[n-1])`.
    pub fn compose(&self, subs: &[Jet<T>]) -> Result<Self, JetError> {
        if subs.len() != self.num_vars {
            return Err(JetError::SubstitutionCount { expected: self.num_vars, got: subs.len() });
        }
        let target_vars = subs.first().map(|s| s.num_vars).unwrap_or(0);
        let mut order = self.order;
        for (i, s) in subs.iter().enumerate() {
            if s.num_vars != target_vars {
                return Err(JetError::MismatchedVars { left: target_vars, right: s.num_vars });
            }
            if !s.constant_term().is_zero() {
                return Err(JetError::NonzeroConstantSubstitution(i));
            }
            order = order.min(s.order);
        }
        let subs: Vec<Jet<T>> = subs.iter().map(|s| s.truncate(order)).collect();
        let mut powers: Vec<Vec<Jet<T>>> = subs.iter().map(|_| vec![Jet::one(target_vars, order)]).collect();
        let mut out = Jet::zero(target_vars, order);
        for (e, c) in &self.terms {
            if e.degree() > order {
                continue;
            }
            let mut term = Jet::constant(target_vars, order, c.clone());
            for (i, sub) in subs.iter().enumerate() {
                let k = e.get(i) as usize;
                if k == 0 {
                    continue;
                }
                while powers[i].len() <= k {
                    let next = powers[i].last().expect("nonempty") * sub;
                    powers[i].push(next);
                }
                term = &term * &powers[i][k];
            }
            out = &out + &term;
        }
        Ok(out)
    }

    /// Evaluates the polynomial at a point.
    pub fn eval(&self, point: &[T]) -> T {
        assert_eq!(point.len(), self.num_vars, "point dimension mismatch");
        let mut total = T::zero();
        for (e, c) in &self.terms {
            let mut v = c.clone();
            for (i, x) in point.iter().enumerate() {
                for _ in 0..e.get(i) {
                    v = v * x.clone();
                }
            }
            total = total + v;
        }
        total
    }

    pub fn max_abs(&self) -> f64 {
        self.terms.values().map(|c| c.magnitude()).fold(0.0, f64::max)
    }

    /// Largest coefficient difference over the common truncation order.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self - other).max_abs()
    }

    /// Derivative `∂^k` at the origin: coefficient times the multi-factorial.
    pub fn derivative_at_origin(&self, exps: &[u32]) -> T {
        let factor: i64 = exps.iter().map(|&k| (1..=k as i64).product::<i64>()).product();
        self.coeff_of(exps) * T::from_int(factor)
    }
}

impl<T: Coefficient> Add for &Jet<T> {
    type Output = Jet<T>;
    fn add(self, rhs: &Jet<T>) -> Jet<T> {
        self.checked_add(rhs).expect("jet addition")
    }
}

impl<T: Coefficient> Sub for &Jet<T> {
    type Output = Jet<T>;
    fn sub(self, rhs: &Jet<T>) -> Jet<T> {
        self.checked_sub(rhs).expect("jet subtraction")
    }
}

impl<T: Coefficient> Mul for &Jet<T> {
    type Output = Jet<T>;
    fn mul(self, rhs: &Jet<T>) -> Jet<T> {
        self.checked_mul(rhs).expect("jet multiplication")
    }
}

impl<T: Coefficient> Neg for &Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        self.map(|c| -c.clone())
    }
}

impl<T: Coefficient> Add for Jet<T> {
    type Output = Jet<T>;
    fn add(self, rhs: Jet<T>) -> Jet<T> {
        &self + &rhs
    }
}

impl<T: Coefficient> Sub for Jet<T> {
    type Output = Jet<T>;
    fn sub(self, rhs: Jet<T>) -> Jet<T> {
        &self - &rhs
    }
}

impl<T: Coefficient> Mul for Jet<T> {
    type Output = Jet<T>;
    fn mul(self, rhs: Jet<T>) -> Jet<T> {
        &self * &rhs
    }
}

impl<T: Coefficient> Neg for Jet<T> {
    type Output = Jet<T>;
    fn neg(self) -> Jet<T> {
        -&self
    }
}

impl Jet<f64> {
    pub fn to_complex(&self) -> Jet<num_complex::Complex64> {
        self.map(|c| num_complex::Complex64::new(*c, 0.0))
    }
}

impl Jet<num_complex::Complex64> {
    pub fn re(&self) -> Jet<f64> {
        self.map(|c| c.re)
    }

    pub fn im(&self) -> Jet<f64> {
        self.map(|c| c.im)
    }

    pub fn conj(&self) -> Self {
        self.map(|c| c.conj())
    }

    pub fn from_parts(re: &Jet<f64>, im: &Jet<f64>) -> Self {
        let i = num_complex::Complex64::i();
        &re.to_complex() + &im.to_complex().scale(&i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn x(n: usize, o: u32, i: usize) -> Jet<f64> {
        Jet::var(n, o, i)
    }

    #[test]
    fn exponent_packing() {
        let e = Exponent::from_slice(&[1, 0, 3, 2]).unwrap();
        assert_eq!(e.to_vec(4), vec![1, 0, 3, 2]);
        assert_eq!(e.degree(), 6);
        assert_eq!(e.plus(Exponent::unit(1)).to_vec(4), vec![1, 1, 3, 2]);
    }

    #[test]
    fn add_cancellation_and_identity() {
        let one = Jet::<f64>::one(1, 3);
        let a = &one + &x(1, 3, 0);
        let b = &one - &x(1, 3, 0);
        assert_eq!(&a + &b, Jet::constant(1, 3, 2.0));
        assert_eq!(&a + &Jet::zero(1, 3), a);
        let sq = &(&x(2, 2, 0) * &x(2, 2, 0)) + &(&x(2, 2, 1) * &x(2, 2, 1));
        assert_eq!(sq.len(), 2);
        assert_eq!(sq.coeff_of(&[2, 0]), 1.0);
        assert_eq!(sq.coeff_of(&[0, 2]), 1.0);
    }

    #[test]
    fn mul_examples() {
        let one = Jet::<f64>::one(1, 2);
        let p = &(&one + &x(1, 2, 0)) * &(&one - &x(1, 2, 0));
        assert_eq!(p.coeff_of(&[0]), 1.0);
        assert_eq!(p.coeff_of(&[1]), 0.0);
        assert_eq!(p.coeff_of(&[2]), -1.0);
        let t = &x(2, 1, 0) * &x(2, 1, 1);
        assert!(t.is_zero());
    }

    #[test]
    fn mismatched_vars_is_an_error() {
        let a = Jet::<f64>::one(2, 2);
        let b = Jet::<f64>::one(3, 2);
        assert!(matches!(a.checked_add(&b), Err(JetError::MismatchedVars { .. })));
        assert!(matches!(a.checked_mul(&b), Err(JetError::MismatchedVars { .. })));
    }

    #[test]
    fn order_is_minimum_of_operands() {
        let a = Jet::<f64>::one(1, 5);
        let b = Jet::<f64>::one(1, 3);
        assert_eq!((&a * &b).order(), 3);
        assert_eq!((&a + &b).order(), 3);
    }

    #[test]
    fn reciprocal_geometric_series() {
        let a = &Jet::<f64>::one(1, 3) + &x(1, 3, 0);
        let r = a.reciprocal().unwrap();
        assert_eq!(r.coeff_of(&[0]), 1.0);
        assert_eq!(r.coeff_of(&[1]), -1.0);
        assert_eq!(r.coeff_of(&[2]), 1.0);
        assert_eq!(r.coeff_of(&[3]), -1.0);
        let half = Jet::<f64>::constant(2, 4, 2.0).reciprocal().unwrap();
        assert_eq!(half, Jet::constant(2, 4, 0.5));
        assert_eq!(x(1, 3, 0).reciprocal(), Err(JetError::ZeroConstantTerm));
    }

    #[test]
    fn partial_examples() {
        let x2y = &(&x(2, 3, 0) * &x(2, 3, 0)) * &x(2, 3, 1);
        let d = x2y.partial(0);
        assert_eq!(d.order(), 2);
        assert_eq!(d.coeff_of(&[1, 1]), 2.0);
        assert_eq!(d.len(), 1);
        assert!((&x(2, 3, 0) * &x(2, 3, 0)).partial(1).is_zero());
    }

    #[test]
    fn compose_examples() {
        let xsq = &x(1, 3, 0) * &x(1, 3, 0);
        let s = &x(2, 3, 0) + &x(2, 3, 1);
        let c = xsq.compose(&[s.clone()]).unwrap();
        assert_eq!(c, &s * &s);
        let a = &(&x(2, 3, 0) * &x(2, 3, 1)) + &Jet::constant(2, 3, 3.0);
        assert_eq!(a.compose(&[x(2, 3, 0), x(2, 3, 1)]).unwrap(), a);
        let bad = &x(1, 3, 0) + &Jet::one(1, 3);
        assert_eq!(xsq.compose(&[bad]), Err(JetError::NonzeroConstantSubstitution(0)));
    }

    #[test]
    fn exact_ring_identities() {
        let n = 3;
        let o = 4;
        let r = |a: i64, b: i64| Rational64::new(a, b);
        let a =
            Jet::from_terms(n, o, vec![(vec![0, 0, 0], r(2, 3)), (vec![1, 0, 0], r(-1, 2)), (vec![0, 2, 1], r(5, 7))])
                .unwrap();
        let b =
            Jet::from_terms(n, o, vec![(vec![0, 0, 0], r(-3, 1)), (vec![0, 1, 0], r(1, 5)), (vec![1, 1, 1], r(2, 9))])
                .unwrap();
        let c = Jet::from_terms(n, o, vec![(vec![0, 0, 1], r(4, 3)), (vec![2, 0, 0], r(1, 1))]).unwrap();
        assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
        assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
        assert_eq!(&a * &a.reciprocal().unwrap(), Jet::one(n, o));
    }

    #[test]
    fn from_terms_validation() {
        assert!(matches!(Jet::<f64>::from_terms(2, 2, vec![(vec![1], 1.0)]), Err(JetError::ExponentLength { .. })));
        assert!(matches!(
            Jet::<f64>::from_terms(2, 2, vec![(vec![2, 1], 1.0)]),
            Err(JetError::DegreeExceedsOrder { .. })
        ));
    }
}
