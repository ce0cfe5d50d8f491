//! Coefficient fields for jet arithmetic.

use std::fmt::Debug;
use std::ops::Neg;

use num_complex::Complex;
use num_rational::Ratio;
use num_traits::{Num, ToPrimitive};

/// A coefficient field usable inside a [`Jet`](crate::jets::Jet).
///
/// Floating types (`f32`, `f64`, `Complex<f64>`) are the working fields;
/// `Ratio<i64>` gives exact arithmetic for checking ring identities.
pub trait Coefficient: Num + Clone + Neg<Output = Self> + Debug + Send + Sync + 'static {
    /// Embeds a small integer.
    fn from_int(k: i64) -> Self;

    /// Absolute value used by tolerance comparisons and pivoting.
    fn magnitude(&self) -> f64;
}

macro_rules! impl_float_coefficient {
    ($f:ty) => {
        impl Coefficient for $f {
            fn from_int(k: i64) -> Self {
                k as $f
            }

            fn magnitude(&self) -> f64 {
                self.abs() as f64
            }
        }

        impl Coefficient for Complex<$f> {
            fn from_int(k: i64) -> Self {
                Complex::new(k as $f, 0.0)
            }

            fn magnitude(&self) -> f64 {
                self.norm() as f64
            }
        }
    };
}

impl_float_coefficient!(f32);
impl_float_coefficient!(f64);

impl Coefficient for Ratio<i64> {
    fn from_int(k: i64) -> Self {
        Ratio::from_integer(k)
    }

    fn magnitude(&self) -> f64 {
        self.to_f64().map(f64::abs).unwrap_or(f64::INFINITY)
    }
}

/// Coefficients that embed the real numbers.
pub trait RealEmbedding: Coefficient {
    fn from_f64(x: f64) -> Self;
}

impl RealEmbedding for f64 {
    fn from_f64(x: f64) -> Self {
        x
    }
}

impl RealEmbedding for Complex<f64> {
    fn from_f64(x: f64) -> Self {
        Complex::new(x, 0.0)
    }
}
