//! Projective differential invariants of CR-hypersurface germs.

pub mod adaptation;
pub mod convexity;
pub mod corpus;
pub mod duality;
pub mod error;
pub mod frames;
pub mod invariants;
pub mod jets;
pub mod pipeline;
pub mod report;
pub mod scalar;
pub mod surface_io;

pub use error::{Error, ErrorKind, Result};
pub use jets::{Exponent, Jet, JetError, JetForm, JetMatrix, TwoForm};
pub use scalar::{Coefficient, RealEmbedding};

pub use num_complex::Complex64;

/// Real jets, the working type for germs and the real Maurer–Cartan form.
pub type RealJet = Jet<f64>;
/// Complex jets, used for the complex Maurer–Cartan form and fibre motions.
pub type ComplexJet = Jet<Complex64>;
/// Exact rational jets.
pub type ExactJet = Jet<num_rational::Rational64>;
pub type RealForm = JetForm<f64>;
pub type ComplexForm = JetForm<Complex64>;
pub type RealJetMatrix = JetMatrix<f64>;
pub type ComplexJetMatrix = JetMatrix<Complex64>;
