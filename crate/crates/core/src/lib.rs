//! Exact ensemble averages of uncertainty products for pairs of bounded
//! observables, over Haar-random pure states, isospectral density matrices
//! and the Hilbert–Schmidt ensemble.
//!
//! The exact side is built on Schur–Weyl duality for `k ≤ 4` tensor powers:
//! central projectors of the symmetric group, the unitary Weingarten
//! function, and the resulting twirls `E_k(Λ) = ∫ (UΛU†)^⊗k dU`. Every
//! ensemble average is reduced to eight symmetric trace functionals
//! `Ω_1..Ω_8` of the observable pair ([`functionals::OmegaVector`]) and a
//! coefficient vector ([`closedforms::CoefficientVector`]).
//!
//! The sampling side ([`sampling`], [`montecarlo`]) draws from the same
//! ensembles with seeded, stream-partitioned generators so every closed form
//! can be checked against a Monte-Carlo estimate.
//!
//! Commutator conventions follow the halved forms used throughout:
//! `{A,B} = (AB+BA)/2` and `[A,B] = (AB−BA)/(2i)`. With these, the
//! Robertson–Schrödinger relation reads
//! `ΔA²·ΔB² ≥ (⟨{A,B}⟩ − ⟨A⟩⟨B⟩)² + ⟨[A,B]⟩²`. The more common convention
//! `[A,B] = AB − BA` gives `⟨[A,B]⟩²/4` for the last term (up to a sign from
//! the factor `i`).

pub mod cli;
pub mod closedforms;
pub mod error;
pub mod exact;
pub mod functionals;
pub mod montecarlo;
pub mod sampling;
pub mod selftest;
pub mod symgroup;
pub mod twirl;

pub use error::{Error, Result};

use nalgebra::DMatrix;
use num_complex::Complex64;

/// Dense complex matrix used for observables, states and tensor-power operators.
pub type CMatrix = DMatrix<Complex64>;

/// Crate version, embedded into every report.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
