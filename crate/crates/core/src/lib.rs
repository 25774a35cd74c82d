//! Exact success probabilities for one iteration of Shor's factoring
//! algorithm, computed from the prime factorization of `N`.
//!
//! * [`numtheory`]: gcd, modular powers, primality, factorization, totient,
//!   Carmichael lambda, multiplicative order.
//! * [`closedform`]: per-step and overall probabilities as exact rationals,
//!   plus the classification of `N` that can never be factored.
//! * [`oracle`]: an exhaustive census of all residues mod `N`, used as
//!   ground truth for the closed forms.
//! * [`simulator`]: classical runs of the algorithm with an exact order
//!   oracle, and seeded Monte-Carlo estimates.
//! * [`cli`]: JSON/CSV documents and the commands behind the `shorprob`
//!   binary.
//!
//! ```
//! use num_bigint::BigUint;
//! use shorprob::closedform::overall_probability;
//! use shorprob::numtheory::factorize;
//!
//! let f = factorize(&BigUint::from(21u32)).unwrap();
//! assert_eq!(overall_probability(&f).p_overall.to_string(), "2/7");
//! ```
//!
//! The guide in `book/` walks through the derivations; its code blocks are
//! compiled and run as doctests of this crate.

pub mod cli;
pub mod closedform;
mod error;
pub mod numtheory;
pub mod oracle;
pub mod rational;
pub mod simulator;

pub use closedform::{FailureClass, StepProbabilities};
pub use error::{Error, Result};
pub use numtheory::Factorization;
pub use oracle::OracleCensus;
pub use rational::Rational;

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/factorizations.md")]
    mod factorizations {}
    #[doc = include_str!("../../../book/src/step-probabilities.md")]
    mod step_probabilities {}
    #[doc = include_str!("../../../book/src/failure-cases.md")]
    mod failure_cases {}
    #[doc = include_str!("../../../book/src/oracle.md")]
    mod oracle {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
