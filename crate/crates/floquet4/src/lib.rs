//! Floquet spectral analysis for the periodic fourth-order operator `d⁴/dt⁴ + V(t)` on the line,
//! with a 1-periodic, mean-zero potential `V`.
//!
//! The central object is the monodromy matrix `M(λ)` of `y⁗ + V y = λ y`. Its traces give the two
//! branches `Δ₁, Δ₂` of the Lyapunov function, whose behaviour on the real line decides the band
//! structure, and whose branch points (zeros of `ρ`) are the resonances.

mod dd;
pub mod error;
pub mod quadrature;
pub mod potential;
pub mod quartic_basis;
pub mod monodromy;
pub mod traces;
pub mod delta_comb;
pub mod spectrum;
pub mod asymptotics;
pub mod small_gamma;
mod solve;

pub use error::{Error, Result};
pub use monodromy::{monodromy, Backend, MonodromyMatrix};
pub use potential::{PeriodicPotential, PotentialSpec, SampledPotential, TrigPotential};
pub use quartic_basis::{principal_quartic_root, QuarticRoot};

/// The guide under `book/`, compiled here so its snippets run as doctests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/potentials.md")]
    mod potentials {}
    #[doc = include_str!("../../../book/src/monodromy.md")]
    mod monodromy {}
    #[doc = include_str!("../../../book/src/traces.md")]
    mod traces {}
    #[doc = include_str!("../../../book/src/spectrum.md")]
    mod spectrum {}
    #[doc = include_str!("../../../book/src/asymptotics.md")]
    mod asymptotics {}
    #[doc = include_str!("../../../book/src/small-coupling.md")]
    mod small_coupling {}
    #[doc = include_str!("../../../book/src/delta-comb.md")]
    mod delta_comb {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
