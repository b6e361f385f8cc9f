//! Finite quantaloids of closed cribles.
//!
//! Build the quantaloid R(C) of cribles on a finite category, quotient it by
//! the nucleus of a Grothendieck topology, decide the axioms that
//! characterise such quantaloids, and reconstruct a site from a quantaloid
//! that satisfies them. Every checker returns a verdict with a concrete
//! witness on failure; see [`report`].

pub mod characterisation;
pub mod cli;
pub mod crible;
mod downsets;
pub mod error;
pub mod fincat;
pub mod fixtures;
pub mod lattice;
pub mod matr;
pub mod nucleus;
pub mod quantaloid;
pub mod report;

pub use error::{Error, Result};

/// Caps on the enumerations the toolkit performs. Exceeding one is a
/// [`Error::ResourceBound`], never a silent truncation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bounds {
    /// Candidate covering families tried by topology enumeration.
    pub topology_candidates: u64,
    /// Elements of a single hom of R(C).
    pub hom_elements: usize,
    /// Natural families visited on one covering sieve.
    pub families: u64,
    /// Matrix triples visited by the exhaustive Matr(Q) check.
    pub matr_triples: u64,
}

impl Default for Bounds {
    fn default() -> Self {
        Bounds {
            topology_candidates: fincat::DEFAULT_TOPOLOGY_CANDIDATES,
            hom_elements: 1 << 13,
            families: 1 << 20,
            matr_triples: 1 << 24,
        }
    }
}

impl Bounds {
    /// Every cap set to `n`.
    pub fn with_global(n: u64) -> Self {
        Bounds {
            topology_candidates: n,
            hom_elements: usize::try_from(n).unwrap_or(usize::MAX),
            families: n,
            matr_triples: n,
        }
    }
}
