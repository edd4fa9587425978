//! Reduction of free chain complexes via acyclic matchings.
//!
//! A free chain complex with a chosen basis is viewed as a weighted
//! ranked poset. An acyclic partial matching on that poset selects
//! pairs of cells that can be cancelled against each other; the
//! surviving critical cells span a smaller complex with the same
//! homology. This crate computes that smaller complex two independent
//! ways — summing weights over alternating paths, and eliminating the
//! matched pairs one basis change at a time — certifies that the
//! original complex splits as the small complex plus a stack of
//! two-cell acyclic summands, and cross-checks homology with a Smith
//! normal form oracle.

pub mod cli;
pub mod complex;
pub mod homology;
pub mod matching;
pub mod morse;
pub mod ring;
pub mod simplicial;

pub use complex::{BasedComplex, BasisElement, Chain, ComplexError, CoveringRelation};
pub use homology::{
    euler_characteristic, homology, smith_normal_form, HomologyError, HomologyGroup,
    IntegerMatrix,
};
pub use matching::{
    greedy_matching, is_acyclic, linear_extension, validate_matching, CellClass, Classification,
    LinearExtension, Matching, MatchingError,
};
pub use morse::{
    enumerate_paths, morse_boundary, morse_boundary_with_budget, normalize_basis, path_weight,
    reduce_by_elimination, verify_decomposition, AlternatingPath, AtomSummand, Decomposition,
    MorseComplex, MorseError, PathTargets, DEFAULT_PATH_BUDGET,
};
pub use ring::{RingElement, RingError, RingSpec};
pub use simplicial::SimplicialInput;
