//! Free chain complexes with a chosen basis.
//!
//! A [`BasedComplex`] stores the basis per dimension and the boundary of
//! each basis element as a sparse [`Chain`]. The weighted-poset view —
//! covering relations `b ≻ a` carrying the coefficient of `a` in `∂b` —
//! is derived from it with [`BasedComplex::poset_view`]. Complexes are
//! immutable after construction; transformations build new values.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ring::{RingElement, RingError, RingSpec};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum ComplexError {
    #[error("duplicate cell id {0:?}")]
    DuplicateId(String),
    #[error("unknown cell id {0:?}")]
    UnknownId(String),
    #[error("boundary of {of:?} (dim {of_dim}) has term {term:?} of dim {term_dim}")]
    DimensionMismatch { of: String, of_dim: usize, term: String, term_dim: usize },
    #[error("∂∂ is nonzero at {0:?}")]
    NotSquareZero(String),
    #[error(transparent)]
    Ring(#[from] RingError),
    #[error("bad complex file: {0}")]
    Format(String),
}

/// A basis element ("cell") of the complex.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BasisElement {
    pub id: String,
    pub dim: usize,
}

impl BasisElement {
    pub fn new(id: impl Into<String>, dim: usize) -> Self {
        BasisElement { id: id.into(), dim }
    }
}

impl fmt::Display for BasisElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.id)
    }
}

/// A covering relation `upper ≻ lower` of the weighted poset, carrying
/// its nonzero weight `𝔎(∂ upper, lower)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoveringRelation {
    pub upper: BasisElement,
    pub lower: BasisElement,
    pub weight: RingElement,
}

/// A formal linear combination of basis elements of one dimension.
/// Zero coefficients are never stored; the empty map is the zero chain.
/// The dimension may be -1: that is the (necessarily zero) boundary of
/// a vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Chain {
    dim: i64,
    terms: BTreeMap<String, RingElement>,
}

impl Chain {
    pub fn zero(dim: i64) -> Self {
        Chain { dim, terms: BTreeMap::new() }
    }

    /// Builds a chain from term pairs, dropping zero coefficients and
    /// summing repeats.
    pub fn from_terms(
        dim: i64,
        terms: impl IntoIterator<Item = (String, RingElement)>,
    ) -> Result<Self, RingError> {
        let mut chain = Chain::zero(dim);
        for (id, coeff) in terms {
            chain.insert_add(id, &coeff)?;
        }
        Ok(chain)
    }

    pub fn dim(&self) -> i64 {
        self.dim
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Term iteration in lexicographic id order.
    pub fn terms(&self) -> impl Iterator<Item = (&str, &RingElement)> {
        self.terms.iter().map(|(id, c)| (id.as_str(), c))
    }

    pub fn get(&self, id: &str) -> Option<&RingElement> {
        self.terms.get(id)
    }

    /// Adds `coeff · id`, removing the term if it cancels to zero.
    pub fn insert_add(&mut self, id: String, coeff: &RingElement) -> Result<(), RingError> {
        if coeff.is_zero() {
            return Ok(());
        }
        match self.terms.remove(&id) {
            None => {
                self.terms.insert(id, coeff.clone());
            }
            Some(existing) => {
                let sum = existing.add(coeff)?;
                if !sum.is_zero() {
                    self.terms.insert(id, sum);
                }
            }
        }
        Ok(())
    }

    /// `self += scale · other`. Both chains must have the same dimension.
    pub fn add_scaled(&mut self, other: &Chain, scale: &RingElement) -> Result<(), RingError> {
        if scale.is_zero() {
            return Ok(());
        }
        for (id, coeff) in other.terms() {
            self.insert_add(id.to_string(), &coeff.mul(scale)?)?;
        }
        Ok(())
    }

    pub fn scaled(&self, scale: &RingElement) -> Result<Chain, RingError> {
        let mut out = Chain::zero(self.dim);
        out.add_scaled(self, scale)?;
        Ok(out)
    }
}

/// A finite free chain complex with a chosen basis, concentrated in
/// dimensions `0..=max_dim`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BasedComplex {
    ring: RingSpec,
    dims: BTreeMap<String, usize>,
    bases: Vec<Vec<String>>,
    boundary: BTreeMap<String, Chain>,
}

impl BasedComplex {
    /// Assembles a complex from cells and boundary coefficient lists.
    /// Structural problems (duplicate or unknown ids, foreign ring
    /// elements, bad modulus) are rejected here; the chain-complex laws
    /// themselves are checked by [`BasedComplex::validate`], so invalid
    /// boundaries (∂∂ ≠ 0, dimension mismatches) remain representable.
    pub fn from_parts(
        ring: RingSpec,
        cells: impl IntoIterator<Item = BasisElement>,
        boundaries: impl IntoIterator<Item = (String, Vec<(String, RingElement)>)>,
    ) -> Result<Self, ComplexError> {
        ring.validate()?;
        let mut dims = BTreeMap::new();
        let mut max_dim = None;
        for cell in cells {
            if dims.insert(cell.id.clone(), cell.dim).is_some() {
                return Err(ComplexError::DuplicateId(cell.id));
            }
            max_dim = Some(max_dim.map_or(cell.dim, |m: usize| m.max(cell.dim)));
        }
        let mut bases = vec![Vec::new(); max_dim.map_or(0, |m| m + 1)];
        for (id, dim) in &dims {
            bases[*dim].push(id.clone());
        }

        let mut boundary = BTreeMap::new();
        for (of, coeffs) in boundaries {
            let of_dim = *dims.get(&of).ok_or_else(|| ComplexError::UnknownId(of.clone()))?;
            let mut chain = Chain::zero(of_dim as i64 - 1);
            for (id, coeff) in coeffs {
                if !dims.contains_key(&id) {
                    return Err(ComplexError::UnknownId(id));
                }
                if coeff.spec() != ring {
                    return Err(RingError::MixedRings { left: ring.clone(), right: coeff.spec() }.into());
                }
                chain.insert_add(id, &coeff)?;
            }
            if !chain.is_zero() && boundary.insert(of.clone(), chain).is_some() {
                return Err(ComplexError::DuplicateId(of));
            }
        }
        Ok(BasedComplex { ring, dims, bases, boundary })
    }

    pub fn ring(&self) -> &RingSpec {
        &self.ring
    }

    /// Number of dimensions carrying cells, i.e. `max_dim + 1` (0 for
    /// the empty complex).
    pub fn dim_count(&self) -> usize {
        self.bases.len()
    }

    pub fn cell_count(&self) -> usize {
        self.dims.len()
    }

    /// The basis of one dimension, lexicographically sorted.
    pub fn basis(&self, dim: usize) -> &[String] {
        self.bases.get(dim).map_or(&[], |v| v.as_slice())
    }

    /// All cells, dimension ascending and lexicographic within.
    pub fn cells(&self) -> impl Iterator<Item = BasisElement> + '_ {
        self.bases.iter().enumerate().flat_map(|(dim, ids)| {
            ids.iter().map(move |id| BasisElement::new(id.clone(), dim))
        })
    }

    pub fn contains(&self, id: &str) -> bool {
        self.dims.contains_key(id)
    }

    pub fn dim_of(&self, id: &str) -> Option<usize> {
        self.dims.get(id).copied()
    }

    fn require(&self, id: &str) -> Result<usize, ComplexError> {
        self.dim_of(id).ok_or_else(|| ComplexError::UnknownId(id.to_string()))
    }

    pub(crate) fn boundary_ref(&self, id: &str) -> Option<&Chain> {
        self.boundary.get(id)
    }

    /// The boundary chain of a cell (the zero chain when the cell has
    /// no boundary).
    pub fn boundary_of(&self, id: &str) -> Result<Chain, ComplexError> {
        let dim = self.require(id)?;
        Ok(self
            .boundary
            .get(id)
            .cloned()
            .unwrap_or_else(|| Chain::zero(dim as i64 - 1)))
    }

    /// The coefficient of `b` in `c`, following the convention that the
    /// coefficient is zero when the dimensions do not match or the term
    /// is absent.
    pub fn coefficient(&self, c: &Chain, b: &BasisElement) -> RingElement {
        if c.dim() != b.dim as i64 {
            return self.ring.zero();
        }
        c.get(&b.id).cloned().unwrap_or_else(|| self.ring.zero())
    }

    /// The covering weight `w(b ≻ a) = 𝔎(∂b, a)`, possibly zero (zero
    /// means there is no covering edge). Requires `dim b = dim a + 1`.
    pub fn covering_weight(&self, upper: &str, lower: &str) -> Result<RingElement, ComplexError> {
        let up_dim = self.require(upper)?;
        let low_dim = self.require(lower)?;
        if up_dim != low_dim + 1 {
            return Err(ComplexError::DimensionMismatch {
                of: upper.to_string(),
                of_dim: up_dim,
                term: lower.to_string(),
                term_dim: low_dim,
            });
        }
        Ok(self
            .boundary
            .get(upper)
            .and_then(|c| c.get(lower))
            .cloned()
            .unwrap_or_else(|| self.ring.zero()))
    }

    /// Every covering relation with nonzero weight, upper cells in
    /// (dimension, id) order and lower ids lexicographic within.
    pub fn poset_view(&self) -> Vec<CoveringRelation> {
        let mut out = Vec::new();
        for upper in self.cells() {
            if let Some(chain) = self.boundary.get(&upper.id) {
                for (lower, weight) in chain.terms() {
                    let lower_dim = match self.dim_of(lower) {
                        Some(d) => d,
                        None => continue,
                    };
                    out.push(CoveringRelation {
                        upper: upper.clone(),
                        lower: BasisElement::new(lower.to_string(), lower_dim),
                        weight: weight.clone(),
                    });
                }
            }
        }
        out
    }

    /// Index from each cell to the cells covering it (those whose
    /// boundary contains it with nonzero weight), lexicographically
    /// sorted.
    pub(crate) fn cofacet_index(&self) -> BTreeMap<String, Vec<String>> {
        let mut index: BTreeMap<String, Vec<String>> = BTreeMap::new();
        for (upper, chain) in &self.boundary {
            for (lower, _) in chain.terms() {
                index.entry(lower.to_string()).or_default().push(upper.clone());
            }
        }
        for uppers in index.values_mut() {
            uppers.sort();
        }
        index
    }

    /// Checks the chain-complex laws: every boundary term one dimension
    /// down, and `∂∘∂ = 0` for every basis element.
    pub fn validate(&self) -> Result<(), ComplexError> {
        for (of, chain) in &self.boundary {
            let of_dim = self.dims[of];
            for (term, _) in chain.terms() {
                let term_dim = self.require(term)?;
                if of_dim == 0 || term_dim != of_dim - 1 {
                    return Err(ComplexError::DimensionMismatch {
                        of: of.clone(),
                        of_dim,
                        term: term.to_string(),
                        term_dim,
                    });
                }
            }
        }
        for (of, chain) in &self.boundary {
            let of_dim = self.dims[of] as i64;
            let mut square = Chain::zero(of_dim - 2);
            for (term, coeff) in chain.terms() {
                if let Some(inner) = self.boundary.get(term) {
                    square.add_scaled(inner, coeff)?;
                }
            }
            if !square.is_zero() {
                return Err(ComplexError::NotSquareZero(of.clone()));
            }
        }
        Ok(())
    }

    /// Counts of cells per dimension `0..dim_count()`.
    pub fn cell_counts(&self) -> Vec<usize> {
        self.bases.iter().map(|b| b.len()).collect()
    }

    // ---- file format ----------------------------------------------------

    pub fn from_json(text: &str) -> Result<Self, ComplexError> {
        let file: ComplexFile =
            serde_json::from_str(text).map_err(|e| ComplexError::Format(e.to_string()))?;
        let ring: RingSpec = file.ring.parse()?;
        let cells = file.cells.into_iter().map(|c| BasisElement::new(c.id, c.dim));
        let mut boundaries = Vec::new();
        for entry in file.boundary {
            let mut coeffs = Vec::new();
            for (id, text) in entry.coeffs {
                coeffs.push((id, ring.parse(&text)?));
            }
            boundaries.push((entry.of, coeffs));
        }
        Self::from_parts(ring, cells, boundaries)
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        let cells: Vec<CellEntry> = self
            .cells()
            .map(|c| CellEntry { id: c.id, dim: c.dim })
            .collect();
        let boundary: Vec<BoundaryEntry> = self
            .cells()
            .filter_map(|c| self.boundary.get(&c.id).map(|chain| (c.id, chain)))
            .map(|(of, chain)| BoundaryEntry {
                of,
                coeffs: chain
                    .terms()
                    .map(|(id, coeff)| (id.to_string(), coeff.to_string()))
                    .collect(),
            })
            .collect();
        let file = ComplexFile { ring: self.ring.to_string(), cells, boundary };
        serde_json::to_value(file).expect("complex file serialization cannot fail")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value())
            .expect("complex file serialization cannot fail")
    }
}

#[derive(Serialize, Deserialize)]
struct ComplexFile {
    ring: String,
    cells: Vec<CellEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    boundary: Vec<BoundaryEntry>,
}

#[derive(Serialize, Deserialize)]
struct CellEntry {
    id: String,
    dim: usize,
}

#[derive(Serialize, Deserialize)]
struct BoundaryEntry {
    of: String,
    #[serde(default)]
    coeffs: Vec<(String, String)>,
}

/// Rebuilds a complex from a poset view; test aid for the round-trip
/// invariant.
#[cfg(test)]
pub(crate) fn from_poset_view(
    ring: RingSpec,
    cells: Vec<BasisElement>,
    relations: &[CoveringRelation],
) -> Result<BasedComplex, ComplexError> {
    let mut grouped: BTreeMap<String, Vec<(String, RingElement)>> = BTreeMap::new();
    for rel in relations {
        grouped
            .entry(rel.upper.id.clone())
            .or_default()
            .push((rel.lower.id.clone(), rel.weight.clone()));
    }
    BasedComplex::from_parts(ring, cells, grouped)
}
