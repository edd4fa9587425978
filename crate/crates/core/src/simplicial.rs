//! Simplicial complexes given by facet lists, converted to based chain
//! complexes with the standard alternating-sign boundary.

use std::collections::BTreeSet;

use thiserror::Error;

use crate::complex::{BasedComplex, BasisElement, ComplexError};
use crate::ring::{RingElement, RingSpec};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum SimplicialError {
    #[error("empty input: {0}")]
    EmptyInput(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// A simplicial complex described by its facets (vertex-id sets).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimplicialInput {
    facets: Vec<BTreeSet<String>>,
}

impl SimplicialInput {
    pub fn new(facets: impl IntoIterator<Item = Vec<String>>) -> Result<Self, SimplicialError> {
        let mut out = Vec::new();
        for facet in facets {
            let facet: BTreeSet<String> = facet.into_iter().collect();
            if facet.is_empty() {
                return Err(SimplicialError::EmptyInput("facet with no vertices".into()));
            }
            out.push(facet);
        }
        if out.is_empty() {
            return Err(SimplicialError::EmptyInput("no facets".into()));
        }
        Ok(SimplicialInput { facets: out })
    }

    /// Parses the facet file format: one facet per line, vertex ids
    /// separated by whitespace, `#` starting a comment line.
    pub fn parse(text: &str) -> Result<Self, SimplicialError> {
        let facets = text
            .lines()
            .map(str::trim)
            .filter(|line| !line.is_empty() && !line.starts_with('#'))
            .map(|line| line.split_whitespace().map(str::to_string).collect::<Vec<_>>());
        Self::new(facets)
    }

    pub fn facets(&self) -> impl Iterator<Item = &BTreeSet<String>> {
        self.facets.iter()
    }

    /// All nonempty faces of all facets, deduplicated.
    fn faces(&self) -> BTreeSet<Vec<String>> {
        let mut faces = BTreeSet::new();
        for facet in &self.facets {
            let verts: Vec<&String> = facet.iter().collect();
            // nonempty subsets; facets are small so the 2^n walk is fine
            for mask in 1u32..(1 << verts.len()) {
                let face: Vec<String> = verts
                    .iter()
                    .enumerate()
                    .filter(|(i, _)| mask & (1 << i) != 0)
                    .map(|(_, v)| (*v).clone())
                    .collect();
                faces.insert(face);
            }
        }
        faces
    }

    /// Builds the free chain complex of the simplicial complex over
    /// `ring`. The id of a face is its sorted vertex ids joined by `|`;
    /// the boundary of an n-face drops one vertex at a time with
    /// alternating signs, vertices taken in lexicographic order.
    pub fn to_complex(&self, ring: &RingSpec) -> Result<BasedComplex, SimplicialError> {
        let faces = self.faces();
        let mut cells = Vec::new();
        let mut boundaries: Vec<(String, Vec<(String, RingElement)>)> = Vec::new();
        for face in &faces {
            let id = face.join("|");
            cells.push(BasisElement::new(id.clone(), face.len() - 1));
            if face.len() == 1 {
                continue;
            }
            let mut coeffs = Vec::new();
            for (i, _) in face.iter().enumerate() {
                let sub: Vec<String> = face
                    .iter()
                    .enumerate()
                    .filter(|(j, _)| *j != i)
                    .map(|(_, v)| v.clone())
                    .collect();
                let sign = if i % 2 == 0 { ring.one() } else { ring.one().neg() };
                coeffs.push((sub.join("|"), sign));
            }
            boundaries.push((id, coeffs));
        }
        Ok(BasedComplex::from_parts(ring.clone(), cells, boundaries)?)
    }
}
