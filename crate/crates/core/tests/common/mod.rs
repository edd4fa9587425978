//! Shared fixtures and deterministic corpus generators for the
//! integration suites.
#![allow(dead_code)]

use morsel::{BasedComplex, BasisElement, Matching, RingSpec, SimplicialInput};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn cell(id: &str, dim: usize) -> BasisElement {
    BasisElement::new(id, dim)
}

/// Two vertices and one edge, ∂e = v1 - v0.
pub fn interval(ring: RingSpec) -> BasedComplex {
    let one = ring.one();
    BasedComplex::from_parts(
        ring,
        vec![cell("v0", 0), cell("v1", 0), cell("e", 1)],
        vec![(
            "e".to_string(),
            vec![("v1".to_string(), one.clone()), ("v0".to_string(), one.neg())],
        )],
    )
    .unwrap()
}

/// Hollow triangle: three vertices, three edges with ∂e_ij = v_j - v_i.
pub fn triangle_circle(ring: RingSpec) -> BasedComplex {
    let one = ring.one();
    let edge = |i: usize, j: usize| {
        (
            format!("e{i}{j}"),
            vec![(format!("v{j}"), one.clone()), (format!("v{i}"), one.neg())],
        )
    };
    BasedComplex::from_parts(
        ring,
        vec![
            cell("v0", 0),
            cell("v1", 0),
            cell("v2", 0),
            cell("e01", 1),
            cell("e02", 1),
            cell("e12", 1),
        ],
        vec![edge(0, 1), edge(0, 2), edge(1, 2)],
    )
    .unwrap()
}

/// Two vertices joined by two parallel edges; supports a cyclic matching.
pub fn two_edge_circle() -> BasedComplex {
    let ring = RingSpec::Integers;
    let one = ring.one();
    BasedComplex::from_parts(
        ring,
        vec![cell("v0", 0), cell("v1", 0), cell("e1", 1), cell("e2", 1)],
        vec![
            (
                "e1".to_string(),
                vec![("v1".to_string(), one.clone()), ("v0".to_string(), one.neg())],
            ),
            (
                "e2".to_string(),
                vec![("v0".to_string(), one.clone()), ("v1".to_string(), one.neg())],
            ),
        ],
    )
    .unwrap()
}

/// Interval with a doubled edge, ∂e = 2·v1 - 2·v0; the matched weight 2
/// is a unit over Q only.
pub fn doubled_interval(ring: RingSpec) -> BasedComplex {
    let two = ring.from_int(2);
    BasedComplex::from_parts(
        ring,
        vec![cell("v0", 0), cell("v1", 0), cell("e", 1)],
        vec![(
            "e".to_string(),
            vec![("v1".to_string(), two.clone()), ("v0".to_string(), two.neg())],
        )],
    )
    .unwrap()
}

/// Facet file of the minimal 6-vertex triangulation of the projective
/// plane: 10 triangles, 15 edges, 6 vertices.
pub const PROJECTIVE_PLANE_FACETS: &str = include_str!("../fixtures/projective_plane.txt");

pub fn projective_plane_facets() -> Vec<Vec<String>> {
    PROJECTIVE_PLANE_FACETS
        .lines()
        .map(str::trim)
        .filter(|line| !line.is_empty() && !line.starts_with('#'))
        .map(|line| line.split_whitespace().map(str::to_string).collect())
        .collect()
}

pub fn projective_plane(ring: RingSpec) -> BasedComplex {
    SimplicialInput::parse(PROJECTIVE_PLANE_FACETS)
        .unwrap()
        .to_complex(&ring)
        .unwrap()
}

pub fn matching(list: &[(&str, &str)]) -> Matching {
    Matching::new(list.iter().map(|(a, b)| (a.to_string(), b.to_string())))
}

/// Random simplicial chain complex over Z with at most `max_vertices`
/// vertices and facets of at most 4 vertices (dimension ≤ 3).
pub fn random_complex(rng: &mut ChaCha8Rng, max_vertices: u8) -> BasedComplex {
    let n_vertices = rng.gen_range(3..=max_vertices);
    let n_facets = rng.gen_range(2..=10usize);
    let facets: Vec<Vec<String>> = (0..n_facets)
        .map(|_| {
            let size = rng.gen_range(1..=4usize);
            (0..size)
                .map(|_| format!("p{}", rng.gen_range(0..n_vertices)))
                .collect()
        })
        .collect();
    SimplicialInput::new(facets)
        .unwrap()
        .to_complex(&RingSpec::Integers)
        .unwrap()
}

/// The deterministic acceptance corpus: `count` random complexes with
/// at most 10 vertices and dimension at most 3.
pub fn corpus(seed: u64, count: usize) -> Vec<BasedComplex> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_complex(&mut rng, 10)).collect()
}

/// A random valid partial matching with no acyclicity guarantee.
pub fn random_matching(rng: &mut ChaCha8Rng, c: &BasedComplex) -> Matching {
    let mut candidates: Vec<(String, String)> = c
        .poset_view()
        .into_iter()
        .filter(|rel| rel.weight.is_invertible())
        .map(|rel| (rel.lower.id, rel.upper.id))
        .collect();
    candidates.shuffle(rng);
    let mut used = std::collections::BTreeSet::new();
    let mut out = Vec::new();
    for (a, b) in candidates {
        if used.contains(&a) || used.contains(&b) {
            continue;
        }
        used.insert(a.clone());
        used.insert(b.clone());
        out.push((a, b));
    }
    Matching::new(out)
}
