//! Partial matchings on the weighted poset of a based complex:
//! validation, acyclicity with cycle witnesses, the constructive
//! linear-extension algorithm, and a deterministic greedy matcher.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::complex::{BasedComplex, ComplexError};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum MatchingError {
    #[error("unknown cell id {0:?}")]
    UnknownCell(String),
    #[error("({down:?}, {up:?}) is not a covering pair with nonzero weight")]
    NotACoveringPair { down: String, up: String },
    #[error("cell {0:?} is matched more than once")]
    ElementMatchedTwice(String),
    #[error("matched weight w({up:?} ≻ {down:?}) = {weight} is not invertible")]
    NonInvertibleWeight { down: String, up: String, weight: String },
    #[error("matching has an alternating cycle through {}", cycle.join(" → "))]
    CycleFound { cycle: Vec<String> },
    #[error("matching is not acyclic")]
    NotAcyclic,
    #[error("invalid linear extension: {reason}")]
    ExtensionInvalid { reason: String },
    #[error("bad matching file: {0}")]
    Format(String),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// A matched pair: `down = d(up)`, `up = u(down)`, `dim up = dim down + 1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MatchedPair {
    pub down: String,
    pub up: String,
}

/// A partial matching, as raw data; [`validate_matching`] checks it
/// against a complex.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Matching {
    pub pairs: Vec<MatchedPair>,
}

impl Matching {
    pub fn new(pairs: impl IntoIterator<Item = (String, String)>) -> Self {
        Matching {
            pairs: pairs.into_iter().map(|(down, up)| MatchedPair { down, up }).collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn from_json(text: &str) -> Result<Self, MatchingError> {
        serde_json::from_str(text).map_err(|e| MatchingError::Format(e.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("matching serialization cannot fail")
    }
}

/// How a cell relates to a matching.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "PascalCase")]
pub enum CellClass {
    Up,
    Down,
    Critical,
}

/// The Up/Down/Critical classification induced by a validated matching.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Classification {
    class: BTreeMap<String, CellClass>,
    up_of: BTreeMap<String, String>,
    down_of: BTreeMap<String, String>,
}

impl Classification {
    pub fn class_of(&self, id: &str) -> Option<CellClass> {
        self.class.get(id).copied()
    }

    pub fn is_critical(&self, id: &str) -> bool {
        self.class_of(id) == Some(CellClass::Critical)
    }

    /// The partner above a Down cell.
    pub fn up_of(&self, down: &str) -> Option<&str> {
        self.up_of.get(down).map(String::as_str)
    }

    /// The partner below an Up cell.
    pub fn down_of(&self, up: &str) -> Option<&str> {
        self.down_of.get(up).map(String::as_str)
    }

    /// Matched pairs, keyed and sorted by the Down cell.
    pub fn pairs(&self) -> impl Iterator<Item = (&str, &str)> {
        self.up_of.iter().map(|(a, b)| (a.as_str(), b.as_str()))
    }

    pub fn matched_count(&self) -> usize {
        self.up_of.len()
    }

    /// Critical cell ids, lexicographic.
    pub fn critical(&self) -> impl Iterator<Item = &str> {
        self.class
            .iter()
            .filter(|(_, c)| **c == CellClass::Critical)
            .map(|(id, _)| id.as_str())
    }

    /// Full classification map in lexicographic id order.
    pub fn entries(&self) -> impl Iterator<Item = (&str, CellClass)> {
        self.class.iter().map(|(id, c)| (id.as_str(), *c))
    }
}

/// Checks that `m` is a partial matching on the covering graph of `c`
/// with invertible matched weights, and returns the classification.
pub fn validate_matching(
    c: &BasedComplex,
    m: &Matching,
) -> Result<Classification, MatchingError> {
    let mut up_of = BTreeMap::new();
    let mut down_of = BTreeMap::new();
    let mut seen: BTreeSet<&str> = BTreeSet::new();
    for pair in &m.pairs {
        for id in [&pair.down, &pair.up] {
            if !c.contains(id) {
                return Err(MatchingError::UnknownCell(id.clone()));
            }
            if !seen.insert(id) {
                return Err(MatchingError::ElementMatchedTwice(id.clone()));
            }
        }
        let weight = match c.covering_weight(&pair.up, &pair.down) {
            Ok(w) if !w.is_zero() => w,
            _ => {
                return Err(MatchingError::NotACoveringPair {
                    down: pair.down.clone(),
                    up: pair.up.clone(),
                })
            }
        };
        if !weight.is_invertible() {
            return Err(MatchingError::NonInvertibleWeight {
                down: pair.down.clone(),
                up: pair.up.clone(),
                weight: weight.to_string(),
            });
        }
        up_of.insert(pair.down.clone(), pair.up.clone());
        down_of.insert(pair.up.clone(), pair.down.clone());
    }
    let mut class = BTreeMap::new();
    for cell in c.cells() {
        let cls = if down_of.contains_key(&cell.id) {
            CellClass::Up
        } else if up_of.contains_key(&cell.id) {
            CellClass::Down
        } else {
            CellClass::Critical
        };
        class.insert(cell.id, cls);
    }
    Ok(Classification { class, up_of, down_of })
}

/// The directed graph on Up cells with an edge `b → b'` whenever
/// `w(b ≻ d(b')) ≠ 0`, `b ≠ b'`. The matching is acyclic exactly when
/// this graph has no directed cycle.
fn up_digraph(c: &BasedComplex, cls: &Classification) -> BTreeMap<String, Vec<String>> {
    let mut graph: BTreeMap<String, Vec<String>> = BTreeMap::new();
    for (_, up) in cls.pairs() {
        let successors: Vec<String> = c
            .boundary_ref(up)
            .map(|chain| {
                chain
                    .terms()
                    .filter_map(|(z, _)| cls.up_of(z))
                    .filter(|b| *b != up)
                    .map(str::to_string)
                    .collect()
            })
            .unwrap_or_default();
        graph.insert(up.to_string(), successors);
    }
    graph
}

/// Depth-first cycle search; returns one directed cycle as a node
/// sequence when present.
fn find_cycle(graph: &BTreeMap<String, Vec<String>>) -> Option<Vec<String>> {
    #[derive(PartialEq)]
    enum Color {
        Active,
        Done,
    }
    fn visit(
        node: &str,
        graph: &BTreeMap<String, Vec<String>>,
        colors: &mut BTreeMap<String, Color>,
        stack: &mut Vec<String>,
    ) -> Option<Vec<String>> {
        colors.insert(node.to_string(), Color::Active);
        stack.push(node.to_string());
        for next in graph.get(node).into_iter().flatten() {
            match colors.get(next) {
                None => {
                    if let Some(cycle) = visit(next, graph, colors, stack) {
                        return Some(cycle);
                    }
                }
                Some(Color::Active) => {
                    let start = stack.iter().position(|n| n == next).expect("active node on stack");
                    return Some(stack[start..].to_vec());
                }
                Some(Color::Done) => {}
            }
        }
        stack.pop();
        colors.insert(node.to_string(), Color::Done);
        None
    }

    let mut colors = BTreeMap::new();
    let mut stack = Vec::new();
    for node in graph.keys() {
        if !colors.contains_key(node) {
            if let Some(cycle) = visit(node, graph, &mut colors, &mut stack) {
                return Some(cycle);
            }
        }
    }
    None
}

/// Verifies acyclicity; on failure the error carries one witness cycle
/// (as a sequence of Up cells) so hand-written matchings can be
/// repaired.
pub fn is_acyclic(c: &BasedComplex, m: &Matching) -> Result<(), MatchingError> {
    let cls = validate_matching(c, m)?;
    check_acyclic(c, &cls)
}

pub(crate) fn check_acyclic(
    c: &BasedComplex,
    cls: &Classification,
) -> Result<(), MatchingError> {
    match find_cycle(&up_digraph(c, cls)) {
        None => Ok(()),
        Some(cycle) => Err(MatchingError::CycleFound { cycle }),
    }
}

/// A total order of all cells refining the poset order, with each
/// matched pair adjacent, and rank non-decreasing along the Down and
/// critical cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LinearExtension {
    order: Vec<String>,
}

impl LinearExtension {
    pub fn new(order: Vec<String>) -> Self {
        LinearExtension { order }
    }

    pub fn order(&self) -> &[String] {
        &self.order
    }

    pub fn position(&self, id: &str) -> Option<usize> {
        self.order.iter().position(|x| x == id)
    }

    pub(crate) fn positions(&self) -> BTreeMap<String, usize> {
        self.order.iter().enumerate().map(|(i, id)| (id.clone(), i)).collect()
    }

    /// Checks the three defining invariants against a complex and a
    /// validated matching.
    pub fn validate(
        &self,
        c: &BasedComplex,
        cls: &Classification,
    ) -> Result<(), MatchingError> {
        let invalid = |reason: String| MatchingError::ExtensionInvalid { reason };
        let pos = self.positions();
        if pos.len() != self.order.len() {
            return Err(invalid("repeated cell in the order".into()));
        }
        if pos.len() != c.cell_count() || !pos.keys().all(|id| c.contains(id)) {
            return Err(invalid("order is not a permutation of the basis".into()));
        }
        for rel in c.poset_view() {
            if pos[&rel.lower.id] >= pos[&rel.upper.id] {
                return Err(invalid(format!(
                    "{} < {} in the poset but not in the order",
                    rel.lower.id, rel.upper.id
                )));
            }
        }
        for (down, up) in cls.pairs() {
            if pos[up] != pos[down] + 1 {
                return Err(invalid(format!("{up} does not directly follow {down}")));
            }
        }
        let mut last_dim = 0usize;
        for id in &self.order {
            if cls.class_of(id) == Some(CellClass::Up) {
                continue;
            }
            let dim = c.dim_of(id).expect("checked above");
            if dim < last_dim {
                return Err(invalid(format!(
                    "rank decreases at {id} along the Down and critical cells"
                )));
            }
            last_dim = dim;
        }
        Ok(())
    }
}

/// Builds a linear extension witnessing acyclicity, following the
/// inductive construction: among the lowest-rank unordered cells,
/// either place a critical cell (Case 1) or find a matched cell whose
/// partner covers nothing else unplaced and place the pair (Case 2).
/// Ties are broken lexicographically, so the output is deterministic.
/// Fails with `NotAcyclic` exactly when the matching has a cycle.
pub fn linear_extension(
    c: &BasedComplex,
    m: &Matching,
) -> Result<LinearExtension, MatchingError> {
    let cls = validate_matching(c, m)?;
    let mut placed: BTreeSet<String> = BTreeSet::new();
    let mut order: Vec<String> = Vec::with_capacity(c.cell_count());

    while order.len() < c.cell_count() {
        // W = unplaced cells of minimal dimension
        let (_, lowest) = (0..c.dim_count())
            .filter_map(|dim| {
                let unplaced: Vec<&String> =
                    c.basis(dim).iter().filter(|id| !placed.contains(*id)).collect();
                (!unplaced.is_empty()).then_some((dim, unplaced))
            })
            .next()
            .expect("some cell is unplaced");

        // Case 1: a critical cell at the lowest rank
        if let Some(critical) = lowest.iter().find(|id| cls.is_critical(id)) {
            order.push((*critical).clone());
            placed.insert((*critical).clone());
            continue;
        }

        // Case 2: every cell in W is a Down cell (an Up cell here would
        // need its unplaced partner one rank lower, contradicting
        // minimality). Everything of lower rank is placed, so the
        // unplaced part of P_{< u(a)} is exactly the unplaced cells
        // covered by u(a); we need that to be {a} alone.
        let mut chosen = None;
        for a in &lowest {
            debug_assert_eq!(cls.class_of(a), Some(CellClass::Down));
            let Some(up) = cls.up_of(a) else { continue };
            let alone = c
                .boundary_ref(up)
                .map(|chain| chain.terms().all(|(z, _)| z == **a || placed.contains(z)))
                .unwrap_or(true);
            if alone {
                chosen = Some(((*a).clone(), up.to_string()));
                break;
            }
        }
        match chosen {
            Some((a, b)) => {
                placed.insert(a.clone());
                placed.insert(b.clone());
                order.push(a);
                order.push(b);
            }
            None => return Err(MatchingError::NotAcyclic),
        }
    }

    let extension = LinearExtension::new(order);
    debug_assert!(extension.validate(c, &cls).is_ok());
    Ok(extension)
}

/// Builds an acyclic matching greedily. Cells are processed dimension
/// ascending and lexicographically within; each free cell is offered
/// its lexicographically smallest free cofacet with invertible weight,
/// and the pair is kept only if the matching stays acyclic (otherwise
/// the cell stays unmatched and the scan moves on). Deterministic by
/// construction; makes no optimality claim.
pub fn greedy_matching(c: &BasedComplex) -> Matching {
    let cofacets = c.cofacet_index();
    let mut matched: BTreeSet<String> = BTreeSet::new();
    let mut pairs: Vec<(String, String)> = Vec::new();
    for dim in 0..c.dim_count() {
        for a in c.basis(dim) {
            if matched.contains(a) {
                continue;
            }
            let candidate = cofacets.get(a).into_iter().flatten().find(|b| {
                !matched.contains(*b)
                    && c.covering_weight(b, a).map_or(false, |w| w.is_invertible())
            });
            let Some(b) = candidate else { continue };
            pairs.push((a.clone(), b.clone()));
            if is_acyclic(c, &Matching::new(pairs.clone())).is_ok() {
                matched.insert(a.clone());
                matched.insert(b.clone());
            } else {
                pairs.pop();
            }
        }
    }
    let matching = Matching::new(pairs);
    debug_assert!(is_acyclic(c, &matching).is_ok());
    matching
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::complex::tests::{filled_triangle, interval, triangle_circle};
    use crate::complex::{BasedComplex, BasisElement};
    use crate::ring::RingSpec;
    use rand::seq::SliceRandom;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn z() -> RingSpec {
        RingSpec::Integers
    }

    fn pairs(list: &[(&str, &str)]) -> Matching {
        Matching::new(list.iter().map(|(a, b)| (a.to_string(), b.to_string())))
    }

    /// Two vertices joined by two parallel edges (a circle).
    fn two_edge_circle() -> BasedComplex {
        let one = z().one();
        BasedComplex::from_parts(
            z(),
            vec![
                BasisElement::new("v0", 0),
                BasisElement::new("v1", 0),
                BasisElement::new("e1", 1),
                BasisElement::new("e2", 1),
            ],
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

    /// Interval with a doubled edge: ∂e = 2·v1 - 2·v0.
    fn doubled_interval(ring: RingSpec) -> BasedComplex {
        let two = ring.from_int(2);
        BasedComplex::from_parts(
            ring,
            vec![
                BasisElement::new("v0", 0),
                BasisElement::new("v1", 0),
                BasisElement::new("e", 1),
            ],
            vec![(
                "e".to_string(),
                vec![("v1".to_string(), two.clone()), ("v0".to_string(), two.neg())],
            )],
        )
        .unwrap()
    }

    #[test]
    fn classification_on_interval() {
        let c = interval(z());
        let cls = validate_matching(&c, &pairs(&[("v0", "e")])).unwrap();
        assert_eq!(cls.class_of("e"), Some(CellClass::Up));
        assert_eq!(cls.class_of("v0"), Some(CellClass::Down));
        assert_eq!(cls.class_of("v1"), Some(CellClass::Critical));
        assert_eq!(cls.up_of("v0"), Some("e"));
        assert_eq!(cls.down_of("e"), Some("v0"));
    }

    #[test]
    fn non_invertible_weight_depends_on_the_ring() {
        let m = pairs(&[("v0", "e")]);
        assert!(matches!(
            validate_matching(&doubled_interval(z()), &m),
            Err(MatchingError::NonInvertibleWeight { .. })
        ));
        validate_matching(&doubled_interval(RingSpec::Rationals), &m).unwrap();
    }

    #[test]
    fn bad_pairs_are_rejected() {
        let c = interval(z());
        assert!(matches!(
            validate_matching(&c, &pairs(&[("v0", "v1")])),
            Err(MatchingError::NotACoveringPair { .. })
        ));
        assert!(matches!(
            validate_matching(&c, &pairs(&[("v0", "e"), ("v1", "e")])),
            Err(MatchingError::ElementMatchedTwice(_))
        ));
        assert!(matches!(
            validate_matching(&c, &pairs(&[("v9", "e")])),
            Err(MatchingError::UnknownCell(_))
        ));
    }

    #[test]
    fn empty_matching_is_acyclic() {
        is_acyclic(&triangle_circle(z()), &Matching::default()).unwrap();
    }

    #[test]
    fn two_edge_circle_has_a_cycle() {
        let err = is_acyclic(&two_edge_circle(), &pairs(&[("v0", "e1"), ("v1", "e2")]));
        assert_eq!(
            err,
            Err(MatchingError::CycleFound { cycle: vec!["e1".into(), "e2".into()] })
        );
    }

    #[test]
    fn triangle_matching_is_acyclic() {
        is_acyclic(&triangle_circle(z()), &pairs(&[("v1", "e01"), ("v2", "e02")])).unwrap();
    }

    #[test]
    fn extension_on_point() {
        let point =
            BasedComplex::from_parts(z(), vec![BasisElement::new("v", 0)], Vec::new()).unwrap();
        let ext = linear_extension(&point, &Matching::default()).unwrap();
        assert_eq!(ext.order(), ["v".to_string()]);
    }

    #[test]
    fn extension_on_interval() {
        // v1 is critical at the lowest rank, so it is placed first;
        // then (v0, e) go as an adjacent pair.
        let c = interval(z());
        let m = pairs(&[("v0", "e")]);
        let ext = linear_extension(&c, &m).unwrap();
        assert_eq!(ext.order(), ["v1".to_string(), "v0".to_string(), "e".to_string()]);
        ext.validate(&c, &validate_matching(&c, &m).unwrap()).unwrap();
    }

    #[test]
    fn extension_on_triangle_circle() {
        let c = triangle_circle(z());
        let m = pairs(&[("v1", "e01"), ("v2", "e02")]);
        let ext = linear_extension(&c, &m).unwrap();
        assert_eq!(
            ext.order(),
            ["v0", "v1", "e01", "v2", "e02", "e12"].map(String::from)
        );
        ext.validate(&c, &validate_matching(&c, &m).unwrap()).unwrap();
    }

    #[test]
    fn extension_fails_on_cycles() {
        let err = linear_extension(&two_edge_circle(), &pairs(&[("v0", "e1"), ("v1", "e2")]));
        assert_eq!(err, Err(MatchingError::NotAcyclic));
    }

    #[test]
    fn extension_checker_rejects_bad_orders() {
        let c = interval(z());
        let m = pairs(&[("v0", "e")]);
        let cls = validate_matching(&c, &m).unwrap();
        // poset violation: e before v1
        let bad = LinearExtension::new(vec!["v0".into(), "e".into(), "v1".into()]);
        assert!(matches!(bad.validate(&c, &cls), Err(MatchingError::ExtensionInvalid { .. })));
        // pair not adjacent
        let bad = LinearExtension::new(vec!["v0".into(), "v1".into(), "e".into()]);
        assert!(matches!(bad.validate(&c, &cls), Err(MatchingError::ExtensionInvalid { .. })));
        // not a permutation
        let bad = LinearExtension::new(vec!["v0".into(), "e".into()]);
        assert!(matches!(bad.validate(&c, &cls), Err(MatchingError::ExtensionInvalid { .. })));
    }

    #[test]
    fn greedy_on_fixtures() {
        let point =
            BasedComplex::from_parts(z(), vec![BasisElement::new("v", 0)], Vec::new()).unwrap();
        assert!(greedy_matching(&point).is_empty());

        let m = greedy_matching(&interval(z()));
        assert_eq!(m, pairs(&[("v0", "e")]));

        let c = triangle_circle(z());
        let m = greedy_matching(&c);
        assert_eq!(m.len(), 2);
        let cls = validate_matching(&c, &m).unwrap();
        check_acyclic(&c, &cls).unwrap();
        let mut critical_dims: Vec<usize> =
            cls.critical().map(|id| c.dim_of(id).unwrap()).collect();
        critical_dims.sort();
        assert_eq!(critical_dims, vec![0, 1]);
    }

    #[test]
    fn matching_json_round_trip() {
        let m = pairs(&[("v0", "e")]);
        assert_eq!(Matching::from_json(&m.to_json()).unwrap(), m);
        assert!(Matching::from_json("[]").is_err());
    }

    // ---- randomized agreement with a brute-force oracle -----------------

    /// Literal search for a cycle d(b₁) ≺ b₁ ≻ d(b₂) ≺ … ≻ d(b₁) with
    /// n ≥ 2 distinct Up cells, straight from the definition.
    fn has_alternating_cycle(c: &BasedComplex, cls: &Classification) -> bool {
        let ups: Vec<&str> = cls.entries().filter(|(_, k)| *k == CellClass::Up).map(|(b, _)| b).collect();
        let step_ok = |b: &str, b_next: &str| {
            let down = cls.down_of(b_next).expect("up cell has a partner");
            c.covering_weight(b, down).map_or(false, |w| !w.is_zero())
        };
        fn extend<'a>(
            path: &mut Vec<&'a str>,
            ups: &[&'a str],
            step_ok: &impl Fn(&str, &str) -> bool,
        ) -> bool {
            let last = path.last().copied().expect("path is nonempty");
            for b in ups {
                if *b == path[0] {
                    if path.len() >= 2 && step_ok(last, b) {
                        return true;
                    }
                } else if !path.contains(b) && step_ok(last, b) {
                    path.push(b);
                    if extend(path, ups, step_ok) {
                        return true;
                    }
                    path.pop();
                }
            }
            false
        }
        ups.iter().any(|start| extend(&mut vec![*start], &ups, &step_ok))
    }

    fn random_complex(rng: &mut ChaCha8Rng, max_cells: usize) -> BasedComplex {
        loop {
            let n_vertices = rng.gen_range(2..=5u8);
            let n_facets = rng.gen_range(1..=4usize);
            let facets: Vec<Vec<String>> = (0..n_facets)
                .map(|_| {
                    let size = rng.gen_range(1..=3usize);
                    (0..size).map(|_| format!("p{}", rng.gen_range(0..n_vertices))).collect()
                })
                .collect();
            let c = crate::simplicial::SimplicialInput::new(facets)
                .unwrap()
                .to_complex(&z())
                .unwrap();
            if c.cell_count() <= max_cells {
                return c;
            }
        }
    }

    /// A random valid partial matching, with no acyclicity guarantee.
    pub(crate) fn random_matching(rng: &mut ChaCha8Rng, c: &BasedComplex) -> Matching {
        let mut candidates: Vec<(String, String)> = c
            .poset_view()
            .into_iter()
            .filter(|rel| rel.weight.is_invertible())
            .map(|rel| (rel.lower.id, rel.upper.id))
            .collect();
        candidates.shuffle(rng);
        let mut used: BTreeSet<String> = BTreeSet::new();
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

    #[test]
    fn acyclicity_checker_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut cyclic_seen = 0;
        for _ in 0..120 {
            let c = random_complex(&mut rng, 12);
            let m = random_matching(&mut rng, &c);
            let cls = validate_matching(&c, &m).unwrap();
            let fast = check_acyclic(&c, &cls).is_ok();
            let slow = !has_alternating_cycle(&c, &cls);
            assert_eq!(fast, slow);
            if !fast {
                cyclic_seen += 1;
            }
            // extension succeeds exactly when acyclic
            assert_eq!(linear_extension(&c, &m).is_ok(), fast);
            if let Ok(ext) = linear_extension(&c, &m) {
                ext.validate(&c, &cls).unwrap();
            }
            // counting invariant
            let ups = cls.entries().filter(|(_, k)| *k == CellClass::Up).count();
            let downs = cls.entries().filter(|(_, k)| *k == CellClass::Down).count();
            assert_eq!(ups, m.len());
            assert_eq!(downs, m.len());
            assert_eq!(cls.critical().count(), c.cell_count() - 2 * m.len());
        }
        assert!(cyclic_seen > 0, "the corpus should exercise cyclic matchings");
    }

    #[test]
    fn greedy_matchings_are_always_valid_and_acyclic() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let c = random_complex(&mut rng, 30);
            let m = greedy_matching(&c);
            let cls = validate_matching(&c, &m).unwrap();
            check_acyclic(&c, &cls).unwrap();
            let ext = linear_extension(&c, &m).unwrap();
            ext.validate(&c, &cls).unwrap();
        }
    }

    #[test]
    fn fixtures_with_matchings_stay_consistent() {
        let c = filled_triangle(z());
        let m = greedy_matching(&c);
        let cls = validate_matching(&c, &m).unwrap();
        check_acyclic(&c, &cls).unwrap();
        assert_eq!(cls.critical().count(), c.cell_count() - 2 * m.len());
    }
}
