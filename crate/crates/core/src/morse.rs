//! The Morse complex of an acyclic matching, computed two independent
//! ways, plus the certified direct-sum decomposition.
//!
//! The first route sums weights over alternating paths between critical
//! cells; it follows the definition directly and is exponential in the
//! worst case, so it runs under a configurable path budget. The second
//! route eliminates matched pairs one basis change at a time — a
//! structured sparse Gaussian elimination — and also produces the
//! change of basis that exhibits the original complex as the Morse
//! complex plus one two-cell acyclic summand per matched pair.
//! [`verify_decomposition`] re-checks that splitting from scratch.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde_json::json;
use thiserror::Error;

use crate::complex::{BasedComplex, BasisElement, Chain, ComplexError};
use crate::matching::{
    check_acyclic, validate_matching, Classification, LinearExtension, Matching, MatchingError,
};
use crate::ring::{lift_to_rational, lower_from_rational, RingElement, RingError, RingSpec};

/// Cap on the number of alternating paths enumerated per reduction.
pub const DEFAULT_PATH_BUDGET: usize = 1_000_000;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum MorseError {
    #[error("path budget of {budget} alternating paths exceeded")]
    PathBudgetExceeded { budget: usize },
    #[error("path source {0:?} is a matched Down cell")]
    SourceIsDown(String),
    #[error("denominator weight w({up:?} ≻ {down:?}) = {weight} is not invertible")]
    NonInvertibleWeight { down: String, up: String, weight: String },
    #[error("matched weight w({up:?} ≻ {down:?}) = {weight} ≠ 1; normalize the basis first")]
    NotNormalized { down: String, up: String, weight: String },
    #[error("elimination order violation: {reason}")]
    OrderViolation { reason: String },
    #[error("final basis is not a basis: {reason}")]
    NotABasis { reason: String },
    #[error("rewritten boundary has a nonzero entry outside the blocks at w({from:?} ≻ {to:?})")]
    CrossTermsRemain { from: String, to: String },
    #[error("Morse block mismatch at {at}")]
    MorseBlockMismatch { at: String },
    #[error(transparent)]
    Matching(#[from] MatchingError),
    #[error(transparent)]
    Complex(#[from] ComplexError),
    #[error(transparent)]
    Ring(#[from] RingError),
}

/// An alternating path `s ≻ d(b₁) ≺ b₁ ≻ … ≻ d(bₙ) ≺ bₙ ≻ t`; the
/// steps are the matched pairs `(d(bᵢ), bᵢ)` and may be empty.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AlternatingPath {
    pub source: String,
    pub steps: Vec<(String, String)>,
    pub target: String,
}

impl AlternatingPath {
    /// Number of matched pairs used (the `n` in the sign `(-1)^n`).
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

/// Which lower endpoints count as path targets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PathTargets {
    /// Only critical cells — what the Morse boundary sums over.
    Critical,
    /// Any cell one dimension below the last Up cell.
    All,
}

/// The Morse complex: a based complex on the critical cells.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MorseComplex {
    pub complex: BasedComplex,
}

/// One acyclic two-cell summand split off by the elimination:
/// `∂(top) = unit · bottom` in the final basis, and neither cell has
/// any other nonzero covering weight.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AtomSummand {
    pub top: String,
    pub bottom: String,
    pub dim: usize,
}

/// Result of the elimination: the Morse complex, the split-off atoms,
/// and the final basis written in the original one.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    pub morse: MorseComplex,
    pub atoms: Vec<AtomSummand>,
    pub final_basis: BTreeMap<String, Chain>,
}

impl Decomposition {
    pub fn to_json_value(&self) -> serde_json::Value {
        let atoms: Vec<serde_json::Value> = self
            .atoms
            .iter()
            .map(|a| json!({"top": a.top, "bottom": a.bottom, "dim": a.dim}))
            .collect();
        let change_of_basis: Vec<serde_json::Value> = self
            .final_basis
            .iter()
            .map(|(new, chain)| {
                let in_old: Vec<serde_json::Value> = chain
                    .terms()
                    .map(|(id, coeff)| json!([id, coeff.to_string()]))
                    .collect();
                json!({"new": new, "in_old_basis": in_old})
            })
            .collect();
        json!({
            "morse": self.morse.complex.to_json_value(),
            "atoms": atoms,
            "change_of_basis": change_of_basis,
        })
    }
}

// ---- alternating paths ---------------------------------------------------

/// Enumerates every alternating path starting at `source`. Targets are
/// restricted to critical cells for Morse-boundary use; `PathTargets::All`
/// widens them to every cell one dimension down. The source must not be
/// a Down cell. Finiteness rests on acyclicity, which is checked first.
pub fn enumerate_paths(
    c: &BasedComplex,
    m: &Matching,
    source: &str,
    targets: PathTargets,
) -> Result<Vec<AlternatingPath>, MorseError> {
    let cls = validate_matching(c, m)?;
    check_acyclic(c, &cls)?;
    if !c.contains(source) {
        return Err(MatchingError::UnknownCell(source.to_string()).into());
    }
    let mut counter = PathCounter { used: 0, limit: DEFAULT_PATH_BUDGET };
    paths_from(c, &cls, source, targets, &mut counter)
}

/// Emission counter shared across the sources of one reduction.
struct PathCounter {
    used: usize,
    limit: usize,
}

impl PathCounter {
    fn charge(&mut self) -> Result<(), MorseError> {
        self.used += 1;
        if self.used > self.limit {
            Err(MorseError::PathBudgetExceeded { budget: self.limit })
        } else {
            Ok(())
        }
    }
}

fn paths_from(
    c: &BasedComplex,
    cls: &Classification,
    source: &str,
    targets: PathTargets,
    counter: &mut PathCounter,
) -> Result<Vec<AlternatingPath>, MorseError> {
    if cls.class_of(source) == Some(crate::matching::CellClass::Down) {
        return Err(MorseError::SourceIsDown(source.to_string()));
    }
    let mut out = Vec::new();
    let mut steps: Vec<(String, String)> = Vec::new();
    walk(c, cls, targets, source, source, &mut steps, &mut out, counter)?;
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn walk(
    c: &BasedComplex,
    cls: &Classification,
    targets: PathTargets,
    source: &str,
    upper: &str,
    steps: &mut Vec<(String, String)>,
    out: &mut Vec<AlternatingPath>,
    counter: &mut PathCounter,
) -> Result<(), MorseError> {
    let Some(chain) = c.boundary_ref(upper) else { return Ok(()) };
    let lowers: Vec<String> = chain.terms().map(|(z, _)| z.to_string()).collect();
    for z in lowers {
        // The closing step bₙ ≻ t may not reuse d(bₙ); for n = 0 any
        // covering s ≻ t closes a path.
        let is_own_down = steps.last().map_or(false, |(down, _)| *down == z);
        if !is_own_down {
            let eligible = match targets {
                PathTargets::Critical => cls.is_critical(&z),
                PathTargets::All => true,
            };
            if eligible {
                counter.charge()?;
                out.push(AlternatingPath {
                    source: source.to_string(),
                    steps: steps.clone(),
                    target: z.clone(),
                });
            }
            // Continue the zig-zag through a matched pair. Distinctness
            // of the Up cells is automatic once the matching is acyclic
            // (a repeat would close a directed cycle), except for the
            // first step of a source in U, which may legitimately lift
            // back through the source itself.
            if let Some(up) = cls.up_of(&z) {
                debug_assert!(
                    !steps.iter().any(|(_, b)| b == up),
                    "repeated Up cell on an alternating path"
                );
                steps.push((z.clone(), up.to_string()));
                let up = up.to_string();
                walk(c, cls, targets, source, &up, steps, out, counter)?;
                steps.pop();
            }
        }
    }
    Ok(())
}

/// The weight `w(p) = (-1)^n · Π numerators / Π matched denominators`
/// of an alternating path, recomputed from the covering weights of `c`.
pub fn path_weight(c: &BasedComplex, p: &AlternatingPath) -> Result<RingElement, MorseError> {
    let mut numerator = c.ring().one();
    let mut upper = p.source.as_str();
    for (down, up) in &p.steps {
        numerator = numerator.mul(&c.covering_weight(upper, down)?)?;
        upper = up;
    }
    numerator = numerator.mul(&c.covering_weight(upper, &p.target)?)?;

    let mut denominator = c.ring().one();
    for (down, up) in &p.steps {
        denominator = denominator.mul(&c.covering_weight(up, down)?)?;
    }
    let inverse = denominator.try_invert().map_err(|_| {
        let (down, up) = p.steps.last().cloned().unwrap_or_default();
        MorseError::NonInvertibleWeight { down, up, weight: denominator.to_string() }
    })?;
    let weight = numerator.mul(&inverse)?;
    Ok(if p.steps.len() % 2 == 1 { weight.neg() } else { weight })
}

// ---- Morse boundary by path summation -------------------------------------

/// The Morse complex by alternating-path summation, with the default
/// path budget.
pub fn morse_boundary(c: &BasedComplex, m: &Matching) -> Result<MorseComplex, MorseError> {
    morse_boundary_with_budget(c, m, DEFAULT_PATH_BUDGET)
}

/// The Morse complex on the critical cells, with
/// `∂ᴹ(s) = Σ_p w(p) · p_target` summed over all alternating paths from
/// `s` to critical cells. The budget caps the total number of paths
/// across all sources.
pub fn morse_boundary_with_budget(
    c: &BasedComplex,
    m: &Matching,
    budget: usize,
) -> Result<MorseComplex, MorseError> {
    let cls = validate_matching(c, m)?;
    check_acyclic(c, &cls)?;
    let critical: Vec<BasisElement> =
        c.cells().filter(|cell| cls.is_critical(&cell.id)).collect();
    let mut counter = PathCounter { used: 0, limit: budget };
    let mut boundaries: Vec<(String, Vec<(String, RingElement)>)> = Vec::new();
    for cell in &critical {
        if cell.dim == 0 {
            continue;
        }
        let paths = paths_from(c, &cls, &cell.id, PathTargets::Critical, &mut counter)?;
        let mut chain = Chain::zero(cell.dim as i64 - 1);
        for p in &paths {
            chain.insert_add(p.target.clone(), &path_weight(c, p)?)?;
        }
        if !chain.is_zero() {
            boundaries.push((
                cell.id.clone(),
                chain.terms().map(|(id, w)| (id.to_string(), w.clone())).collect(),
            ));
        }
    }
    let complex = BasedComplex::from_parts(c.ring().clone(), critical, boundaries)?;
    Ok(MorseComplex { complex })
}

// ---- basis normalization ---------------------------------------------------

/// Rescales every Down cell `a` to `ã = w(u(a) ≻ a) · a`, so all matched
/// weights become 1. The Morse complex is unchanged by this.
pub fn normalize_basis(c: &BasedComplex, m: &Matching) -> Result<BasedComplex, MorseError> {
    let cls = validate_matching(c, m)?;
    Ok(normalize_with_transform(c, &cls)?.0)
}

/// Normalization plus the change of basis it performs, as chains in the
/// original basis.
pub(crate) fn normalize_with_transform(
    c: &BasedComplex,
    cls: &Classification,
) -> Result<(BasedComplex, BTreeMap<String, Chain>), MorseError> {
    let mut scale: BTreeMap<String, RingElement> = BTreeMap::new();
    for (down, up) in cls.pairs() {
        scale.insert(down.to_string(), c.covering_weight(up, down)?);
    }

    let mut boundaries: Vec<(String, Vec<(String, RingElement)>)> = Vec::new();
    for cell in c.cells() {
        let Some(chain) = c.boundary_ref(&cell.id) else { continue };
        let mut coeffs = Vec::new();
        for (z, w) in chain.terms() {
            // K(x, ã) = K(x, a) / w(u(a)≻a); and ∂ã = w(u(a)≻a)·∂a.
            let mut coeff = match scale.get(z) {
                Some(wz) => w.mul(&wz.try_invert().expect("matched weights are units"))?,
                None => w.clone(),
            };
            if let Some(wx) = scale.get(&cell.id) {
                coeff = coeff.mul(wx)?;
            }
            coeffs.push((z.to_string(), coeff));
        }
        boundaries.push((cell.id.clone(), coeffs));
    }
    let normalized = BasedComplex::from_parts(c.ring().clone(), c.cells(), boundaries)?;

    let mut transform = BTreeMap::new();
    for cell in c.cells() {
        let coeff = scale.get(&cell.id).cloned().unwrap_or_else(|| c.ring().one());
        let chain = Chain::from_terms(cell.dim as i64, [(cell.id.clone(), coeff)])?;
        transform.insert(cell.id, chain);
    }
    Ok((normalized, transform))
}

// ---- elimination ------------------------------------------------------------

/// Mutable weighted-poset state for the step-by-step elimination. One
/// step cancels a matched pair `(a, b)` with `w(b ≻ a) = 1`: the new
/// bottom basis element is `∂b`, every other cell `x` covering `a`
/// becomes `x - w(x ≻ a)·b`, and the weights update by the rank-one
/// rule `w(x ≻ y) -= w(x ≻ a)·w(b ≻ y)` with the rows and columns of
/// `a` and `b` emptied except for the surviving unit `w(b ≻ a)`.
pub(crate) struct Elimination {
    ring: RingSpec,
    dims: BTreeMap<String, usize>,
    rows: BTreeMap<String, BTreeMap<String, RingElement>>,
    cols: BTreeMap<String, BTreeSet<String>>,
    transform: BTreeMap<String, Chain>,
    positions: Option<BTreeMap<String, usize>>,
    last_position: Option<usize>,
    done: Vec<(String, String)>,
}

impl Elimination {
    pub(crate) fn new(
        normalized: &BasedComplex,
        transform: BTreeMap<String, Chain>,
        positions: Option<BTreeMap<String, usize>>,
    ) -> Self {
        let mut rows: BTreeMap<String, BTreeMap<String, RingElement>> = BTreeMap::new();
        let mut cols: BTreeMap<String, BTreeSet<String>> = BTreeMap::new();
        let mut dims = BTreeMap::new();
        for cell in normalized.cells() {
            dims.insert(cell.id.clone(), cell.dim);
            if let Some(chain) = normalized.boundary_ref(&cell.id) {
                let row: BTreeMap<String, RingElement> =
                    chain.terms().map(|(z, w)| (z.to_string(), w.clone())).collect();
                for z in row.keys() {
                    cols.entry(z.clone()).or_default().insert(cell.id.clone());
                }
                rows.insert(cell.id.clone(), row);
            }
        }
        Elimination {
            ring: normalized.ring().clone(),
            dims,
            rows,
            cols,
            transform,
            positions,
            last_position: None,
            done: Vec::new(),
        }
    }

    /// Current weight `w(x ≻ y)`, zero when absent.
    pub(crate) fn weight(&self, x: &str, y: &str) -> RingElement {
        self.rows
            .get(x)
            .and_then(|row| row.get(y))
            .cloned()
            .unwrap_or_else(|| self.ring.zero())
    }

    fn remove_entry(&mut self, x: &str, y: &str) {
        if let Some(row) = self.rows.get_mut(x) {
            row.remove(y);
            if row.is_empty() {
                self.rows.remove(x);
            }
        }
        if let Some(col) = self.cols.get_mut(y) {
            col.remove(x);
            if col.is_empty() {
                self.cols.remove(y);
            }
        }
    }

    fn add_to_entry(&mut self, x: &str, y: &str, delta: &RingElement) -> Result<(), RingError> {
        if delta.is_zero() {
            return Ok(());
        }
        let row = self.rows.entry(x.to_string()).or_default();
        let new = match row.remove(y) {
            Some(old) => old.add(delta)?,
            None => delta.clone(),
        };
        if new.is_zero() {
            if row.is_empty() {
                self.rows.remove(x);
            }
            if let Some(col) = self.cols.get_mut(y) {
                col.remove(x);
                if col.is_empty() {
                    self.cols.remove(y);
                }
            }
        } else {
            row.insert(y.to_string(), new);
            self.cols.entry(y.to_string()).or_default().insert(x.to_string());
        }
        Ok(())
    }

    pub(crate) fn step(&mut self, down: &str, up: &str) -> Result<(), MorseError> {
        if let Some(positions) = &self.positions {
            let position = *positions.get(up).ok_or_else(|| MorseError::OrderViolation {
                reason: format!("{up} is not in the linear extension"),
            })?;
            if self.last_position.is_some_and(|last| position < last) {
                return Err(MorseError::OrderViolation {
                    reason: format!("{up} eliminated out of extension order"),
                });
            }
            self.last_position = Some(position);
        }
        let pivot = self.weight(up, down);
        if !pivot.is_one() {
            return Err(MorseError::NotNormalized {
                down: down.to_string(),
                up: up.to_string(),
                weight: pivot.to_string(),
            });
        }

        let row_b: BTreeMap<String, RingElement> =
            self.rows.get(up).cloned().unwrap_or_default();
        let col_a: Vec<(String, RingElement)> = self
            .cols
            .get(down)
            .map(|col| {
                col.iter()
                    .filter(|x| x.as_str() != up)
                    .map(|x| (x.clone(), self.weight(x, down)))
                    .collect()
            })
            .unwrap_or_default();

        // New bottom basis element: a := ∂b, expressed in the original basis.
        let mut new_bottom = Chain::zero(self.dims[down] as i64);
        for (z, w) in &row_b {
            new_bottom.add_scaled(&self.transform[z], w)?;
        }

        // Row operation row[x] -= w(x ≻ a) · row[b] for every other cell
        // covering a; this clears column a and applies the rank-one update.
        for (x, coeff) in &col_a {
            let transform_b = self.transform[up].clone();
            self.transform
                .get_mut(x)
                .expect("every cell has a transform")
                .add_scaled(&transform_b, &coeff.neg())?;
            for (y, w_by) in &row_b {
                let delta = coeff.mul(w_by)?.neg();
                #[cfg(debug_assertions)]
                if !delta.is_zero() {
                    if let Some(positions) = &self.positions {
                        // changed weights only ever sit at or below the
                        // eliminated Up cell in the extension order
                        debug_assert!(positions[up] >= positions[y]);
                    }
                }
                self.add_to_entry(x, y, &delta)?;
            }
        }

        // Cells covering b lose their entry on it; ∂∂ = 0 forces those
        // coefficients to vanish in the new basis.
        let covering_b: Vec<String> =
            self.cols.get(up).map(|col| col.iter().cloned().collect()).unwrap_or_default();
        for z in covering_b {
            #[cfg(debug_assertions)]
            {
                let mut sum = self.weight(&z, up);
                for (x, coeff) in &col_a {
                    sum = sum.add(&self.weight(&z, x).mul(coeff).unwrap()).unwrap();
                }
                debug_assert!(sum.is_zero(), "∂∂ = 0 violated while eliminating ({down}, {up})");
            }
            self.remove_entry(&z, up);
        }

        // Row of a empties (∂∂b = 0); row of b keeps only the unit on a.
        let row_a: Vec<String> =
            self.rows.get(down).map(|r| r.keys().cloned().collect()).unwrap_or_default();
        for y in row_a {
            self.remove_entry(down, &y);
        }
        let stale: Vec<String> = row_b.keys().filter(|y| y.as_str() != down).cloned().collect();
        for y in stale {
            self.remove_entry(up, &y);
        }
        debug_assert!(self.weight(up, down).is_one());

        self.transform.insert(down.to_string(), new_bottom);
        self.done.push((down.to_string(), up.to_string()));
        Ok(())
    }

    fn finish(self, c: &BasedComplex, cls: &Classification) -> Result<Decomposition, MorseError> {
        let critical: Vec<BasisElement> =
            c.cells().filter(|cell| cls.is_critical(&cell.id)).collect();
        let mut boundaries: Vec<(String, Vec<(String, RingElement)>)> = Vec::new();
        for cell in &critical {
            if let Some(row) = self.rows.get(&cell.id) {
                debug_assert!(
                    row.keys().all(|y| cls.is_critical(y)),
                    "critical row still touches matched cells"
                );
                boundaries.push((
                    cell.id.clone(),
                    row.iter().map(|(y, w)| (y.clone(), w.clone())).collect(),
                ));
            }
        }
        let complex = BasedComplex::from_parts(self.ring.clone(), critical, boundaries)?;
        let atoms = self
            .done
            .iter()
            .map(|(down, up)| AtomSummand {
                top: up.clone(),
                bottom: down.clone(),
                dim: self.dims[up],
            })
            .collect();
        Ok(Decomposition {
            morse: MorseComplex { complex },
            atoms,
            final_basis: self.transform,
        })
    }
}

/// Reduces `c` along the matched pairs in the order given by the linear
/// extension (Up cells ascending). The basis is normalized first, so
/// unnormalized complexes are accepted; the normalization is folded
/// into the reported change of basis.
pub fn reduce_by_elimination(
    c: &BasedComplex,
    m: &Matching,
    extension: &LinearExtension,
) -> Result<Decomposition, MorseError> {
    let cls = validate_matching(c, m)?;
    check_acyclic(c, &cls)?;
    extension
        .validate(c, &cls)
        .map_err(|e| MorseError::OrderViolation { reason: e.to_string() })?;

    let (normalized, transform) = normalize_with_transform(c, &cls)?;
    let positions = extension.positions();
    let mut pairs: Vec<(String, String)> =
        cls.pairs().map(|(a, b)| (a.to_string(), b.to_string())).collect();
    pairs.sort_by_key(|(_, b)| positions[b]);

    let mut elimination = Elimination::new(&normalized, transform, Some(positions));
    for (down, up) in &pairs {
        elimination.step(down, up)?;
    }
    elimination.finish(c, &cls)
}

// ---- decomposition verification ----------------------------------------------

/// Checks, from scratch, that a decomposition really splits `c`:
/// the final basis is an invertible change of basis over the ring, the
/// boundary rewritten in it is block-diagonal with one unit 1×1 block
/// per atom, and the remaining block equals the claimed Morse boundary
/// exactly.
pub fn verify_decomposition(c: &BasedComplex, d: &Decomposition) -> Result<(), MorseError> {
    let ring = c.ring();
    let not_a_basis = |reason: String| MorseError::NotABasis { reason };

    // final_basis must re-index exactly the original cells, dimension-wise
    if d.final_basis.len() != c.cell_count() {
        return Err(not_a_basis("final basis has the wrong number of cells".into()));
    }
    for (new, chain) in &d.final_basis {
        let Some(dim) = c.dim_of(new) else {
            return Err(not_a_basis(format!("{new} is not an original cell")));
        };
        if chain.dim() != dim as i64 {
            return Err(not_a_basis(format!("{new} changed dimension")));
        }
        for (old, _) in chain.terms() {
            if c.dim_of(old) != Some(dim) {
                return Err(not_a_basis(format!("{new} mixes dimensions at {old}")));
            }
        }
    }

    // Role bookkeeping: every cell is an atom top, an atom bottom, or a
    // Morse cell, exactly once.
    let mut roles: BTreeSet<String> = BTreeSet::new();
    for atom in &d.atoms {
        for id in [&atom.top, &atom.bottom] {
            if !roles.insert(id.clone()) {
                return Err(MorseError::MorseBlockMismatch {
                    at: format!("{id} appears in more than one block"),
                });
            }
        }
        if c.dim_of(&atom.top) != Some(atom.dim)
            || c.dim_of(&atom.bottom).map(|d| d + 1) != Some(atom.dim)
        {
            return Err(MorseError::MorseBlockMismatch {
                at: format!("atom ({}, {}) has inconsistent dimensions", atom.bottom, atom.top),
            });
        }
    }
    for cell in d.morse.complex.cells() {
        if !roles.insert(cell.id.clone()) {
            return Err(MorseError::MorseBlockMismatch {
                at: format!("{} appears in more than one block", cell.id),
            });
        }
    }
    if roles.len() != c.cell_count() {
        return Err(MorseError::MorseBlockMismatch {
            at: "atoms and Morse block do not cover the basis".into(),
        });
    }

    // Per-dimension change-of-basis matrices, along with unit-determinant
    // checks (invertibility over the ring).
    let mut basis_matrices: Vec<Vec<Vec<BigRational>>> = Vec::new();
    for n in 0..c.dim_count() {
        let ids = c.basis(n);
        let index: BTreeMap<&str, usize> =
            ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let mut matrix = vec![vec![BigRational::zero(); ids.len()]; ids.len()];
        for (i, new) in ids.iter().enumerate() {
            let chain = &d.final_basis[new];
            for (old, coeff) in chain.terms() {
                matrix[i][index[old]] = lift_to_rational(coeff);
            }
        }
        if !ids.is_empty() && !det_is_unit(ring, &matrix) {
            return Err(not_a_basis(format!("dimension {n} block is not invertible over {ring}")));
        }
        basis_matrices.push(matrix);
    }

    // Rewritten boundary W_n = A_n · D_n · A_{n-1}^{-1}, checked blockwise.
    let atom_of_top: BTreeMap<&str, &AtomSummand> =
        d.atoms.iter().map(|a| (a.top.as_str(), a)).collect();
    for n in 1..c.dim_count() {
        let uppers = c.basis(n);
        let lowers = c.basis(n - 1);
        if uppers.is_empty() || lowers.is_empty() {
            continue;
        }
        let lower_index: BTreeMap<&str, usize> =
            lowers.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
        let mut boundary = vec![vec![BigRational::zero(); lowers.len()]; uppers.len()];
        for (j, id) in uppers.iter().enumerate() {
            if let Some(chain) = c.boundary_ref(id) {
                for (l, coeff) in chain.terms() {
                    boundary[j][lower_index[l]] = lift_to_rational(coeff);
                }
            }
        }
        let inverse = rational_inverse(&basis_matrices[n - 1])
            .ok_or_else(|| not_a_basis(format!("dimension {} block is singular", n - 1)))?;
        let rewritten = matmul(&matmul(&basis_matrices[n], &boundary), &inverse);

        for (i, upper) in uppers.iter().enumerate() {
            for (p, lower) in lowers.iter().enumerate() {
                let entry = lower_from_rational(ring, &rewritten[i][p]).ok_or_else(|| {
                    not_a_basis(format!("rewritten boundary leaves {ring} at {upper} ≻ {lower}"))
                })?;
                let in_atom =
                    atom_of_top.get(upper.as_str()).is_some_and(|a| a.bottom == *lower);
                if in_atom {
                    if !entry.is_invertible() {
                        return Err(MorseError::CrossTermsRemain {
                            from: upper.clone(),
                            to: lower.clone(),
                        });
                    }
                    continue;
                }
                let both_morse = d.morse.complex.contains(upper) && d.morse.complex.contains(lower);
                if both_morse {
                    let claimed = d.morse.complex.covering_weight(upper, lower)?;
                    if claimed != entry {
                        return Err(MorseError::MorseBlockMismatch {
                            at: format!("w({upper} ≻ {lower}) = {entry}, Morse complex claims {claimed}"),
                        });
                    }
                } else if !entry.is_zero() {
                    return Err(MorseError::CrossTermsRemain {
                        from: upper.clone(),
                        to: lower.clone(),
                    });
                }
            }
        }
    }

    // The Morse complex may not claim weights outside the rewritten ones
    // (covered above since its basis is a subset of the original cells
    // and all pairs were compared), but its cells must carry the original
    // dimensions.
    for cell in d.morse.complex.cells() {
        if c.dim_of(&cell.id) != Some(cell.dim) {
            return Err(MorseError::MorseBlockMismatch {
                at: format!("{} changed dimension in the Morse complex", cell.id),
            });
        }
    }
    Ok(())
}

// ---- exact rational matrix helpers ----------------------------------------

fn matmul(a: &[Vec<BigRational>], b: &[Vec<BigRational>]) -> Vec<Vec<BigRational>> {
    let rows = a.len();
    let inner = b.len();
    let cols = if inner == 0 { 0 } else { b[0].len() };
    let mut out = vec![vec![BigRational::zero(); cols]; rows];
    for i in 0..rows {
        for (k, b_row) in b.iter().enumerate().take(inner) {
            if a[i][k].is_zero() {
                continue;
            }
            for j in 0..cols {
                if !b_row[j].is_zero() {
                    let product = &a[i][k] * &b_row[j];
                    out[i][j] += product;
                }
            }
        }
    }
    out
}

/// Exact determinant by fraction-full Gaussian elimination; the input
/// entries here are always integral lifts, so the result is integral.
fn rational_det(matrix: &[Vec<BigRational>]) -> BigRational {
    let n = matrix.len();
    let mut m = matrix.to_vec();
    let mut det = BigRational::one();
    for k in 0..n {
        let Some(pivot_row) = (k..n).find(|&i| !m[i][k].is_zero()) else {
            return BigRational::zero();
        };
        if pivot_row != k {
            m.swap(k, pivot_row);
            det = -det;
        }
        det *= m[k][k].clone();
        for i in k + 1..n {
            if m[i][k].is_zero() {
                continue;
            }
            let factor = &m[i][k] / &m[k][k];
            for j in k..n {
                let sub = &factor * &m[k][j];
                m[i][j] -= sub;
            }
        }
    }
    det
}

fn det_is_unit(ring: &RingSpec, matrix: &[Vec<BigRational>]) -> bool {
    let det = rational_det(matrix);
    match ring {
        RingSpec::Rationals => !det.is_zero(),
        RingSpec::Integers => det.numer().abs().is_one() && det.denom().is_one(),
        RingSpec::IntegersMod(p) => {
            if !det.denom().is_one() {
                return false;
            }
            let p = BigInt::from(p.clone());
            det.numer().mod_floor(&p).gcd(&p).is_one()
        }
    }
}

/// Exact inverse by Gauss-Jordan elimination; `None` when singular.
fn rational_inverse(matrix: &[Vec<BigRational>]) -> Option<Vec<Vec<BigRational>>> {
    let n = matrix.len();
    let mut m = matrix.to_vec();
    let mut inv: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    for k in 0..n {
        let pivot_row = (k..n).find(|&i| !m[i][k].is_zero())?;
        m.swap(k, pivot_row);
        inv.swap(k, pivot_row);
        let pivot = m[k][k].clone();
        for j in 0..n {
            m[k][j] /= pivot.clone();
            inv[k][j] /= pivot.clone();
        }
        for i in 0..n {
            if i == k || m[i][k].is_zero() {
                continue;
            }
            let factor = m[i][k].clone();
            for j in 0..n {
                let sub_m = &factor * &m[k][j];
                m[i][j] -= sub_m;
                let sub_inv = &factor * &inv[k][j];
                inv[i][j] -= sub_inv;
            }
        }
    }
    Some(inv)
}
