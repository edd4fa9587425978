//! Independent homology oracle: Smith normal form over the integers,
//! rank computations over fields. This is what certifies that a Morse
//! reduction preserved homology.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde_json::json;
use thiserror::Error;

use crate::complex::{BasedComplex, ComplexError};
use crate::ring::{lift_to_bigint, RingElement, RingSpec};

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum HomologyError {
    #[error("homology over {0} is unsupported (need Z, Q, or Z/p with p prime)")]
    UnsupportedRing(RingSpec),
    #[error(transparent)]
    Complex(#[from] ComplexError),
}

/// Sparse integer matrix; no zero entries are stored.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct IntegerMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), BigInt>,
}

impl IntegerMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        IntegerMatrix { rows, cols, entries: BTreeMap::new() }
    }

    pub fn from_entries(
        rows: usize,
        cols: usize,
        entries: impl IntoIterator<Item = (usize, usize, BigInt)>,
    ) -> Self {
        let mut m = Self::new(rows, cols);
        for (i, j, v) in entries {
            m.set(i, j, v);
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.len()
    }

    pub fn set(&mut self, row: usize, col: usize, value: BigInt) {
        assert!(row < self.rows && col < self.cols, "entry out of range");
        if value.is_zero() {
            self.entries.remove(&(row, col));
        } else {
            self.entries.insert((row, col), value);
        }
    }

    pub fn get(&self, row: usize, col: usize) -> BigInt {
        self.entries.get(&(row, col)).cloned().unwrap_or_else(BigInt::zero)
    }

    fn to_dense(&self) -> Vec<Vec<BigInt>> {
        let mut dense = vec![vec![BigInt::zero(); self.cols]; self.rows];
        for ((i, j), v) in &self.entries {
            dense[*i][*j] = v.clone();
        }
        dense
    }
}

fn swap_cols(a: &mut [Vec<BigInt>], x: usize, y: usize) {
    if x == y {
        return;
    }
    for row in a.iter_mut() {
        row.swap(x, y);
    }
}

/// Invariant factors d₁ | d₂ | … | d_r of an integer matrix (positive,
/// in divisibility order; their count is the rank). Classical reduction
/// with pivots chosen by minimal absolute value to limit entry growth;
/// arbitrary-precision arithmetic keeps the result exact regardless.
pub fn smith_normal_form(matrix: &IntegerMatrix) -> Vec<BigInt> {
    let mut a = matrix.to_dense();
    let (nr, nc) = (matrix.rows, matrix.cols);
    let limit = nr.min(nc);
    let mut k = 0;
    while k < limit {
        let mut pivot: Option<(usize, usize)> = None;
        for i in k..nr {
            for j in k..nc {
                if a[i][j].is_zero() {
                    continue;
                }
                let better = match &pivot {
                    None => true,
                    Some((pi, pj)) => a[i][j].abs() < a[*pi][*pj].abs(),
                };
                if better {
                    pivot = Some((i, j));
                }
            }
        }
        let Some((pi, pj)) = pivot else { break };
        a.swap(k, pi);
        swap_cols(&mut a, k, pj);

        'reduce: loop {
            // clear the column below the pivot; a nonzero remainder is
            // strictly smaller than the pivot and takes its place
            for i in k + 1..nr {
                if a[i][k].is_zero() {
                    continue;
                }
                let q = &a[i][k] / &a[k][k];
                if !q.is_zero() {
                    for j in k..nc {
                        let t = &a[k][j] * &q;
                        a[i][j] -= t;
                    }
                }
                if !a[i][k].is_zero() {
                    a.swap(i, k);
                    continue 'reduce;
                }
            }
            // clear the row right of the pivot the same way
            for j in k + 1..nc {
                if a[k][j].is_zero() {
                    continue;
                }
                let q = &a[k][j] / &a[k][k];
                if !q.is_zero() {
                    for i in k..nr {
                        let t = &a[i][k] * &q;
                        a[i][j] -= t;
                    }
                }
                if !a[k][j].is_zero() {
                    swap_cols(&mut a, k, j);
                    continue 'reduce;
                }
            }
            // the pivot must divide the remaining submatrix; fold in a
            // violating row and keep reducing
            for i in k + 1..nr {
                for j in k + 1..nc {
                    if (&a[i][j] % &a[k][k]).is_zero() {
                        continue;
                    }
                    for jj in k..nc {
                        let t = a[i][jj].clone();
                        a[k][jj] += t;
                    }
                    continue 'reduce;
                }
            }
            break;
        }
        k += 1;
    }
    let factors: Vec<BigInt> = (0..k).map(|i| a[i][i].abs()).collect();
    debug_assert!(factors.windows(2).all(|w| (&w[1] % &w[0]).is_zero()));
    factors
}

/// One homology group: free rank plus invariant factors > 1 in
/// divisibility order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomologyGroup {
    pub dim: usize,
    pub betti: usize,
    pub torsion: Vec<BigInt>,
}

impl HomologyGroup {
    pub fn to_json_value(&self) -> serde_json::Value {
        json!({
            "dim": self.dim,
            "betti": self.betti,
            "torsion": self.torsion.iter().map(|t| t.to_string()).collect::<Vec<_>>(),
        })
    }
}

impl fmt::Display for HomologyGroup {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        match self.betti {
            0 => {}
            1 => parts.push("Z".to_string()),
            b => parts.push(format!("Z^{b}")),
        }
        for t in &self.torsion {
            parts.push(format!("Z/{t}"));
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" ⊕ "))
        }
    }
}

pub fn homology_json(groups: &[HomologyGroup]) -> serde_json::Value {
    serde_json::Value::Array(groups.iter().map(HomologyGroup::to_json_value).collect())
}

/// The matrix of `∂_n` over the integers, rows indexed by the basis of
/// dimension `n-1` and columns by dimension `n` (both lexicographic).
pub fn boundary_matrix(c: &BasedComplex, n: usize) -> Result<IntegerMatrix, HomologyError> {
    if *c.ring() != RingSpec::Integers {
        return Err(HomologyError::UnsupportedRing(c.ring().clone()));
    }
    if n == 0 || n >= c.dim_count() {
        let rows = if n == 0 { 0 } else { c.basis(n - 1).len() };
        return Ok(IntegerMatrix::new(rows, c.basis(n).len()));
    }
    let lowers = c.basis(n - 1);
    let uppers = c.basis(n);
    let index: BTreeMap<&str, usize> =
        lowers.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let mut m = IntegerMatrix::new(lowers.len(), uppers.len());
    for (j, upper) in uppers.iter().enumerate() {
        if let Some(chain) = c.boundary_ref(upper) {
            for (lower, coeff) in chain.terms() {
                let value = lift_to_bigint(coeff).expect("integer ring coefficients lift");
                m.set(index[lower], j, value);
            }
        }
    }
    Ok(m)
}

/// Rank of `∂_n` by Gaussian elimination over a field.
fn field_rank(c: &BasedComplex, n: usize) -> usize {
    if n == 0 || n >= c.dim_count() {
        return 0;
    }
    let lowers = c.basis(n - 1);
    let uppers = c.basis(n);
    let index: BTreeMap<&str, usize> =
        lowers.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let zero = c.ring().zero();
    let mut m: Vec<Vec<RingElement>> = vec![vec![zero; uppers.len()]; lowers.len()];
    for (j, upper) in uppers.iter().enumerate() {
        if let Some(chain) = c.boundary_ref(upper) {
            for (lower, coeff) in chain.terms() {
                m[index[lower]][j] = coeff.clone();
            }
        }
    }

    let rows = m.len();
    let cols = uppers.len();
    let mut rank = 0;
    for col in 0..cols {
        let Some(p) = (rank..rows).find(|&i| !m[i][col].is_zero()) else { continue };
        m.swap(rank, p);
        let inv = m[rank][col].try_invert().expect("nonzero field elements are units");
        for j in col..cols {
            m[rank][j] = m[rank][j].mul(&inv).expect("same ring");
        }
        for i in 0..rows {
            if i == rank || m[i][col].is_zero() {
                continue;
            }
            let factor = m[i][col].clone();
            for j in col..cols {
                let sub = m[rank][j].mul(&factor).expect("same ring");
                m[i][j] = m[i][j].sub(&sub).expect("same ring");
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}

/// Homology of a valid complex. Over Z this is Betti numbers plus
/// torsion from the Smith normal form; over a field (Q, or Z/p with p
/// prime) Betti numbers from ranks, with no torsion. Composite moduli
/// are rejected: they carry no invariant-factor theory, though the
/// Morse machinery itself works over them.
pub fn homology(c: &BasedComplex) -> Result<Vec<HomologyGroup>, HomologyError> {
    let dims = c.dim_count();
    let ring = c.ring();
    let ranks_and_torsion: Vec<(usize, Vec<BigInt>)> = match ring {
        RingSpec::Integers => (0..=dims)
            .map(|n| {
                if n == 0 || n >= dims {
                    Ok((0, Vec::new()))
                } else {
                    let factors = smith_normal_form(&boundary_matrix(c, n)?);
                    let torsion = factors.iter().filter(|f| !f.is_one()).cloned().collect();
                    Ok((factors.len(), torsion))
                }
            })
            .collect::<Result<_, HomologyError>>()?,
        _ if ring.is_field() => {
            (0..=dims).map(|n| (field_rank(c, n), Vec::new())).collect()
        }
        _ => return Err(HomologyError::UnsupportedRing(ring.clone())),
    };
    Ok((0..dims)
        .map(|n| HomologyGroup {
            dim: n,
            betti: c.basis(n).len() - ranks_and_torsion[n].0 - ranks_and_torsion[n + 1].0,
            torsion: ranks_and_torsion[n + 1].1.clone(),
        })
        .collect())
}

/// Alternating sum of the cell counts.
pub fn euler_characteristic(c: &BasedComplex) -> i64 {
    c.cell_counts()
        .iter()
        .enumerate()
        .map(|(n, count)| if n % 2 == 0 { *count as i64 } else { -(*count as i64) })
        .sum()
}
