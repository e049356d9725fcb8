//! Pivot vectors and pivot structures on `n × r` matrices.
//!
//! Indices are 1-based at the API boundary and the value `0` means "no
//! pivot", so a row-oriented structure `J = {j_1, .., j_n}` is stored as the
//! plain sequence `[j_1, .., j_n]`. The column-oriented dual `Q` uses the same
//! convention with the roles of rows and columns swapped.

use std::collections::HashSet;
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::DEFAULT_TOL;

fn check_distinct(values: &[usize], upper: usize, what: &str) -> Result<()> {
    let mut seen = HashSet::new();
    for (idx, &v) in values.iter().enumerate() {
        if v > upper {
            return Err(Error::InvalidStructure(format!(
                "{what} entry {} = {v} exceeds {upper}",
                idx + 1
            )));
        }
        if v != 0 && !seen.insert(v) {
            return Err(Error::InvalidStructure(format!(
                "{what} value {v} occurs more than once"
            )));
        }
    }
    Ok(())
}

/// Row-oriented pivot structure `J` for an `n × r` matrix: row `k` has its
/// pivot in column `j_k` (or none when `j_k = 0`).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PivotStructure {
    r: usize,
    j: Vec<usize>,
}

impl PivotStructure {
    pub fn new(r: usize, j: Vec<usize>) -> Result<Self> {
        if j.is_empty() || r == 0 {
            return Err(Error::InvalidStructure(
                "row and column counts must be positive".into(),
            ));
        }
        check_distinct(&j, r, "J")?;
        Ok(Self { r, j })
    }

    /// Number of rows.
    pub fn n(&self) -> usize {
        self.j.len()
    }

    /// Number of columns.
    pub fn r(&self) -> usize {
        self.r
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.j
    }

    /// `j_k` for 1-based `k`.
    pub fn get(&self, k: usize) -> usize {
        self.j[k - 1]
    }

    /// Every row carries a pivot.
    pub fn is_full(&self) -> bool {
        self.j.iter().all(|&v| v > 0)
    }

    /// Rows with a pivot (the domain of `J+`), 1-based and increasing.
    pub fn domain(&self) -> Vec<usize> {
        (1..=self.n()).filter(|&k| self.j[k - 1] > 0).collect()
    }

    pub fn to_columns(&self) -> ColumnPivotStructure {
        let mut q = vec![0; self.r];
        for (k, &col) in self.j.iter().enumerate() {
            if col > 0 {
                q[col - 1] = k + 1;
            }
        }
        ColumnPivotStructure { n: self.n(), q }
    }

    /// The canonical witness: column `j_k` is `e_k`, every other column is
    /// zero.
    pub fn witness_matrix(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.n(), self.r);
        for (k, &col) in self.j.iter().enumerate() {
            if col > 0 {
                m[(k, col - 1)] = 1.0;
            }
        }
        m
    }
}

impl fmt::Display for PivotStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_set(f, &self.j)
    }
}

fn write_set(f: &mut fmt::Formatter<'_>, values: &[usize]) -> fmt::Result {
    write!(f, "{{")?;
    for (i, v) in values.iter().enumerate() {
        if i > 0 {
            write!(f, ",")?;
        }
        write!(f, "{v}")?;
    }
    write!(f, "}}")
}

/// Column-oriented pivot structure `Q` for an `n × r` matrix: column `ℓ`
/// is a pivot-`q_ℓ` vector.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ColumnPivotStructure {
    n: usize,
    q: Vec<usize>,
}

impl ColumnPivotStructure {
    pub fn new(n: usize, q: Vec<usize>) -> Result<Self> {
        if q.is_empty() || n == 0 {
            return Err(Error::InvalidStructure(
                "row and column counts must be positive".into(),
            ));
        }
        check_distinct(&q, n, "Q")?;
        Ok(Self { n, q })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn r(&self) -> usize {
        self.q.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.q
    }

    pub fn get(&self, l: usize) -> usize {
        self.q[l - 1]
    }

    pub fn to_rows(&self) -> PivotStructure {
        let mut j = vec![0; self.n];
        for (l, &row) in self.q.iter().enumerate() {
            if row > 0 {
                j[row - 1] = l + 1;
            }
        }
        PivotStructure { r: self.r(), j }
    }
}

impl fmt::Display for ColumnPivotStructure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_set(f, &self.q)
    }
}

/// Successor function `S` of an admissible structure, `s_k = q_{m+k}`, with
/// the implicit convention `S(0) = 0`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SuccessorFunction {
    s: Vec<usize>,
}

impl SuccessorFunction {
    pub fn new(s: Vec<usize>) -> Result<Self> {
        let n = s.len();
        if n == 0 {
            return Err(Error::InvalidStructure("empty successor function".into()));
        }
        check_distinct(&s, n, "S")?;
        Ok(Self { s })
    }

    pub fn n(&self) -> usize {
        self.s.len()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.s
    }

    /// `S(k)` for `k ∈ {0, .., n}`.
    pub fn apply(&self, k: usize) -> usize {
        if k == 0 {
            0
        } else {
            self.s[k - 1]
        }
    }

    /// The predecessor function `P`, i.e. the inverse of `S+` extended by
    /// zero: `p_ℓ = k` iff `s_k = ℓ`.
    pub fn predecessor(&self) -> Vec<usize> {
        let mut p = vec![0; self.n()];
        for (k, &l) in self.s.iter().enumerate() {
            if l > 0 {
                p[l - 1] = k + 1;
            }
        }
        p
    }

    /// `S+` is strictly increasing on its domain.
    pub fn is_increasing(&self) -> bool {
        let vals: Vec<usize> = self.s.iter().copied().filter(|&v| v > 0).collect();
        vals.windows(2).all(|w| w[0] < w[1])
    }
}

fn check_position(len: usize, k: usize) -> Result<()> {
    if k == 0 || k > len {
        return Err(Error::Argument(format!(
            "pivot position {k} outside 1..={len}"
        )));
    }
    Ok(())
}

/// `v(k) > tol` and every entry below position `k` is zero within `tol`.
pub fn is_pivot_vector(v: &[f64], k: usize, tol: f64) -> Result<bool> {
    check_position(v.len(), k)?;
    Ok(v[k - 1] > tol && v[k..].iter().all(|x| x.abs() <= tol))
}

/// A pivot-`k` vector whose entries above the pivot are positive as well.
pub fn is_positive_pivot_vector(v: &[f64], k: usize, tol: f64) -> Result<bool> {
    Ok(is_pivot_vector(v, k, tol)? && v[..k - 1].iter().all(|&x| x > tol))
}

pub fn row_to_column(j: &PivotStructure) -> ColumnPivotStructure {
    j.to_columns()
}

pub fn column_to_row(q: &ColumnPivotStructure) -> PivotStructure {
    q.to_rows()
}

/// Column `j_k` of `m` is a pivot-`k` vector for every row `k` that has a
/// pivot.
pub fn matrix_has_pivot_structure(m: &DMatrix<f64>, j: &PivotStructure, tol: f64) -> Result<bool> {
    if m.nrows() != j.n() || m.ncols() != j.r() {
        return Err(Error::Dimension(format!(
            "matrix is {}x{}, structure is for {}x{}",
            m.nrows(),
            m.ncols(),
            j.n(),
            j.r()
        )));
    }
    for k in j.domain() {
        let col: Vec<f64> = m.column(j.get(k) - 1).iter().copied().collect();
        if !is_pivot_vector(&col, k, tol)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Same as [`matrix_has_pivot_structure`] at the default tolerance.
pub fn has_pivot_structure(m: &DMatrix<f64>, j: &PivotStructure) -> Result<bool> {
    matrix_has_pivot_structure(m, j, DEFAULT_TOL)
}

/// A full pivot structure of `m`, taking the leftmost pivot-`k` column for
/// each row `k`, or `None` when some row has no pivot-`k` column.
pub fn find_full_pivot_structure(m: &DMatrix<f64>, tol: f64) -> Option<PivotStructure> {
    let n = m.nrows();
    let cols: Vec<Vec<f64>> = m.column_iter().map(|c| c.iter().copied().collect()).collect();
    let j = (1..=n)
        .map(|k| {
            cols.iter()
                .position(|c| is_pivot_vector(c, k, tol).unwrap_or(false))
                .map(|c| c + 1)
        })
        .collect::<Option<Vec<usize>>>()?;
    PivotStructure::new(m.ncols(), j).ok()
}

fn check_block_dims(j: &PivotStructure, m: usize) -> Result<()> {
    if m == 0 {
        return Err(Error::Argument("input dimension m must be positive".into()));
    }
    if j.r() != m + j.n() {
        return Err(Error::Dimension(format!(
            "structure has {} columns, expected m + n = {}",
            j.r(),
            m + j.n()
        )));
    }
    Ok(())
}

/// The structure `P` induced on `A` by a structure on `[B, A]`:
/// `p_k = max(j_k - m, 0)`.
pub fn induced_structure_on_a(j: &PivotStructure, m: usize) -> Result<PivotStructure> {
    check_block_dims(j, m)?;
    let p = j.as_slice().iter().map(|&v| v.saturating_sub(m)).collect();
    PivotStructure::new(j.n(), p)
}

/// `F+` is strictly increasing with range exactly `{1, .., p}`.
pub fn is_staircase(f: &PivotStructure) -> bool {
    f.as_slice()
        .iter()
        .filter(|&&v| v > 0)
        .enumerate()
        .all(|(idx, &v)| v == idx + 1)
}

/// `B` carries the pivot-1 column and the induced structure on `A` is a
/// staircase.
pub fn is_admissible(j: &PivotStructure, m: usize) -> Result<bool> {
    check_block_dims(j, m)?;
    if !j.is_full() {
        return Err(Error::InvalidStructure(format!("{j} is not a full pivot structure")));
    }
    let j1 = j.get(1);
    Ok((1..=m).contains(&j1) && is_staircase(&induced_structure_on_a(j, m)?))
}

/// `s_k = q_{m+k}` for an admissible `J`.
pub fn successor_from(j: &PivotStructure, m: usize) -> Result<SuccessorFunction> {
    if !is_admissible(j, m)? {
        return Err(Error::Inadmissible(format!("{j} with m = {m}")));
    }
    let q = j.to_columns();
    SuccessorFunction::new(q.as_slice()[m..].to_vec())
}

/// Validates a `B`-column pivot sequence `(q_1, .., q_m)` for state dimension
/// `n`: entries in `0..=n`, nonzero entries distinct, value 1 present.
pub fn check_b_pivots(q_b: &[usize], n: usize) -> Result<()> {
    if q_b.is_empty() || n == 0 {
        return Err(Error::Argument("m and n must be positive".into()));
    }
    check_distinct(q_b, n, "B pivot sequence")?;
    if !q_b.contains(&1) {
        return Err(Error::Inadmissible(
            "B pivot sequence does not contain the value 1".into(),
        ));
    }
    Ok(())
}

/// The successor function determined by the pivots of `B` alone: the
/// increasing list of values in `1..=n` missing from `q_b`, padded with
/// zeros.
pub fn successor_from_b_pivots(q_b: &[usize], n: usize) -> Result<SuccessorFunction> {
    check_b_pivots(q_b, n)?;
    let mut s: Vec<usize> = (1..=n).filter(|v| !q_b.contains(v)).collect();
    s.resize(n, 0);
    SuccessorFunction::new(s)
}

/// The admissible structure on `[B, A]` determined by the pivots of `B`.
pub fn admissible_from_b_pivots(q_b: &[usize], n: usize) -> Result<PivotStructure> {
    let s = successor_from_b_pivots(q_b, n)?;
    let mut q = q_b.to_vec();
    q.extend_from_slice(s.as_slice());
    Ok(ColumnPivotStructure::new(n, q)?.to_rows())
}

fn binomial(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * u128::from(n - i) / u128::from(i + 1);
    }
    acc
}

pub(crate) fn binom(n: usize, k: usize) -> u128 {
    binomial(n as u64, k as u64)
}

/// Number of admissible full pivot structures on `n × (m+n)` matrices:
/// `Σ_{ℓ=1}^{min(m,n)} ℓ! C(m,ℓ) C(n-1,ℓ-1)`.
pub fn count_admissible(m: usize, n: usize) -> u128 {
    let mut total = 0u128;
    let mut fact = 1u128;
    for l in 1..=m.min(n) {
        fact *= l as u128;
        total += fact * binom(m, l) * binom(n - 1, l - 1);
    }
    total
}
