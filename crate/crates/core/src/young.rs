//! Numbered Young diagrams, nice selections and the chart atlas.
//!
//! A diagram `Y` is an `m × n` array in which each of `1..=n` occurs exactly
//! once; entry `y_{i,j}` is the pivot row of column `i` of the block
//! `A^{j-1} B` of the controllability matrix. Admissible diagrams are in
//! bijection with admissible pivot structures on `[B, A]`.

use std::collections::HashSet;
use std::fmt;

use crate::error::{Error, Result};
use crate::pivot::{
    self, check_b_pivots, successor_from_b_pivots, ColumnPivotStructure, PivotStructure,
};

/// Member of `𝒴(m, n)`, stored row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NumberedYoungDiagram {
    m: usize,
    n: usize,
    y: Vec<usize>,
}

impl NumberedYoungDiagram {
    pub fn new(rows: Vec<Vec<usize>>) -> Result<Self> {
        let m = rows.len();
        let n = rows.first().map_or(0, Vec::len);
        if m == 0 || n == 0 {
            return Err(Error::InvalidDiagram("empty array".into()));
        }
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidDiagram("ragged rows".into()));
        }
        Self::from_flat(m, n, rows.concat())
    }

    pub fn from_flat(m: usize, n: usize, y: Vec<usize>) -> Result<Self> {
        if m == 0 || n == 0 || y.len() != m * n {
            return Err(Error::InvalidDiagram(format!(
                "expected {m}x{n} entries, got {}",
                y.len()
            )));
        }
        let mut seen = vec![false; n + 1];
        for &v in &y {
            if v > n {
                return Err(Error::InvalidDiagram(format!("value {v} exceeds n = {n}")));
            }
            if v > 0 {
                if seen[v] {
                    return Err(Error::InvalidDiagram(format!("value {v} occurs twice")));
                }
                seen[v] = true;
            }
        }
        if let Some(missing) = (1..=n).find(|&v| !seen[v]) {
            return Err(Error::InvalidDiagram(format!("value {missing} is missing")));
        }
        Ok(Self { m, n, y })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `y_{i,j}`, 1-based.
    pub fn get(&self, i: usize, j: usize) -> usize {
        self.y[(i - 1) * self.n + (j - 1)]
    }

    pub fn row(&self, i: usize) -> &[usize] {
        &self.y[(i - 1) * self.n..i * self.n]
    }

    pub fn rows(&self) -> Vec<Vec<usize>> {
        self.y.chunks(self.n).map(<[usize]>::to_vec).collect()
    }

    /// The first column, i.e. the pivot rows `(q_1, .., q_m)` of `B`.
    pub fn first_column(&self) -> Vec<usize> {
        (1..=self.m).map(|i| self.get(i, 1)).collect()
    }

    /// The unique `(i, j)` with `y_{i,j} = k`.
    pub fn position(&self, k: usize) -> (usize, usize) {
        let idx = self
            .y
            .iter()
            .position(|&v| v == k)
            .expect("every value 1..=n occurs in a diagram");
        (idx / self.n + 1, idx % self.n + 1)
    }

    /// Number of nonzero rows.
    pub fn p_b(&self) -> usize {
        (1..=self.m).filter(|&i| self.row(i).iter().any(|&v| v > 0)).count()
    }

    pub fn is_left_aligned(&self) -> bool {
        (1..=self.m).all(|i| {
            let row = self.row(i);
            row.windows(2).all(|w| w[1] == 0 || w[0] > 0)
        })
    }

    fn last_nonzero(&self, i: usize) -> Option<usize> {
        self.row(i).iter().rev().copied().find(|&v| v > 0)
    }

    /// The three defining properties of an admissible numbered Young diagram.
    pub fn is_admissible(&self) -> bool {
        if !self.is_left_aligned() {
            return false;
        }
        let n = self.n;
        let p_b = self.p_b();
        let lasts: HashSet<usize> = (1..=self.m).filter_map(|i| self.last_nonzero(i)).collect();
        let expected: HashSet<usize> = (n - p_b + 1..=n).collect();
        if lasts != expected {
            return false;
        }
        // Order preservation along rows: if y_{i,j+1} > y_{i',j'+1} > 0 then
        // y_{i,j} > y_{i',j'} > 0. Each successor has a unique left neighbour,
        // so compare the (left, right) pairs.
        let mut pairs = Vec::new();
        for i in 1..=self.m {
            let row = self.row(i);
            for w in row.windows(2) {
                if w[1] > 0 {
                    pairs.push((w[0], w[1]));
                }
            }
        }
        pairs.sort_by_key(|&(_, right)| right);
        pairs.windows(2).all(|w| w[0].0 < w[1].0)
    }

    fn require_admissible(&self) -> Result<()> {
        if self.is_admissible() {
            Ok(())
        } else {
            Err(Error::Inadmissible(format!("diagram {:?}", self.rows())))
        }
    }
}

impl fmt::Display for NumberedYoungDiagram {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, row) in self.y.chunks(self.n).enumerate() {
            if i > 0 {
                writeln!(f)?;
            }
            let cells: Vec<String> = row
                .iter()
                .map(|&v| if v == 0 { ".".to_string() } else { v.to_string() })
                .collect();
            write!(f, "{}", cells.join(" "))?;
        }
        Ok(())
    }
}

/// A vector of dynamical indices, member of `𝒟(m, n)`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct DynamicalIndices {
    d: Vec<usize>,
}

impl DynamicalIndices {
    pub fn new(d: Vec<usize>, n: usize) -> Result<Self> {
        if d.is_empty() {
            return Err(Error::Argument("m must be positive".into()));
        }
        let sum: usize = d.iter().sum();
        if n == 0 || sum != n {
            return Err(Error::Argument(format!(
                "dynamical indices {d:?} sum to {sum}, expected {n}"
            )));
        }
        Ok(Self { d })
    }

    pub fn m(&self) -> usize {
        self.d.len()
    }

    pub fn n(&self) -> usize {
        self.d.iter().sum()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.d
    }

    /// Number of nonzero indices (pivots in `B`).
    pub fn p_b(&self) -> usize {
        self.d.iter().filter(|&&v| v > 0).count()
    }

    /// The left-aligned binary Young diagram `Z` of the nice selection.
    pub fn young_diagram(&self) -> Vec<Vec<u8>> {
        let n = self.n();
        self.d
            .iter()
            .map(|&di| (0..n).map(|j| u8::from(j < di)).collect())
            .collect()
    }
}

/// All of `𝒟(m, n)` in colexicographic order (last index varies slowest).
pub fn dynamical_index_set(m: usize, n: usize) -> Vec<DynamicalIndices> {
    fn rec(m: usize, remaining: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() + 1 == m {
            prefix.push(remaining);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for v in 0..=remaining {
            prefix.push(v);
            rec(m, remaining - v, prefix, out);
            prefix.pop();
        }
    }
    if m == 0 || n == 0 {
        return Vec::new();
    }
    let mut all = Vec::new();
    rec(m, n, &mut Vec::with_capacity(m), &mut all);
    all.sort_by(|a, b| a.iter().rev().cmp(b.iter().rev()));
    all.into_iter().map(|d| DynamicalIndices { d }).collect()
}

/// Successor chains: `y_{i,1} = q_i`, `y_{i,j+1} = S(y_{i,j})`.
pub fn diagram_from_admissible(j: &PivotStructure, m: usize) -> Result<NumberedYoungDiagram> {
    let s = pivot::successor_from(j, m)?;
    let q = j.to_columns();
    chain_diagram(&q.as_slice()[..m], j.n(), |k| s.apply(k))
}

fn chain_diagram(
    q_b: &[usize],
    n: usize,
    succ: impl Fn(usize) -> usize,
) -> Result<NumberedYoungDiagram> {
    let m = q_b.len();
    let mut y = vec![0; m * n];
    for (i, &q) in q_b.iter().enumerate() {
        let mut v = q;
        for j in 0..n {
            y[i * n + j] = v;
            v = succ(v);
        }
    }
    NumberedYoungDiagram::from_flat(m, n, y)
}

/// Greedy fill: repeatedly append the next unassigned value after the
/// smallest entry whose right neighbour is still open.
pub fn diagram_procedure2(q_b: &[usize], n: usize) -> Result<NumberedYoungDiagram> {
    check_b_pivots(q_b, n)?;
    let m = q_b.len();
    let mut y = vec![0usize; m * n];
    let mut open = vec![true; m * n];
    let mut used = vec![false; n + 1];
    for (i, &q) in q_b.iter().enumerate() {
        y[i * n] = q;
        open[i * n] = false;
        used[q] = true;
    }
    for k in (1..=n).filter(|&k| !used[k]) {
        let slot = (0..m)
            .flat_map(|i| (0..n - 1).map(move |j| (i, j)))
            .filter(|&(i, j)| y[i * n + j] > 0 && open[i * n + j + 1])
            .min_by_key(|&(i, j)| y[i * n + j]);
        let (i, j) = slot.ok_or_else(|| {
            Error::Inadmissible(format!("no open slot for value {k} from {q_b:?}"))
        })?;
        y[i * n + j + 1] = k;
        open[i * n + j + 1] = false;
    }
    NumberedYoungDiagram::from_flat(m, n, y)
}

/// Output of the backward `η` recursion.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EtaRecursion {
    pub diagram: NumberedYoungDiagram,
    /// `eta[k]` is `η_k` for `k = 0..=n`.
    pub eta: Vec<Vec<usize>>,
    /// `mu[k - 1]` is `μ(k)`, the position of the entry 1 in `η_k`.
    pub mu: Vec<usize>,
}

/// Backward recursion `η_n = q, .., η_0`.
pub fn diagram_procedure3(q_b: &[usize], n: usize) -> Result<EtaRecursion> {
    check_b_pivots(q_b, n)?;
    let m = q_b.len();
    let mut eta = vec![Vec::new(); n + 1];
    eta[n] = q_b.to_vec();
    for k in (0..n).rev() {
        let next = &eta[k + 1];
        let mut cur = vec![0usize; m];
        let mut reset = None;
        for (i, &v) in next.iter().enumerate() {
            match v {
                0 => {}
                1 => reset = Some(i),
                _ => cur[i] = v - 1,
            }
        }
        if let Some(i) = reset {
            let xi = (1..).find(|x| !cur.contains(x)).expect("unbounded search");
            if xi <= k {
                cur[i] = xi;
            }
        }
        eta[k] = cur;
    }
    let mut mu = Vec::with_capacity(n);
    for (k, e) in eta.iter().enumerate().skip(1) {
        let ones: Vec<usize> = (0..m).filter(|&i| e[i] == 1).collect();
        if ones.len() != 1 {
            return Err(Error::Inadmissible(format!(
                "eta_{k} = {e:?} does not contain exactly one entry 1"
            )));
        }
        mu.push(ones[0] + 1);
    }
    // y_{i,j} = k  iff  (η_{n+1-k})_i = 1
    let mut rows = vec![Vec::new(); m];
    for k in 1..=n {
        rows[mu[n - k] - 1].push(k);
    }
    let rows = rows
        .into_iter()
        .map(|mut r| {
            r.resize(n, 0);
            r
        })
        .collect();
    Ok(EtaRecursion {
        diagram: NumberedYoungDiagram::new(rows)?,
        eta,
        mu,
    })
}

/// Successor chains started from the pivots of `B` directly.
pub fn diagram_procedure1(q_b: &[usize], n: usize) -> Result<NumberedYoungDiagram> {
    let s = successor_from_b_pivots(q_b, n)?;
    chain_diagram(q_b, n, |k| s.apply(k))
}

/// Inverse of the successor chains: read `S` off the rows of `Y`, take the first
/// column as the pivots of `B`, and assemble `J`.
pub fn admissible_from_diagram(y: &NumberedYoungDiagram) -> Result<PivotStructure> {
    y.require_admissible()?;
    let (m, n) = (y.m(), y.n());
    let mut s = vec![0usize; n];
    for i in 1..=m {
        for w in y.row(i).windows(2) {
            if w[0] > 0 {
                s[w[0] - 1] = w[1];
            }
        }
    }
    let mut q = y.first_column();
    q.extend_from_slice(&s);
    let j = ColumnPivotStructure::new(n, q)?.to_rows();
    if !pivot::is_admissible(&j, m)? {
        return Err(Error::Inadmissible(format!("recovered {j} is not admissible")));
    }
    Ok(j)
}

/// `J̃(k) = (j - 1) m + i` where `y_{i,j} = k`.
pub fn induced_full_structure(y: &NumberedYoungDiagram) -> Result<PivotStructure> {
    y.require_admissible()?;
    let m = y.m();
    let jt = (1..=y.n())
        .map(|k| {
            let (i, j) = y.position(k);
            (j - 1) * m + i
        })
        .collect();
    PivotStructure::new(y.n() * m, jt)
}

pub fn dynamical_indices(y: &NumberedYoungDiagram) -> DynamicalIndices {
    let d = (1..=y.m())
        .map(|i| y.row(i).iter().filter(|&&v| v > 0).count())
        .collect();
    DynamicalIndices { d }
}

/// Shift the `d_i` entries of each row `n - d_i` places to the right.
pub fn right_align(y: &NumberedYoungDiagram) -> Result<NumberedYoungDiagram> {
    if !y.is_left_aligned() {
        return Err(Error::InvalidDiagram("diagram is not left-aligned".into()));
    }
    let n = y.n();
    let d = dynamical_indices(y);
    let mut out = vec![0; y.m() * n];
    for (i, &di) in d.as_slice().iter().enumerate() {
        for j in 0..di {
            out[i * n + (n - di) + j] = y.get(i + 1, j + 1);
        }
    }
    NumberedYoungDiagram::from_flat(y.m(), n, out)
}

/// Stack the columns of a right-aligned array with its rows visited in
/// `order` (1-based row indices), dropping zeros.
pub fn stacked_sequence(y_r: &NumberedYoungDiagram, order: &[usize]) -> Vec<usize> {
    (1..=y_r.n())
        .flat_map(|j| order.iter().map(move |&i| y_r.get(i, j)))
        .filter(|&v| v > 0)
        .collect()
}

/// The numbering of the nice selection `d` obtained by filling the
/// right-aligned shape column by column, visiting the nonzero rows in
/// `order`.
pub fn numbering_for_order(d: &DynamicalIndices, order: &[usize]) -> Result<NumberedYoungDiagram> {
    let (m, n) = (d.m(), d.n());
    let mut nonzero: Vec<usize> = (1..=m).filter(|&i| d.as_slice()[i - 1] > 0).collect();
    let mut sorted = order.to_vec();
    sorted.sort_unstable();
    nonzero.sort_unstable();
    if sorted != nonzero {
        return Err(Error::Argument(format!(
            "row order {order:?} is not a permutation of the nonzero rows {nonzero:?}"
        )));
    }
    let mut y = vec![0; m * n];
    let mut counter = 1;
    for col in 1..=n {
        for &i in order {
            let di = d.as_slice()[i - 1];
            if col > n - di {
                let j = col - (n - di);
                y[(i - 1) * n + (j - 1)] = counter;
                counter += 1;
            }
        }
    }
    NumberedYoungDiagram::from_flat(m, n, y)
}

fn next_permutation(v: &mut [usize]) -> bool {
    if v.len() < 2 {
        return false;
    }
    let mut i = v.len() - 1;
    while i > 0 && v[i - 1] >= v[i] {
        i -= 1;
    }
    if i == 0 {
        return false;
    }
    let mut j = v.len() - 1;
    while v[j] <= v[i - 1] {
        j -= 1;
    }
    v.swap(i - 1, j);
    v[i..].reverse();
    true
}

/// All `p_B!` admissible numberings of the nice selection `d`, one per
/// ordering of the nonzero rows, orderings taken in lexicographic order.
pub fn numberings_for(d: &DynamicalIndices) -> Vec<NumberedYoungDiagram> {
    let mut order: Vec<usize> = (1..=d.m()).filter(|&i| d.as_slice()[i - 1] > 0).collect();
    let mut out = Vec::new();
    loop {
        out.push(numbering_for_order(d, &order).expect("order is a permutation"));
        if !next_permutation(&mut order) {
            break;
        }
    }
    out
}

/// Row order that sorts the dynamical indices non-increasingly, keeping
/// rows with equal indices in their original order.
pub fn minimal_order(d: &DynamicalIndices) -> Vec<usize> {
    let mut order: Vec<usize> = (1..=d.m()).filter(|&i| d.as_slice()[i - 1] > 0).collect();
    order.sort_by_key(|&i| std::cmp::Reverse(d.as_slice()[i - 1]));
    order
}

/// Direction-vector indices `μ(1), .., μ(n)` of a chart: `u_{n+1-k} =
/// e_{i(k)}` where `y_{i(k), j(k)} = k`.
pub fn direction_indices(y: &NumberedYoungDiagram) -> Result<Vec<usize>> {
    y.require_admissible()?;
    let n = y.n();
    let mut mu = vec![0; n];
    for k in 1..=n {
        mu[n - k] = y.position(k).0;
    }
    Ok(mu)
}

/// One local canonical form: an admissible diagram together with the
/// structures it induces.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Chart {
    d: DynamicalIndices,
    diagram: NumberedYoungDiagram,
    j: PivotStructure,
    jtilde: PivotStructure,
    u_idx: Vec<usize>,
}

impl Chart {
    /// Derives `J`, `J̃` and the direction indices from an admissible
    /// diagram and cross-checks them against Procedures 1 and 3.
    pub fn from_diagram(diagram: NumberedYoungDiagram) -> Result<Self> {
        let m = diagram.m();
        let j = admissible_from_diagram(&diagram)?;
        let jtilde = induced_full_structure(&diagram)?;
        let u_idx = direction_indices(&diagram)?;
        let d = dynamical_indices(&diagram);

        let forward = diagram_from_admissible(&j, m)?;
        let backward = diagram_procedure3(&diagram.first_column(), diagram.n())?;
        if forward != diagram || backward.diagram != diagram || backward.mu != u_idx {
            return Err(Error::Inadmissible(
                "chart representations are inconsistent".into(),
            ));
        }
        Ok(Self {
            d,
            diagram,
            j,
            jtilde,
            u_idx,
        })
    }

    /// Chart from the pivots `(q_1, .., q_m)` of `B`.
    pub fn from_b_pivots(q_b: &[usize], n: usize) -> Result<Self> {
        Self::from_diagram(diagram_procedure1(q_b, n)?)
    }

    pub fn m(&self) -> usize {
        self.diagram.m()
    }

    pub fn n(&self) -> usize {
        self.diagram.n()
    }

    pub fn dynamical_indices(&self) -> &DynamicalIndices {
        &self.d
    }

    pub fn diagram(&self) -> &NumberedYoungDiagram {
        &self.diagram
    }

    /// Admissible structure on `[B, A]`.
    pub fn j(&self) -> &PivotStructure {
        &self.j
    }

    /// Nice full structure on `K`.
    pub fn jtilde(&self) -> &PivotStructure {
        &self.jtilde
    }

    /// `μ(1), .., μ(n)`, so that `u_k = e_{μ(k)}`.
    pub fn u_idx(&self) -> &[usize] {
        &self.u_idx
    }

    /// Glyph template of `[B, A]`: `+` at pivots, `0` below a pivot, `*`
    /// elsewhere.
    pub fn template(&self) -> Vec<String> {
        let (n, r) = (self.j.n(), self.j.r());
        let mut grid = vec![vec!['*'; r]; n];
        for k in 1..=n {
            let col = self.j.get(k) - 1;
            grid[k - 1][col] = '+';
            for row in grid.iter_mut().skip(k) {
                row[col] = '0';
            }
        }
        grid.into_iter().map(|r| r.into_iter().collect()).collect()
    }
}

/// Every admissible chart for `m` inputs and order `n`, grouped by `d` in
/// colexicographic order and, within `d`, by row ordering.
pub fn enumerate_all(m: usize, n: usize) -> Vec<Chart> {
    dynamical_index_set(m, n)
        .iter()
        .flat_map(numberings_for)
        .map(|y| Chart::from_diagram(y).expect("numberings are admissible"))
        .collect()
}

/// One chart per `d ∈ 𝒟(m, n)`, numbered by the stable non-increasing row
/// order.
pub fn minimal_atlas(m: usize, n: usize) -> Vec<Chart> {
    dynamical_index_set(m, n)
        .iter()
        .map(|d| {
            let y = numbering_for_order(d, &minimal_order(d)).expect("valid order");
            Chart::from_diagram(y).expect("minimal numbering is admissible")
        })
        .collect()
}

/// `|𝒟(m, n)| = C(m + n - 1, m - 1)`.
pub fn minimal_atlas_size(m: usize, n: usize) -> u128 {
    pivot::binom(m + n - 1, m - 1)
}
