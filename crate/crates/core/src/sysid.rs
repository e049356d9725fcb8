//! Realization numerics: controllability and observability matrices,
//! Gramians, input normalization and canonicalization of input-normal
//! pairs into a chart.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{
    condition_number, max_abs_diff, numerical_rank, qr_positive, row_orthonormality_residual,
    singular_values, spectral_radius,
};
use crate::young::Chart;

/// Direct vectorized solve below this order, fixed-point iteration above.
pub const STEIN_DIRECT_MAX: usize = 32;
/// Margin on `|λ| < 1` in stability checks.
pub const STABILITY_MARGIN: f64 = 1e-10;
/// Default relative singular-value threshold for chart membership.
pub const DEFAULT_RANK_TOL: f64 = 1e-8;

/// `x_{t+1} = A x_t + B u_t`, `y_t = C x_t + D u_t`. `C` and `D` may be
/// absent when only the input pair matters.
#[derive(Debug, Clone, PartialEq)]
pub struct StateSpace {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: Option<DMatrix<f64>>,
    pub d: Option<DMatrix<f64>>,
}

impl StateSpace {
    pub fn new(
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        c: Option<DMatrix<f64>>,
        d: Option<DMatrix<f64>>,
    ) -> Result<Self> {
        let n = a.nrows();
        if a.ncols() != n {
            return Err(Error::Dimension(format!("A is {}x{}", n, a.ncols())));
        }
        if b.nrows() != n {
            return Err(Error::Dimension(format!("B has {} rows, expected {n}", b.nrows())));
        }
        let m = b.ncols();
        if let Some(c) = &c {
            if c.ncols() != n {
                return Err(Error::Dimension(format!("C has {} columns, expected {n}", c.ncols())));
            }
        }
        if let Some(d) = &d {
            let p = c.as_ref().map_or(d.nrows(), DMatrix::nrows);
            if d.shape() != (p, m) {
                return Err(Error::Dimension(format!(
                    "D is {}x{}, expected {p}x{m}",
                    d.nrows(),
                    d.ncols()
                )));
            }
        }
        Ok(Self { a, b, c, d })
    }

    pub fn n(&self) -> usize {
        self.a.nrows()
    }

    pub fn m(&self) -> usize {
        self.b.ncols()
    }

    /// Output dimension, 0 when `C` is absent.
    pub fn p(&self) -> usize {
        self.c.as_ref().map_or(0, DMatrix::nrows)
    }

    /// `R = [[D, C], [B, A]]` when both `C` and `D` are present.
    pub fn realization_matrix(&self) -> Option<DMatrix<f64>> {
        let (c, d) = (self.c.as_ref()?, self.d.as_ref()?);
        let (n, m, p) = (self.n(), self.m(), self.p());
        let mut r = DMatrix::zeros(p + n, m + n);
        r.view_mut((0, 0), (p, m)).copy_from(d);
        r.view_mut((0, m), (p, n)).copy_from(c);
        r.view_mut((p, 0), (n, m)).copy_from(&self.b);
        r.view_mut((p, m), (n, n)).copy_from(&self.a);
        Some(r)
    }

    /// The `n × (m+n)` matrix `[B, A]`.
    pub fn input_pair(&self) -> DMatrix<f64> {
        concat_columns(&self.b, &self.a)
    }
}

pub(crate) fn concat_columns(left: &DMatrix<f64>, right: &DMatrix<f64>) -> DMatrix<f64> {
    let mut out = DMatrix::zeros(left.nrows(), left.ncols() + right.ncols());
    out.view_mut((0, 0), left.shape()).copy_from(left);
    out.view_mut((0, left.ncols()), right.shape()).copy_from(right);
    out
}

/// Symmetric positive semi-definite solution of a Stein equation.
#[derive(Debug, Clone, PartialEq)]
pub struct Gramian(DMatrix<f64>);

impl Gramian {
    pub fn new(w: DMatrix<f64>, tol: f64) -> Result<Self> {
        if !w.is_square() {
            return Err(Error::Dimension("Gramian must be square".into()));
        }
        if max_abs_diff(&w, &w.transpose()) > tol {
            return Err(Error::Domain("Gramian is not symmetric".into()));
        }
        if let Some(min) = w.clone().symmetric_eigenvalues().iter().copied().reduce(f64::min) {
            if min < -tol {
                return Err(Error::Domain(format!("Gramian has eigenvalue {min}")));
            }
        }
        Ok(Self(w))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    /// `max |W - I|`.
    pub fn distance_to_identity(&self) -> f64 {
        max_abs_diff(&self.0, &DMatrix::identity(self.0.nrows(), self.0.ncols()))
    }
}

/// `K = [B, AB, .., A^{depth-1} B]`.
pub fn controllability_matrix(a: &DMatrix<f64>, b: &DMatrix<f64>, depth: usize) -> Result<DMatrix<f64>> {
    let n = a.nrows();
    if !a.is_square() || b.nrows() != n {
        return Err(Error::Dimension(format!(
            "A is {}x{}, B is {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    if depth == 0 {
        return Err(Error::Argument("depth must be positive".into()));
    }
    let m = b.ncols();
    let mut k = DMatrix::zeros(n, depth * m);
    let mut block = b.clone();
    for j in 0..depth {
        k.view_mut((0, j * m), (n, m)).copy_from(&block);
        block = a * block;
    }
    Ok(k)
}

/// `O = [C; CA; ..; C A^{depth-1}]`.
pub fn observability_matrix(c: &DMatrix<f64>, a: &DMatrix<f64>, depth: usize) -> Result<DMatrix<f64>> {
    let k = controllability_matrix(&a.transpose(), &c.transpose(), depth)?;
    Ok(k.transpose())
}

pub fn is_stable(a: &DMatrix<f64>) -> bool {
    spectral_radius(a) < 1.0 - STABILITY_MARGIN
}

fn require_stable(a: &DMatrix<f64>) -> Result<()> {
    let radius = spectral_radius(a);
    if radius < 1.0 - STABILITY_MARGIN {
        Ok(())
    } else {
        Err(Error::Unstable { radius })
    }
}

/// Solves `W - A W Aᵀ = M` for stable `A` and symmetric `M`.
pub fn solve_stein(a: &DMatrix<f64>, m: &DMatrix<f64>) -> Result<Gramian> {
    let n = a.nrows();
    if !a.is_square() || m.shape() != (n, n) {
        return Err(Error::Dimension(format!(
            "A is {}x{}, M is {}x{}",
            a.nrows(),
            a.ncols(),
            m.nrows(),
            m.ncols()
        )));
    }
    if max_abs_diff(m, &m.transpose()) > 1e-10 * (1.0 + crate::linalg::max_abs(m)) {
        return Err(Error::Domain("right-hand side is not symmetric".into()));
    }
    require_stable(a)?;

    let w = if n <= STEIN_DIRECT_MAX {
        // vec(A W Aᵀ) = (A ⊗ A) vec(W) for column-major vec
        let op = DMatrix::identity(n * n, n * n) - a.kronecker(a);
        let rhs = DVector::from_column_slice(m.as_slice());
        let sol = op
            .lu()
            .solve(&rhs)
            .ok_or_else(|| Error::Domain("Stein operator is singular".into()))?;
        DMatrix::from_column_slice(n, n, sol.as_slice())
    } else {
        let mut w = m.clone();
        let mut converged = false;
        for _ in 0..10_000 {
            let next = a * &w * a.transpose() + m;
            let step = max_abs_diff(&next, &w);
            w = next;
            if step < 1e-12 {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::Domain("Stein fixed-point iteration did not converge".into()));
        }
        w
    };
    let w = (&w + w.transpose()) * 0.5;
    Gramian::new(w, 1e-8 * (1.0 + crate::linalg::max_abs(m)))
}

/// `W_c` solving `W - A W Aᵀ = B Bᵀ`.
pub fn controllability_gramian(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<Gramian> {
    solve_stein(a, &(b * b.transpose()))
}

/// `W_o` solving `W - Aᵀ W A = Cᵀ C`.
pub fn observability_gramian(c: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<Gramian> {
    solve_stein(&a.transpose(), &(c.transpose() * c))
}

/// Rank of `K` at depth `n` equals `n`.
pub fn is_controllable(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> Result<bool> {
    let k = controllability_matrix(a, b, a.nrows())?;
    Ok(numerical_rank(&k, tol) == a.nrows())
}

fn require_controllable(a: &DMatrix<f64>, b: &DMatrix<f64>, tol: f64) -> Result<()> {
    if is_controllable(a, b, tol)? {
        Ok(())
    } else {
        Err(Error::RankDeficient("the pair (A, B) is not controllable".into()))
    }
}

/// An input-normal pair `(T A T⁻¹, T B)` and the transform `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct InputNormalized {
    pub t: DMatrix<f64>,
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
}

/// Transforms a stable controllable pair to input-normal form with the
/// upper triangular `T` (positive diagonal) satisfying `Tᵀ T = W_c⁻¹`.
pub fn input_normalize(a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<InputNormalized> {
    require_stable(a)?;
    require_controllable(a, b, DEFAULT_RANK_TOL)?;
    let wc = controllability_gramian(a, b)?;
    let chol = wc
        .matrix()
        .clone()
        .cholesky()
        .ok_or_else(|| Error::RankDeficient("controllability Gramian is singular".into()))?;
    let winv = chol.inverse();
    let winv = (&winv + winv.transpose()) * 0.5;
    let g = winv
        .cholesky()
        .ok_or_else(|| Error::RankDeficient("inverse Gramian is not positive definite".into()))?
        .unpack();
    let t = g.transpose();
    let t_inv = t
        .clone()
        .try_inverse()
        .ok_or_else(|| Error::RankDeficient("normalizing transform is singular".into()))?;
    Ok(InputNormalized {
        a: &t * a * t_inv,
        b: &t * b,
        t,
    })
}

/// Columns of `K` picked by the chart's nice pivot structure, in pivot
/// order.
pub fn selected_columns(k: &DMatrix<f64>, chart: &Chart) -> DMatrix<f64> {
    let cols: Vec<usize> = chart.jtilde().as_slice().iter().map(|&c| c - 1).collect();
    k.select_columns(cols.iter())
}

/// Canonical representative of an input-normal pair in a chart.
#[derive(Debug, Clone, PartialEq)]
pub struct Canonical {
    pub q: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub a: DMatrix<f64>,
    /// Condition number of the selected controllability columns.
    pub condition: f64,
}

fn check_pair_dims(b: &DMatrix<f64>, a: &DMatrix<f64>, chart: &Chart) -> Result<()> {
    let (n, m) = (chart.n(), chart.m());
    if a.shape() != (n, n) || b.shape() != (n, m) {
        return Err(Error::Dimension(format!(
            "chart is for n = {n}, m = {m}; got A {}x{}, B {}x{}",
            a.nrows(),
            a.ncols(),
            b.nrows(),
            b.ncols()
        )));
    }
    Ok(())
}

fn selection_condition(k: &DMatrix<f64>, chart: &Chart, tol: f64) -> (DMatrix<f64>, f64, bool) {
    let sel = selected_columns(k, chart);
    let s = singular_values(&sel);
    let hi = s.first().copied().unwrap_or(0.0);
    let lo = s.last().copied().unwrap_or(0.0);
    let independent = hi > 0.0 && lo > tol * hi;
    (sel, condition_number_from(hi, lo), independent)
}

fn condition_number_from(hi: f64, lo: f64) -> f64 {
    if lo > 0.0 {
        hi / lo
    } else {
        f64::INFINITY
    }
}

/// The unique orthogonal `Q` making `[QB, QAQᵀ]` carry the chart's pivot
/// structure: `Q` is the transpose of the orthogonal QR factor of the
/// selected controllability columns.
pub fn orthogonal_canonicalize(
    b: &DMatrix<f64>,
    a: &DMatrix<f64>,
    chart: &Chart,
    tol: f64,
) -> Result<Canonical> {
    check_pair_dims(b, a, chart)?;
    let residual = row_orthonormality_residual(&concat_columns(b, a));
    if residual > tol.max(DEFAULT_RANK_TOL) {
        return Err(Error::Domain(format!(
            "[B, A] is not row-orthonormal (residual {residual:.3e})"
        )));
    }
    require_stable(a)?;
    let k = controllability_matrix(a, b, chart.n())?;
    let (sel, condition, independent) = selection_condition(&k, chart, tol);
    if !independent {
        return Err(Error::ChartMismatch {
            detail: format!("selected controllability columns are dependent (condition {condition:.3e})"),
            entry: None,
        });
    }
    let (qf, _) = qr_positive(&sel)?;
    let q = qf.transpose();
    Ok(Canonical {
        b: &q * b,
        a: &q * a * q.transpose(),
        q,
        condition,
    })
}

/// A chart whose nice selection is independent at the given pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChartFit<'a> {
    pub index: usize,
    pub chart: &'a Chart,
    pub condition: f64,
}

/// Every chart of `atlas` containing the pair, with the condition number
/// of its selected columns. The pair must be controllable.
pub fn find_charts<'a>(
    b: &DMatrix<f64>,
    a: &DMatrix<f64>,
    atlas: &'a [Chart],
    tol: f64,
) -> Result<Vec<ChartFit<'a>>> {
    let n = a.nrows();
    require_controllable(a, b, tol)?;
    let k = controllability_matrix(a, b, n)?;
    let mut fits = Vec::new();
    for (index, chart) in atlas.iter().enumerate() {
        check_pair_dims(b, a, chart)?;
        let (_, condition, independent) = selection_condition(&k, chart, tol);
        if independent {
            fits.push(ChartFit {
                index,
                chart,
                condition,
            });
        }
    }
    Ok(fits)
}

/// Keep the leading `r` states.
pub fn truncate(ss: &StateSpace, r: usize) -> Result<StateSpace> {
    let n = ss.n();
    if r == 0 || r > n {
        return Err(Error::Argument(format!("truncation order {r} outside 1..={n}")));
    }
    let m = ss.m();
    StateSpace::new(
        ss.a.view((0, 0), (r, r)).into_owned(),
        ss.b.view((0, 0), (r, m)).into_owned(),
        ss.c.as_ref().map(|c| c.view((0, 0), (c.nrows(), r)).into_owned()),
        ss.d.clone(),
    )
}

/// Condition number of `K` selected by a chart, without the rank verdict.
pub fn chart_condition(b: &DMatrix<f64>, a: &DMatrix<f64>, chart: &Chart) -> Result<f64> {
    check_pair_dims(b, a, chart)?;
    let k = controllability_matrix(a, b, chart.n())?;
    Ok(condition_number(&selected_columns(&k, chart)))
}
