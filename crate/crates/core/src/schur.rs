//! Lossless realizations from Schur vectors with all interpolation points at
//! zero, and the inverse map back to parameters.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::linalg::{max_abs, orthogonality_residual, random_orthogonal};
use crate::sysid::StateSpace;
use crate::young::{direction_indices, NumberedYoungDiagram};

/// Schur vectors must satisfy `‖v‖ < NORM_MARGIN`.
pub const NORM_MARGIN: f64 = 1.0 - 1e-12;
/// Orthogonality tolerance on `D0` and on input directions.
pub const ORTHO_TOL: f64 = 1e-9;
/// Radius cap for random Schur vectors.
pub const SAMPLE_RADIUS: f64 = 0.95;

/// Schur vectors `v_1, .., v_n` and the orthogonal initial block `D0`.
#[derive(Debug, Clone, PartialEq)]
pub struct SchurParams {
    v: Vec<DVector<f64>>,
    d0: DMatrix<f64>,
}

impl SchurParams {
    pub fn new(v: Vec<DVector<f64>>, d0: DMatrix<f64>) -> Result<Self> {
        let m = d0.nrows();
        if m == 0 || !d0.is_square() {
            return Err(Error::Dimension(format!("D0 is {}x{}", d0.nrows(), d0.ncols())));
        }
        if v.is_empty() {
            return Err(Error::Argument("at least one Schur vector is required".into()));
        }
        for (k, vk) in v.iter().enumerate() {
            if vk.len() != m {
                return Err(Error::Dimension(format!(
                    "v_{} has length {}, expected {m}",
                    k + 1,
                    vk.len()
                )));
            }
            let norm = vk.norm();
            if norm.is_nan() || norm >= NORM_MARGIN {
                return Err(Error::SchurNorm { index: k + 1, norm });
            }
        }
        let res = orthogonality_residual(&d0);
        if res.is_nan() || res > ORTHO_TOL {
            return Err(Error::Domain(format!("D0 is not orthogonal (residual {res:.3e})")));
        }
        Ok(Self { v, d0 })
    }

    /// Zero Schur vectors and `D0 = I`.
    pub fn zero(m: usize, n: usize) -> Result<Self> {
        Self::new(vec![DVector::zeros(m); n], DMatrix::identity(m, m))
    }

    /// Random parameters: uniform directions, radius `0.95 U^{1/m}`, Haar
    /// distributed `D0`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, m: usize, n: usize) -> Self {
        let v = (0..n).map(|_| random_schur_vector(rng, m)).collect();
        let d0 = random_orthogonal(rng, m);
        Self::new(v, d0).expect("sampled parameters are valid")
    }

    pub fn m(&self) -> usize {
        self.d0.nrows()
    }

    pub fn n(&self) -> usize {
        self.v.len()
    }

    /// `v[k - 1]` is `v_k`.
    pub fn v(&self) -> &[DVector<f64>] {
        &self.v
    }

    pub fn d0(&self) -> &DMatrix<f64> {
        &self.d0
    }

    /// Largest componentwise difference over all `v_k` and `D0`.
    pub fn max_abs_diff(&self, other: &SchurParams) -> f64 {
        assert_eq!((self.m(), self.n()), (other.m(), other.n()), "shape mismatch");
        let dv = self
            .v
            .iter()
            .zip(&other.v)
            .map(|(a, b)| (a - b).amax())
            .fold(0.0, f64::max);
        dv.max(crate::linalg::max_abs_diff(&self.d0, &other.d0))
    }
}

pub fn random_schur_vector<R: Rng + ?Sized>(rng: &mut R, m: usize) -> DVector<f64> {
    let dir = loop {
        let g = DVector::from_fn(m, |_, _| rng.sample::<f64, _>(StandardNormal));
        let norm = g.norm();
        if norm > 1e-12 {
            break g / norm;
        }
    };
    let u: f64 = rng.random();
    dir * (SAMPLE_RADIUS * u.powf(1.0 / m as f64))
}

/// `R = [[D, C], [B, A]]` with `D` of size `m × m` and `A` of size `n × n`.
#[derive(Debug, Clone, PartialEq)]
pub struct RealizationMatrix {
    m: usize,
    n: usize,
    r: DMatrix<f64>,
}

impl RealizationMatrix {
    pub fn new(m: usize, n: usize, r: DMatrix<f64>) -> Result<Self> {
        if r.shape() != (m + n, m + n) {
            return Err(Error::Dimension(format!(
                "realization matrix is {}x{}, expected {}x{}",
                r.nrows(),
                r.ncols(),
                m + n,
                m + n
            )));
        }
        Ok(Self { m, n, r })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.r
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.r
    }

    pub fn d(&self) -> DMatrix<f64> {
        self.r.view((0, 0), (self.m, self.m)).into_owned()
    }

    pub fn c(&self) -> DMatrix<f64> {
        self.r.view((0, self.m), (self.m, self.n)).into_owned()
    }

    pub fn b(&self) -> DMatrix<f64> {
        self.r.view((self.m, 0), (self.n, self.m)).into_owned()
    }

    pub fn a(&self) -> DMatrix<f64> {
        self.r.view((self.m, self.m), (self.n, self.n)).into_owned()
    }

    /// `[B, A]`, the last `n` rows.
    pub fn input_pair(&self) -> DMatrix<f64> {
        self.r.rows(self.m, self.n).into_owned()
    }

    pub fn orthogonality_residual(&self) -> f64 {
        orthogonality_residual(&self.r)
    }
}

pub fn extract_state_space(r: &RealizationMatrix) -> StateSpace {
    StateSpace::new(r.a(), r.b(), Some(r.c()), Some(r.d())).expect("blocks are consistent")
}

/// `[[v, I - α v vᵀ], [√(1 - ‖v‖²), -vᵀ]]`.
pub fn build_v(v: &DVector<f64>) -> Result<DMatrix<f64>> {
    let m = v.len();
    let s = v.norm_squared();
    if s.is_nan() || s.sqrt() >= NORM_MARGIN {
        return Err(Error::Domain(format!("Schur vector norm {} is not below 1", s.sqrt())));
    }
    let c = (1.0 - s).sqrt();
    let alpha = 1.0 / (1.0 + c);
    let mut out = DMatrix::zeros(m + 1, m + 1);
    out.view_mut((0, 0), (m, 1)).copy_from(v);
    let block = DMatrix::identity(m, m) - v * v.transpose() * alpha;
    out.view_mut((0, 1), (m, m)).copy_from(&block);
    out[(m, 0)] = c;
    out.view_mut((m, 1), (1, m)).copy_from(&(-v.transpose()));
    Ok(out)
}

/// `[[u, I - u uᵀ], [0, uᵀ]]` for a unit vector `u`.
pub fn build_u(u: &DVector<f64>) -> Result<DMatrix<f64>> {
    let m = u.len();
    if m == 0 || (u.norm() - 1.0).abs() > ORTHO_TOL {
        return Err(Error::Domain(format!("direction vector has norm {}", u.norm())));
    }
    let mut out = DMatrix::zeros(m + 1, m + 1);
    out.view_mut((0, 0), (m, 1)).copy_from(u);
    let block = DMatrix::identity(m, m) - u * u.transpose();
    out.view_mut((0, 1), (m, m)).copy_from(&block);
    out.view_mut((m, 1), (1, m)).copy_from(&u.transpose());
    Ok(out)
}

/// `e_i` in `R^m`, 1-based.
pub fn basis_vector(m: usize, i: usize) -> DVector<f64> {
    let mut e = DVector::zeros(m);
    e[i - 1] = 1.0;
    e
}

/// `diag(I_{n-k}, block, I_{k-1})`.
fn embed(block: &DMatrix<f64>, n: usize, k: usize) -> DMatrix<f64> {
    let size = n + block.nrows() - 1;
    let mut out = DMatrix::identity(size, size);
    out.view_mut((n - k, n - k), block.shape()).copy_from(block);
    out
}

fn check_directions(u_idx: &[usize], m: usize, n: usize) -> Result<()> {
    if u_idx.len() != n {
        return Err(Error::Dimension(format!(
            "{} direction indices for {n} Schur vectors",
            u_idx.len()
        )));
    }
    if let Some(&bad) = u_idx.iter().find(|&&i| i == 0 || i > m) {
        return Err(Error::Argument(format!("direction index {bad} outside 1..={m}")));
    }
    Ok(())
}

fn directions(u_idx: &[usize], m: usize) -> Vec<DVector<f64>> {
    u_idx.iter().map(|&i| basis_vector(m, i)).collect()
}

/// `R_0 = diag(I_n, D0)`.
fn initial_block(params: &SchurParams) -> DMatrix<f64> {
    let (m, n) = (params.m(), params.n());
    let mut r0 = DMatrix::identity(m + n, m + n);
    r0.view_mut((n, n), (m, m)).copy_from(&params.d0);
    r0
}

/// `Γ_n ⋯ Γ_1 R_0`, a positive `m`-upper Hessenberg matrix.
pub fn hessenberg_factor(params: &SchurParams) -> DMatrix<f64> {
    let n = params.n();
    let mut h = initial_block(params);
    for k in 1..=n {
        let v = build_v(&params.v[k - 1]).expect("validated Schur vector");
        h = embed(&v, n, k) * h;
    }
    h
}

/// `Δ_1ᵀ ⋯ Δ_nᵀ`.
pub fn direction_factor(u: &[DVector<f64>]) -> Result<DMatrix<f64>> {
    let n = u.len();
    let m = u.first().map_or(0, DVector::len);
    let mut out = DMatrix::identity(m + n, m + n);
    for (k, uk) in u.iter().enumerate() {
        if uk.len() != m {
            return Err(Error::Dimension("direction vectors differ in length".into()));
        }
        out *= embed(&build_u(uk)?, n, k + 1).transpose();
    }
    Ok(out)
}

/// `R = Γ_n ⋯ Γ_1 R_0 Δ_1ᵀ ⋯ Δ_nᵀ` with `u_k = e_{u_idx[k-1]}`.
pub fn build_r(params: &SchurParams, u_idx: &[usize]) -> Result<RealizationMatrix> {
    let (m, n) = (params.m(), params.n());
    check_directions(u_idx, m, n)?;
    build_r_with_directions(params, &directions(u_idx, m))
}

/// As [`build_r`] with arbitrary unit direction vectors.
pub fn build_r_with_directions(params: &SchurParams, u: &[DVector<f64>]) -> Result<RealizationMatrix> {
    let (m, n) = (params.m(), params.n());
    if u.len() != n || u.iter().any(|x| x.len() != m) {
        return Err(Error::Dimension(format!("expected {n} direction vectors of length {m}")));
    }
    let r = hessenberg_factor(params) * direction_factor(u)?;
    RealizationMatrix::new(m, n, r)
}

/// First entry violating positive `m`-upper Hessenberg form, as
/// `(row, column, value)` with 0-based indices. Sub-diagonal entries are
/// checked before the entries below them, column by column.
pub fn hessenberg_violation(h: &DMatrix<f64>, m: usize, tol: f64) -> Result<Option<(usize, usize, f64)>> {
    let size = h.nrows();
    if !h.is_square() || size < m {
        return Err(Error::Dimension(format!(
            "expected a square matrix of size at least {m}, got {}x{}",
            h.nrows(),
            h.ncols()
        )));
    }
    for j in 0..size.saturating_sub(m) {
        let x = h[(j + m, j)];
        if x.is_nan() || x <= tol {
            return Ok(Some((j + m, j, x)));
        }
        for i in j + m + 1..size {
            if h[(i, j)].is_nan() || h[(i, j)].abs() > tol {
                return Ok(Some((i, j, h[(i, j)])));
            }
        }
    }
    Ok(None)
}

pub fn is_positive_m_upper_hessenberg(h: &DMatrix<f64>, m: usize, tol: f64) -> Result<bool> {
    Ok(hessenberg_violation(h, m, tol)?.is_none())
}

/// Direction indices of an admissible diagram.
pub fn direction_vectors_from_chart(y: &NumberedYoungDiagram) -> Result<Vec<usize>> {
    direction_indices(y)
}

/// For each `k`, if `ℓ < k` is the last earlier index with `μ(ℓ) = μ(k)`,
/// then `μ(k+1)` must be one of `μ(ℓ+1), .., μ(k)`.
pub fn check_direction_condition(u_idx: &[usize]) -> bool {
    (1..u_idx.len()).all(|k| {
        let mu_k = u_idx[k - 1];
        match (1..k).rev().find(|&l| u_idx[l - 1] == mu_k) {
            Some(l) => u_idx[l..k].contains(&u_idx[k]),
            None => true,
        }
    })
}

/// `D_k u_k - v_k` for `k = 1..n`, where `D_k` is the feedthrough of the
/// lower-right `(m+k)` block of `Γ_k ⋯ Γ_1 R_0 Δ_1ᵀ ⋯ Δ_kᵀ`.
pub fn interpolation_residuals(params: &SchurParams, u_idx: &[usize]) -> Result<Vec<DVector<f64>>> {
    let (m, n) = (params.m(), params.n());
    check_directions(u_idx, m, n)?;
    let u = directions(u_idx, m);
    let mut left = initial_block(params);
    let mut right = DMatrix::identity(m + n, m + n);
    let mut out = Vec::with_capacity(n);
    for k in 1..=n {
        left = embed(&build_v(&params.v[k - 1])?, n, k) * left;
        right *= embed(&build_u(&u[k - 1])?, n, k).transpose();
        let rk = &left * &right;
        let dk = rk.view((n - k, n - k), (m, m));
        out.push(dk * &u[k - 1] - &params.v[k - 1]);
    }
    Ok(out)
}

/// Inverse of [`build_r`]: undoes the direction factor, checks the
/// Hessenberg form and peels the `Γ_k` factors from the outside in.
pub fn recover_params(r: &RealizationMatrix, u_idx: &[usize], tol: f64) -> Result<SchurParams> {
    let (m, n) = (r.m(), r.n());
    check_directions(u_idx, m, n)?;
    let res = r.orthogonality_residual();
    if res.is_nan() || res > tol.max(ORTHO_TOL) {
        return Err(Error::Domain(format!(
            "realization matrix is not orthogonal (residual {res:.3e})"
        )));
    }
    let mut h = r.matrix() * direction_factor(&directions(u_idx, m))?.transpose();
    if let Some(entry) = hessenberg_violation(&h, m, tol)? {
        return Err(Error::ChartMismatch {
            detail: format!(
                "entry ({}, {}) = {:.3e} breaks positive {m}-upper Hessenberg form",
                entry.0 + 1,
                entry.1 + 1,
                entry.2
            ),
            entry: Some(entry),
        });
    }
    let mut v = vec![DVector::zeros(m); n];
    for k in (1..=n).rev() {
        let col = n - k;
        let vk: DVector<f64> = h.view((col, col), (m, 1)).column(0).into_owned();
        h = embed(&build_v(&vk)?, n, k).transpose() * h;
        v[k - 1] = vk;
    }
    let d0 = h.view((n, n), (m, m)).into_owned();
    SchurParams::new(v, d0)
}

/// `G(z) = D + C (zI - A)⁻¹ B`.
pub fn transfer_eval(ss: &StateSpace, z: Complex64) -> Result<DMatrix<Complex64>> {
    let (c, d) = match (&ss.c, &ss.d) {
        (Some(c), Some(d)) => (c, d),
        _ => return Err(Error::Argument("transfer evaluation needs C and D".into())),
    };
    let n = ss.n();
    let to_c = |m: &DMatrix<f64>| m.map(|x| Complex64::new(x, 0.0));
    let resolvent = DMatrix::<Complex64>::identity(n, n) * z - to_c(&ss.a);
    let scale = max_abs(&ss.a).max(1.0);
    let lu = resolvent.lu();
    let x = lu
        .solve(&to_c(&ss.b))
        .filter(|x| x.iter().all(|e| e.re.is_finite() && e.im.is_finite()))
        .ok_or_else(|| Error::Domain(format!("zI - A is singular at z = {z}")))?;
    if lu.u().diagonal().iter().any(|p| p.norm() <= 1e-14 * scale) {
        return Err(Error::Domain(format!("zI - A is singular at z = {z}")));
    }
    Ok(to_c(d) + to_c(c) * x)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::max_abs_diff;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn scalar_params() -> SchurParams {
        SchurParams::new(vec![DVector::from_element(1, 0.6)], DMatrix::identity(1, 1)).unwrap()
    }

    #[test]
    fn v_block_examples() {
        let v = build_v(&DVector::zeros(2)).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[0.0, 1.0, 0.0, 0.0, 0.0, 1.0, 1.0, 0.0, 0.0]);
        assert_eq!(v, expected);

        let v = build_v(&DVector::from_element(1, 0.6)).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.6, 0.8, 0.8, -0.6]);
        assert!(max_abs_diff(&v, &expected) < 1e-15);

        assert!(build_v(&DVector::from_element(1, 1.0)).is_err());
    }

    #[test]
    fn v_block_near_boundary() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let dir = random_schur_vector(&mut rng, 4).normalize();
        let v = build_v(&(dir * 0.99)).unwrap();
        assert!(orthogonality_residual(&v) < 1e-10);
    }

    #[test]
    fn u_block_for_basis_vectors_is_permutation() {
        for m in 1..4 {
            for i in 1..=m {
                let u = build_u(&basis_vector(m, i)).unwrap();
                assert!(u.iter().all(|&x| x == 0.0 || x == 1.0));
                assert_eq!(orthogonality_residual(&u), 0.0);
            }
        }
        let u = build_u(&basis_vector(2, 1)).unwrap();
        let expected = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 1.0, 0.0]);
        assert_eq!(u, expected);
        assert!(build_u(&DVector::from_element(2, 1.0)).is_err());
    }

    #[test]
    fn u_block_random_unit() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let u = random_schur_vector(&mut rng, 3).normalize();
        assert!(orthogonality_residual(&build_u(&u).unwrap()) < 1e-12);
    }

    #[test]
    fn scalar_realization() {
        let r = build_r(&scalar_params(), &[1]).unwrap();
        let expected = DMatrix::from_row_slice(2, 2, &[0.6, 0.8, 0.8, -0.6]);
        assert!(max_abs_diff(r.matrix(), &expected) < 1e-15);
        assert!((r.a()[(0, 0)] + 0.6).abs() < 1e-15);

        let res = interpolation_residuals(&scalar_params(), &[1]).unwrap();
        assert!(res[0].amax() < 1e-15);

        let g = transfer_eval(&extract_state_space(&r), Complex64::new(1.0, 0.0)).unwrap();
        assert!((g[(0, 0)] - Complex64::new(1.0, 0.0)).norm() < 1e-14);
    }

    #[test]
    fn zero_params_give_permutations() {
        for u_idx in [[1, 1, 1], [2, 1, 2], [2, 2, 1]] {
            let r = build_r(&SchurParams::zero(2, 3).unwrap(), &u_idx).unwrap();
            assert!(r.matrix().iter().all(|&x| x == 0.0 || x == 1.0));
            assert_eq!(r.orthogonality_residual(), 0.0);
            let res = interpolation_residuals(&SchurParams::zero(2, 3).unwrap(), &u_idx).unwrap();
            assert!(res.iter().all(|x| x.amax() == 0.0));
        }
    }

    #[test]
    fn hessenberg_checks() {
        assert!(!is_positive_m_upper_hessenberg(&DMatrix::identity(3, 3), 1, 1e-9).unwrap());
        let h = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 2.0, 1.0, 0.0, 0.0, 3.0, 1.0]);
        assert!(is_positive_m_upper_hessenberg(&h, 1, 1e-9).unwrap());
        let h = DMatrix::from_row_slice(3, 3, &[1.0, 0.0, 0.0, 2.0, 1.0, 0.0, 0.5, 3.0, 1.0]);
        assert_eq!(hessenberg_violation(&h, 1, 1e-9).unwrap(), Some((2, 0, 0.5)));
        assert!(is_positive_m_upper_hessenberg(&DMatrix::identity(2, 2), 3, 1e-9).is_err());

        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let p = SchurParams::random(&mut rng, 3, 4);
        assert!(is_positive_m_upper_hessenberg(&hessenberg_factor(&p), 3, 1e-9).unwrap());
    }

    #[test]
    fn direction_condition_examples() {
        assert!(check_direction_condition(&[2, 5, 1, 3, 2, 5, 1, 2, 1, 2, 2, 2]));
        assert!(check_direction_condition(&[1; 6]));
        assert!(!check_direction_condition(&[1, 1, 2, 1]));
        assert!(check_direction_condition(&[]));
    }

    #[test]
    fn recovery_round_trip_and_mismatch() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let p = SchurParams::random(&mut rng, 3, 4);
        let r = build_r(&p, &[1, 1, 1, 1]).unwrap();
        let q = recover_params(&r, &[1, 1, 1, 1], 1e-9).unwrap();
        assert!(p.max_abs_diff(&q) < 1e-9);
        assert!(matches!(
            recover_params(&r, &[3, 3, 3, 3], 1e-9),
            Err(Error::ChartMismatch { entry: Some(_), .. })
        ));

        let z = SchurParams::zero(3, 4).unwrap();
        let back = recover_params(&build_r(&z, &[2, 1, 3, 2]).unwrap(), &[2, 1, 3, 2], 1e-9).unwrap();
        assert_eq!(back.max_abs_diff(&z), 0.0);
    }

    #[test]
    fn params_validation() {
        assert!(matches!(
            SchurParams::new(vec![DVector::from_element(1, 1.2)], DMatrix::identity(1, 1)),
            Err(Error::SchurNorm { index: 1, .. })
        ));
        assert!(SchurParams::new(vec![DVector::zeros(1)], DMatrix::from_element(1, 1, 2.0)).is_err());
        assert!(SchurParams::new(vec![DVector::zeros(2)], DMatrix::identity(1, 1)).is_err());
    }

    #[test]
    fn transfer_at_infinity_is_feedthrough() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let r = build_r(&SchurParams::random(&mut rng, 2, 3), &[1, 2, 1]).unwrap();
        let ss = extract_state_space(&r);
        let g = transfer_eval(&ss, Complex64::new(1e9, 0.0)).unwrap();
        let d = r.d();
        for i in 0..2 {
            for j in 0..2 {
                assert!((g[(i, j)].re - d[(i, j)]).abs() < 1e-8);
            }
        }
    }
}
