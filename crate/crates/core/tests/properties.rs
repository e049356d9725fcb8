use std::collections::BTreeSet;

use atlas_core::linalg::{
    max_abs, max_abs_diff, numerical_rank, orthogonality_residual, random_orthogonal,
    singular_values, spectral_radius,
};
use atlas_core::pivot::{
    admissible_from_b_pivots, count_admissible, find_full_pivot_structure, is_admissible,
    matrix_has_pivot_structure, ColumnPivotStructure, PivotStructure,
};
use atlas_core::schur::{
    basis_vector, build_r, check_direction_condition, direction_factor, direction_vectors_from_chart,
    extract_state_space, recover_params, transfer_eval, SchurParams,
};
use atlas_core::sysid::{
    controllability_gramian, controllability_matrix, find_charts, input_normalize, is_controllable,
    observability_matrix, orthogonal_canonicalize, selected_columns, solve_stein, truncate,
};
use atlas_core::young::{
    diagram_from_admissible, diagram_procedure1, diagram_procedure2, diagram_procedure3,
    dynamical_index_set, enumerate_all, minimal_atlas, minimal_atlas_size, minimal_order,
    numberings_for, Chart, NumberedYoungDiagram,
};
use atlas_core::Error;
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const TOL: f64 = 1e-9;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A partial pivot structure on an `n × r` matrix.
fn pivot_structure() -> impl Strategy<Value = PivotStructure> {
    (1usize..=12, 1usize..=12).prop_flat_map(|(n, r)| {
        let cols = proptest::sample::subsequence((1..=r).collect::<Vec<_>>(), 0..=n.min(r));
        (Just(n), Just(r), cols, any::<u64>()).prop_map(|(n, r, cols, seed)| {
            let mut j = cols;
            j.resize(n, 0);
            let mut g = rng(seed);
            for i in (1..n).rev() {
                j.swap(i, g.random_range(0..=i));
            }
            PivotStructure::new(r, j).unwrap()
        })
    })
}

/// `(q_B, n)` with distinct nonzero entries containing 1.
fn b_pivots(max_m: usize, max_n: usize) -> impl Strategy<Value = (Vec<usize>, usize)> {
    (1..=max_m, 1..=max_n, any::<u64>()).prop_map(|(m, n, seed)| {
        let mut g = rng(seed);
        let count = g.random_range(1..=m.min(n));
        let mut pool: Vec<usize> = (2..=n).collect();
        let mut values = vec![1];
        for _ in 1..count {
            values.push(pool.swap_remove(g.random_range(0..pool.len())));
        }
        let mut q = vec![0; m];
        let mut slots: Vec<usize> = (0..m).collect();
        for v in values {
            q[slots.swap_remove(g.random_range(0..slots.len()))] = v;
        }
        (q, n)
    })
}

/// `[B, A]` with structure `j`: positive pivots, zeros below, Gaussian
/// elsewhere.
fn fill_structure(j: &PivotStructure, g: &mut ChaCha8Rng) -> DMatrix<f64> {
    let (n, r) = (j.n(), j.r());
    let mut out = DMatrix::from_fn(n, r, |_, _| g.random_range(-1.0..1.0));
    for k in 1..=n {
        let c = j.get(k);
        if c > 0 {
            out[(k - 1, c - 1)] = g.random_range(0.2..1.0);
            for i in k..n {
                out[(i, c - 1)] = 0.0;
            }
        }
    }
    out
}

fn chart_and_params(max_m: usize, max_n: usize) -> impl Strategy<Value = (Chart, SchurParams, u64)> {
    (1..=max_m, 1..=max_n, any::<u64>()).prop_map(|(m, n, seed)| {
        let mut g = rng(seed);
        let charts = enumerate_all(m, n);
        let chart = charts[g.random_range(0..charts.len())].clone();
        let params = SchurParams::random(&mut g, m, n);
        (chart, params, seed)
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn row_column_round_trip(j in pivot_structure()) {
        let q = j.to_columns();
        prop_assert_eq!(q.n(), j.n());
        prop_assert_eq!(q.to_rows(), j.clone());
        let again = ColumnPivotStructure::new(q.n(), q.as_slice().to_vec()).unwrap();
        prop_assert_eq!(again.to_rows(), j);
    }

    #[test]
    fn witness_matrix_has_its_structure(j in pivot_structure()) {
        prop_assert!(matrix_has_pivot_structure(&j.witness_matrix(), &j, TOL).unwrap());
    }

    #[test]
    fn admissible_structure_induces_nice_structure_on_k((q, n) in b_pivots(5, 6), seed in any::<u64>()) {
        let m = q.len();
        let j = admissible_from_b_pivots(&q, n).unwrap();
        prop_assert!(is_admissible(&j, m).unwrap());
        let chart = Chart::from_b_pivots(&q, n).unwrap();
        let ba = fill_structure(&j, &mut rng(seed));
        let (b, a) = (ba.columns(0, m).into_owned(), ba.columns(m, n).into_owned());
        let k = controllability_matrix(&a, &b, n).unwrap();
        prop_assert!(matrix_has_pivot_structure(&k, chart.jtilde(), TOL).unwrap());
    }

    #[test]
    fn procedures_agree((q, n) in b_pivots(8, 8)) {
        let p1 = diagram_procedure1(&q, n).unwrap();
        prop_assert_eq!(&diagram_procedure2(&q, n).unwrap(), &p1);
        let p3 = diagram_procedure3(&q, n).unwrap();
        prop_assert_eq!(&p3.diagram, &p1);
        prop_assert!(p1.is_admissible());
        prop_assert_eq!(p1.first_column(), q);
        // backward recursion returns to η_0 = 0
        prop_assert!(p3.eta[0].iter().all(|&x| x == 0));
    }

    #[test]
    fn chart_directions_satisfy_condition((q, n) in b_pivots(6, 10)) {
        let chart = Chart::from_b_pivots(&q, n).unwrap();
        let u = direction_vectors_from_chart(chart.diagram()).unwrap();
        prop_assert_eq!(u.as_slice(), chart.u_idx());
        prop_assert!(check_direction_condition(&u));
    }

    #[test]
    fn realization_is_lossless((chart, params, _) in chart_and_params(3, 4)) {
        let r = build_r(&params, chart.u_idx()).unwrap();
        prop_assert!(r.orthogonality_residual() < 1e-10);
        prop_assert!(spectral_radius(&r.a()) < 1.0);
        prop_assert!(matrix_has_pivot_structure(&r.input_pair(), chart.j(), TOL).unwrap());
        let k = controllability_matrix(&r.a(), &r.b(), chart.n()).unwrap();
        prop_assert!(matrix_has_pivot_structure(&k, chart.jtilde(), TOL).unwrap());
        let n = chart.n();
        let o = observability_matrix(&r.c(), &r.a(), n).unwrap();
        prop_assert_eq!(numerical_rank(&o, 1e-8), n);
        let wc = controllability_gramian(&r.a(), &r.b()).unwrap();
        prop_assert!(wc.distance_to_identity() < 1e-9);
    }

    #[test]
    fn transfer_is_unitary_on_circle((chart, params, _) in chart_and_params(3, 4)) {
        let ss = extract_state_space(&build_r(&params, chart.u_idx()).unwrap());
        let m = chart.m();
        for t in 0..16 {
            let z = Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * (t as f64 + 0.5) / 16.0);
            let g = transfer_eval(&ss, z).unwrap();
            let prod = &g * g.adjoint();
            let err = (prod - DMatrix::<Complex64>::identity(m, m)).iter().map(|x| x.norm()).fold(0.0, f64::max);
            prop_assert!(err < 1e-9, "unitarity error {}", err);
        }
    }

    #[test]
    fn recovery_round_trip((chart, params, _) in chart_and_params(4, 5)) {
        let r = build_r(&params, chart.u_idx()).unwrap();
        let back = recover_params(&r, chart.u_idx(), TOL).unwrap();
        prop_assert!(back.max_abs_diff(&params) < 1e-9);
        let again = build_r(&back, chart.u_idx()).unwrap();
        prop_assert!(max_abs_diff(again.matrix(), r.matrix()) < 1e-9);
    }

    #[test]
    fn basis_directions_give_permutation(u_idx in proptest::collection::vec(1usize..=4, 1..=6)) {
        let u: Vec<_> = u_idx.iter().map(|&i| basis_vector(4, i)).collect();
        let p = direction_factor(&u).unwrap();
        prop_assert!(p.iter().all(|&x| x == 0.0 || x == 1.0));
        prop_assert_eq!(orthogonality_residual(&p), 0.0);
    }

    #[test]
    fn canonical_form_is_unique((chart, params, seed) in chart_and_params(3, 4)) {
        let r = build_r(&params, chart.u_idx()).unwrap();
        let (a, b) = (r.a(), r.b());
        let mut g = rng(seed ^ 0x5eed);
        let mut forms = Vec::new();
        for _ in 0..2 {
            let w = random_orthogonal(&mut g, chart.n());
            let out = orthogonal_canonicalize(&(&w * &b), &(&w * &a * w.transpose()), &chart, 1e-8).unwrap();
            prop_assert!(orthogonality_residual(&out.q) < 1e-10);
            forms.push(out);
        }
        prop_assert!(max_abs_diff(&forms[0].a, &forms[1].a) < 1e-8);
        prop_assert!(max_abs_diff(&forms[0].b, &forms[1].b) < 1e-8);
    }

    #[test]
    fn stein_residual_is_small(n in 1usize..=6, seed in any::<u64>()) {
        let mut g = rng(seed);
        let raw = DMatrix::from_fn(n, n, |_, _| g.random_range(-1.0..1.0));
        let a = &raw * (0.9 / spectral_radius(&raw).max(1e-3));
        let f = DMatrix::from_fn(n, n, |_, _| g.random_range(-1.0..1.0));
        let m = &f * f.transpose();
        let w = solve_stein(&a, &m).unwrap();
        let res = w.matrix() - &a * w.matrix() * a.transpose() - &m;
        prop_assert!(max_abs(&res) < 1e-10 * (1.0 + max_abs(w.matrix())));
        prop_assert_eq!(w.matrix().clone(), w.matrix().transpose());
    }

    #[test]
    fn input_normalization_reaches_identity_gramian(n in 1usize..=5, m in 1usize..=3, seed in any::<u64>()) {
        let mut g = rng(seed);
        let raw = DMatrix::from_fn(n, n, |_, _| g.random_range(-1.0..1.0));
        let a = &raw * (0.8 / spectral_radius(&raw).max(1e-3));
        let b = DMatrix::from_fn(n, m, |_, _| g.random_range(-1.0..1.0));
        prop_assume!(singular_values(&controllability_matrix(&a, &b, n).unwrap()).last().copied().unwrap_or(0.0) > 1e-4);
        let out = input_normalize(&a, &b).unwrap();
        // oracle: Gramian of the transformed pair from the Stein solver
        let w = controllability_gramian(&out.a, &out.b).unwrap();
        prop_assert!(w.distance_to_identity() < 1e-9);
        for i in 0..n {
            prop_assert!(out.t[(i, i)] > 0.0);
            for j in 0..i {
                prop_assert_eq!(out.t[(i, j)], 0.0);
            }
        }
    }
}

#[test]
fn exhaustive_admissible_arrays_match_enumeration() {
    for (m, n) in [(1, 3), (2, 2), (2, 3), (3, 2), (3, 3), (2, 4), (3, 4)] {
        let mut found = BTreeSet::new();
        let mut cells = vec![0usize; n];
        // cells[k - 1] is the flat position of value k
        loop {
            if cells.iter().collect::<BTreeSet<_>>().len() == n {
                let mut flat = vec![0; m * n];
                for (k, &c) in cells.iter().enumerate() {
                    flat[c] = k + 1;
                }
                let y = NumberedYoungDiagram::from_flat(m, n, flat).unwrap();
                if y.is_admissible() {
                    found.insert(y.rows());
                }
            }
            let mut i = 0;
            while i < n {
                cells[i] += 1;
                if cells[i] < m * n {
                    break;
                }
                cells[i] = 0;
                i += 1;
            }
            if i == n {
                break;
            }
        }
        let listed: BTreeSet<_> = enumerate_all(m, n).iter().map(|c| c.diagram().rows()).collect();
        assert_eq!(found, listed, "m = {m}, n = {n}");
        assert_eq!(found.len() as u128, count_admissible(m, n));
    }
}

#[test]
fn admissible_structures_map_onto_diagrams() {
    for m in 1..=3 {
        for n in 1..=4 {
            let diagrams: BTreeSet<_> = enumerate_all(m, n).iter().map(|c| c.j().as_slice().to_vec()).collect();
            for c in enumerate_all(m, n) {
                assert_eq!(diagram_from_admissible(c.j(), m).unwrap(), *c.diagram());
            }
            assert_eq!(diagrams.len() as u128, count_admissible(m, n));
        }
    }
}

#[test]
fn minimal_atlas_uses_non_increasing_order() {
    for m in 1..=4 {
        for n in 1..=5 {
            let atlas = minimal_atlas(m, n);
            assert_eq!(atlas.len() as u128, minimal_atlas_size(m, n));
            assert_eq!(atlas.len(), dynamical_index_set(m, n).len());
            for chart in &atlas {
                let d = chart.dynamical_indices();
                let order = minimal_order(d);
                // first column lists rows 1.. in the chosen order
                let first = chart.diagram().first_column();
                let mut by_value: Vec<usize> = (1..=m).filter(|&i| first[i - 1] > 0).collect();
                by_value.sort_by_key(|&i| first[i - 1]);
                assert_eq!(by_value, order);
                assert!(numberings_for(d).contains(chart.diagram()));
            }
        }
    }
}

#[test]
fn every_atlas_chart_fits_its_own_system() {
    for chart in enumerate_all(3, 4) {
        let params = SchurParams::random(&mut rng(17), 3, 4);
        let r = build_r(&params, chart.u_idx()).unwrap();
        let fits = find_charts(&r.b(), &r.a(), std::slice::from_ref(&chart), 1e-8).unwrap();
        assert_eq!(fits.len(), 1);
        assert!(fits[0].condition.is_finite());
    }
}

#[test]
fn minimal_atlas_covers_lossless_systems() {
    let atlas = minimal_atlas(3, 4);
    let charts = enumerate_all(3, 4);
    let mut all_feasible = 0;
    for seed in 0..1000u64 {
        let mut g = rng(seed);
        let chart = &charts[seed as usize % charts.len()];
        let r = build_r(&SchurParams::random(&mut g, 3, 4), chart.u_idx()).unwrap();
        let fits = find_charts(&r.b(), &r.a(), &atlas, 1e-8).unwrap();
        assert!(!fits.is_empty(), "seed {seed}");
        if fits.len() == atlas.len() {
            all_feasible += 1;
        }
    }
    assert!(all_feasible > 900, "only {all_feasible} systems lie in every minimal chart");
}

#[test]
fn degenerate_selection_is_a_chart_mismatch() {
    // zero Schur vectors: [B, A] is a permutation pattern and many nice
    // selections of K are dependent
    let charts = enumerate_all(3, 4);
    let r = build_r(&SchurParams::zero(3, 4).unwrap(), charts[0].u_idx()).unwrap();
    let (a, b) = (r.a(), r.b());
    let k = controllability_matrix(&a, &b, 4).unwrap();
    let mut mismatches = 0;
    for chart in &charts {
        let rank = numerical_rank(&selected_columns(&k, chart), 1e-8);
        let out = orthogonal_canonicalize(&b, &a, chart, 1e-8);
        if rank < 4 {
            mismatches += 1;
            assert!(matches!(out, Err(Error::ChartMismatch { .. })), "{:?}", chart.u_idx());
        } else {
            assert!(out.is_ok());
        }
    }
    assert!(mismatches > 0);
}

#[test]
fn canonicalize_rejects_non_orthonormal_pair() {
    let chart = &enumerate_all(3, 4)[0];
    let r = build_r(&SchurParams::random(&mut rng(1), 3, 4), chart.u_idx()).unwrap();
    let b = r.b() * 2.0;
    assert!(matches!(orthogonal_canonicalize(&b, &r.a(), chart, 1e-8), Err(Error::Domain(_))));
}

#[test]
fn find_charts_requires_controllability() {
    let atlas = minimal_atlas(3, 4);
    let a = DMatrix::identity(4, 4) * 0.5;
    let b = DMatrix::zeros(4, 3);
    assert!(matches!(find_charts(&b, &a, &atlas, 1e-8), Err(Error::RankDeficient(_))));
}

#[test]
fn truncation_keeps_controllability_but_not_losslessness() {
    let chart1 = &enumerate_all(3, 4)[0];
    assert_eq!(chart1.jtilde().as_slice(), &[1, 4, 7, 10]);
    let r = build_r(&SchurParams::random(&mut rng(8), 3, 4), chart1.u_idx()).unwrap();
    let ss = extract_state_space(&r);
    assert_eq!(truncate(&ss, 4).unwrap(), ss);
    for order in 1..4 {
        let t = truncate(&ss, order).unwrap();
        assert!(is_controllable(&t.a, &t.b, 1e-8).unwrap(), "order {order}");
        let rt = t.realization_matrix().unwrap();
        assert!(orthogonality_residual(&rt) > 1e-6, "order {order}");
    }
}

#[test]
fn already_normal_pair_has_identity_transform() {
    let r = build_r(&SchurParams::random(&mut rng(21), 2, 3), &[1, 2, 1]).unwrap();
    let out = input_normalize(&r.a(), &r.b()).unwrap();
    assert!(max_abs_diff(&out.t, &DMatrix::identity(3, 3)) < 1e-9);
}

#[test]
fn normalized_then_canonicalized_pair_lies_in_chart() {
    let mut g = rng(33);
    let chart = &minimal_atlas(2, 3)[1];
    let a = DMatrix::from_fn(3, 3, |_, _| g.random_range(-0.4..0.4));
    let b = DMatrix::from_fn(3, 2, |_, _| g.random_range(-1.0..1.0));
    let normal = input_normalize(&a, &b).unwrap();
    let out = orthogonal_canonicalize(&normal.b, &normal.a, chart, 1e-8).unwrap();
    let ba = atlas_core::StateSpace::new(out.a.clone(), out.b.clone(), None, None).unwrap().input_pair();
    assert!(matrix_has_pivot_structure(&ba, chart.j(), TOL).unwrap());
    assert!(find_full_pivot_structure(&controllability_matrix(&out.a, &out.b, 3).unwrap(), TOL).is_some());
}
