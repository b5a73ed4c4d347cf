use proptest::prelude::*;

use kantolab_core::catalog::{evaluate, InstanceBundle, StatementClass, StatementId};
use kantolab_core::linalg::{
    abs_op, block2, geometric_mean, geometric_mean_with_inverse, hermitize, inv_pd, loewner_compare, operator_norm,
    sqrt_psd, svd_checked, CMatrix, HermitianMatrix,
};
use kantolab_core::maps::UnitalPositiveMap;
use kantolab_core::random::{
    ginibre, random_hermitian_direction, random_psd, random_unit_vector, random_with_spectrum_rng, rng_from_seed, Field, InstanceRng,
};
use kantolab_core::search::{generate_instance, sweep, SamplerConfig, SearchConfig, SweepOptions};
use kantolab_core::{registry, SpectralWindow};

use StatementId::*;

const TAU: f64 = 1e-9;

fn pd(n: usize, ratio: f64, rng: &mut InstanceRng) -> HermitianMatrix {
    let w = SpectralWindow::new(1.0, ratio).unwrap();
    random_with_spectrum_rng(&w, n, 0.3, Field::Complex, rng).unwrap()
}

fn scale(a: &HermitianMatrix, b: &HermitianMatrix) -> f64 {
    1f64.max(a.norm()).max(b.norm())
}

fn psd_within(h: &HermitianMatrix, tol: f64) -> bool {
    h.min_eigenvalue() >= -tol
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn geometric_mean_is_symmetric(seed in any::<u64>(), n in 1usize..7, ratio in 1.0f64..100.0) {
        let mut rng = rng_from_seed(seed);
        let a = pd(n, ratio, &mut rng);
        let b = pd(n, ratio, &mut rng);
        let ab = geometric_mean(&a, &b).unwrap();
        let ba = geometric_mean(&b, &a).unwrap();
        prop_assert!(operator_norm(&(ab.as_matrix() - ba.as_matrix())) <= TAU * (a.norm() + b.norm()));
    }

    #[test]
    fn mean_with_own_inverse_is_identity(seed in any::<u64>(), n in 1usize..7, ratio in 1.0f64..1000.0) {
        let mut rng = rng_from_seed(seed);
        let a = pd(n, ratio, &mut rng);
        let g = geometric_mean(&a, &inv_pd(&a).unwrap()).unwrap();
        prop_assert!(operator_norm(&(g.as_matrix() - CMatrix::identity(n, n))) <= TAU);
        let g = geometric_mean_with_inverse(&a, &a).unwrap();
        prop_assert!(operator_norm(&(g.as_matrix() - CMatrix::identity(n, n))) <= TAU);
    }

    #[test]
    fn am_gm_and_maximality(seed in any::<u64>(), n in 1usize..7, eps in 1e-3f64..1.0) {
        let mut rng = rng_from_seed(seed);
        let a = pd(n, 50.0, &mut rng);
        let b = pd(n, 50.0, &mut rng);
        let g = geometric_mean(&a, &b).unwrap();
        let tol = TAU * scale(&a, &b);
        let am = a.add(&b).scale(0.5);
        prop_assert!(psd_within(&am.sub(&g), tol));
        prop_assert!(psd_within(&block2(&a, g.as_matrix(), &b).unwrap(), tol));
        // every X with a positive block lies below the mean
        for k in 0..4 {
            let h = random_hermitian_direction(n, Field::Complex, &mut rng).scale(eps * g.norm());
            let x = if k == 0 { g.scale(1.0 - eps) } else { g.add(&h) };
            if psd_within(&block2(&a, x.as_matrix(), &b).unwrap(), 0.0) {
                prop_assert!(psd_within(&g.sub(&x), tol));
            } else {
                prop_assert!(k > 0);
            }
        }
        let p = random_psd(n, n, Field::Complex, &mut rng).scale(eps);
        prop_assert!(!psd_within(&block2(&a, g.add(&p).as_matrix(), &b).unwrap(), tol));
    }

    #[test]
    fn mean_is_monotone(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = rng_from_seed(seed);
        let c = pd(n, 20.0, &mut rng);
        let d = pd(n, 20.0, &mut rng);
        let a = c.add(&random_psd(n, 1, Field::Complex, &mut rng));
        let b = d.add(&random_psd(n, n, Field::Complex, &mut rng));
        let lo = geometric_mean(&c, &d).unwrap();
        let hi = geometric_mean(&a, &b).unwrap();
        prop_assert!(loewner_compare(&lo, &hi, None).unwrap().holds);
    }

    #[test]
    fn inverse_is_order_reversing_and_squares(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = rng_from_seed(seed);
        let a = pd(n, 30.0, &mut rng);
        let b = a.add(&random_psd(n, 1 + seed as usize % n, Field::Complex, &mut rng));
        let tol = TAU * scale(&a, &b);
        let g = geometric_mean_with_inverse(&a, &b).unwrap();
        let id = HermitianMatrix::identity(n);
        prop_assert!(loewner_compare(&g, &id, Some(tol)).unwrap().holds);
        let g2 = geometric_mean_with_inverse(&a.square(), &b.square()).unwrap();
        prop_assert!(loewner_compare(&g2, &id, Some(tol)).unwrap().holds);
    }

    #[test]
    fn matrix_functions_are_exactly_hermitian(seed in any::<u64>(), n in 1usize..7) {
        let mut rng = rng_from_seed(seed);
        let a = pd(n, 100.0, &mut rng);
        let b = pd(n, 100.0, &mut rng);
        let t = ginibre(n, n, Field::Complex, &mut rng);
        for h in [
            geometric_mean(&a, &b).unwrap(),
            sqrt_psd(&a, None).unwrap(),
            inv_pd(&b).unwrap(),
            abs_op(&t).unwrap(),
        ] {
            let m = h.as_matrix();
            prop_assert_eq!(m.clone(), m.adjoint());
        }
    }

    #[test]
    fn checked_svd_reconstructs(seed in any::<u64>(), rows in 1usize..7, cols in 1usize..7, tiny in 0u8..3) {
        let mut rng = rng_from_seed(seed);
        let mut t = ginibre(rows, cols, Field::Complex, &mut rng);
        // nearly diagonal input is where the raw library SVD is fragile
        if tiny > 0 {
            let d = t.clone();
            t = CMatrix::from_fn(rows, cols, |i, j| if i == j { d[(i, j)] } else { d[(i, j)] * 1e-14 });
        }
        let s = svd_checked(&t);
        let mut us = s.u.clone();
        for (j, &v) in s.values.iter().enumerate() {
            us.column_mut(j).scale_mut(v);
        }
        prop_assert!((us * &s.v_t - &t).norm() <= 1e-12 * t.norm().max(1.0));
        if rows == cols {
            let direct = sqrt_psd(&hermitize(&(t.adjoint() * &t)).unwrap(), None).unwrap();
            let a = abs_op(&t).unwrap();
            prop_assert!(operator_norm(&(a.as_matrix() - direct.as_matrix())) <= 1e-8 * t.norm().max(1.0));
        }
    }
}

fn map_instance(seed: u64) -> Option<InstanceBundle> {
    generate_instance(S13, &SamplerConfig::default(), seed).ok()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn order_form_implies_the_weaker_constant(seed in any::<u64>()) {
        let Some(inst) = map_instance(seed) else { return Ok(()) };
        let s13 = evaluate(S13, &inst).unwrap();
        let s09 = evaluate(S09, &inst).unwrap();
        if s13.holds() {
            prop_assert!(s09.holds());
        }
    }

    #[test]
    fn norm_and_order_forms_agree(seed in any::<u64>()) {
        let Some(inst) = map_instance(seed) else { return Ok(()) };
        prop_assert_eq!(evaluate(S12, &inst).unwrap().holds(), evaluate(S13, &inst).unwrap().holds());
    }

    #[test]
    fn modulus_bound_implies_signed_bound(seed in any::<u64>()) {
        let Some(inst) = map_instance(seed) else { return Ok(()) };
        if evaluate(S16, &inst).unwrap().holds() {
            prop_assert!(evaluate(S17, &inst).unwrap().holds());
        }
    }

    #[test]
    fn evaluation_is_pure(seed in any::<u64>(), id in 0usize..30) {
        let st = &registry()[id];
        let Ok(inst) = generate_instance(st.id, &SamplerConfig::default(), seed) else { return Ok(()) };
        let (Ok(first), Ok(second)) = (evaluate(st.id, &inst), evaluate(st.id, &inst)) else { return Ok(()) };
        prop_assert_eq!(&first, &second);
        prop_assert!(first.ratio.is_finite());
        prop_assert_eq!(first.holds(), first.margin >= -first.tolerance);
    }

    #[test]
    fn vector_state_reduces_to_the_scalar_inequality(seed in any::<u64>(), n in 1usize..7, ratio in 1.0f64..100.0) {
        let mut rng = rng_from_seed(seed);
        let w = SpectralWindow::new(1.0, ratio).unwrap();
        let a = random_with_spectrum_rng(&w, n, 0.5, Field::Complex, &mut rng).unwrap();
        let x = random_unit_vector(n, Field::Complex, &mut rng);
        let inst = InstanceBundle::new(seed)
            .with_a(a, w)
            .with_vectors(x.clone(), None)
            .with_map(UnitalPositiveMap::vector_state(x).unwrap());
        let s01 = evaluate(S01, &inst).unwrap();
        let s12 = evaluate(S12, &inst).unwrap();
        prop_assert!((s01.ratio - s12.ratio).abs() <= 1e-12 * s01.ratio.max(1.0));
        prop_assert!((s01.margin - s12.margin).abs() <= 1e-12 * s01.ratio.max(1.0).max(w.kantorovich_constant()));
    }
}

#[test]
fn degenerate_window_makes_every_theorem_tight() {
    let cfg = SamplerConfig {
        max_ratio: 1.0,
        ..SamplerConfig::default()
    };
    for st in registry().iter().filter(|s| s.class == StatementClass::Theorem) {
        for seed in 0..8 {
            let Ok(inst) = generate_instance(st.id, &cfg, seed) else { continue };
            let Ok(c) = evaluate(st.id, &inst) else { continue };
            assert!(c.holds(), "{} seed {seed}: margin {}", st.id, c.margin);
        }
    }
}

#[test]
fn equality_forced_statements_have_zero_margin_on_a_degenerate_window() {
    let cfg = SamplerConfig {
        max_ratio: 1.0,
        ..SamplerConfig::default()
    };
    for id in [S01, S06] {
        for seed in 0..8 {
            let inst = generate_instance(id, &cfg, seed).unwrap();
            let c = evaluate(id, &inst).unwrap();
            assert!(c.margin.abs() <= c.tolerance, "{id} seed {seed}: margin {}", c.margin);
        }
    }
}

#[test]
fn sweep_ignores_worker_count() {
    for id in [S03, S13, S22] {
        let cfg = SearchConfig::new(id, 300, 99);
        let run = |workers| {
            sweep(
                &cfg,
                &SweepOptions {
                    workers: Some(workers),
                    keep_certificates: true,
                    exhaustive: true,
                },
            )
        };
        let (one, many) = (run(1), run(8));
        assert_eq!(one.certificates, many.certificates);
        assert_eq!(one.state.without_timing(), many.state.without_timing());
        assert_eq!(one.state.trials(), one.state.holds + one.state.violations + one.state.rejects);
    }
}

#[test]
fn best_margin_never_increases() {
    let cfg = SearchConfig::new(S13, 200, 5);
    let out = sweep(
        &cfg,
        &SweepOptions {
            keep_certificates: true,
            ..SweepOptions::default()
        },
    );
    let mut running = f64::INFINITY;
    for c in &out.certificates {
        let next = running.min(c.margin);
        assert!(next <= running);
        running = next;
    }
    assert_eq!(out.state.best_margin, Some(running));
}

#[test]
fn registry_is_closed() {
    let ids: std::collections::HashSet<_> = registry().iter().map(|s| s.id).collect();
    assert_eq!(registry().len(), 30);
    assert_eq!(ids.len(), 30);
}
