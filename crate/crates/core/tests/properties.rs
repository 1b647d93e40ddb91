use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use spectral_causality::embedding::{circular_shift, residualize, DeformationSet, EmbeddingSpec};
use spectral_causality::inference::{randomization_test, RandomizationPlan, TestStatistic};
use spectral_causality::linalg::{inv_sqrt_psd, spectral_norm, sym_eig, SymMatrix, DEFAULT_RANK_TOL};
use spectral_causality::monitor::{driver_matrix, hub_scores, lag_center_of_mass, signed_dominance, HubSide};
use spectral_causality::operators::{build_coherence, build_family, FamilyBuilder, OperatorKind, DEFAULT_RIDGE};
use spectral_causality::panel::TimeSeriesPanel;
use spectral_causality::spectral::{
    dispersion_scalar, effective_rank, spectral_measure_distance, SpectralMeasure, SpectralSummary,
};

fn gaussian(rows: usize, cols: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    DMatrix::from_fn(rows, cols, |_, _| StandardNormal.sample(&mut rng))
}

fn random_psd(d: usize, seed: u64) -> SymMatrix {
    let g = gaussian(d, d + 2, seed);
    SymMatrix::gram(&g)
}

fn random_orthogonal(d: usize, seed: u64) -> DMatrix<f64> {
    gaussian(d, d, seed).qr().q()
}

fn noise_panel(t: usize, k: usize, seed: u64) -> TimeSeriesPanel {
    TimeSeriesPanel::from_matrix(gaussian(t, k, seed)).unwrap()
}

fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn spectra_are_orthogonally_invariant(d in 1usize..8, seed in any::<u64>()) {
        let m = random_psd(d, seed);
        let q = random_orthogonal(d, seed ^ 0xabc);
        let rotated = m.conjugate(&q).unwrap();
        prop_assert!(close(&m.eigenvalues(), &rotated.eigenvalues(), 1e-8));
    }

    #[test]
    fn weyl_perturbation_bound(d in 1usize..8, seed in any::<u64>(), scale in 1e-6f64..1.0) {
        let m = random_psd(d, seed);
        let e = SymMatrix::new(gaussian(d, d, seed ^ 1) * scale).unwrap();
        let perturbed = SymMatrix::new(m.matrix() + e.matrix()).unwrap();
        let bound = spectral_norm(e.matrix()) + 1e-10;
        for (a, b) in m.eigenvalues().iter().zip(perturbed.eigenvalues()) {
            prop_assert!((a - b).abs() <= bound);
        }
    }

    #[test]
    fn top_projector_is_idempotent(d in 1usize..8, seed in any::<u64>(), m_frac in 0.0f64..1.0) {
        let m = random_psd(d, seed);
        let rank = 1 + ((d - 1) as f64 * m_frac) as usize;
        let p = sym_eig(&m).top_projector(rank);
        let pm = p.matrix();
        prop_assert!((pm * pm - pm).norm() < 1e-10);
        prop_assert!((p.trace() - rank as f64).abs() < 1e-10);
    }

    #[test]
    fn inverse_square_root_whitens(d in 1usize..8, seed in any::<u64>()) {
        let m = random_psd(d, seed).add_ridge(0.1);
        let w = inv_sqrt_psd(&m, DEFAULT_RANK_TOL).unwrap();
        let i = w.matrix() * m.matrix() * w.matrix();
        prop_assert!((i - DMatrix::identity(d, d)).norm() < 1e-8);
    }

    #[test]
    fn rayleigh_ritz_and_ky_fan(d in 2usize..8, seed in any::<u64>(), k_frac in 0.0f64..1.0) {
        let m = random_psd(d, seed);
        let ev = m.eigenvalues();
        let w = DVector::from_iterator(d, gaussian(d, 1, seed ^ 7).iter().copied()).normalize();
        let q = m.quadratic_form(&w);
        prop_assert!(q <= ev[0] + 1e-8 && q >= ev[d - 1] - 1e-8);
        let k = 1 + ((d - 1) as f64 * k_frac) as usize;
        let frame = random_orthogonal(d, seed ^ 9).columns(0, k).into_owned();
        let partial = m.conjugate(&frame).unwrap().trace();
        prop_assert!(partial <= ev[..k].iter().sum::<f64>() + 1e-8);
    }

    #[test]
    fn circular_shift_group_law(t in 3usize..40, a in 0usize..100, b in 0usize..100, seed in any::<u64>()) {
        let p = noise_panel(t, 3, seed);
        let twice = circular_shift(&circular_shift(&p, &[0, 2], a).unwrap(), &[0, 2], b).unwrap();
        let once = circular_shift(&p, &[0, 2], (a + b) % t).unwrap();
        prop_assert_eq!(twice.values(), once.values());
    }

    #[test]
    fn residuals_are_orthogonal_to_conditioning(n in 10usize..60, c in 1usize..4, seed in any::<u64>()) {
        let rows = gaussian(n, 2, seed);
        let cond = gaussian(n, c, seed ^ 3);
        let r = residualize(&rows, &cond).unwrap();
        let mut cc = cond.clone();
        for mut col in cc.column_iter_mut() {
            let mean = col.mean();
            col.add_scalar_mut(-mean);
        }
        prop_assert!(cc.tr_mul(&r).amax() < 1e-8);
        prop_assert!(r.row_sum().amax() < 1e-8);
    }

    #[test]
    fn wasserstein_is_a_metric(d in 1usize..8, seed in any::<u64>()) {
        let draw = |s: u64| {
            let v: Vec<f64> = gaussian(d, 1, s).iter().map(|x| x.abs()).collect();
            SpectralMeasure::new(&v).unwrap()
        };
        let (a, b, c) = (draw(seed), draw(seed ^ 1), draw(seed ^ 2));
        let ab = spectral_measure_distance(&a, &b).unwrap();
        let bc = spectral_measure_distance(&b, &c).unwrap();
        let ac = spectral_measure_distance(&a, &c).unwrap();
        prop_assert!((ab - spectral_measure_distance(&b, &a).unwrap()).abs() < 1e-15);
        prop_assert!(ac <= ab + bc + 1e-12);
        prop_assert_eq!(spectral_measure_distance(&a, &a).unwrap(), 0.0);
    }

    #[test]
    fn effective_rank_is_bounded(d in 1usize..10, seed in any::<u64>()) {
        let ev = random_psd(d, seed).eigenvalues();
        let r = effective_rank(&ev);
        prop_assert!(r >= 1.0 - 1e-12 && r <= d as f64 + 1e-12);
    }

    #[test]
    fn lag_profile_is_scale_invariant(e in prop::collection::vec(0.0f64..5.0, 4), c in 0.01f64..100.0) {
        prop_assume!(e.iter().sum::<f64>() > 0.0);
        let lags = [1, 2, 3, 5];
        let energy: Vec<(usize, f64)> = lags.iter().copied().zip(e.iter().copied()).collect();
        let scaled: Vec<(usize, f64)> = energy.iter().map(|&(t, v)| (t, v * c * c)).collect();
        let com = lag_center_of_mass(&energy).unwrap();
        prop_assert!((com - lag_center_of_mass(&scaled).unwrap()).abs() < 1e-10);
        prop_assert!((1.0..=5.0).contains(&com));
        let d = signed_dominance(&energy, &[1, 2], &[3, 5]).unwrap();
        prop_assert!((d - signed_dominance(&scaled, &[1, 2], &[3, 5]).unwrap()).abs() < 1e-10);
        prop_assert!((-1.0..=1.0).contains(&d));
    }

    #[test]
    fn hub_scores_are_permutation_equivariant(d in 2usize..7, seed in any::<u64>(), m_frac in 0.0f64..1.0) {
        let c = random_psd(d, seed);
        let m = 1 + ((d - 1) as f64 * m_frac) as usize;
        let perm: Vec<usize> = (0..d).rev().collect();
        let p = DMatrix::from_fn(d, d, |i, j| if perm[i] == j { 1.0 } else { 0.0 });
        let permuted = SymMatrix::new(&p * c.matrix() * p.transpose()).unwrap();
        let h = hub_scores(&c, m, HubSide::Target, &[], 1).unwrap();
        let hp = hub_scores(&permuted, m, HubSide::Target, &[], 1).unwrap();
        prop_assert!((h.iter().sum::<f64>() - m as f64).abs() < 1e-8);
        // Degenerate eigenvalues make the projector ambiguous; random PSD draws avoid them.
        for i in 0..d {
            prop_assert!((hp[i] - h[perm[i]]).abs() < 1e-6);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(25))]

    #[test]
    fn quadratic_form_and_energy_bookkeeping(k in 2usize..5, p in 1usize..3, seed in any::<u64>()) {
        let panel = noise_panel(120, k, seed);
        let all: Vec<usize> = (0..k).collect();
        let spec = EmbeddingSpec::linear(all.clone(), all, p, 0).allowing_overlap();
        let lags = DeformationSet::uniform([1, 2, 4]).unwrap();
        let fam = build_family(&panel, &spec, &lags, OperatorKind::DirectedCoherenceGram, DEFAULT_RIDGE).unwrap();
        let coh: Vec<&DMatrix<f64>> = fam.coherences().map(|c| &c.matrix).collect();

        let w = DVector::from_iterator(k, gaussian(k, 1, seed ^ 5).iter().copied()).normalize();
        let direct: f64 = coh.iter().map(|a| (a.transpose() * &w).norm_squared()).sum();
        prop_assert!((fam.aggregate.quadratic_form(&w) - direct).abs() < 1e-10);

        let m = driver_matrix(&coh, p, k).unwrap();
        let energy: f64 = fam.coherences().map(|c| c.energy()).sum();
        prop_assert!((m.sum() - energy).abs() < 1e-8);
        prop_assert!((fam.aggregate.trace() - energy).abs() < 1e-8);
    }

    #[test]
    fn enlarging_the_lag_set_never_lowers_dispersion(seed in any::<u64>()) {
        let panel = noise_panel(150, 2, seed);
        let spec = EmbeddingSpec::linear(vec![0], vec![1], 2, 1);
        let small = DeformationSet::uniform([1, 2]).unwrap();
        let large = DeformationSet::uniform([1, 2, 3, 5]).unwrap();
        let family = |set: &DeformationSet| {
            FamilyBuilder::aligned(&panel, &spec, set, OperatorKind::DirectedCoherenceGram, DEFAULT_RIDGE, 5)
                .unwrap()
                .build(0)
                .unwrap()
        };
        let (fs, fl) = (family(&small), family(&large));
        for f in [SpectralSummary::Trace, SpectralSummary::Frobenius, SpectralSummary::log_det()] {
            let a = dispersion_scalar(&fs, f).unwrap();
            let b = dispersion_scalar(&fl, f).unwrap();
            prop_assert!(b.statistic >= a.statistic - 1e-12);
        }
    }

    #[test]
    fn scalar_coherence_is_squared_correlation(seed in any::<u64>(), lag in 1usize..4, beta in -1.0f64..1.0) {
        let x = gaussian(200, 1, seed);
        let e = gaussian(200, 1, seed ^ 11);
        let y = DMatrix::from_fn(200, 1, |t, _| e[t] + if t >= lag { beta * x[t - lag] } else { 0.0 });
        let panel = TimeSeriesPanel::from_columns(
            vec!["x".into(), "y".into()],
            &[x.iter().copied().collect(), y.iter().copied().collect()],
        ).unwrap();
        let spec = EmbeddingSpec::linear(vec![0], vec![1], 1, 1);
        let coh = build_coherence(&panel, &spec, lag, 0.0).unwrap();
        let g = coh.gram().matrix()[(0, 0)];

        // oracle: R² of the intercept regression of y_t on x_{t−lag} over the same rows
        let ys: Vec<f64> = (lag..200).map(|t| y[t]).collect();
        let xs: Vec<f64> = (lag..200).map(|t| x[t - lag]).collect();
        let n = ys.len() as f64;
        let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
        let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| (a - mx) * (b - my)).sum();
        let sxx: f64 = xs.iter().map(|a| (a - mx).powi(2)).sum();
        let syy: f64 = ys.iter().map(|b| (b - my).powi(2)).sum();
        let r2 = sxy * sxy / (sxx * syy);
        prop_assert!((g - r2).abs() < 1e-8);
        // and the F statistic of that regression is a monotone map of it
        let f = (n - 2.0) * r2 / (1.0 - r2);
        let rss_u = syy - sxy * sxy / sxx;
        let f_ols = (syy - rss_u) / (rss_u / (n - 2.0));
        prop_assert!((f - f_ols).abs() <= 1e-8 * f_ols.max(1.0));
    }
}

#[test]
fn randomization_is_deterministic() {
    let panel = noise_panel(200, 2, 4);
    let spec = EmbeddingSpec::linear(vec![0], vec![1], 2, 2);
    let lags = DeformationSet::uniform(1..=3).unwrap();
    let plan = RandomizationPlan::new(30, 99);
    let stat = TestStatistic::Dispersion { summary: SpectralSummary::Frobenius };
    let run = || randomization_test(&panel, &spec, &lags, OperatorKind::DirectedCoherenceGram, DEFAULT_RIDGE, stat, &plan).unwrap();
    assert_eq!(run(), run());
}

#[test]
fn canonical_correlations_are_at_most_one() {
    for seed in 0..20 {
        let panel = noise_panel(60, 4, seed);
        let spec = EmbeddingSpec::linear(vec![0, 1], vec![2, 3], 3, 2);
        let coh = build_coherence(&panel, &spec, 1, DEFAULT_RIDGE).unwrap();
        assert!(coh.singular_values.iter().all(|&s| s <= 1.0 + 1e-8));
    }
}
