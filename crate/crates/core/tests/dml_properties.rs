use nalgebra::{DMatrix, DVector};
use ndarray::{Array1, Array2};
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};

use ratedml_core::dml::{
    cross_fit_nuisance, run_dml, DmlOptions, FoldMode, NuisanceLearners, PlrProblem, RunMode, Score,
};
use ratedml_core::learners::{HyperParams, LearnerSpec};
use ratedml_core::preprocess::EncodingOptions;
use ratedml_core::rng::stream;
use ratedml_core::synth::{gen_plr, population_r2, SynthKind, SynthSpec};

const LINEAR: LearnerSpec = LearnerSpec::Linear;

fn opts(k: usize, seed: u64) -> DmlOptions {
    DmlOptions { k, seed, ..DmlOptions::default() }
}

/// d-coefficient of OLS of y on (1, d, X) from the normal equations.
fn full_ols_d_coef(p: &PlrProblem) -> f64 {
    let (n, k) = p.x().dim();
    let a = DMatrix::from_fn(n, k + 2, |i, j| match j {
        0 => 1.0,
        1 => p.d()[i],
        _ => p.x()[[i, j - 2]],
    });
    let y = DVector::from_iterator(n, p.y().iter().copied());
    let beta = (a.transpose() * &a).lu().solve(&(a.transpose() * y)).unwrap();
    beta[1]
}

fn random_linear(n: usize, k: usize, seed: u64) -> PlrProblem {
    let mut rng = stream(seed);
    let mut z = || -> f64 { StandardNormal.sample(&mut rng) };
    let x = Array2::from_shape_fn((n, k), |_| z());
    let a: Array1<f64> = (0..k).map(|_| z()).collect();
    let b: Array1<f64> = (0..k).map(|_| z()).collect();
    let theta = 2.0 * z();
    let d = x.dot(&a) + Array1::from_shape_fn(n, |_| z());
    let y = theta * &d + x.dot(&b) + Array1::from_shape_fn(n, |_| z());
    PlrProblem::iid(y, d, x).unwrap()
}

#[test]
fn no_split_ols_reproduces_full_regression() {
    for seed in 0..50 {
        let p = random_linear(200, 5, seed);
        let o = DmlOptions { mode: RunMode::NoSplitDebug, ..opts(2, seed) };
        let (r, res) = run_dml(&p, NuisanceLearners::both(&LINEAR), &o).unwrap();
        let oracle = full_ols_d_coef(&p);
        assert!((r.theta - oracle).abs() < 1e-8, "seed {seed}: {} vs {oracle}", r.theta);
        assert!(res.fold_of.iter().all(|&f| f == 0));
        let (r_po, _) = run_dml(&p, NuisanceLearners::both(&LINEAR), &DmlOptions { score: Score::PartiallingOut, ..o })
            .unwrap();
        assert!((r_po.theta - oracle).abs() < 1e-8);
    }
}

#[test]
fn each_row_predicted_by_a_model_that_never_saw_it() {
    // with four rows and a mean-only learner, an out-of-fold prediction is the
    // mean of the other fold; a leak would show up as the row's own value
    let x = Array2::<f64>::zeros((4, 0));
    let y = Array1::from(vec![1.0, 10.0, 100.0, 1000.0]);
    let d = Array1::from(vec![0.0, 1.0, 0.0, 2.0]);
    let p = PlrProblem::iid(y.clone(), d, x).unwrap();
    let flat = LearnerSpec::Boosted(HyperParams::new(0, 0, 0.1, 1));
    let res = cross_fit_nuisance(&p, NuisanceLearners::both(&flat), &opts(2, 3)).unwrap();
    for i in 0..4 {
        let others: Vec<usize> = (0..4).filter(|&j| res.fold_of[j] != res.fold_of[i]).collect();
        let mean = others.iter().map(|&j| y[j]).sum::<f64>() / others.len() as f64;
        assert_eq!(res.g_hat[i], mean);
    }
}

#[test]
fn out_of_fold_r2_tracks_population_value() {
    let spec = SynthSpec::plr(SynthKind::PlrLinear, 0.5, 5000, 21);
    let p = gen_plr(&spec).unwrap().problem;
    let res = cross_fit_nuisance(&p, NuisanceLearners::both(&LINEAR), &opts(5, 1)).unwrap();
    let (ry, rd) = population_r2(&spec).unwrap();
    assert!((res.r2_y - ry).abs() < 0.05, "{} vs {ry}", res.r2_y);
    assert!((res.r2_d - rd).abs() < 0.05, "{} vs {rd}", res.r2_d);
}

#[test]
fn treatment_residuals_are_centred() {
    let p = gen_plr(&SynthSpec::plr(SynthKind::PlrLinear, 0.5, 2000, 5)).unwrap().problem;
    let res = cross_fit_nuisance(&p, NuisanceLearners::both(&LINEAR), &opts(5, 2)).unwrap();
    let n = res.v.len() as f64;
    let mean = res.v.sum() / n;
    let sd = (res.v.mapv(|x| (x - mean).powi(2)).sum() / n).sqrt();
    assert!(mean.abs() < 3.0 * sd / n.sqrt());
}

#[test]
fn null_effect_within_three_se() {
    let mut rng = stream(77);
    let n = 5000;
    let d: Array1<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let y: Array1<f64> = (0..n).map(|_| StandardNormal.sample(&mut rng)).collect();
    let x = Array2::from_shape_fn((n, 2), |_| StandardNormal.sample(&mut rng));
    let p = PlrProblem::iid(y, d, x).unwrap();
    let (r, _) = run_dml(&p, NuisanceLearners::both(&LINEAR), &opts(5, 0)).unwrap();
    assert!(r.theta.abs() < 3.0 * r.se);
}

#[test]
fn identical_inputs_give_identical_results() {
    let p = gen_plr(&SynthSpec::plr(SynthKind::PlrNonlinear, 0.5, 1500, 8)).unwrap().problem;
    let gb = LearnerSpec::Boosted(HyperParams { subsample: 0.8, ..HyperParams::new(60, 3, 0.1, 20) });
    let a = run_dml(&p, NuisanceLearners::both(&gb), &opts(3, 4)).unwrap();
    let b = run_dml(&p, NuisanceLearners::both(&gb), &opts(3, 4)).unwrap();
    assert_eq!(a, b);
    assert_eq!(a.0.theta.to_bits(), b.0.theta.to_bits());
}

#[test]
fn nonlinear_problem_favours_boosting() {
    let gb = LearnerSpec::Boosted(HyperParams::new(200, 3, 0.1, 20));
    let p = gen_plr(&SynthSpec::plr(SynthKind::PlrNonlinear, 0.5, 5000, 1234)).unwrap().problem;
    let (rb, res_b) = run_dml(&p, NuisanceLearners::both(&gb), &opts(2, 1)).unwrap();
    let (rl, res_l) = run_dml(&p, NuisanceLearners::both(&LINEAR), &opts(2, 1)).unwrap();
    assert!((rb.theta - 0.5).abs() < 3.0 * rb.se);
    assert!((rb.theta - 0.5).abs() < (rl.theta - 0.5).abs());
    assert!(res_b.r2_y > res_l.r2_y + 0.1);
}

#[test]
fn ci_coverage_with_ols_nuisances() {
    let reps = 200;
    let covered = (0..reps)
        .filter(|&s| {
            let p = gen_plr(&SynthSpec::plr(SynthKind::PlrLinear, 0.5, 2000, 50_000 + s)).unwrap().problem;
            run_dml(&p, NuisanceLearners::both(&LINEAR), &opts(2, s)).unwrap().0.covers(0.5)
        })
        .count();
    let rate = covered as f64 / reps as f64;
    assert!((0.90..=0.98).contains(&rate), "coverage {rate}");
}

#[test]
fn pure_noise_control_barely_moves_the_estimate() {
    let p = gen_plr(&SynthSpec::plr(SynthKind::PlrLinear, 0.5, 2000, 99)).unwrap().problem;
    let mut rng = stream(100);
    let noise: Vec<f64> = (0..p.n()).map(|_| StandardNormal.sample(&mut rng)).collect();
    let q = p.with_control("noise", &noise).unwrap();
    let (a, _) = run_dml(&p, NuisanceLearners::both(&LINEAR), &opts(5, 3)).unwrap();
    let (b, _) = run_dml(&q, NuisanceLearners::both(&LINEAR), &opts(5, 3)).unwrap();
    assert!((a.theta - b.theta).abs() < a.se);
}

#[test]
fn unit_blocked_folds_keep_units_whole() {
    let base = gen_plr(&SynthSpec::plr(SynthKind::PlrLinear, 0.5, 300, 4)).unwrap().problem;
    let ids: Vec<String> = (0..300).map(|i| format!("U{}", i % 17)).collect();
    let p = PlrProblem::new(base.y().clone(), base.d().clone(), base.x().clone(), base.x_names().to_vec(), ids)
        .unwrap();
    let o = DmlOptions { fold_mode: FoldMode::UnitBlocked, ..opts(4, 5) };
    let res = cross_fit_nuisance(&p, NuisanceLearners::both(&LINEAR), &o).unwrap();
    for u in 0..17 {
        let folds: std::collections::BTreeSet<usize> =
            (0..300).filter(|i| i % 17 == u).map(|i| res.fold_of[i]).collect();
        assert_eq!(folds.len(), 1);
    }
}

fn common_shock_panel() -> ratedml_core::PanelTable {
    use ratedml_core::panel_data::PanelRow;
    use ratedml_core::Month;
    let mut rng = stream(77);
    let mut z = || -> f64 { StandardNormal.sample(&mut rng) };
    let shocks: Vec<(f64, f64)> = (0..40).map(|_| (z(), z())).collect();
    let mut rows = Vec::new();
    for u in 0..6 {
        for (t, &(d, m)) in shocks.iter().enumerate() {
            let own = z();
            rows.push(PanelRow {
                unit_id: format!("F{u}"),
                time: Month::new(2000, 1).unwrap().offset(t as i32),
                y: 0.5 * d + m + own + 0.1 * z(),
                d,
                x: vec![m, own],
            });
        }
    }
    ratedml_core::PanelTable::new(rows, vec!["macro".into(), "own".into()]).unwrap()
}

#[test]
fn time_blocked_folds_keep_months_whole() {
    let panel = common_shock_panel();
    let p = PlrProblem::from_panel(&panel).unwrap();
    assert_eq!(p.encoded_columns(), [1]);
    let o = DmlOptions { fold_mode: FoldMode::TimeBlocked, encoding: EncodingOptions::default(), ..opts(4, 2) };
    let res = cross_fit_nuisance(&p, NuisanceLearners::both(&LINEAR), &o).unwrap();
    let mut fold_of_month = std::collections::HashMap::new();
    for (i, &t) in p.periods().iter().enumerate() {
        assert_eq!(*fold_of_month.entry(t).or_insert(res.fold_of[i]), res.fold_of[i]);
    }
    assert_eq!(fold_of_month.len(), 40);
}

#[test]
fn encoding_inside_folds_ignores_evaluation_outcomes() {
    // perturbing y on one row must not change predictions for that row's fold
    // mates of the same unit (their encodings come from the training side)
    let n = 240;
    let base = gen_plr(&SynthSpec::plr(SynthKind::PlrLinear, 0.5, n, 6)).unwrap().problem;
    let ids: Vec<String> = (0..n).map(|i| format!("U{}", i % 8)).collect();
    let p = PlrProblem::new(base.y().clone(), base.d().clone(), base.x().clone(), base.x_names().to_vec(), ids)
        .unwrap();
    let o = DmlOptions { encoding: EncodingOptions::default(), ..opts(3, 9) };
    let a = cross_fit_nuisance(&p, NuisanceLearners::both(&LINEAR), &o).unwrap();
    let mut y = p.y().clone();
    y[0] += 1000.0;
    let q = p.with_y(y).unwrap();
    let b = cross_fit_nuisance(&q, NuisanceLearners::both(&LINEAR), &o).unwrap();
    for i in 0..n {
        if a.fold_of[i] == a.fold_of[0] {
            assert_eq!(a.g_hat[i], b.g_hat[i]);
            assert_eq!(a.m_hat[i], b.m_hat[i]);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn outcome_scale_equivariance(seed in 0u64..1000, c in prop_oneof![-50.0f64..-0.1, 0.1f64..50.0]) {
        let p = random_linear(150, 3, seed);
        let q = p.with_y(p.y() * c).unwrap();
        let (a, _) = run_dml(&p, NuisanceLearners::both(&LINEAR), &opts(3, seed)).unwrap();
        let (b, _) = run_dml(&q, NuisanceLearners::both(&LINEAR), &opts(3, seed)).unwrap();
        let close = |x: f64, y: f64| (x - y).abs() <= 1e-9 * (1.0 + x.abs().max(y.abs()));
        prop_assert!(close(b.theta, c * a.theta));
        prop_assert!(close(b.se, c.abs() * a.se));
        prop_assert!(close(b.t, c.signum() * a.t));
        prop_assert!(close(b.p, a.p));
        let (lo, hi) = if c > 0.0 { (c * a.ci_low, c * a.ci_high) } else { (c * a.ci_high, c * a.ci_low) };
        prop_assert!(close(b.ci_low, lo) && close(b.ci_high, hi));
    }

    #[test]
    fn treatment_scale_divides_theta(seed in 0u64..1000, c in 0.1f64..20.0) {
        let p = random_linear(150, 3, seed);
        let q = p.with_d(p.d() * c).unwrap();
        let (a, _) = run_dml(&p, NuisanceLearners::both(&LINEAR), &opts(3, seed)).unwrap();
        let (b, _) = run_dml(&q, NuisanceLearners::both(&LINEAR), &opts(3, seed)).unwrap();
        prop_assert!((b.theta - a.theta / c).abs() <= 1e-9 * (1.0 + a.theta.abs()));
    }

    #[test]
    fn no_split_matches_full_ols_on_random_instances(seed in 0u64..100_000) {
        let p = random_linear(200, 5, seed);
        let o = DmlOptions { mode: RunMode::NoSplitDebug, ..opts(2, seed) };
        let (r, _) = run_dml(&p, NuisanceLearners::both(&LINEAR), &o).unwrap();
        prop_assert!((r.theta - full_ols_d_coef(&p)).abs() < 1e-8);
    }
}
