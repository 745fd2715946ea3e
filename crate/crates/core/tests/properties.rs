//! Structural invariants of the binning projection and the information loss,
//! checked on random parameters and directions across the model catalogue.

use binloss::binning::{apply_binning, project_component, weighted_inner, weighted_norm_sq};
use binloss::fisher::{fim_binned, fim_list_mode, loss_quadform};
use binloss::model::sample_model;
use binloss::model::zoo::catalogue;
use binloss::{
    build_composite_rule, build_rule, BinningScheme, NodeFunction, NodeRule, ParametricModel,
    ZooModel,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn setup(model: &ZooModel<f64>, per_axis: usize) -> (BinningScheme<f64>, NodeRule<f64>) {
    let space = model.space();
    let scheme = BinningScheme::uniform_grid(space, &vec![per_axis; space.dim()]).unwrap();
    let rule = build_rule(space, &scheme, 4).unwrap();
    (scheme, rule)
}

fn random_direction(rng: &mut ChaCha8Rng, p: usize) -> Vec<f64> {
    loop {
        let d: Vec<f64> = (0..p).map(|_| rng.random_range(-1.0..1.0)).collect();
        if d.iter().any(|x| x.abs() > 1e-3) {
            return d;
        }
    }
}

fn random_node_function(rng: &mut ChaCha8Rng, rule: &NodeRule<f64>) -> NodeFunction<f64> {
    NodeFunction(
        (0..rule.len())
            .map(|_| rng.random_range(-2.0..2.0))
            .collect(),
    )
}

const BIN_COUNTS: [usize; 4] = [1, 2, 3, 8];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn projection_is_orthogonal_and_idempotent(seed in any::<u64>(), which in 0usize..5, mi in 0usize..4) {
        let model = &catalogue::<f64>()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta = model.random_theta(&mut rng);
        let (scheme, rule) = setup(model, BIN_COUNTS[mi]);
        let mean = NodeFunction(sample_model(model, &theta, &rule).unwrap().mean);
        let gamma = random_node_function(&mut rng, &rule);

        let (g1, g0) = project_component(&gamma, model, &theta, &scheme, &rule).unwrap();
        let total = weighted_norm_sq(&rule, &mean, &gamma).unwrap();
        let n1 = weighted_norm_sq(&rule, &mean, &g1).unwrap();
        let n0 = weighted_norm_sq(&rule, &mean, &g0).unwrap();
        prop_assert!((total - n1 - n0).abs() <= 1e-12 * total);
        prop_assert!(weighted_inner(&rule, &mean, &g1, &g0).unwrap().abs() <= 1e-12 * total);

        // the null component bins to zero
        let b = apply_binning(&scheme, &rule, &gamma).unwrap();
        let scale = b.0.iter().map(|x| x * x).sum::<f64>().sqrt().max(f64::MIN_POSITIVE);
        let b0 = apply_binning(&scheme, &rule, &g0).unwrap();
        prop_assert!(b0.0.iter().all(|x| x.abs() <= 1e-12 * scale));

        // projecting the range component again changes nothing
        let (g11, g10) = project_component(&g1, model, &theta, &scheme, &rule).unwrap();
        let peak = g1.0.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        for (a, b) in g11.0.iter().zip(&g1.0) {
            prop_assert!((a - b).abs() <= 1e-12 * peak);
        }
        prop_assert!(g10.0.iter().all(|x| x.abs() <= 1e-12 * peak));
    }

    #[test]
    fn loss_is_nonnegative_and_routes_agree(seed in any::<u64>(), which in 0usize..5, mi in 0usize..4) {
        let model = &catalogue::<f64>()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta = model.random_theta(&mut rng);
        let delta = random_direction(&mut rng, model.param_dim());
        let (scheme, rule) = setup(model, BIN_COUNTS[mi]);
        let r = loss_quadform(model, &theta, &delta, &scheme, &rule).unwrap();
        prop_assert!(r.is_nonnegative(), "{r:?}");
        prop_assert!(r.routes_agree(), "{r:?}");

        let diff = fim_list_mode(model, &theta, &rule).unwrap().matrix
            .sub(&fim_binned(model, &theta, &scheme, &rule).unwrap().matrix).unwrap();
        let tr = fim_list_mode(model, &theta, &rule).unwrap().trace();
        prop_assert!(diff.min_eigenvalue().unwrap() >= -1e-10 * tr);
    }

    #[test]
    fn loss_scales_quadratically(seed in any::<u64>(), which in 0usize..5, alpha in 0.1f64..10.0) {
        let model = &catalogue::<f64>()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta = model.random_theta(&mut rng);
        let delta = random_direction(&mut rng, model.param_dim());
        let scaled: Vec<f64> = delta.iter().map(|d| alpha * d).collect();
        let (scheme, rule) = setup(model, 4);
        let a = loss_quadform(model, &theta, &delta, &scheme, &rule).unwrap();
        let b = loss_quadform(model, &theta, &scaled, &scheme, &rule).unwrap();
        let a2 = alpha * alpha;
        prop_assert!((b.quadform_lm - a2 * a.quadform_lm).abs() <= 1e-12 * b.quadform_lm);
        prop_assert!((b.quadform_binned - a2 * a.quadform_binned).abs() <= 1e-12 * b.quadform_lm);
        prop_assert!((b.loss_null_norm - a2 * a.loss_null_norm).abs() <= 1e-12 * b.quadform_lm);
    }

    #[test]
    fn refinement_never_loses_binned_information(seed in any::<u64>(), which in 0usize..5) {
        let model = &catalogue::<f64>()[which];
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let theta = model.random_theta(&mut rng);
        let delta = random_direction(&mut rng, model.param_dim());
        // every grid shares the node set of the finest one
        let space = model.space();
        let mut prev: Option<f64> = None;
        for m in [1, 2, 4, 8, 16] {
            let scheme = BinningScheme::uniform_grid(space, &vec![m; space.dim()]).unwrap();
            let rule = build_composite_rule(space, &scheme, 4, 16 / m).unwrap();
            let r = loss_quadform(model, &theta, &delta, &scheme, &rule).unwrap();
            if let Some(p) = prev {
                prop_assert!(r.quadform_binned - p >= -1e-12 * r.quadform_lm, "M={m}");
            }
            prev = Some(r.quadform_binned);
        }
    }
}

#[test]
fn proportional_perturbation_of_scaled_profile_is_lossless() {
    let model = &catalogue::<f64>()[2];
    for m in [1, 2, 5] {
        let (scheme, rule) = setup(model, m);
        let r = loss_quadform(model, &[2.5], &[0.7], &scheme, &rule).unwrap();
        assert!(r.loss_direct.abs() <= 1e-13 * r.quadform_lm, "M={m}: {r:?}");
        assert!(
            r.loss_null_norm.abs() <= 1e-13 * r.quadform_lm,
            "M={m}: {r:?}"
        );
    }
}

#[test]
fn affine_loss_quarters_on_refinement() {
    let model = ZooModel::<f64>::affine_1d();
    let losses: Vec<f64> = [1, 2, 4, 8, 16]
        .iter()
        .map(|&m| {
            let (scheme, rule) = setup(&model, m);
            loss_quadform(&model, &[1.0, 0.0], &[0.0, 1.0], &scheme, &rule)
                .unwrap()
                .loss_direct
        })
        .collect();
    for w in losses.windows(2) {
        assert!((w[0] / w[1] - 4.0).abs() < 1e-6, "{losses:?}");
    }
}
