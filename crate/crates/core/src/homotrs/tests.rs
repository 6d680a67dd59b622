use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand_distr::{Distribution, StandardNormal};

use super::*;
use crate::rng::aux_rng;

fn random_symmetric(seed: u64, s: usize) -> DMatrix<f64> {
    let mut rng = aux_rng(seed, 1);
    let b = DMatrix::from_fn(s, s, |_, _| StandardNormal.sample(&mut rng));
    (&b + b.transpose()) * 0.5
}

fn random_vec(seed: u64, s: usize) -> Vec<f64> {
    let mut rng = aux_rng(seed, 2);
    (0..s).map(|_| StandardNormal.sample(&mut rng)).collect()
}

fn solve(h: DMatrix<f64>, g: Vec<f64>, delta: f64, seed: u64) -> HomoSolution {
    let op = BorderedOperator::from_dense(h, g, delta).unwrap();
    let mut rng = aux_rng(seed, 3);
    solve_leftmost_lanczos(&op, &mut rng, &LanczosOptions::default()).unwrap()
}

#[test]
fn zero_gradient_identity_hessian() {
    let sol = solve(DMatrix::identity(2, 2), vec![0.0, 0.0], 0.5, 1);
    assert!((sol.lambda_min + 0.5).abs() < 1e-12);
    assert!((sol.theta - 0.5).abs() < 1e-12);
    assert!((sol.t - 1.0).abs() < 1e-12);
    assert!(sol.v_tilde.iter().all(|v| v.abs() < 1e-12));
}

#[test]
fn zero_gradient_negative_curvature() {
    let h = DMatrix::from_diagonal(&DVector::from_vec(vec![-2.0, 1.0]));
    let sol = solve(h, vec![0.0, 0.0], 0.5, 2);
    assert!((sol.lambda_min + 2.0).abs() < 1e-12);
    assert!((sol.theta - 2.0).abs() < 1e-12);
    assert!(sol.t.abs() < 1e-12);
    assert!((sol.v_tilde[0].abs() - 1.0).abs() < 1e-12);
    assert!(sol.v_tilde[1].abs() < 1e-12);
}

#[test]
fn one_dimensional_closed_form() {
    // det([[1 - l, 1], [1, -l]]) = l^2 - l - 1 = 0
    let root = (1.0 - 5f64.sqrt()) / 2.0;
    let h = DMatrix::from_element(1, 1, 1.0);
    for sol in [
        solve(h.clone(), vec![1.0], 0.0, 3),
        solve_leftmost_dense(&h, &[1.0], 0.0).unwrap(),
    ] {
        assert!((sol.lambda_min - root).abs() < 1e-12);
        assert!((sol.theta + root).abs() < 1e-12);
        assert!(sol.t > 0.0);
        assert!((sol.v_tilde[0] / sol.t - root).abs() < 1e-12);
    }
    let sol = solve(h, vec![1.0], 0.0, 4);
    let sk = crate::sketch::Sketch::from_rows(1, 1, vec![1.0]).unwrap();
    let (d, kind) = extract_direction(&sol, Some(&sk), DirectionRule::NonzeroT).unwrap();
    assert_eq!(kind, StepKind::Homogeneous);
    assert!((d[0] - root).abs() < 1e-12);
}

#[test]
fn psd_hessian_with_gradient_has_negative_eigenvalue() {
    let b = random_symmetric(5, 6);
    let h = &b * &b;
    let sol = solve_leftmost_dense(&h, &random_vec(5, 6), 0.0).unwrap();
    assert!(sol.lambda_min < 0.0);
    assert!(sol.theta > 0.0);
}

#[test]
fn lanczos_matches_dense_on_random_instances() {
    for seed in 0..20u64 {
        let s = 30;
        let h = random_symmetric(seed, s);
        let g = random_vec(seed, s);
        let delta = [0.0, 0.1, 1.0][seed as usize % 3];
        let dense = solve_leftmost_dense(&h, &g, delta).unwrap();
        let lz = solve(h, g, delta, seed);
        assert!((dense.lambda_min - lz.lambda_min).abs() <= 1e-8);
        assert!((dense.theta - lz.theta).abs() <= 1e-8);
        let diff: f64 = dense
            .v_tilde
            .iter()
            .chain(std::iter::once(&dense.t))
            .zip(lz.v_tilde.iter().chain(std::iter::once(&lz.t)))
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(diff <= 1e-6, "seed {seed}: eigenvector mismatch {diff}");
        assert!(lz.residual <= 1e-8);
        assert!(lz.hvp_count <= s + 1);
    }
}

#[test]
fn direction_for_stationary_subspace_point() {
    let sol = HomoSolution {
        lambda_min: -0.5,
        v_tilde: vec![0.0, 0.0],
        t: 1.0,
        theta: 0.5,
        residual: 0.0,
        tolerance: 1e-10,
        g_dot_v: 0.0,
        hvp_count: 0,
        sweeps: 1,
        method: SubproblemMethod::Dense,
    };
    let (d, kind) = extract_direction(&sol, None, DirectionRule::NonzeroT).unwrap();
    assert_eq!(d, vec![0.0, 0.0]);
    assert_eq!(kind, StepKind::Homogeneous);
}

#[test]
fn negative_curvature_direction_is_orthogonal_to_gradient() {
    // g orthogonal to the leftmost eigenvector of H: t = 0.
    let h = DMatrix::from_diagonal(&DVector::from_vec(vec![-3.0, 1.0, 2.0]));
    let g = vec![0.0, 0.5, -0.25];
    let sol = solve(h, g.clone(), 0.2, 9);
    assert!(sol.t.abs() < 1e-12);
    let (d, kind) = extract_direction(&sol, None, DirectionRule::NonzeroT).unwrap();
    assert_eq!(kind, StepKind::NegativeCurvature);
    assert!(dot(&g, &d).abs() <= 1e-10);
}

#[test]
fn threshold_rule_uses_sign_of_gradient() {
    let sol = HomoSolution {
        lambda_min: -1.0,
        v_tilde: vec![0.99, 0.0],
        t: 0.141,
        theta: 1.0,
        residual: 0.0,
        tolerance: 1e-10,
        g_dot_v: 0.3,
        hvp_count: 0,
        sweeps: 1,
        method: SubproblemMethod::Dense,
    };
    let (d, kind) = extract_direction(&sol, None, DirectionRule::Threshold(0.2)).unwrap();
    assert_eq!(kind, StepKind::NegativeCurvature);
    assert_eq!(d, vec![-0.99, 0.0]);
    let (d, kind) = extract_direction(&sol, None, DirectionRule::NonzeroT).unwrap();
    assert_eq!(kind, StepKind::Homogeneous);
    assert!((d[0] - 0.99 / 0.141).abs() < 1e-12);
    assert!(DirectionRule::Threshold(0.5).validate().is_err());
    assert!(DirectionRule::Threshold(0.1).validate().is_ok());
}

#[test]
fn operator_matches_dense_construction() {
    let s = 5;
    let h = random_symmetric(11, s);
    let g = random_vec(11, s);
    let op = BorderedOperator::from_dense(h.clone(), g.clone(), 0.3).unwrap();
    let dense = op.to_dense().unwrap();
    let w = random_vec(12, s + 1);
    let got = op.apply(&w).unwrap();
    let want = &dense * DVector::from_vec(w.clone());
    for i in 0..=s {
        assert!((got[i] - want[i]).abs() < 1e-12);
    }
    let w2 = random_vec(13, s + 1);
    let a = dot(&w, &op.apply(&w2).unwrap());
    let b = dot(&w2, &op.apply(&w).unwrap());
    assert!((a - b).abs() <= 1e-8 * a.abs().max(1.0));
}

#[test]
fn unreachable_tolerance_reports_not_converged() {
    let op = BorderedOperator::from_dense(random_symmetric(2, 8), random_vec(2, 8), 0.1).unwrap();
    let mut rng = aux_rng(0, 0);
    let opts = LanczosOptions {
        tol: 1e-300,
        max_sweeps: 2,
        ..Default::default()
    };
    match solve_leftmost_lanczos(&op, &mut rng, &opts) {
        Err(Error::SubproblemNotConverged { sweeps, best_residual }) => {
            assert_eq!(sweeps, 2);
            assert!(best_residual < 1e-10);
        }
        other => panic!("expected SubproblemNotConverged, got {other:?}"),
    }
}

#[test]
fn early_stopping_lanczos_agrees_with_dense() {
    let s = 120;
    let h = random_symmetric(21, s);
    let g = random_vec(21, s);
    let dense = solve_leftmost_dense(&h, &g, 0.5).unwrap();
    let op = BorderedOperator::from_dense(h, g, 0.5).unwrap();
    let opts = LanczosOptions {
        check_every: Some(10),
        ..Default::default()
    };
    let sol = solve_leftmost_lanczos(&op, &mut aux_rng(1, 1), &opts).unwrap();
    assert!((sol.lambda_min - dense.lambda_min).abs() < 1e-8);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn certificates_hold(seed in 0u64..10_000, s in 1usize..12, delta_idx in 0usize..3) {
        let delta = [0.0, 0.1, 1.0][delta_idx];
        let h = random_symmetric(seed, s);
        let g = random_vec(seed, s);
        let op = BorderedOperator::from_dense(h.clone(), g.clone(), delta).unwrap();
        let sol = solve_leftmost_lanczos(&op, &mut aux_rng(seed, 5), &LanczosOptions::default()).unwrap();
        prop_assert!((sol.eigvec_norm() - 1.0).abs() <= 1e-10);
        prop_assert!(sol.theta >= delta - 1e-12);
        if norm(&g) >= 1e-8 {
            prop_assert!(sol.theta > delta);
        }
        prop_assert!(sol.residual <= sol.tolerance);
        prop_assert!(sol.t >= 0.0 || sol.t.abs() <= T_ZERO_TOL);
        if sol.t.abs() > T_ZERO_TOL {
            let step: Vec<f64> = sol.v_tilde.iter().map(|v| v / sol.t).collect();
            let hs = &h * DVector::from_vec(step.clone());
            let kkt: f64 = (0..s).map(|i| (hs[i] + sol.theta * step[i] + g[i]).powi(2)).sum::<f64>().sqrt();
            prop_assert!(kkt <= 10.0 * sol.tolerance * (1.0 + sol.theta) / sol.t.abs());
            let mult = dot(&g, &step) - (delta - sol.theta);
            prop_assert!(mult.abs() <= 10.0 * sol.tolerance / sol.t.abs());
        }
        let f = op.to_dense().unwrap();
        let mut rng = aux_rng(seed, 6);
        for _ in 0..200 {
            let w: Vec<f64> = (0..=s).map(|_| StandardNormal.sample(&mut rng)).collect();
            let wn = norm(&w);
            let w = DVector::from_vec(w) / wn;
            let q = w.dot(&(&f * &w));
            prop_assert!(q >= sol.lambda_min - 1e-8);
        }
    }
}
