//! Cross-module fixtures: radial reduction feeding the solver, coupled
//! systems, and operator/cone interplay on randomized data.

use approx::assert_abs_diff_eq;
use cone_bvp::cone::{compute_rho_on, harnack_floor, in_cone};
use cone_bvp::expr::parse;
use cone_bvp::operator::apply_t;
use cone_bvp::problem::{radial_to_bvp, validate, ProblemSpec, RadialSpec};
use cone_bvp::quadrature::GridFunction;
use cone_bvp::solver::{picard_solve, solve_auto, verify_solution, SolverConfig};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

#[test]
fn radial_problem_solves_end_to_end() {
    let rspec = RadialSpec::new(
        1,
        2.0,
        2,
        1.0,
        2.0,
        vec![parse("1").unwrap()],
        vec![parse("1").unwrap()],
    )
    .unwrap();
    let spec = radial_to_bvp(&rspec).unwrap();

    let report = validate(&spec, 128).unwrap();
    assert!(report.all_pass(), "{report:?}");

    let bundle = picard_solve(&spec, &SolverConfig::default().with_grid(256)).unwrap();
    assert!(bundle.converged);
    let verification = verify_solution(&spec, &bundle, None, None).unwrap();
    assert!(verification.passed, "{verification:?}");
    assert!(verification.r_ode <= 1e-5, "r_ode = {}", verification.r_ode);
}

#[test]
fn coupled_symmetric_system_has_equal_components() {
    // f1 = 1 + u2, f2 = 1 + u1: the coupling is symmetric, so both
    // components agree at the fixed point.
    let spec = ProblemSpec::general(
        2,
        2.0,
        parse("1").unwrap(),
        parse("1").unwrap(),
        vec![parse("1 + u2").unwrap(), parse("1 + u1").unwrap()],
    )
    .unwrap();
    let bundle = solve_auto(&spec, &SolverConfig::default().with_grid(128)).unwrap();
    assert!(bundle.converged);
    assert!(bundle.is_positive_solution());
    for j in 0..=128 {
        assert_abs_diff_eq!(
            bundle.u[0].value(j),
            bundle.u[1].value(j),
            epsilon = 1e-7 * (1.0 + bundle.norm)
        );
    }
    let verification = verify_solution(&spec, &bundle, None, None).unwrap();
    assert!(verification.passed, "{verification:?}");
}

/// Draws a nonnegative iterate from the cone: a combination of profiles
/// whose window minimum is at least half their sup norm, which keeps the
/// sum in the cone for every admissible rho.
fn random_cone_iterate(n: usize, grid: usize, rng: &mut StdRng) -> Vec<GridFunction> {
    (0..n)
        .map(|_| {
            let c1: f64 = rng.random::<f64>() * 10.0;
            let c2: f64 = rng.random::<f64>() * 10.0;
            let c3: f64 = rng.random::<f64>() * 10.0;
            GridFunction::sample(grid, |t| -> cone_bvp::Result<f64> {
                let bump = 4.0 * t * (1.0 - t);
                let sine = (std::f64::consts::PI * t).sin();
                let plateau = (4.0 * t).min(4.0 * (1.0 - t)).min(1.0);
                Ok(c1 * bump + c2 * sine + c3 * plateau)
            })
            .unwrap()
        })
        .collect()
}

#[test]
fn operator_images_of_random_cone_points_stay_in_cone_with_floor() {
    let specs = vec![
        ProblemSpec::general(
            1,
            2.0,
            parse("1 + t").unwrap(),
            parse("1 + t^2").unwrap(),
            vec![parse("1 + 0.5*u1").unwrap()],
        )
        .unwrap(),
        ProblemSpec::separable(
            2,
            3.0,
            parse("2 - t").unwrap(),
            parse("1 + 2*t").unwrap(),
            vec![parse("1 + t").unwrap(), parse("0.5").unwrap()],
            vec![parse("1 + u1 + u2").unwrap(), parse("1 + u2^2").unwrap()],
            1.0,
        )
        .unwrap(),
    ];
    let mut rng = StdRng::seed_from_u64(2024);
    for spec in &specs {
        let cone = compute_rho_on(spec, 64).unwrap();
        for _ in 0..10 {
            let u = random_cone_iterate(spec.component_count(), 64, &mut rng);
            let pre = in_cone(&u, &cone, 1e-12);
            assert!(pre.all_member(), "input left the cone: {pre:?}");
            let out = apply_t(spec, &u).unwrap();
            let tol = 1e-10 * (1.0 + out.norm());
            let post = in_cone(&out.images(), &cone, tol);
            assert!(post.all_member(), "image left the cone: {post:?}");
            for c in &out.components {
                let floor = harnack_floor(&c.image, &cone);
                for j in 0..=64 {
                    assert!(
                        c.image.value(j) >= floor.value(j) - 1e-8 * (1.0 + out.norm()),
                        "Harnack floor violated at node {j}"
                    );
                }
            }
        }
    }
}

#[test]
fn lambda_scaled_solves_track_homogeneity_for_linear_phi() {
    // For p = 2 and g(u) = u1^2 the fixed-point norm scales exactly as
    // 1/lambda; the sweep rows must reproduce that.
    let spec = ProblemSpec::separable(
        1,
        2.0,
        parse("1").unwrap(),
        parse("1").unwrap(),
        vec![parse("1").unwrap()],
        vec![parse("u1^2").unwrap()],
        1.0,
    )
    .unwrap();
    let config = SolverConfig::default().with_grid(64);
    let base = solve_auto(&spec, &config).unwrap();
    assert!(base.converged);
    for lambda in [0.5, 4.0] {
        let scaled = solve_auto(&spec.with_lambda(lambda).unwrap(), &config).unwrap();
        assert!(scaled.converged, "lambda = {lambda}");
        assert_abs_diff_eq!(
            scaled.norm,
            base.norm / lambda,
            epsilon = 1e-6 * (1.0 + base.norm / lambda)
        );
    }
}
