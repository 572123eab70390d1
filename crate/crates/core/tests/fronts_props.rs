mod support;

use proptest::prelude::*;
use stefan_core::fronts::{residual_ex1, solve_fronts, solve_problem, FrontSystem, SolveOptions};
use stefan_core::material::build_transformed_problem;
use stefan_core::similarity::reconstruct_field;
use stefan_core::{MaterialModel, Phase};
use support::*;

fn aluminium() -> (MaterialModel, stefan_core::TransformedProblem) {
    let m = MaterialModel::aluminium();
    let p = build_transformed_problem(&m).unwrap();
    (m, p)
}

#[test]
fn aluminium_fronts() {
    let (_, p) = aluminium();
    let (res, _) = solve_problem(&p, &SolveOptions::default()).unwrap();
    // figures quoted for the aluminium example, rounded to three digits
    assert!((res.omega1 - 0.0127).abs() < 5e-4, "{}", res.omega1);
    assert!((res.omega2 - 0.0202).abs() < 5e-4, "{}", res.omega2);
    // the rounded published values leave residuals of a few percent
    let (_, scaled) = residual_ex1(&p, 0.0127, 0.0202).unwrap();
    assert!(scaled.iter().all(|r| r.abs() < 0.05), "{scaled:?}");
}

#[test]
fn aluminium_matches_scan_bisection() {
    let (_, p) = aluminium();
    let (res, _) = solve_problem(&p, &SolveOptions::default()).unwrap();
    let d = Data {
        a: p.liquid_kind.coeff(),
        b: p.solid_kind.coeff(),
        u1: p.u_evaporation,
        u2: p.u_melting,
        v2: p.v_melting,
        v0: p.v_far,
        hv: p.latent_evaporation,
        hm: p.latent_melting,
        q0: p.flux_amplitude,
    };
    let roots = ex1_roots(&d);
    assert_eq!(roots.len(), 1, "{roots:?}");
    assert!((roots[0].0 - res.omega1).abs() < 1e-12);
    assert!((roots[0].1 - res.omega2).abs() < 1e-12);
}

#[test]
fn converged_results_certify() {
    let opts = SolveOptions::default();
    let mut rng = SeededRng::new(9);
    let problems = [
        aluminium().1,
        ex1_set(&mut rng).0.problem(const_kind, const_kind),
        ex2_set(&mut rng).0.problem(invsq_kind, invsq_kind),
        ex3_set(&mut rng).0.problem(const_kind, exp_kind),
    ];
    for p in problems {
        let (res, _) = solve_problem(&p, &opts).unwrap();
        assert!(res.residual_norm < opts.tol);
        assert!(res.certified_norm < 10.0 * opts.tol, "{}", res.certified_norm);
        assert!(0.0 < res.omega1 && res.omega1 < res.omega2);
        assert_eq!(res.unknowns.len(), res.case.dim());
        assert_eq!(res.residual_history.last().copied(), Some(res.residual_norm));
    }
}

#[test]
fn solves_are_bit_identical() {
    let mut rng = SeededRng::new(10);
    for p in [aluminium().1, ex3_set(&mut rng).0.problem(const_kind, exp_kind)] {
        let sys = FrontSystem::new(p).unwrap();
        let a = solve_fronts(&sys, None, &SolveOptions::default()).unwrap();
        let b = solve_fronts(&sys, None, &SolveOptions::default()).unwrap();
        assert_eq!(a, b);
    }
}

#[test]
fn field_is_self_similar() {
    let (m, p) = aluminium();
    let (_, sol) = solve_problem(&p, &SolveOptions::default()).unwrap();
    for k in 0..=40 {
        let omega = sol.omega1 + (4.0 * sol.omega2 - sol.omega1) * k as f64 / 40.0;
        let temps: Vec<f64> = [0.25f64, 1.0, 4.0, 16.0]
            .iter()
            .map(|&t| reconstruct_field(&sol, &m, t, omega * t.sqrt()).unwrap().1)
            .collect();
        for t in &temps {
            assert!((t - temps[0]).abs() <= 1e-10 * temps[0], "w = {omega}: {temps:?}");
        }
    }
}

#[test]
fn temperature_is_continuous_at_melting_front() {
    let (m, p) = aluminium();
    let (_, sol) = solve_problem(&p, &SolveOptions::default()).unwrap();
    let liquid = m.temperature(Phase::Liquid, sol.value_in_phase(Phase::Liquid, sol.omega2).unwrap()).unwrap();
    let solid = m.temperature(Phase::Solid, sol.value_in_phase(Phase::Solid, sol.omega2).unwrap()).unwrap();
    assert!((liquid - solid).abs() <= 1e-9 * solid, "{liquid} vs {solid}");
    assert!((solid - m.t_melting).abs() <= 1e-9 * solid);
}

#[test]
fn field_decreases_from_evaporation_to_initial() {
    let (m, p) = aluminium();
    let (_, sol) = solve_problem(&p, &SolveOptions::default()).unwrap();
    let s1 = sol.front(Phase::Liquid, 1.0);
    let s2 = sol.front(Phase::Solid, 1.0);
    let mut prev = f64::INFINITY;
    for k in 0..=200 {
        let x = s1 + (5.0 * s2 - s1) * k as f64 / 200.0;
        let (_, t) = reconstruct_field(&sol, &m, 1.0, x).unwrap();
        assert!(t < prev || k == 0, "x = {x}");
        assert!(t <= m.t_evaporation * (1.0 + 1e-12) && t >= m.t_initial);
        prev = t;
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn ex1_root_is_scale_invariant(k in 1e-3f64..1e3) {
        let mut rng = SeededRng::new(12);
        let (d, _) = ex1_set(&mut rng);
        let scaled = Data {
            u1: k * d.u1, u2: k * d.u2, v2: k * d.v2, v0: k * d.v0,
            hv: k * d.hv, hm: k * d.hm, q0: k * d.q0, ..d
        };
        let opts = SolveOptions::default();
        let (r0, _) = solve_problem(&d.problem(const_kind, const_kind), &opts).unwrap();
        let (r1, _) = solve_problem(&scaled.problem(const_kind, const_kind), &opts).unwrap();
        prop_assert!((r0.omega1 - r1.omega1).abs() <= 1e-10 * r0.omega1);
        prop_assert!((r0.omega2 - r1.omega2).abs() <= 1e-10 * r0.omega2);
    }
}
