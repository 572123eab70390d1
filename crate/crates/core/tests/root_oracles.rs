mod support;

use stefan_core::fronts::{assemble_solution, solve_fronts, FrontCase, FrontSystem, SolveOptions};
use support::*;

const TOL: f64 = 1e-6;

fn close(a: f64, b: f64) -> bool {
    (a - b).abs() <= TOL * b.abs().max(1.0)
}

#[test]
fn ex1_newton_matches_scan_bisection() {
    let mut rng = SeededRng::new(11);
    for _ in 0..5 {
        let (d, (w1, w2)) = ex1_set(&mut rng);
        let sys = FrontSystem::new(d.problem(const_kind, const_kind)).unwrap();
        assert_eq!(sys.case, FrontCase::Ex1ConstConst);
        let res = solve_fronts(&sys, None, &SolveOptions::default()).unwrap();
        let roots = ex1_roots(&d);
        assert!(
            roots.iter().any(|&(a, b)| close(a, w1) && close(b, w2)),
            "oracle missed the planted root {w1}, {w2}: {roots:?}"
        );
        let (x1, x2) = (res.unknowns[0], res.unknowns[1]);
        assert!(
            roots.iter().any(|&(a, b)| close(a, x1) && close(b, x2)),
            "newton root {x1}, {x2} not among oracle roots {roots:?} ({d:?})"
        );
        assemble_solution(&sys, &res).unwrap();
    }
}

#[test]
fn ex2_newton_matches_scan_bisection() {
    let mut rng = SeededRng::new(22);
    for _ in 0..5 {
        let (d, (t1, t2, n2)) = ex2_set(&mut rng);
        let sys = FrontSystem::new(d.problem(invsq_kind, invsq_kind)).unwrap();
        assert_eq!(sys.case, FrontCase::Ex2InvSqInvSq);
        let res = solve_fronts(&sys, None, &SolveOptions::default()).unwrap();
        let roots = ex2_roots(&d);
        assert!(
            roots.iter().any(|&(a, b, c)| close(a, t1) && close(b, t2) && close(c, n2)),
            "oracle missed the planted root {t1}, {t2}, {n2}: {roots:?}"
        );
        let x = &res.unknowns;
        assert!(
            roots.iter().any(|&(a, b, c)| close(a, x[0]) && close(b, x[1]) && close(c, x[2])),
            "newton root {x:?} not among oracle roots {roots:?} ({d:?})"
        );
        assemble_solution(&sys, &res).unwrap();
    }
}

#[test]
fn ex3_newton_matches_scan_bisection() {
    let mut rng = SeededRng::new(33);
    for _ in 0..5 {
        let (d, (w1, n2)) = ex3_set(&mut rng);
        let sys = FrontSystem::new(d.problem(const_kind, exp_kind)).unwrap();
        assert_eq!(sys.case, FrontCase::Ex3ConstExp);
        let res = solve_fronts(&sys, None, &SolveOptions::default()).unwrap();
        let x = &res.unknowns;
        let roots = ex3_roots(&d, 0.2 * n2.min(x[1]), 3.0 * n2.max(x[1]), 48);
        assert!(
            roots.iter().any(|&(a, b)| close(a, w1) && close(b, n2)),
            "oracle missed the planted root {w1}, {n2}: {roots:?}"
        );
        assert!(
            roots.iter().any(|&(a, b)| close(a, x[0]) && close(b, x[1])),
            "newton root {x:?} not among oracle roots {roots:?} ({d:?})"
        );
        assemble_solution(&sys, &res).unwrap();
    }
}
