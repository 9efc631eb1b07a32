use qtriple::dualsolver::{solve_dual, DualProblem};
use qtriple::qlattice::{Decay, LatticeFunction};
use qtriple::qspecial::qbessel3_lattice;
use qtriple::quadsolver::*;
use qtriple::QError;

const Q: f64 = 0.5;
const EXPS: (f64, f64, f64) = (0.25, 1.0, 0.0);
const ORDERS: (f64, f64, f64) = (0.5, 0.5, 0.5);

fn pw(e: f64, c: f64) -> LatticeFunction {
    LatticeFunction::from_fn(move |x: f64| x.powf(e) * (-c * x).exp(), Decay::Power)
}

fn z() -> LatticeFunction {
    LatticeFunction::zero()
}

#[test]
fn zero_data_converges_in_one_sweep() {
    let p = Triple2Problem::new(Q, EXPS, ORDERS, 2, z(), (z(), z()), z()).unwrap();
    let s = solve_triple2(&p).unwrap();
    assert_eq!(s.sweeps, 1);
    assert!(s.lat.exponents().all(|k| s.psi.eval_exp(&s.lat, k).unwrap() == 0.0));
}

#[test]
fn decoupled_instance_matches_dual_solver() {
    let m = 2i64;
    let pp = Q * Q;
    let p0 = Triple2Problem::new(Q, EXPS, ORDERS, m, z(), (z(), z()), z()).unwrap();
    let n = p0.n;
    let d = DualProblem::new(Q, EXPS.0, EXPS.1, ORDERS.0, ORDERS.1, pw(1.0, 1.0), pw(-3.0, 0.0))
        .unwrap()
        .with_window(n + m as usize, n)
        .unwrap();
    let a1 = solve_dual(&d).unwrap();
    let lat = d.lat;
    // f equal to the cross term generated by A1, so the A2 pair has zero data
    let vals: Vec<(i64, f64)> = lat.exponents().map(|k| (k, a1.eval_exp(&lat, k).unwrap())).collect();
    let f = LatticeFunction::from_fn(
        move |x| {
            let k = (x.ln() / pp.ln()).round() as i64;
            let s: f64 = vals
                .iter()
                .rev()
                .map(|&(i, v)| (1.0 - pp) * pp.powf(i as f64 * (1.0 - EXPS.2)) * v * qbessel3_lattice(ORDERS.2, i + k, Q).unwrap())
                .sum();
            pp.powf(-EXPS.2 * k as f64) * s
        },
        Decay::Power,
    );
    let p = Triple2Problem::new(Q, EXPS, ORDERS, m, f, (pw(1.0, 1.0), z()), pw(-3.0, 0.0)).unwrap();
    let s = solve_triple2(&p).unwrap();
    let scale = lat.exponents().map(|k| a1.eval_exp(&lat, k).unwrap().abs()).fold(0.0, f64::max);
    for k in lat.exponents() {
        let (x, y) = (s.psi.eval_exp(&lat, k).unwrap(), a1.eval_exp(&lat, k).unwrap());
        assert!((x - y).abs() <= 1e-8 * scale, "k={k}: {x:e} vs {y:e}");
    }
    assert!(residual_triple2(&p, &s).unwrap().max() <= 1e-10);
}

fn generic() -> Triple2Problem {
    Triple2Problem::new(Q, EXPS, ORDERS, 2, pw(0.5, 0.0), (pw(1.0, 1.0), pw(-2.0, 0.0)), pw(-3.0, 0.0)).unwrap()
}

#[test]
fn generic_instance_contracts_geometrically() {
    let p = generic();
    let s = solve_triple2(&p).unwrap();
    assert!(s.sweeps >= 3 && s.sweeps < 20, "{:?}", s.trace);
    for w in s.trace[1..].windows(2) {
        assert!(w[1] < 0.5 * w[0], "{:?}", s.trace);
    }
    let r = residual_triple2(&p, &s).unwrap();
    assert!(r.max() <= 10.0 * p.controls.fp_tol, "{r:?}");
}

#[test]
fn damping_reaches_the_same_fixed_point() {
    let p = generic();
    let damped = generic().with_controls(IterControls { theta: 0.6, ..Default::default() }).unwrap();
    let (a, b) = (solve_triple2(&p).unwrap(), solve_triple2(&damped).unwrap());
    assert!(b.sweeps > a.sweeps);
    let scale = a.lat.exponents().map(|k| a.psi.eval_exp(&a.lat, k).unwrap().abs()).fold(0.0, f64::max);
    for k in a.lat.exponents() {
        let d = (a.psi.eval_exp(&a.lat, k).unwrap() - b.psi.eval_exp(&b.lat, k).unwrap()).abs();
        assert!(d <= 1e-7 * scale, "k={k}");
    }
}

#[test]
fn solution_is_linear_in_data() {
    let (c1, c2) = (0.7, -1.3);
    let solve = |f: f64, h: f64| {
        let scale = |c: f64, g: LatticeFunction| LatticeFunction::from_fn(move |x| c * g.eval(x).unwrap(), Decay::Power);
        let p = Triple2Problem::new(Q, EXPS, ORDERS, 2, scale(f, pw(0.5, 0.0)), (scale(f, pw(1.0, 1.0)), z()), scale(h, pw(-3.0, 0.0)))
            .unwrap()
            .with_controls(IterControls { fp_tol: 1e-13, ..Default::default() })
            .unwrap();
        let s = solve_triple2(&p).unwrap();
        s.lat.exponents().map(|k| s.psi.eval_exp(&s.lat, k).unwrap()).collect::<Vec<_>>()
    };
    let (a, b, ab) = (solve(1.0, 0.0), solve(0.0, 1.0), solve(c1, c2));
    let scale = a.iter().chain(&b).fold(0.0f64, |m, v| m.max(v.abs()));
    for i in 0..ab.len() {
        assert!((ab[i] - c1 * a[i] - c2 * b[i]).abs() <= 1e-10 * scale, "i={i}");
    }
}

#[test]
fn inadmissible_parameters_are_rejected() {
    let e = Triple2Problem::new(Q, (0.25, 0.25, 0.25), (0.5, 0.5, 0.5), 2, z(), (z(), z()), z()).unwrap_err();
    assert!(matches!(e, QError::Hypothesis(_)), "{e}");
    let e = generic().with_controls(IterControls { theta: 0.0, ..Default::default() }).unwrap_err();
    assert!(matches!(e, QError::Hypothesis(_) | QError::Domain(_)), "{e}");
}
