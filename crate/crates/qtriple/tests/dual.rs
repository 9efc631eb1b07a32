use proptest::prelude::*;
use qtriple::dualsolver::*;
use qtriple::qlattice::{Decay, LatticeFunction};

fn pw(e: f64, c: f64) -> LatticeFunction {
    LatticeFunction::from_fn(move |x: f64| x.powf(e) * (-c * x).exp(), Decay::Power)
}

#[test]
fn residuals_small_over_parameter_grid() {
    for (q, al, be, mu, nu) in [(0.5, 0.0, 0.25, 0.5, 0.5), (0.5, 0.1, 0.5, 0.5, 0.5), (0.3, 0.1, 1.0, 0.25, 1.5), (0.7, -0.2, 0.1, 0.25, 1.5)] {
        let p = DualProblem::new(q, al, be, mu, nu, pw(1.0, 0.5), pw(-3.0, 0.0)).unwrap();
        let psi = solve_dual(&p).unwrap();
        let r = dual_residual(&p, &psi).unwrap();
        assert!(r.max() <= 1e-7, "q={q} {:?}: {r:?}", (al, be, mu, nu));
        assert!(r.points >= 18);
    }
}

#[test]
fn solution_is_frozen() {
    let p = DualProblem::new(0.5, 0.25, 1.0, 0.5, 0.5, pw(0.5, 0.0), LatticeFunction::from_fn(|x| 2.0 * x.powi(-3), Decay::Power)).unwrap();
    let psi = solve_dual(&p).unwrap();
    for (k, want) in [(-3, -1.2049997533531774e-3), (0, 1.2879674826755017e0), (2, 1.047760367997539e-1), (5, 6.664278528575887e-4)] {
        let got = psi.eval_exp(&p.lat, k).unwrap();
        assert!((got - want).abs() <= 1e-11 * want.abs(), "k={k}: {got:e}");
    }
}

#[test]
fn window_can_be_widened() {
    let p = DualProblem::new(0.5, 0.0, 0.25, 0.5, 0.5, pw(1.0, 0.5), pw(-3.0, 0.0)).unwrap();
    let wide = p.clone().with_window(40, 40).unwrap();
    let (a, b) = (solve_dual(&p).unwrap(), solve_dual(&wide).unwrap());
    for k in -10..10 {
        let (x, y) = (a.eval_exp(&p.lat, k).unwrap(), b.eval_exp(&wide.lat, k).unwrap());
        assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()), "k={k}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn solution_is_linear_in_data(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let q = 0.5;
        let solve = |f: LatticeFunction, g: LatticeFunction| {
            let p = DualProblem::new(q, 0.1, 0.5, 0.5, 0.5, f, g).unwrap();
            let psi = solve_dual(&p).unwrap();
            p.lat.exponents().map(|k| psi.eval_exp(&p.lat, k).unwrap()).collect::<Vec<_>>()
        };
        let f1 = solve(pw(1.0, 0.5), LatticeFunction::zero());
        let f2 = solve(LatticeFunction::zero(), pw(-3.0, 0.0));
        let (pa, pb) = (pw(1.0, 0.5), pw(-3.0, 0.0));
        let both = solve(
            LatticeFunction::from_fn(move |x| a * pa.eval(x).unwrap(), Decay::Power),
            LatticeFunction::from_fn(move |x| b * pb.eval(x).unwrap(), Decay::Power),
        );
        let scale = f1.iter().chain(&f2).fold(0.0f64, |m, v| m.max(v.abs()));
        for i in 0..both.len() {
            prop_assert!((both[i] - a * f1[i] - b * f2[i]).abs() <= 1e-10 * scale);
        }
    }
}

fn example(reduction: Reduction) -> Example1 {
    let f = match reduction {
        Reduction::Head => pw(0.5, 0.0),
        Reduction::Tail => pw(-3.0, 0.0),
    };
    Example1 { q: 0.5, nu: 0.5, alpha: 0.5, reduction, f }
}

#[test]
fn example1_matches_derived_closed_forms() {
    for red in [Reduction::Head, Reduction::Tail] {
        let ex = example(red);
        let d = ex.dual().unwrap();
        let psi = solve_dual(&d).unwrap();
        assert!(dual_residual(&d, &psi).unwrap().max() <= 1e-7);
        let ks: Vec<i64> = match red {
            Reduction::Head => (0..8).collect(),
            Reduction::Tail => (-8..0).collect(),
        };
        for k in ks {
            let b = ex.band_from_psi(&psi, &d.lat, k).unwrap();
            let c = ex.band_closed(k, Form::Derived).unwrap();
            assert!((b - c).abs() <= 1e-10 * (1.0 + c.abs()), "{red:?} k={k}: {b:e} vs {c:e}");
            let printed = ex.band_closed(k, Form::Printed).unwrap();
            assert!((b - printed).abs() > 1e-3 * b.abs(), "{red:?} k={k}: printed form unexpectedly agrees");
        }
    }
    let ex = example(Reduction::Head);
    let d = ex.dual().unwrap();
    let psi = solve_dual(&d).unwrap();
    for k in -6..8 {
        let got = ex.psi(&psi, &d.lat, k).unwrap();
        let want = ex.psi_closed_head(k, Form::Derived).unwrap();
        assert!((got - want).abs() <= 1e-10 * (1.0 + want.abs()), "k={k}: {got:e} vs {want:e}");
    }
}
