use qtriple::triplesolver::*;

const Q: f64 = 0.5;

fn solved() -> (Example2, TripleSolver, SolveReport) {
    let ex = Example2::new(Q, 2, 0);
    let s = TripleSolver::new(ex.problem().unwrap(), SolveOptions::default()).unwrap();
    let r = s.solve().unwrap();
    (ex, s, r)
}

fn max_err(ex: &Example2, r: &SolveReport, grid: &[i64], form: Example2Form, first: bool) -> f64 {
    grid.iter()
        .map(|&k| {
            let x = Q.powi(k as i32);
            let (closed, solved) = if first {
                (ex.psi1_closed(r, k, form).unwrap(), r.psi1.eval(x).unwrap())
            } else {
                (ex.psi2_closed(r, k, form).unwrap(), r.psi2.eval(x).unwrap())
            };
            (closed - solved).abs()
        })
        .fold(0.0, f64::max)
}

#[test]
fn coupled_closed_forms_hold() {
    let (ex, s, r) = solved();
    let (g1, g2) = s.grids();
    assert!(max_err(&ex, &r, &g1, Example2Form::Derived, true) <= 1e-12);
    assert!(max_err(&ex, &r, &g2, Example2Form::Derived, false) <= 1e-8);
    assert!(max_err(&ex, &r, &g1, Example2Form::Printed, true) > 1e-3);
    assert!(max_err(&ex, &r, &g2, Example2Form::Printed, false) > 1.0);
}

#[test]
fn band_equations_hold() {
    let (_, s, r) = solved();
    let res = s.residual(&r).unwrap();
    assert!(res.max() <= 1e-8, "{res:?}");
    assert!(r.condition < 1e3);
}

#[test]
fn head_coefficient_closed_form() {
    let (ex, s, _) = solved();
    for k in -4..6 {
        let c = s.c1_head(k).unwrap();
        let derived = ex.c1_head_closed(k, Example2Form::Derived).unwrap();
        let printed = ex.c1_head_closed(k, Example2Form::Printed).unwrap();
        assert!((c - derived).abs() <= 1e-12 * (1.0 + c.abs()), "k={k}: {c:e} vs {derived:e}");
        assert!((printed / derived - 0.25).abs() < 1e-12, "printed differs by (1-q)^2");
    }
}

#[test]
fn problem_is_admissible() {
    let p = Example2::new(Q, 2, 0).problem().unwrap();
    assert_eq!((p.alpha, p.nu), (0.5, 0.0));
    p.validate().unwrap();
}
