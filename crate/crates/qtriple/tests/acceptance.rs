//! One PASS/FAIL line per acceptance criterion.
//!
//! Two criteria cannot be met as written: they ask the solvers to reproduce
//! published closed forms whose constants are wrong. Those are evaluated
//! against the published forms unchanged and reported as FAIL, with the
//! corrected forms shown underneath for reference. The test asserts that
//! exactly that set fails.

use std::time::Instant;

use qtriple::cli::{self, Command, RunConfig};
use qtriple::dualsolver::{dual_residual, solve_dual, DualProblem, Example1, Form, Reduction};
use qtriple::qhankel::{hankel, HankelSpec};
use qtriple::qlattice::{Decay, LatticeFunction, QLattice};
use qtriple::qspecial::qbessel3_lattice;
use qtriple::quadsolver::{residual_triple2, solve_triple2, Triple2Problem};
use qtriple::triplesolver::{audit_variants, Example2, Example2Form, Manufactured, PlantedWeight, SolveOptions, TripleSolver};
use qtriple::verify::{identity_suite, QS};

const IDENTITY_TOL: f64 = 1e-8;
const IDENTITY_SECS: f64 = 60.0;
const HANKEL_TOL: f64 = 1e-8;
const HANKEL_SECS: f64 = 10.0;
const CLOSED_FORM_TOL: f64 = 1e-8;
const DUAL_RES_TOL: f64 = 1e-7;
const RECOVERY_TOL: f64 = 1e-6;
const REJECT_RES: f64 = 1e-2;
const EX2_CLOSED_TOL: f64 = 1e-6;
const EX2_RES_TOL: f64 = 1e-5;
const EX2_SECS: f64 = 120.0;
const DECOUPLED_TOL: f64 = 1e-8;
const FP_TOL: f64 = 1e-8;

struct Line {
    id: u8,
    pass: bool,
    text: String,
    notes: Vec<String>,
}

fn line(id: u8, pass: bool, text: String) -> Line {
    Line { id, pass, text, notes: Vec::new() }
}

fn identities() -> Line {
    let t = Instant::now();
    let checks = identity_suite().unwrap();
    let secs = t.elapsed().as_secs_f64();
    let worst = checks.iter().fold(0.0f64, |m, c| m.max(c.max_rel_err));
    let min_points = checks.iter().map(|c| c.points).min().unwrap();
    let pass = worst <= IDENTITY_TOL && min_points >= 9 && secs <= IDENTITY_SECS;
    line(1, pass, format!("identity suite: {} identities, max rel err {worst:.2e} (<= {IDENTITY_TOL:e}), >= {min_points} points each, {secs:.1} s", checks.len()))
}

fn hankel_round_trip() -> Line {
    let t = Instant::now();
    let supports: [&[(i64, f64)]; 5] = [
        &[(0, 1.0)],
        &[(-1, 0.5), (0, 1.0), (1, 0.5)],
        &[(-3, 2.0), (2, -1.0)],
        &[(-2, 0.3), (-1, -1.0), (0, 2.0), (1, 0.5), (3, 1.25)],
        &[(1, 1.0), (2, 0.8), (3, 0.6), (4, 0.4), (5, 0.2)],
    ];
    let mut worst = 0.0f64;
    for q in QS {
        let lat = QLattice::default_window(q, 1.0).unwrap();
        let spec = HankelSpec::new(0.5, lat).unwrap();
        for s in supports {
            let mut table = vec![0.0; (lat.k_max() - lat.k_min() + 1) as usize];
            for &(k, v) in s {
                table[(k - lat.k_min()) as usize] = v;
            }
            let f = LatticeFunction::from_table(&lat, lat.k_min(), table, Decay::SuperGeometric).unwrap();
            let back = hankel(&spec, &hankel(&spec, &f).unwrap()).unwrap();
            for k in -10..=10 {
                worst = worst.max((back.eval_exp(&lat, k).unwrap() - f.eval_exp(&lat, k).unwrap()).abs());
            }
        }
    }
    let secs = t.elapsed().as_secs_f64();
    line(2, worst <= HANKEL_TOL && secs <= HANKEL_SECS, format!("Hankel double transform: 5 supports x {} q, sup err {worst:.2e} (<= {HANKEL_TOL:e}), {secs:.2} s", QS.len()))
}

fn example1() -> Line {
    let mut res = 0.0f64;
    let (mut printed_head, mut printed_tail, mut derived) = (0.0f64, 0.0f64, 0.0f64);
    for red in [Reduction::Head, Reduction::Tail] {
        let f = match red {
            Reduction::Head => LatticeFunction::from_fn(f64::sqrt, Decay::None),
            Reduction::Tail => LatticeFunction::from_fn(|x| x.powi(-3), Decay::Power),
        };
        let ex = Example1 { q: 0.5, nu: 0.5, alpha: 0.5, reduction: red, f };
        let d = ex.dual().unwrap();
        let psi = solve_dual(&d).unwrap();
        res = res.max(dual_residual(&d, &psi).unwrap().max());
        match red {
            Reduction::Head => {
                // ψ itself has a published closed form; compare at every window point
                for k in d.lat.exponents() {
                    let got = ex.psi(&psi, &d.lat, k).unwrap();
                    let scale = 1.0 + got.abs();
                    printed_head = printed_head.max((got - ex.psi_closed_head(k, Form::Printed).unwrap()).abs() / scale);
                    derived = derived.max((got - ex.psi_closed_head(k, Form::Derived).unwrap()).abs() / scale);
                }
            }
            Reduction::Tail => {
                // the published tail form is for the band function on B_{q,1}
                for k in -(d.lat.n_neg as i64 / 2)..0 {
                    let got = ex.band_from_psi(&psi, &d.lat, k).unwrap();
                    let scale = 1.0 + got.abs();
                    printed_tail = printed_tail.max((got - ex.band_closed(k, Form::Printed).unwrap()).abs() / scale);
                    derived = derived.max((got - ex.band_closed(k, Form::Derived).unwrap()).abs() / scale);
                }
            }
        }
    }
    let pass = printed_head <= CLOSED_FORM_TOL && printed_tail <= CLOSED_FORM_TOL && res <= DUAL_RES_TOL;
    let mut l = line(
        3,
        pass,
        format!("dual solver, Example 1: published closed forms err head {printed_head:.2e}, tail {printed_tail:.2e} (<= {CLOSED_FORM_TOL:e}); residual {res:.2e} (<= {DUAL_RES_TOL:e})"),
    );
    l.notes.push(format!("corrected closed forms, both reductions: err {derived:.2e}"));
    l
}

fn manufactured() -> Line {
    let mut winners = Vec::new();
    let (mut recovery, mut rejected) = (0.0f64, f64::INFINITY);
    for w in [PlantedWeight::Zero, PlantedWeight::Constant(0.5), PlantedWeight::Lorentz] {
        let m = Manufactured::new(0.5, 3, 0, 0.5, 0.5, w).unwrap();
        let (best, all) = audit_variants(&m, SolveOptions { m: 40, n: 40, ..Default::default() }).unwrap();
        winners.push(best);
        for a in all {
            if a.variant == best {
                recovery = recovery.max(a.recovery);
            } else {
                rejected = rejected.min(a.residual);
            }
        }
    }
    let stable = winners.iter().all(|&w| w == winners[0]);
    let pass = stable && recovery <= RECOVERY_TOL && rejected > REJECT_RES;
    line(
        4,
        pass,
        format!("manufactured audit: 3 weights, winner {:?} on all: {stable}, recovery {recovery:.2e} (<= {RECOVERY_TOL:e}), rejected residual >= {rejected:.2e} (> {REJECT_RES:e})", winners[0]),
    )
}

fn example2() -> Line {
    let t = Instant::now();
    let q = 0.5;
    let ex = Example2::new(q, 2, 0);
    let s = TripleSolver::new(ex.problem().unwrap(), SolveOptions::default()).unwrap();
    let r = s.solve().unwrap();
    let res = s.residual(&r).unwrap().max();
    let (g1, g2) = s.grids();
    let err = |form| {
        let e1 = g1.iter().map(|&k| (ex.psi1_closed(&r, k, form).unwrap() - r.psi1.eval(q.powi(k as i32)).unwrap()).abs());
        let e2 = g2.iter().map(|&k| (ex.psi2_closed(&r, k, form).unwrap() - r.psi2.eval(q.powi(k as i32)).unwrap()).abs());
        e1.chain(e2).fold(0.0, f64::max)
    };
    let (printed, derived) = (err(Example2Form::Printed), err(Example2Form::Derived));
    let secs = t.elapsed().as_secs_f64();
    let pass = printed <= EX2_CLOSED_TOL && res <= EX2_RES_TOL && secs <= EX2_SECS;
    let mut l = line(
        5,
        pass,
        format!("Example 2: published coupled closed forms err {printed:.2e} (<= {EX2_CLOSED_TOL:e}); band residual {res:.2e} (<= {EX2_RES_TOL:e}); {secs:.2} s"),
    );
    l.notes.push(format!("corrected coupled closed forms: err {derived:.2e}"));
    l
}

fn quad() -> Line {
    let (q, exps, orders, m) = (0.5, (0.25, 1.0, 0.0), (0.5, 0.5, 0.5), 2i64);
    let pw = |e: f64, c: f64| LatticeFunction::from_fn(move |x: f64| x.powf(e) * (-c * x).exp(), Decay::Power);
    let z = LatticeFunction::zero;

    let p0 = Triple2Problem::new(q, exps, orders, m, z(), (z(), z()), z()).unwrap();
    let zero_sweeps = solve_triple2(&p0).unwrap().sweeps;

    let d = DualProblem::new(q, exps.0, exps.1, orders.0, orders.1, pw(1.0, 1.0), pw(-3.0, 0.0)).unwrap().with_window(p0.n + m as usize, p0.n).unwrap();
    let a1 = solve_dual(&d).unwrap();
    let lat = d.lat;
    let pp = q * q;
    let vals: Vec<(i64, f64)> = lat.exponents().map(|k| (k, a1.eval_exp(&lat, k).unwrap())).collect();
    let f = LatticeFunction::from_fn(
        move |x| {
            let k = (x.ln() / pp.ln()).round() as i64;
            vals.iter().rev().map(|&(i, v)| (1.0 - pp) * pp.powi(i as i32) * v * qbessel3_lattice(orders.2, i + k, q).unwrap()).sum()
        },
        Decay::Power,
    );
    let p1 = Triple2Problem::new(q, exps, orders, m, f, (pw(1.0, 1.0), z()), pw(-3.0, 0.0)).unwrap();
    let s1 = solve_triple2(&p1).unwrap();
    let scale = lat.exponents().map(|k| a1.eval_exp(&lat, k).unwrap().abs()).fold(0.0, f64::max);
    let decoupled = lat.exponents().map(|k| (s1.psi.eval_exp(&lat, k).unwrap() - a1.eval_exp(&lat, k).unwrap()).abs()).fold(0.0, f64::max) / scale;

    let p2 = Triple2Problem::new(q, exps, orders, m, pw(0.5, 0.0), (pw(1.0, 1.0), pw(-2.0, 0.0)), pw(-3.0, 0.0)).unwrap();
    let s2 = solve_triple2(&p2).unwrap();
    let geometric = s2.trace[1..].windows(2).all(|w| w[1] < w[0]);
    let res = residual_triple2(&p2, &s2).unwrap().max();

    let pass = zero_sweeps == 1 && decoupled <= DECOUPLED_TOL && geometric && res <= 10.0 * FP_TOL;
    let mut l = line(
        6,
        pass,
        format!("q^2 triple solver: zero data {zero_sweeps} sweep; decoupled err {decoupled:.2e} (<= {DECOUPLED_TOL:e}); generic {} sweeps, decreasing {geometric}, residual {res:.2e} (<= {:e})", s2.sweeps, 10.0 * FP_TOL),
    );
    let trace: Vec<String> = s2.trace.iter().map(|d| format!("{d:.1e}")).collect();
    l.notes.push(format!("iterate distances {}", trace.join(" ")));
    l
}

fn all_csvs() -> String {
    let mut out = String::new();
    let triple = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/triple.toml")).unwrap();
    let triple2 = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/triple2.toml")).unwrap();
    let dual = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/configs/dual.toml")).unwrap();
    let runs: [(Command, RunConfig); 5] = [
        (Command::SolveDual, cli::parse_config(&dual).unwrap()),
        (Command::SolveTriple, cli::parse_config(&triple).unwrap()),
        (Command::SolveTriple2, cli::parse_config(&triple2).unwrap()),
        (Command::Example1, RunConfig::default()),
        (Command::Example2, RunConfig::default()),
    ];
    for (cmd, cfg) in runs {
        let o = cli::run(&cfg, cmd, false).unwrap();
        out.push_str(&o.psi_csv());
        out.push_str(&o.residual_csv());
    }
    out
}

fn determinism() -> Line {
    let run = |threads| rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(all_csvs);
    let (a, b) = (run(1), run(8));
    line(7, a == b, format!("determinism: CSVs from 1 and 8 worker threads identical ({} bytes)", a.len()))
}

fn main() {
    let lines = [identities(), hankel_round_trip(), example1(), manufactured(), example2(), quad(), determinism()];
    for l in &lines {
        println!("{} [{}] {}", if l.pass { "PASS" } else { "FAIL" }, l.id, l.text);
        for n in &l.notes {
            println!("       {n}");
        }
    }
    let failed: Vec<u8> = lines.iter().filter(|l| !l.pass).map(|l| l.id).collect();
    // 3 and 5 test published constants that are wrong; see the notes above
    if failed != [3, 5] {
        eprintln!("unexpected failure set {failed:?}, expected [3, 5]");
        std::process::exit(1);
    }
}
