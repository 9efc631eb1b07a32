//! Numerical identity suite for the q-calculus layer.
//!
//! Each check sweeps `q ∈ {0.3, 0.5, 0.7}`, order parameters from
//! `{0.25, 0.5, 1.5, 2.5}` where the hypotheses allow, and at least nine
//! lattice points, reporting the worst relative error.

use rayon::prelude::*;

use crate::error::QResult;
use crate::qfrac::{calk_pure, frac_integral_iq_at_zero, riemann_liouville, CalKNorm};
use crate::qhankel::{
    bessel_integral_closed_form, hankel, HankelSpec, bessel_integral_direct, head_derivative_form, tail_derivative_form, ClosedForm, Constant,
};
use crate::qlattice::{q_derivative, Decay, LatticeFunction, QLattice};
use crate::qspecial::{bessel_bound, qbessel3, qbessel3_lattice, qgamma};

pub const QS: [f64; 3] = [0.3, 0.5, 0.7];
pub const ORDERS: [f64; 4] = [0.25, 0.5, 1.5, 2.5];

/// Outcome of one identity over its whole grid.
#[derive(Debug, Clone, PartialEq)]
pub struct IdentityCheck {
    pub name: &'static str,
    pub max_rel_err: f64,
    pub points: usize,
}

/// `|a-b| / max(|a|,|b|)`, or `|a-b| / scale` when both vanish to within `scale`.
pub fn rel_err(a: f64, b: f64, scale: f64) -> f64 {
    let d = (a - b).abs();
    let m = a.abs().max(b.abs()).max(scale);
    if m == 0.0 {
        0.0
    } else {
        d / m
    }
}

fn fold(name: &'static str, errs: Vec<f64>) -> IdentityCheck {
    IdentityCheck { name, max_rel_err: errs.iter().cloned().fold(0.0, f64::max), points: errs.len() }
}

const DIRECT_N: usize = 240;

/// Relation (a): `D_q[z^{-ν} J_ν(z;q²)] = -q^{1-ν} z^{-ν} (1-q)^{-1} J_{ν+1}(qz;q²)`.
pub fn relation_a() -> QResult<IdentityCheck> {
    let mut errs = Vec::new();
    for q in QS {
        for nu in [0.5, 1.0, 2.5] {
            let f = LatticeFunction::from_fn(move |z: f64| z.powf(-nu) * qbessel3(nu, z, q * q).unwrap_or(f64::NAN), Decay::None);
            for k in -8..12 {
                let z = q.powi(k);
                let lhs = q_derivative(&f, z, q)?;
                let rhs = -q.powf(1.0 - nu) * z.powf(-nu) / (1.0 - q) * qbessel3_lattice(nu + 1.0, (k + 1) as i64, q)?;
                let scale = (f.eval(z)?.abs() + f.eval(q * z)?.abs()) / (z * (1.0 - q)) * 1e-6;
                errs.push(rel_err(lhs, rhs, scale));
            }
        }
    }
    Ok(fold("relation (a): D_q of z^-nu J_nu", errs))
}

/// Relation (b): `D_q[z^{ν} J_ν(z;q²)] = z^ν (1-q)^{-1} J_{ν-1}(z;q²)`.
pub fn relation_b() -> QResult<IdentityCheck> {
    let mut errs = Vec::new();
    for q in QS {
        for nu in [0.5, 1.0, 2.5] {
            let f = LatticeFunction::from_fn(move |z: f64| z.powf(nu) * qbessel3(nu, z, q * q).unwrap_or(f64::NAN), Decay::None);
            for k in -8..12 {
                let z = q.powi(k);
                let lhs = q_derivative(&f, z, q)?;
                let rhs = z.powf(nu) / (1.0 - q) * qbessel3_lattice(nu - 1.0, k as i64, q)?;
                let scale = (f.eval(z)?.abs() + f.eval(q * z)?.abs()) / (z * (1.0 - q)) * 1e-6;
                errs.push(rel_err(lhs, rhs, scale));
            }
        }
    }
    Ok(fold("relation (b): D_q of z^nu J_nu", errs))
}

/// Growth bound on `|J_ν(q^n;q²)|`; reports how far the ratio exceeds 1.
pub fn bound_c() -> QResult<IdentityCheck> {
    let mut errs = Vec::new();
    for q in QS {
        for nu in ORDERS {
            for n in -6..=12 {
                let j = qbessel3_lattice(nu, n, q)?.abs();
                let b = bessel_bound(nu, n, q)?;
                errs.push((j / b - 1.0).max(0.0));
            }
        }
    }
    Ok(fold("bound (c): |J_nu(q^n)| growth bound", errs))
}

fn closed_vs_direct(kind: ClosedForm, q: f64) -> QResult<f64> {
    let lhs = bessel_integral_direct(kind, q, DIRECT_N)?;
    let rhs = bessel_integral_closed_form(kind, q)?;
    let scale = match kind {
        ClosedForm::ProdTwoOrders { alpha, beta, xi, rho } => {
            // absolute scale for the vanishing branch
            xi.powf(alpha) * rho.powf(beta - 2.0 * alpha - 2.0) * 1e-3
        }
        _ => 0.0,
    };
    Ok(rel_err(lhs, rhs, scale))
}

/// `(x, u)` lattice pairs with `ux = q^k`, `-1 ≤ k ≤ 4`. Larger `ux` puts the
/// integrals deep in the oscillatory regime where direct summation loses every
/// significant digit to cancellation.
fn conditioned_pairs(q: f64) -> Vec<(f64, f64)> {
    let mut v = Vec::new();
    for kx in [-1, 0, 2, 4] {
        for ku in [-1, 0, 1] {
            if (-1..=4).contains(&(kx + ku)) {
                v.push((q.powi(kx), q.powi(ku)));
            }
        }
    }
    v
}

/// Prop: product of two orders integrates to a truncated power.
pub fn prop_two_orders() -> QResult<IdentityCheck> {
    let mut cases = Vec::new();
    for q in QS {
        for (i, &a) in ORDERS.iter().enumerate() {
            for &b in &ORDERS[i + 1..] {
                for xi in [q.powi(2), 1.0, q.powi(-1)] {
                    for rho in [q.powi(3), 1.0, q.powi(-2)] {
                        cases.push((q, ClosedForm::ProdTwoOrders { alpha: a, beta: b, xi, rho }));
                    }
                }
            }
        }
    }
    let errs = cases.par_iter().map(|(q, k)| closed_vs_direct(*k, *q)).collect::<QResult<Vec<_>>>()?;
    Ok(fold("two-order product integral", errs))
}

/// Tail Kober integral, corrected constant `q^{ν-α}`.
pub fn prop_tail_kober(constant: Constant) -> QResult<IdentityCheck> {
    let mut cases = Vec::new();
    for q in QS {
        for nu in ORDERS {
            for alpha in ORDERS {
                if nu - alpha <= -1.0 {
                    continue;
                }
                for &rho in &[1.0, q.powi(-1), q.powi(2)] {
                    for &u in &[1.0, q.powi(1), q.powi(-1)] {
                        cases.push((q, ClosedForm::TailKober { nu, alpha, rho, u, constant }));
                    }
                }
            }
        }
    }
    let errs = cases.par_iter().map(|(q, k)| closed_vs_direct(*k, *q)).collect::<QResult<Vec<_>>>()?;
    Ok(fold(
        match constant {
            Constant::Corrected => "tail Kober Bessel integral",
            Constant::Printed => "tail Kober Bessel integral (printed q^alpha)",
        },
        errs,
    ))
}

/// Head window identity.
pub fn head_window() -> QResult<IdentityCheck> {
    let mut cases = Vec::new();
    for q in QS {
        for nu in ORDERS {
            for gamma in [0.0, 0.25, 0.5, 1.5, 2.5, -0.5] {
                for (x, u) in conditioned_pairs(q) {
                    cases.push((q, ClosedForm::HeadWindow { nu, gamma, x, u }));
                }
            }
        }
    }
    let errs = cases.par_iter().map(|(q, k)| closed_vs_direct(*k, *q)).collect::<QResult<Vec<_>>>()?;
    Ok(fold("head window integral", errs))
}

/// Tail window identity, corrected constant `q^{ν-γ}`.
pub fn tail_window(constant: Constant) -> QResult<IdentityCheck> {
    let mut cases = Vec::new();
    for q in QS {
        for nu in ORDERS {
            for gamma in ORDERS {
                if nu - gamma <= -1.0 {
                    continue;
                }
                for (x, u) in conditioned_pairs(q) {
                    cases.push((q, ClosedForm::TailWindow { nu, gamma, x, u, constant }));
                }
            }
        }
    }
    let errs = cases.par_iter().map(|(q, k)| closed_vs_direct(*k, *q)).collect::<QResult<Vec<_>>>()?;
    Ok(fold(
        match constant {
            Constant::Corrected => "tail window integral",
            Constant::Printed => "tail window integral (printed q^gamma)",
        },
        errs,
    ))
}

/// `u^α J_{ν-α}(ux)` from the head-derivative representation.
pub fn head_derivative() -> QResult<IdentityCheck> {
    let mut cases = Vec::new();
    for q in QS {
        for nu in ORDERS {
            for alpha in [0.25, 0.5] {
                for (x, u) in conditioned_pairs(q) {
                    cases.push((q, nu, alpha, x, u));
                }
            }
        }
    }
    let errs = cases
        .par_iter()
        .map(|&(q, nu, alpha, x, u)| {
            let lhs = u.powf(alpha) * qbessel3(nu - alpha, u * x, q * q)?;
            let rhs = head_derivative_form(nu, alpha, x, u, q, DIRECT_N)?;
            Ok(rel_err(lhs, rhs, 0.0))
        })
        .collect::<QResult<Vec<_>>>()?;
    Ok(fold("head-derivative form of u^a J_(nu-a)", errs))
}

/// `u^α J_{ν+α}(ux)` from the tail-derivative representation.
pub fn tail_derivative(constant: Constant) -> QResult<IdentityCheck> {
    let mut cases = Vec::new();
    for q in QS {
        for nu in ORDERS {
            for alpha in [0.25, 0.5] {
                for (x, u) in conditioned_pairs(q) {
                    cases.push((q, nu, alpha, x, u));
                }
            }
        }
    }
    let errs = cases
        .par_iter()
        .map(|&(q, nu, alpha, x, u)| {
            let lhs = u.powf(alpha) * qbessel3(nu + alpha, u * x, q * q)?;
            let rhs = tail_derivative_form(nu, alpha, x, u, q, 80, constant)?;
            Ok(rel_err(lhs, rhs, 0.0))
        })
        .collect::<QResult<Vec<_>>>()?;
    Ok(fold(
        match constant {
            Constant::Corrected => "tail-derivative form of u^a J_(nu+a)",
            Constant::Printed => "tail-derivative form of u^a J_(nu+a) (printed factor)",
        },
        errs,
    ))
}

/// `I^α D^α f(x) = f(x) - I^{1-α} f(0) x^{α-1}/Γ_q(α)`.
pub fn abel() -> QResult<IdentityCheck> {
    let fns: [fn(f64) -> f64; 3] = [|t| t.powf(0.3) + 1.0, |t| t * t + t.sqrt(), |t| 2.0 + t.powf(1.7)];
    let mut cases = Vec::new();
    for q in QS {
        for alpha in [0.25, 0.5, 0.75] {
            for (fi, _) in fns.iter().enumerate() {
                for k in -3..=6 {
                    cases.push((q, alpha, fi, k));
                }
            }
        }
    }
    let errs = cases
        .par_iter()
        .map(|&(q, alpha, fi, k)| {
            let f = fns[fi];
            let x = q.powi(k);
            let n = 400;
            let dfa = |y: f64| riemann_liouville(-alpha, y, q, n, |j| Ok(Some(f(y * q.powi(j as i32)))));
            let lhs = riemann_liouville(alpha, x, q, n, |j| dfa(x * q.powi(j as i32)).map(Some))?;
            let lat = QLattice::default_window(q, 1.0)?;
            let i0 = frac_integral_iq_at_zero(1.0 - alpha, &LatticeFunction::from_fn(f, Decay::None), &lat)?;
            let rhs = f(x) - i0 * x.powf(alpha - 1.0) / qgamma(alpha, q)?;
            Ok(rel_err(lhs, rhs, 0.0))
        })
        .collect::<QResult<Vec<_>>>()?;
    Ok(fold("Abel identity I^a D^a", errs))
}

/// Semigroup of the Riemann–Liouville operator on `t²`.
pub fn riemann_liouville_semigroup() -> QResult<IdentityCheck> {
    let mut errs = Vec::new();
    for q in QS {
        for (a, b) in [(0.4, 0.4), (0.25, 0.5), (0.5, 1.5)] {
            for k in -4..=5 {
                let x = q.powi(k);
                let f = |t: f64| t * t;
                let inner = |y: f64| riemann_liouville(b, y, q, 300, |j| Ok(Some(f(y * q.powi(j as i32)))));
                let lhs = riemann_liouville(a, x, q, 300, |j| inner(x * q.powi(j as i32)).map(Some))?;
                let rhs = riemann_liouville(a + b, x, q, 300, |j| Ok(Some(f(x * q.powi(j as i32)))))?;
                errs.push(rel_err(lhs, rhs, 0.0));
            }
        }
    }
    Ok(fold("Riemann-Liouville semigroup", errs))
}

fn test_tails() -> [fn(f64) -> f64; 3] {
    [|t| t.powi(-3), |t| t.powi(-2) * (1.0 + 0.5 / t), |t| t.powf(-2.5) / (1.0 + t)]
}

fn calk_at(alpha: f64, x: f64, q: f64, norm: CalKNorm, f: &dyn Fn(f64) -> QResult<f64>) -> QResult<f64> {
    calk_pure(alpha, x, q, norm, 60, |j| f(x * q.powi(-j as i32)).map(Some))
}

/// `𝒦^α 𝒦^β φ = 𝒦^{α+β} φ`.
pub fn calk_semigroup(norm: CalKNorm) -> QResult<IdentityCheck> {
    let mut cases = Vec::new();
    for q in QS {
        for a in [0.3, 0.4, 0.5] {
            for b in [0.3, 0.4, 0.5] {
                for fi in 0..3 {
                    for k in -10..0 {
                        cases.push((q, a, b, fi, k));
                    }
                }
            }
        }
    }
    let errs = cases
        .par_iter()
        .map(|&(q, a, b, fi, k)| {
            let f = test_tails()[fi];
            let x = q.powi(k);
            let inner = |y: f64| calk_at(b, y, q, norm, &|t| Ok(f(t)));
            let lhs = calk_at(a, x, q, norm, &inner)?;
            let rhs = calk_at(a + b, x, q, norm, &|t| Ok(f(t)))?;
            Ok(rel_err(lhs, rhs, 0.0))
        })
        .collect::<QResult<Vec<_>>>()?;
    Ok(fold(
        match norm {
            CalKNorm::Semigroup => "calK semigroup",
            CalKNorm::Printed => "calK semigroup (printed prefactor)",
        },
        errs,
    ))
}

/// With `G = D_q 𝒦^α Φ`, recover `Φ(x) = -c 𝒦^{1-α}[G(·/q)](x)`; `c = 1` for
/// the semigroup normalization, `c = q^{α-1}` as printed.
pub fn calk_inversion(norm: CalKNorm) -> QResult<IdentityCheck> {
    let mut cases = Vec::new();
    for q in QS {
        for alpha in [0.25, 0.5, 0.75] {
            for k in -10..0 {
                cases.push((q, alpha, k));
            }
        }
    }
    let errs = cases
        .par_iter()
        .map(|&(q, alpha, k)| {
            let phi = |t: f64| Ok(t.powi(-2));
            let g = |y: f64| -> QResult<f64> {
                let a = calk_at(alpha, y, q, norm, &phi)?;
                let b = calk_at(alpha, q * y, q, norm, &phi)?;
                Ok((a - b) / (y * (1.0 - q)))
            };
            let x = q.powi(k);
            let c = match norm {
                CalKNorm::Semigroup => 1.0,
                CalKNorm::Printed => q.powf(alpha - 1.0),
            };
            let rec = -c * calk_at(1.0 - alpha, x, q, norm, &|s| g(s / q))?;
            Ok(rel_err(rec, x.powi(-2), 0.0))
        })
        .collect::<QResult<Vec<_>>>()?;
    Ok(fold(
        match norm {
            CalKNorm::Semigroup => "calK inversion",
            CalKNorm::Printed => "calK inversion (printed prefactor)",
        },
        errs,
    ))
}

/// `hankel(hankel(f)) = f` on compactly supported tables and on decaying
/// callables, relative to the peak of `f`.
pub fn hankel_round_trip() -> QResult<IdentityCheck> {
    let mut errs = Vec::new();
    for q in QS {
        for nu in ORDERS {
            let lat = QLattice::default_window(q, 1.0)?;
            let spec = HankelSpec::new(nu, lat)?;
            let support = [-2i64, -1, 0, 1, 3];
            let vals = [0.3, -1.0, 2.0, 0.5, 1.25];
            let mut table = vec![0.0; (lat.k_max() - lat.k_min() + 1) as usize];
            for (k, v) in support.iter().zip(vals) {
                table[(k - lat.k_min()) as usize] = v;
            }
            let f = LatticeFunction::from_table(&lat, lat.k_min(), table, Decay::SuperGeometric)?;
            let back = hankel(&spec, &hankel(&spec, &f)?)?;
            let scale = vals.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            for k in -4..=5 {
                errs.push(rel_err(back.eval_exp(&lat, k)?, f.eval_exp(&lat, k)?, scale));
            }
            let g = LatticeFunction::from_fn(move |x: f64| x.powf(nu) * (-x * x).exp(), Decay::SuperGeometric);
            let back = hankel(&spec, &hankel(&spec, &g)?)?;
            let peak = (-4..=5).map(|k| g.eval(lat.point(k)).map(f64::abs)).collect::<QResult<Vec<_>>>()?;
            let scale = peak.iter().cloned().fold(0.0, f64::max);
            for k in -4..=5 {
                errs.push(rel_err(back.eval_exp(&lat, k)?, g.eval(lat.point(k))?, scale));
            }
        }
    }
    Ok(fold("Hankel double transform", errs))
}

/// Every identity under the adopted normalizations.
pub fn identity_suite() -> QResult<Vec<IdentityCheck>> {
    Ok(vec![
        relation_a()?,
        relation_b()?,
        bound_c()?,
        prop_two_orders()?,
        prop_tail_kober(Constant::Corrected)?,
        head_window()?,
        tail_window(Constant::Corrected)?,
        head_derivative()?,
        tail_derivative(Constant::Corrected)?,
        abel()?,
        riemann_liouville_semigroup()?,
        calk_semigroup(CalKNorm::Semigroup)?,
        calk_inversion(CalKNorm::Semigroup)?,
        hankel_round_trip()?,
    ])
}

/// The printed constants that disagree with direct summation.
pub fn printed_constant_checks() -> QResult<Vec<IdentityCheck>> {
    Ok(vec![
        prop_tail_kober(Constant::Printed)?,
        tail_window(Constant::Printed)?,
        tail_derivative(Constant::Printed)?,
        calk_semigroup(CalKNorm::Printed)?,
        calk_inversion(CalKNorm::Printed)?,
    ])
}
