//! The q-Hankel transform on `ℝ_{q,+}` and the closed-form Bessel integrals
//! used as building blocks and as test oracles.
//!
//! The transform is normalized as `g(λ) = (1-q)^{-1} ∫_0^∞ x f(x) J_ν(λx;q²) d_qx`.
//! Without the `(1-q)^{-1}` factor a double application returns `(1-q)^2 f`;
//! with it the pair is exactly self-inverse. [`HankelNorm::Unnormalized`]
//! keeps the bare integral.

use rayon::prelude::*;

use crate::error::{QError, QResult};
use crate::qlattice::{exponent_on, Decay, LatticeFunction, QLattice};
use crate::qspecial::{qbessel3, qbessel3_lattice, qgamma, qpoch_inf, qpoch_pow, BesselTable};

/// Order and lattice of a transform.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HankelSpec {
    pub nu: f64,
    pub lat: QLattice,
}

impl HankelSpec {
    pub fn new(nu: f64, lat: QLattice) -> QResult<Self> {
        if !(nu > -1.0) {
            return Err(QError::Domain(format!("Hankel order must exceed -1, got {nu}")));
        }
        Ok(Self { nu, lat })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HankelNorm {
    #[default]
    SelfInverse,
    Unnormalized,
}

/// Forward transform tabulated on the window of `spec.lat`.
pub fn hankel(spec: &HankelSpec, f: &LatticeFunction) -> QResult<LatticeFunction> {
    hankel_with(spec, f, HankelNorm::SelfInverse)
}

pub fn hankel_with(spec: &HankelSpec, f: &LatticeFunction, norm: HankelNorm) -> QResult<LatticeFunction> {
    let lat = spec.lat;
    let q = lat.q;
    let ks: Vec<i64> = lat.exponents().collect();
    let fx: Vec<f64> = ks
        .iter()
        .map(|&k| match f.eval_exp(&lat, k) {
            Ok(v) => Ok(v),
            Err(QError::Window(_)) if f.is_table() => Ok(0.0),
            Err(e) => Err(e),
        })
        .collect::<QResult<_>>()?;
    check_energy(f, &lat, &fx)?;
    let scale = match norm {
        HankelNorm::SelfInverse => 1.0,
        HankelNorm::Unnormalized => 1.0 - q,
    };
    let t = lat.t;
    let on_unit = t == 1.0;
    let table = if on_unit { Some(BesselTable::new(spec.nu, q, 2 * lat.k_min(), 2 * lat.k_max())?) } else { None };
    let out: Vec<f64> = ks
        .par_iter()
        .map(|&kl| {
            let lam = lat.point(kl);
            // smallest point first
            let mut s = 0.0;
            for (i, &kx) in ks.iter().enumerate().rev() {
                if fx[i] == 0.0 {
                    continue;
                }
                let x = lat.point(kx);
                let j = match &table {
                    Some(tb) => tb.get(kl + kx),
                    None => qbessel3(spec.nu, lam * x, q * q)?,
                };
                s += x * x * fx[i] * j;
            }
            Ok(scale * s)
        })
        .collect::<QResult<_>>()?;
    LatticeFunction::from_table(&lat, lat.k_min(), out, Decay::Power)
}

/// Callables must keep almost all of their `L²_q` energy inside the window.
fn check_energy(f: &LatticeFunction, lat: &QLattice, fx: &[f64]) -> QResult<()> {
    if f.is_table() {
        return Ok(());
    }
    let q = lat.q;
    let inside: f64 = lat.exponents().zip(fx).map(|(k, v)| lat.point(k) * (1.0 - q) * v * v).sum();
    let mut outside = 0.0;
    for k in (lat.k_max() + 1)..(lat.k_max() + 200) {
        let v = f.eval_exp(lat, k)?;
        outside += lat.point(k) * (1.0 - q) * v * v;
    }
    for k in (lat.k_min() - 60)..lat.k_min() {
        let v = f.eval_exp(lat, k)?;
        outside += lat.point(k) * (1.0 - q) * v * v;
    }
    if !(outside <= 1e-3 * inside.max(f64::MIN_POSITIVE)) || !outside.is_finite() {
        return Err(QError::Window(format!("{:.3e} of the L2 energy lies outside the window", outside / inside)));
    }
    Ok(())
}

/// Constant in a closed form whose printed value disagrees with direct summation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Constant {
    #[default]
    Corrected,
    Printed,
}

/// Closed-form Bessel integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ClosedForm {
    /// `∫_0^∞ t^{α-β+1} J_α(ξt) J_β(ρt) d_qt`, `β > α > -1`.
    ProdTwoOrders { alpha: f64, beta: f64, xi: f64, rho: f64 },
    /// `∫_ρ^∞ x^{2α-ν-1} (ρ²/x²;q²)_{α-1} J_ν(ux) d_qx`.
    TailKober { nu: f64, alpha: f64, rho: f64, u: f64, constant: Constant },
    /// `∫_0^x ρ^{ν+1} (q²ρ²/x²;q²)_γ J_ν(uρ) d_qρ`, `γ > -1`.
    HeadWindow { nu: f64, gamma: f64, x: f64, u: f64 },
    /// `∫_x^∞ ρ^{2γ-ν-1} (x²/ρ²;q²)_{γ-1} J_ν(uρ) d_qρ`, `γ > 0`.
    TailWindow { nu: f64, gamma: f64, x: f64, u: f64, constant: Constant },
}

fn lattice_exp(q: f64, v: f64) -> QResult<i64> {
    exponent_on(q, 1.0, v)
}

fn jl(nu: f64, k: i64, q: f64) -> QResult<f64> {
    qbessel3_lattice(nu, k, q)
}

/// Right side of a closed form.
pub fn bessel_integral_closed_form(kind: ClosedForm, q: f64) -> QResult<f64> {
    let p = q * q;
    match kind {
        ClosedForm::ProdTwoOrders { alpha, beta, xi, rho } => {
            if !(beta > alpha && alpha > -1.0) {
                return Err(QError::Domain("need beta > alpha > -1".into()));
            }
            if xi > rho {
                return Ok(0.0);
            }
            let ke = lattice_exp(q, xi)? - lattice_exp(q, rho)?;
            Ok((1.0 - q) * (1.0 - p).powf(1.0 - beta + alpha) / qgamma(beta - alpha, p)?
                * xi.powf(alpha)
                * rho.powf(beta - 2.0 * alpha - 2.0)
                * qpoch_pow(p, (1 + ke) as f64, beta - alpha - 1.0)?)
        }
        ClosedForm::TailKober { nu, alpha, rho, u, constant } => {
            if !(nu > -1.0) {
                return Err(QError::Domain("need nu > -1".into()));
            }
            let qpow = match constant {
                Constant::Corrected => q.powf(nu - alpha),
                Constant::Printed => q.powf(alpha),
            };
            let k = lattice_exp(q, u)? + lattice_exp(q, rho)? - 1;
            Ok((1.0 - q) * qgamma(alpha, p)? * (1.0 - p).powf(alpha - 1.0) * rho.powf(alpha - nu) * u.powf(-alpha) * qpow
                * jl(nu - alpha, k, q)?)
        }
        ClosedForm::HeadWindow { nu, gamma, x, u } => {
            if !(gamma > -1.0 && nu > -1.0) {
                return Err(QError::Domain("need gamma > -1 and nu > -1".into()));
            }
            let k = lattice_exp(q, u)? + lattice_exp(q, x)?;
            Ok(x.powf(nu - gamma + 1.0) * u.powf(-gamma - 1.0) * (1.0 - q) * (1.0 - p).powf(gamma) * qgamma(gamma + 1.0, p)?
                * jl(gamma + nu + 1.0, k, q)?)
        }
        ClosedForm::TailWindow { nu, gamma, x, u, constant } => {
            if !(gamma > 0.0 && nu > -1.0) {
                return Err(QError::Domain("need gamma > 0 and nu > -1".into()));
            }
            let qpow = match constant {
                Constant::Corrected => q.powf(nu - gamma),
                Constant::Printed => q.powf(gamma),
            };
            let k = lattice_exp(q, u)? + lattice_exp(q, x)? - 1;
            Ok(x.powf(gamma - nu) * u.powf(-gamma) * (1.0 - q) * qpow * qpoch_inf(p, p)? / qpoch_inf(p.powf(gamma), p)?
                * jl(nu - gamma, k, q)?)
        }
    }
}

/// Left side of a closed form by direct Jackson summation over `n` extra
/// lattice points on each improper end.
pub fn bessel_integral_direct(kind: ClosedForm, q: f64, n: usize) -> QResult<f64> {
    let p = q * q;
    let n = n as i64;
    match kind {
        ClosedForm::ProdTwoOrders { alpha, beta, xi, rho } => {
            let (kx, kr) = (lattice_exp(q, xi)?, lattice_exp(q, rho)?);
            let mut s = 0.0;
            for k in (-n..=n).rev() {
                let t = q.powi(k as i32);
                s += t * (1.0 - q) * t.powf(alpha - beta + 1.0) * jl(alpha, kx + k, q)? * jl(beta, kr + k, q)?;
            }
            Ok(s)
        }
        ClosedForm::TailKober { nu, alpha, rho, u, .. } => {
            let (kr, ku) = (lattice_exp(q, rho)?, lattice_exp(q, u)?);
            let mut s = 0.0;
            for j in 1..=n {
                let x = rho * q.powi(-j as i32);
                s += x * (1.0 - q) * x.powf(2.0 * alpha - nu - 1.0) * qpoch_pow(p, j as f64, alpha - 1.0)? * jl(nu, ku + kr - j, q)?;
            }
            Ok(s)
        }
        ClosedForm::HeadWindow { nu, gamma, x, u } => {
            let (kx, ku) = (lattice_exp(q, x)?, lattice_exp(q, u)?);
            let mut s = 0.0;
            for j in (0..=n).rev() {
                let r = x * q.powi(j as i32);
                s += r * (1.0 - q) * r.powf(nu + 1.0) * qpoch_pow(p, (j + 1) as f64, gamma)? * jl(nu, ku + kx + j, q)?;
            }
            Ok(s)
        }
        ClosedForm::TailWindow { nu, gamma, x, u, .. } => {
            let (kx, ku) = (lattice_exp(q, x)?, lattice_exp(q, u)?);
            let mut s = 0.0;
            for j in 1..=n {
                let r = x * q.powi(-j as i32);
                s += r * (1.0 - q) * r.powf(2.0 * gamma - nu - 1.0) * qpoch_pow(p, j as f64, gamma - 1.0)? * jl(nu, ku + kx - j, q)?;
            }
            Ok(s)
        }
    }
}

/// Right side of the head-derivative representation of `u^α J_{ν-α}(ux;q²)`:
/// `(1-q²)^α/Γ_{q²}(1-α) x^{α-ν-1} D_{q,x}[x^{-2α} ∫_0^x ρ^{ν+1}(q²ρ²/x²;q²)_{-α} J_ν(uρ) d_qρ]`.
pub fn head_derivative_form(nu: f64, alpha: f64, x: f64, u: f64, q: f64, n: usize) -> QResult<f64> {
    let p = q * q;
    let inner = |xx: f64| -> QResult<f64> {
        let kind = ClosedForm::HeadWindow { nu, gamma: -alpha, x: xx, u };
        Ok(xx.powf(-2.0 * alpha) * bessel_integral_direct(kind, q, n)?)
    };
    let d = (inner(x)? - inner(q * x)?) / (x * (1.0 - q));
    Ok((1.0 - p).powf(alpha) / qgamma(1.0 - alpha, p)? * x.powf(alpha - nu - 1.0) * d)
}

/// Right side of the tail-derivative representation of `u^α J_{ν+α}(ux;q²)`:
/// `-(1-q²)^α c x^{α+ν-1}/Γ_{q²}(1-α) D_{q,x} ∫_x^∞ ρ^{1-2α-ν}(x²/ρ²;q²)_{-α} J_ν(uρ) d_qρ`
/// with `c = 1` (corrected) or `c = q^{2α+ν-2}` (printed).
pub fn tail_derivative_form(nu: f64, alpha: f64, x: f64, u: f64, q: f64, n: usize, constant: Constant) -> QResult<f64> {
    let p = q * q;
    let inner = |xx: f64| -> QResult<f64> {
        let (kx, ku) = (lattice_exp(q, xx)?, lattice_exp(q, u)?);
        let mut s = 0.0;
        for j in 1..=n as i64 {
            let r = xx * q.powi(-j as i32);
            s += r * (1.0 - q) * r.powf(1.0 - 2.0 * alpha - nu) * qpoch_pow(p, j as f64, -alpha)? * jl(nu, ku + kx - j, q)?;
        }
        Ok(s)
    };
    let d = (inner(x)? - inner(q * x)?) / (x * (1.0 - q));
    let c = match constant {
        Constant::Corrected => 1.0,
        Constant::Printed => q.powf(2.0 * alpha + nu - 2.0),
    };
    Ok(-(1.0 - p).powf(alpha) * c * x.powf(alpha + nu - 1.0) / qgamma(1.0 - alpha, p)? * d)
}
