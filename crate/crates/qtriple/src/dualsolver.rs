//! Dual q²-integral equations
//!
//! ```text
//! ξ^{-α} ∫_0^∞ ρ^{-α} ψ(ρ) J_μ(√(ρξ);q²) d_{q²}ρ = f(ξ),  ξ ∈ A_{q²}
//! ξ^{-β} ∫_0^∞ ρ^{-β} ψ(ρ) J_ν(√(ρξ);q²) d_{q²}ρ = g(ξ),  ξ ∈ B_{q²}
//! ```
//!
//! solved in closed form with `λ = (μ+ν)/2 - (α-β)` and `p = q²`:
//!
//! ```text
//! ψ(ξ) = (1-p)^{λ-ν+2α-2β-2} ξ^e ∫_0^1 J_λ(√(ρξ)) ρ^{(λ-μ)/2+α} I_p^{μ/2+α, λ-μ} f(ρ) d_pρ
//!      + (1-p)^{λ-ν-2}       ξ^e ∫_1^∞ J_λ(√(ρξ)) ρ^{(ν-λ)/2+β} 𝒦_p^{λ-ν/2-β, ν-λ} g(ρ) d_pρ
//! ```
//!
//! with `e = λ/2 - μ/2 + α`. The head integral includes `ρ = 1`, the tail
//! integral starts at `ρ = 1/p`.

use rayon::prelude::*;

use crate::error::{QError, QResult};
use crate::qfrac::{calk_two_param, head_series, kober_i_with, tail_series};
use crate::qlattice::{Decay, LatticeFunction, QLattice};
use crate::residual::{band_max, band_rows, ResidualRow};
use crate::qspecial::{qbessel3_lattice, qgamma, qpoch_pow, BesselTable};

const MIN_WINDOW: usize = 24;
const HEAD_PAD: i64 = 60;
const TAIL_PAD: i64 = 40;

/// One instance of the dual system on the `q²` lattice.
#[derive(Clone)]
pub struct DualProblem {
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub mu: f64,
    pub nu: f64,
    /// Data on `A_{q²}`.
    pub f: LatticeFunction,
    /// Data on `B_{q²}`.
    pub g: LatticeFunction,
    pub gamma_check: f64,
    /// Output window, base `q²`.
    pub lat: QLattice,
}

impl std::fmt::Debug for DualProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DualProblem")
            .field("q", &self.q)
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("mu", &self.mu)
            .field("nu", &self.nu)
            .field("lambda", &self.lambda())
            .field("gamma_check", &self.gamma_check)
            .field("lat", &self.lat)
            .finish()
    }
}

impl DualProblem {
    /// Builds and validates a problem. `γ` defaults to the midpoint of its
    /// admissible interval and the window to the machine-precision window of
    /// base `q²` (at least 24 points each side).
    pub fn new(q: f64, alpha: f64, beta: f64, mu: f64, nu: f64, f: LatticeFunction, g: LatticeFunction) -> QResult<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(QError::Domain(format!("q must lie in (0,1), got {q}")));
        }
        let p = q * q;
        let d = QLattice::default_window(p, 1.0)?;
        let n = d.n_pos.max(MIN_WINDOW);
        let lat = QLattice::new(p, 1.0, n, n)?;
        let mut prob = Self { q, alpha, beta, mu, nu, f, g, gamma_check: 0.0, lat };
        let lo = 0f64.max(nu - prob.lambda());
        prob.gamma_check = 0.5 * (lo + 1.0 + nu);
        prob.validate()?;
        Ok(prob)
    }

    pub fn with_gamma_check(mut self, gamma: f64) -> QResult<Self> {
        self.gamma_check = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn with_window(mut self, n_neg: usize, n_pos: usize) -> QResult<Self> {
        self.lat = QLattice::new(self.q * self.q, 1.0, n_neg, n_pos)?;
        Ok(self)
    }

    pub fn lambda(&self) -> f64 {
        0.5 * (self.mu + self.nu) - (self.alpha - self.beta)
    }

    pub fn validate(&self) -> QResult<()> {
        let lam = self.lambda();
        let checks = [
            (self.nu > -1.0, "nu > -1"),
            (self.mu > -1.0, "mu > -1"),
            (lam > -1.0, "lambda > -1"),
            (lam - self.mu - 2.0 * self.alpha > 0.0, "lambda - mu - 2 alpha > 0"),
            (
                self.gamma_check < 1.0 + self.nu && self.gamma_check > 0f64.max(self.nu - lam),
                "1 + nu > gamma > max(0, nu - lambda)",
            ),
        ];
        for (ok, what) in checks {
            if !ok {
                return Err(QError::Hypothesis(format!("{what} fails for {self:?}")));
            }
        }
        if (self.lat.q - self.q * self.q).abs() > 1e-15 || self.lat.t != 1.0 {
            return Err(QError::Domain("dual window must be the unit q^2 lattice".into()));
        }
        Ok(())
    }
}

fn sample(f: &LatticeFunction, x: f64) -> QResult<Option<f64>> {
    match f.eval(x) {
        Ok(v) => Ok(Some(v)),
        Err(QError::Window(_)) if f.is_table() => Ok(None),
        Err(e) => Err(e),
    }
}

/// Operator values shared by every output point.
struct Plan {
    q: f64,
    e: f64,
    c1: f64,
    c2: f64,
    w1: f64,
    w2: f64,
    head: Vec<f64>,
    tail: Vec<f64>,
    bessel: BesselTable,
}

impl Plan {
    fn new(pr: &DualProblem) -> QResult<Self> {
        let (q, p) = (pr.q, pr.q * pr.q);
        let lam = pr.lambda();
        let (mu, nu, al, be) = (pr.mu, pr.nu, pr.alpha, pr.beta);
        let n_head = pr.lat.n_pos as i64 + pr.lat.n_neg as i64 + HEAD_PAD;
        let n_tail = pr.lat.n_pos as i64 + TAIL_PAD;
        let (eta1, a1) = (0.5 * mu + al, lam - mu);
        let head = (0..=n_head)
            .into_par_iter()
            .map(|j| {
                let x = p.powi(j as i32);
                kober_i_with(eta1, a1, x, p, 0, |i| sample(&pr.f, x * p.powi(i as i32)))
            })
            .collect::<QResult<Vec<_>>>()?;
        let (eta2, a2) = (lam - 0.5 * nu - be, nu - lam);
        let tail = (0..=n_tail)
            .into_par_iter()
            .map(|j| {
                if j == 0 {
                    return Ok(0.0);
                }
                let x = p.powi(-(j as i32));
                calk_two_param(eta2, a2, x, p, 0, |i| sample(&pr.g, x * p.powi(-(i as i32))))
            })
            .collect::<QResult<Vec<_>>>()?;
        let bessel = BesselTable::new(lam, q, pr.lat.k_min() - n_tail, pr.lat.k_max() + n_head)?;
        Ok(Self {
            q,
            e: 0.5 * lam - 0.5 * mu + al,
            c1: (1.0 - p).powf(lam - nu + 2.0 * al - 2.0 * be - 2.0),
            c2: (1.0 - p).powf(lam - nu - 2.0),
            w1: 1.0 + 0.5 * (lam - mu) + al,
            w2: 1.0 + 0.5 * (nu - lam) + be,
            head,
            tail,
            bessel,
        })
    }

    fn psi_at(&self, k: i64) -> QResult<f64> {
        let p = self.q * self.q;
        let nh = self.head.len() as i64;
        let t1 = head_series(0, |j| {
            if j >= nh {
                return Ok(None);
            }
            let v = self.head[j as usize];
            if v == 0.0 {
                return Ok(Some(0.0));
            }
            Ok(Some((1.0 - p) * p.powf(j as f64 * self.w1) * self.bessel.get(j + k) * v))
        })?;
        let nt = self.tail.len() as i64;
        let t2 = tail_series(k.max(0) as usize + crate::qlattice::GUARD_BLOCK, |j| {
            if j >= nt {
                return Ok(None);
            }
            let v = self.tail[j as usize];
            if v == 0.0 {
                return Ok(Some(0.0));
            }
            Ok(Some((1.0 - p) * p.powf(-(j as f64) * self.w2) * self.bessel.get(k - j) * v))
        })?;
        Ok(p.powf(k as f64 * self.e) * (self.c1 * t1 + self.c2 * t2))
    }
}

/// Closed-form solution tabulated on `p.lat`.
pub fn solve_dual(p: &DualProblem) -> QResult<LatticeFunction> {
    p.validate()?;
    let plan = Plan::new(p)?;
    let ks: Vec<i64> = p.lat.exponents().collect();
    let vals = ks.par_iter().map(|&k| plan.psi_at(k)).collect::<QResult<Vec<_>>>()?;
    LatticeFunction::from_table(&p.lat, p.lat.k_min(), vals, Decay::Power)
}

/// Substitution residuals of a candidate solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DualResidual {
    /// Max over sampled `ξ ∈ A_{q²}` of `|LHS₁ - f|`, over the data scale.
    pub a_band: f64,
    /// Same on `B_{q²}` for the second equation.
    pub b_band: f64,
    pub points: usize,
}

impl DualResidual {
    pub fn max(&self) -> f64 {
        self.a_band.max(self.b_band)
    }
}

/// `ξ^{-w} ∫_0^∞ ρ^{-w} ψ(ρ) J_order(√(ρξ);q²) d_{q²}ρ` at `ξ = q^{2k}`,
/// with `ψ` read from the window of `lat` and taken as zero outside it.
pub fn dual_lhs(psi: &LatticeFunction, lat: &QLattice, q: f64, w: f64, order: f64, k: i64) -> QResult<f64> {
    let p = q * q;
    let mut s = 0.0;
    for i in (lat.k_min()..=lat.k_max()).rev() {
        let v = match psi.eval_exp(lat, i) {
            Ok(v) => v,
            Err(QError::Window(_)) => 0.0,
            Err(e) => return Err(e),
        };
        if v == 0.0 {
            continue;
        }
        s += (1.0 - p) * p.powf(i as f64 * (1.0 - w)) * v * qbessel3_lattice(order, i + k, q)?;
    }
    Ok(p.powf(-w * k as f64) * s)
}

/// Residual sample points: the inner half of each band.
pub fn residual_exponents(lat: &QLattice) -> (Vec<i64>, Vec<i64>) {
    let a = (0..=(lat.n_pos as i64 / 2)).collect();
    let b = (-(lat.n_neg as i64 / 2)..=-1).collect();
    (a, b)
}

/// Per-point residuals on the inner halves of both bands.
pub fn dual_residual_rows(p: &DualProblem, psi: &LatticeFunction) -> QResult<Vec<ResidualRow>> {
    let (ka, kb) = residual_exponents(&p.lat);
    let band = |name: &'static str, ks: &[i64], w: f64, order: f64, data: &LatticeFunction| -> QResult<Vec<ResidualRow>> {
        let samples = ks
            .par_iter()
            .map(|&k| {
                let x = p.lat.point(k);
                Ok((x, dual_lhs(psi, &p.lat, p.q, w, order, k)?, data.eval(x)?))
            })
            .collect::<QResult<Vec<_>>>()?;
        Ok(band_rows(name, &samples))
    };
    let mut rows = band("A", &ka, p.alpha, p.mu, &p.f)?;
    rows.extend(band("B", &kb, p.beta, p.nu, &p.g)?);
    Ok(rows)
}

pub fn dual_residual(p: &DualProblem, psi: &LatticeFunction) -> QResult<DualResidual> {
    let rows = dual_residual_rows(p, psi)?;
    Ok(DualResidual { a_band: band_max(&rows, "A"), b_band: band_max(&rows, "B"), points: rows.len() })
}

/// Which limiting case of the triple system reduces to a dual pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Reduction {
    /// `b → ∞`, `w = 0`: `∫ψJ_ν = f` on `A_{q,1}`, `∫u^{-2α}ψJ_ν = 0` on `B_{q,1}`.
    Head,
    /// `a → 0`, `w = 0`: `∫u^{-2α}ψJ_ν = 0` on `A_{q,1}`, `∫ψJ_ν = f` on `B_{q,1}`.
    Tail,
}

/// Closed-form variant for the reduced band function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Form {
    Derived,
    Printed,
}

/// Limiting cases of the triple system on the unit split point, solved through
/// the dual q²-system via `ψ(u) = (1+q) u^{1+2s} Ψ(u²)`.
#[derive(Clone)]
pub struct Example1 {
    pub q: f64,
    pub nu: f64,
    pub alpha: f64,
    pub reduction: Reduction,
    pub f: LatticeFunction,
}

impl Example1 {
    fn shift(&self) -> f64 {
        match self.reduction {
            Reduction::Head => 0.0,
            // keeps λ - μ - 2α' = α positive
            Reduction::Tail => 2.0 * self.alpha,
        }
    }

    pub fn dual(&self) -> QResult<DualProblem> {
        let (q, nu, a) = (self.q, self.nu, self.alpha);
        let f = self.f.clone();
        match self.reduction {
            Reduction::Head => DualProblem::new(
                q,
                0.0,
                a,
                nu,
                nu,
                LatticeFunction::from_fn(move |x| f.eval(x.sqrt()).unwrap_or(f64::NAN), Decay::Power),
                LatticeFunction::zero(),
            ),
            Reduction::Tail => {
                let s = self.shift();
                DualProblem::new(
                    q,
                    -a,
                    -s,
                    nu,
                    nu,
                    LatticeFunction::zero(),
                    LatticeFunction::from_fn(move |x| x.powf(s) * f.eval(x.sqrt()).unwrap_or(f64::NAN), Decay::Power),
                )
            }
        }
    }

    /// `ψ(q^k)` from the dual solution `Ψ` on the `q²` window.
    pub fn psi(&self, dual: &LatticeFunction, lat: &QLattice, k: i64) -> QResult<f64> {
        let u = self.q.powi(k as i32);
        Ok((1.0 + self.q) * u.powf(1.0 + 2.0 * self.shift()) * dual.eval_exp(lat, k)?)
    }

    /// Band function from the solved `ψ`: `∫_0^∞ u^{-α} ψ(u) J_{ν±α}(ux;q²) d_qu`
    /// at `x = q^k`, with `+` for the head reduction and `-` for the tail.
    pub fn band_from_psi(&self, dual: &LatticeFunction, lat: &QLattice, k: i64) -> QResult<f64> {
        let (q, a) = (self.q, self.alpha);
        let order = match self.reduction {
            Reduction::Head => self.nu + a,
            Reduction::Tail => self.nu - a,
        };
        let mut s = 0.0;
        for i in (lat.k_min()..=lat.k_max()).rev() {
            let u = q.powi(i as i32);
            s += u * (1.0 - q) * u.powf(-a) * self.psi(dual, lat, i)? * qbessel3_lattice(order, i + k, q)?;
        }
        Ok(s)
    }

    /// Closed form of the band function at `x = q^k`.
    pub fn band_closed(&self, k: i64, form: Form) -> QResult<f64> {
        let (q, nu, a) = (self.q, self.nu, self.alpha);
        let p = q * q;
        let x = q.powi(k as i32);
        let ga = qgamma(a, p)?;
        match self.reduction {
            Reduction::Head => {
                // ρ^{α-ν-2} ∫_0^ρ (q²t²/ρ²;q²)_{α-1} t^{ν+1} f(t) d_qt
                let s = head_series(0, |j| {
                    let t = x * q.powi(j as i32);
                    Ok(Some(t * (1.0 - q) * qpoch_pow(p, (j + 1) as f64, a - 1.0)? * t.powf(nu + 1.0) * self.f.eval(t)?))
                })?;
                let c = match form {
                    Form::Derived => 1.0,
                    Form::Printed => (1.0 - q).powi(-2),
                };
                Ok(c * (1.0 + q) * (1.0 - p).powf(-a) * x.powf(a - nu - 2.0) / ga * s)
            }
            Reduction::Tail => {
                let (shift, rho_pow, sign, c) = match form {
                    Form::Derived => (q, nu - a, 1.0, q.powf(2.0 * a - nu)),
                    Form::Printed => (1.0, nu + a, -1.0, q.powf(-2.0 * a) * (1.0 - q).powi(-2)),
                };
                let s = tail_series(0, |j| {
                    let t = x * q.powi(-(j as i32));
                    Ok(Some(t * (1.0 - q) * qpoch_pow(p, j as f64, a - 1.0)? * t.powf(2.0 * a - nu - 1.0) * self.f.eval(shift * t)?))
                })?;
                Ok(sign * c * (1.0 + q) * (1.0 - p).powf(-a) * x.powf(rho_pow) / ga * s)
            }
        }
    }

    /// Closed form of `ψ(u)` at `u = q^k` for the head reduction:
    /// `c u^{1+α} ∫_0^1 x ψ₂(x) J_{ν+α}(ux;q²) d_qx` with the derived `ψ₂`;
    /// `c = (1-q)^{-2}` derived, `c = (1-q²)^{-1}` printed.
    pub fn psi_closed_head(&self, k: i64, form: Form) -> QResult<f64> {
        let q = self.q;
        let u = q.powi(k as i32);
        let s = head_series(0, |j| {
            let x = q.powi(j as i32);
            Ok(Some(x * (1.0 - q) * x * self.band_closed(j, Form::Derived)? * qbessel3_lattice(self.nu + self.alpha, j + k, q)?))
        })?;
        let c = match form {
            Form::Derived => (1.0 - q).powi(-2),
            Form::Printed => 1.0 / (1.0 - q * q),
        };
        Ok(c * u.powf(1.0 + self.alpha) * s)
    }
}
