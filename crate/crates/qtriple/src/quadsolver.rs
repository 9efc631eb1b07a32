//! Triple q²-integral equations on the unit `q²` lattice, split at
//! `a = q^{2m}` and `1`:
//!
//! ```text
//! ξ^{-γ} ∫ ρ^{-γ} ψ J_κ(√(ρξ);q²) d_{q²}ρ = f(ξ),  ξ ≤ a
//! ξ^{-α} ∫ ρ^{-α} ψ J_μ(√(ρξ);q²) d_{q²}ρ = g(ξ),  a < ξ ≤ 1
//! ξ^{-β} ∫ ρ^{-β} ψ J_ν(√(ρξ);q²) d_{q²}ρ = h(ξ),  ξ > 1
//! ```
//!
//! With `g = g1 + g2` and `ψ = A1 + A2`, `A1` solves the dual pair
//! `(μ,α | ν,β)` split at 1 with data `(g1, h - f2)` and `A2` solves the pair
//! `(κ,γ | μ,α)` split at `a` with data `(f - f1)`, `g2`, where `f1` is the
//! `(κ,γ)` transform of `A1` below `a` and `f2` the `(ν,β)` transform of
//! `A2` above 1. The implicit coupling is closed by damped Picard sweeps.
//!
//! The second pair is moved to a unit split by `ξ = aξ'`, `ρ = ρ'/a`, which
//! leaves every Bessel argument unchanged: if `B` solves the unit problem
//! with data `(f - f1)(a·)`, `g2(a·)`, then `A2(ρ) = a B(aρ)`.

use rayon::prelude::*;

use crate::dualsolver::{solve_dual, DualProblem};
use crate::error::{QError, QResult};
use crate::qlattice::{Decay, LatticeFunction, QLattice};
use crate::qspecial::BesselTable;
use crate::residual::{band_max, band_rows, ResidualRow};

/// Extra exponents tabulated for the cross terms beyond the dual window.
const CROSS_PAD: i64 = 160;
const DIVERGENCE_RUN: usize = 3;

/// Picard controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterControls {
    pub max_iter: usize,
    /// Relaxation `θ ∈ (0, 1]`.
    pub theta: f64,
    /// Stop once the scaled sup distance of successive `ψ` falls below this.
    pub fp_tol: f64,
    /// Retry with `θ = 0.5` if the first attempt diverges.
    pub fallback: bool,
}

impl Default for IterControls {
    fn default() -> Self {
        Self { max_iter: 200, theta: 1.0, fp_tol: 1e-8, fallback: true }
    }
}

#[derive(Clone)]
pub struct Triple2Problem {
    pub q: f64,
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
    pub mu: f64,
    pub nu: f64,
    pub kappa: f64,
    /// `a = q^{2 m_a}`, `m_a ≥ 1`.
    pub m_a: i64,
    pub f: LatticeFunction,
    pub g1: LatticeFunction,
    pub g2: LatticeFunction,
    pub h: LatticeFunction,
    /// Half-width of the unit dual window (base `q²`).
    pub n: usize,
    pub controls: IterControls,
}

impl std::fmt::Debug for Triple2Problem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Triple2Problem")
            .field("q", &self.q)
            .field("alpha", &self.alpha)
            .field("beta", &self.beta)
            .field("gamma", &self.gamma)
            .field("mu", &self.mu)
            .field("nu", &self.nu)
            .field("kappa", &self.kappa)
            .field("m_a", &self.m_a)
            .field("n", &self.n)
            .field("controls", &self.controls)
            .finish_non_exhaustive()
    }
}

impl Triple2Problem {
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        q: f64,
        (alpha, beta, gamma): (f64, f64, f64),
        (mu, nu, kappa): (f64, f64, f64),
        m_a: i64,
        f: LatticeFunction,
        (g1, g2): (LatticeFunction, LatticeFunction),
        h: LatticeFunction,
    ) -> QResult<Self> {
        let n = QLattice::default_window(q * q, 1.0)?.n_pos.max(24);
        let p = Self { q, alpha, beta, gamma, mu, nu, kappa, m_a, f, g1, g2, h, n, controls: IterControls::default() };
        p.validate()?;
        Ok(p)
    }

    pub fn with_controls(mut self, c: IterControls) -> QResult<Self> {
        self.controls = c;
        self.validate()?;
        Ok(self)
    }

    pub fn with_window(mut self, n: usize) -> Self {
        self.n = n;
        self
    }

    pub fn a(&self) -> f64 {
        (self.q * self.q).powi(self.m_a as i32)
    }

    /// `(μ+ν)/2 - (α-β)`.
    pub fn lambda_a(&self) -> f64 {
        0.5 * (self.mu + self.nu) - (self.alpha - self.beta)
    }

    /// `(μ+κ)/2 - (γ-α)`.
    pub fn lambda_b(&self) -> f64 {
        0.5 * (self.mu + self.kappa) - (self.gamma - self.alpha)
    }

    pub fn validate(&self) -> QResult<()> {
        if !(self.q > 0.0 && self.q < 1.0) {
            return Err(QError::Domain(format!("q must lie in (0,1), got {}", self.q)));
        }
        if self.m_a < 1 {
            return Err(QError::Domain(format!("need 0 < a < 1, got a = q^(2*{})", self.m_a)));
        }
        if self.kappa <= -1.0 {
            return Err(QError::Hypothesis(format!("kappa > -1 fails for {self:?}")));
        }
        let c = self.controls;
        if !(c.theta > 0.0 && c.theta <= 1.0) || c.max_iter == 0 || c.fp_tol <= 0.0 {
            return Err(QError::Domain(format!("invalid iteration controls {c:?}")));
        }
        // each pair must meet the dual hypotheses on its own
        let z = LatticeFunction::zero;
        DualProblem::new(self.q, self.alpha, self.beta, self.mu, self.nu, z(), z())?;
        DualProblem::new(self.q, self.gamma, self.alpha, self.kappa, self.mu, z(), z())?;
        Ok(())
    }
}

/// Converged solution with the Picard history.
#[derive(Debug, Clone)]
pub struct Triple2Solution {
    pub psi: LatticeFunction,
    pub a1: LatticeFunction,
    pub a2: LatticeFunction,
    /// Window shared by `ψ`, `A1`, `A2`.
    pub lat: QLattice,
    /// Scaled sup distance between successive `ψ` per sweep.
    pub trace: Vec<f64>,
    pub theta: f64,
    pub sweeps: usize,
}

struct Ctx<'a> {
    p: &'a Triple2Problem,
    lat: QLattice,
    jk: BesselTable,
    jnu: BesselTable,
    jmu: BesselTable,
}

impl<'a> Ctx<'a> {
    fn new(p: &'a Triple2Problem) -> QResult<Self> {
        let (n, m) = (p.n as i64, p.m_a);
        let lat = QLattice::new(p.q * p.q, 1.0, (n + m) as usize, n as usize)?;
        let lo = lat.k_min() - CROSS_PAD - n;
        let hi = lat.k_max() + m + CROSS_PAD + 2 * n;
        Ok(Self {
            p,
            lat,
            jk: BesselTable::new(p.kappa, p.q, lo, hi)?,
            jnu: BesselTable::new(p.nu, p.q, lo, hi)?,
            jmu: BesselTable::new(p.mu, p.q, lo, hi)?,
        })
    }

    /// `ξ^{-w} ∫ ρ^{-w} A(ρ) J(√(ρξ)) d_{q²}ρ` at `ξ = q^{2k}`, `A` on the window.
    fn transform(&self, a: &[f64], w: f64, tab: &BesselTable, k: i64) -> f64 {
        let pp = self.p.q * self.p.q;
        let k0 = self.lat.k_min();
        let mut s = 0.0;
        for (i, &v) in a.iter().enumerate().rev() {
            if v == 0.0 {
                continue;
            }
            let ki = k0 + i as i64;
            s += (1.0 - pp) * pp.powf(ki as f64 * (1.0 - w)) * v * tab.get(ki + k);
        }
        pp.powf(-w * k as f64) * s
    }

    fn table(&self, vals: Vec<f64>) -> QResult<LatticeFunction> {
        LatticeFunction::from_table(&self.lat, self.lat.k_min(), vals, Decay::Power)
    }

    /// `A1` on the window from the current `f2` table (exponents `-len..=-1`).
    fn solve_a1(&self, f2: &[f64]) -> QResult<Vec<f64>> {
        let p = self.p;
        let pp = p.q * p.q;
        let len = f2.len() as i64;
        let vals = (1..=len)
            .map(|j| Ok(p.h.eval(pp.powi(-(j as i32)))? - f2[(len - j) as usize]))
            .collect::<QResult<Vec<_>>>()?;
        let mut vals = vals;
        vals.reverse();
        let tail = LatticeFunction::from_table(&self.lat, -len, vals, Decay::Power)?;
        let d = DualProblem::new(p.q, p.alpha, p.beta, p.mu, p.nu, p.g1.clone(), tail)?
            .with_window(self.lat.n_neg, self.lat.n_pos)?;
        let psi = solve_dual(&d)?;
        self.lat.exponents().map(|k| psi.eval_exp(&self.lat, k)).collect()
    }

    /// `A2` on the window from the current `f1` table (exponents `m..m+len-1`).
    fn solve_a2(&self, f1: &[f64]) -> QResult<Vec<f64>> {
        let p = self.p;
        let pp = p.q * p.q;
        let (m, a) = (p.m_a, p.a());
        let head = (0..f1.len())
            .map(|j| Ok(p.f.eval(pp.powi((j as i64 + m) as i32))? - f1[j]))
            .collect::<QResult<Vec<_>>>()?;
        let unit = QLattice::new(pp, 1.0, 0, 0)?;
        let head = LatticeFunction::from_table(&unit, 0, head, Decay::Power)?;
        let g2 = p.g2.clone();
        let tail = if g2.is_table() {
            let (lo, hi) = g2.table_range().unwrap_or((0, -1));
            let v = (lo..=hi).map(|k| g2.eval(pp.powi(k as i32))).collect::<QResult<Vec<_>>>()?;
            LatticeFunction::from_table(&unit, lo - m, v, g2.decay)?
        } else {
            let decay = g2.decay;
            LatticeFunction::from_fn(move |x| g2.eval(a * x).unwrap_or(f64::NAN), decay)
        };
        // unit window [-n, n+m] maps onto [-n-m, n]
        let d = DualProblem::new(p.q, p.gamma, p.alpha, p.kappa, p.mu, head, tail)?
            .with_window(self.lat.n_pos, self.lat.n_neg)?;
        let b = solve_dual(&d)?;
        self.lat.exponents().map(|k| Ok(a * b.eval_exp(&d.lat, k + m)?)).collect()
    }

    fn cross_len(&self) -> usize {
        (self.lat.n_pos + self.lat.n_neg) + CROSS_PAD as usize
    }

    /// `f1` at `ξ = q^{2k}`, `k = m..`.
    fn f1_of(&self, a1: &[f64]) -> Vec<f64> {
        let m = self.p.m_a;
        (0..self.cross_len() as i64).into_par_iter().map(|j| self.transform(a1, self.p.gamma, &self.jk, m + j)).collect()
    }

    /// `f2` at `ξ = q^{2k}`, `k = -len..=-1`.
    fn f2_of(&self, a2: &[f64]) -> Vec<f64> {
        let len = self.cross_len() as i64;
        (-len..=-1).into_par_iter().map(|k| self.transform(a2, self.p.beta, &self.jnu, k)).collect()
    }
}

fn sup(v: &[f64]) -> f64 {
    v.iter().fold(0.0f64, |m, x| m.max(x.abs()))
}

fn relax(old: &mut [f64], new: &[f64], theta: f64) {
    for (o, n) in old.iter_mut().zip(new) {
        *o = theta * n + (1.0 - theta) * *o;
    }
}

fn iterate(ctx: &Ctx, theta: f64) -> QResult<Triple2Solution> {
    let c = ctx.p.controls;
    let len = ctx.cross_len();
    let (mut f1, mut f2) = (vec![0.0; len], vec![0.0; len]);
    let mut psi_old = vec![0.0; ctx.lat.n_neg + ctx.lat.n_pos + 1];
    let mut trace = Vec::new();
    let mut rising = 0;
    for sweep in 1..=c.max_iter {
        let a1 = ctx.solve_a1(&f2)?;
        relax(&mut f1, &ctx.f1_of(&a1), theta);
        let a2 = ctx.solve_a2(&f1)?;
        relax(&mut f2, &ctx.f2_of(&a2), theta);
        let psi: Vec<f64> = a1.iter().zip(&a2).map(|(x, y)| x + y).collect();
        let diff: Vec<f64> = psi.iter().zip(&psi_old).map(|(x, y)| x - y).collect();
        let scale = sup(&psi).max(f64::MIN_POSITIVE);
        let dist = if sup(&diff) == 0.0 { 0.0 } else { sup(&diff) / scale };
        if let Some(&last) = trace.last() {
            rising = if dist > last { rising + 1 } else { 0 };
        }
        trace.push(dist);
        if dist < c.fp_tol {
            return Ok(Triple2Solution {
                psi: ctx.table(psi)?,
                a1: ctx.table(a1)?,
                a2: ctx.table(a2)?,
                lat: ctx.lat,
                trace,
                theta,
                sweeps: sweep,
            });
        }
        if rising >= DIVERGENCE_RUN || !dist.is_finite() {
            return Err(QError::IterationDiverged { sweeps: sweep, last: dist });
        }
        psi_old = psi;
    }
    Err(QError::IterationDiverged { sweeps: c.max_iter, last: trace.last().copied().unwrap_or(f64::NAN) })
}

/// Damped Picard solve; retries once with `θ = 0.5` on divergence if allowed.
pub fn solve_triple2(p: &Triple2Problem) -> QResult<Triple2Solution> {
    p.validate()?;
    let ctx = Ctx::new(p)?;
    match iterate(&ctx, p.controls.theta) {
        Err(QError::IterationDiverged { .. }) if p.controls.fallback && p.controls.theta > 0.5 => iterate(&ctx, 0.5),
        r => r,
    }
}

/// Per-band normalized substitution residuals.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Triple2Residual {
    /// `ξ ≤ a` against `f`.
    pub head: f64,
    /// `a < ξ ≤ 1` against `g1 + g2`.
    pub middle: f64,
    /// `ξ > 1` against `h`.
    pub tail: f64,
}

impl Triple2Residual {
    pub fn max(&self) -> f64 {
        self.head.max(self.middle).max(self.tail)
    }
}

/// Forward substitution over the inner half of each band, per point.
pub fn residual_rows_triple2(p: &Triple2Problem, sol: &Triple2Solution) -> QResult<Vec<ResidualRow>> {
    let ctx = Ctx::new(p)?;
    let pp = p.q * p.q;
    let psi: Vec<f64> = ctx.lat.exponents().map(|k| sol.psi.eval_exp(&ctx.lat, k)).collect::<QResult<_>>()?;
    let n = p.n as i64;
    let band = |name: &'static str, ks: Vec<i64>, w: f64, tab: &BesselTable, data: &dyn Fn(f64) -> QResult<f64>| {
        let samples = ks
            .iter()
            .map(|&k| {
                let x = pp.powi(k as i32);
                Ok((x, ctx.transform(&psi, w, tab, k), data(x)?))
            })
            .collect::<QResult<Vec<_>>>()?;
        Ok::<_, QError>(band_rows(name, &samples))
    };
    let mut rows = band("head", (p.m_a..=p.m_a + n / 2).collect(), p.gamma, &ctx.jk, &|x| p.f.eval(x))?;
    rows.extend(band("middle", (0..p.m_a).collect(), p.alpha, &ctx.jmu, &|x| Ok(p.g1.eval(x)? + p.g2.eval(x)?))?);
    rows.extend(band("tail", (-n / 2..=-1).collect(), p.beta, &ctx.jnu, &|x| p.h.eval(x))?);
    Ok(rows)
}

pub fn residual_triple2(p: &Triple2Problem, sol: &Triple2Solution) -> QResult<Triple2Residual> {
    let rows = residual_rows_triple2(p, sol)?;
    Ok(Triple2Residual { head: band_max(&rows, "head"), middle: band_max(&rows, "middle"), tail: band_max(&rows, "tail") })
}
