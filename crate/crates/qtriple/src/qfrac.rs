//! Fractional q-operators on a lattice: Riemann–Liouville `I_q^α`, the
//! derivative `D_q^α = I_q^{-α}`, the two-parameter tail operators
//! `K_q^{η,α}` and `𝒦_q^{η,α}`, the one-parameter `𝒦_q^α`, and the
//! Erdélyi–Kober head operator `I_q^{η,α}`.
//!
//! All operators evaluate lazily at one lattice point. Head sums run over
//! `x q^j`, `j >= 0`; tail sums over `x q^{-j}`, `j >= 1`.
//!
//! Normalizations:
//! * `𝒦_q^α` defaults to [`CalKNorm::Semigroup`], with no q-power prefactor:
//!   `𝒦_q^α f(x) = Γ_q(α)^{-1} ∫_x^∞ t^{α-1} (x/t;q)_{α-1} f(qt) d_qt`.
//!   This makes `𝒦^α 𝒦^β = 𝒦^{α+β}` exact, including negative orders, and the
//!   inversion of `G = D_q 𝒦^α Φ` reads `Φ = -𝒦^{1-α}[s ↦ G(s/q)]`:
//!   the shift acts on the operand, not on the evaluation point.
//!   The prefactor `q^{-α(α-1)/2}` is available as [`CalKNorm::Printed`];
//!   with it the composition picks up a stray factor `q^{αβ}`.
//! * `I_q^{η,α} f(x) = x^{-η-α} I_q^α(t^η f)(x)`.

use crate::error::{QError, QResult};
use crate::qlattice::{LatticeFunction, QLattice};
use crate::qspecial::{qgamma, qpoch_pow};

const HEAD_EXTRA: usize = 4000;
const TAIL_EXTRA: usize = 600;
const REL_STOP: f64 = 1e-17;

/// Two-parameter order `(η, α)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FracOrder {
    pub eta: f64,
    pub alpha: f64,
}

impl FracOrder {
    pub fn new(eta: f64, alpha: f64) -> Self {
        Self { eta, alpha }
    }
}

/// Choice of prefactor for the one-parameter operator `𝒦_q^α`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CalKNorm {
    #[default]
    Semigroup,
    Printed,
}

fn is_nonpos_int(a: f64) -> bool {
    a <= 0.0 && a == a.round()
}

/// Sample of `f` at `x q^j`; `None` once a table runs out.
fn sample(f: &LatticeFunction, x: f64, q: f64, j: i64) -> QResult<Option<f64>> {
    match f.eval(x * q.powi(j as i32)) {
        Ok(v) => Ok(Some(v)),
        Err(QError::Window(_)) if f.is_table() => Ok(None),
        Err(e) => Err(e),
    }
}

/// `Σ_{j>=0} term(j)`, at least `min_terms` terms, summed smallest point first.
pub(crate) fn head_series<T>(min_terms: usize, mut term: T) -> QResult<f64>
where
    T: FnMut(i64) -> QResult<Option<f64>>,
{
    let mut terms = Vec::new();
    let mut abs_sum = 0.0;
    let mut small = 0;
    for j in 0..(min_terms + HEAD_EXTRA) as i64 {
        let Some(t) = term(j)? else { break };
        if !t.is_finite() {
            return Err(QError::Divergence(format!("non-finite head term at offset {j}")));
        }
        abs_sum += t.abs();
        terms.push(t);
        if j as usize >= min_terms {
            small = if t.abs() <= REL_STOP * abs_sum { small + 1 } else { 0 };
            if small >= 3 {
                break;
            }
        }
    }
    Ok(terms.iter().rev().fold(0.0, |s, t| s + t))
}

/// `Σ_{j>=1} term(j)` for a tail walk, at least `min_terms` terms.
pub(crate) fn tail_series<T>(min_terms: usize, mut term: T) -> QResult<f64>
where
    T: FnMut(i64) -> QResult<Option<f64>>,
{
    let mut terms: Vec<f64> = Vec::new();
    let mut abs_sum = 0.0;
    let mut small = 0;
    let mut rising = 0;
    for j in 1..=(min_terms + TAIL_EXTRA) as i64 {
        let Some(t) = term(j)? else { break };
        if !t.is_finite() {
            return Err(QError::Divergence(format!("non-finite tail term at offset {j}")));
        }
        if let Some(last) = terms.last() {
            rising = if t.abs() >= last.abs() && t != 0.0 { rising + 1 } else { 0 };
            if rising >= crate::qlattice::GUARD_BLOCK && j as usize > min_terms {
                return Err(QError::Divergence("tail terms did not decrease over the guard block".into()));
            }
        }
        abs_sum += t.abs();
        terms.push(t);
        if j as usize >= min_terms {
            small = if t.abs() <= REL_STOP * abs_sum { small + 1 } else { 0 };
            if small >= 3 {
                break;
            }
        }
    }
    Ok(terms.iter().fold(0.0, |s, t| s + t))
}

fn head_min(lat: &QLattice, x: f64) -> QResult<usize> {
    let k0 = lat.exponent_of(x)?;
    Ok((lat.k_max() - k0).max(0) as usize)
}

fn tail_min(lat: &QLattice, x: f64) -> QResult<usize> {
    let k0 = lat.exponent_of(x)?;
    Ok((k0 - lat.k_min()).max(0) as usize)
}

/// Riemann–Liouville head sum with an arbitrary sampler `g(j) = f(x q^j)`.
pub fn riemann_liouville<G>(alpha: f64, x: f64, q: f64, min_terms: usize, mut g: G) -> QResult<f64>
where
    G: FnMut(i64) -> QResult<Option<f64>>,
{
    if is_nonpos_int(alpha) {
        return Err(QError::Pole(format!("Gamma_q pole at order {alpha}")));
    }
    let gam = qgamma(alpha, q)?;
    let s = head_series(min_terms, |j| {
        let Some(v) = g(j)? else { return Ok(None) };
        if v == 0.0 {
            return Ok(Some(0.0));
        }
        Ok(Some(q.powi(j as i32) * qpoch_pow(q, (j + 1) as f64, alpha - 1.0)? * v))
    })?;
    Ok(x.powf(alpha) * (1.0 - q) / gam * s)
}

/// `I_q^α f(x)`.
pub fn frac_integral_iq(alpha: f64, f: &LatticeFunction, x: f64, lat: &QLattice) -> QResult<f64> {
    let q = lat.q;
    if alpha == 0.0 {
        return f.eval(x);
    }
    riemann_liouville(alpha, x, q, head_min(lat, x)?, |j| sample(f, x, q, j))
}

/// `D_q^α f(x) = I_q^{-α} f(x)`.
pub fn frac_derivative_dq(alpha: f64, f: &LatticeFunction, x: f64, lat: &QLattice) -> QResult<f64> {
    frac_integral_iq(-alpha, f, x, lat)
}

/// `lim_{x->0} I_q^α f(x)` along `q^k`, checked for Cauchy convergence.
pub fn frac_integral_iq_at_zero(alpha: f64, f: &LatticeFunction, lat: &QLattice) -> QResult<f64> {
    let mut prev: Option<f64> = None;
    let mut k = lat.exponent_of(lat.t)?;
    let mut settled = 0;
    for _ in 0..600 {
        let x = lat.point(k);
        if x < 1e-280 {
            break;
        }
        let v = riemann_liouville(alpha, x, lat.q, 0, |j| sample(f, x, lat.q, j))?;
        if let Some(p) = prev {
            if (v - p).abs() <= 1e-13 * v.abs().max(1e-300) || (v.abs() < 1e-14 && p.abs() < 1e-14) {
                settled += 1;
                if settled >= 3 {
                    return Ok(if v.abs() < 1e-14 { 0.0 } else { v });
                }
            } else {
                settled = 0;
            }
        }
        prev = Some(v);
        k += 8;
    }
    Err(QError::NoLimit("I_q^α f(x) has no limit as x -> 0".into()))
}

/// Tail sum shared by the `K`-family: `Σ_{j>=1} x(1-q)q^{-j} (q^j;q)_{α-1} t_j^{-η-1} φ_j`.
fn kober_tail<G>(eta: f64, alpha: f64, x: f64, q: f64, min_terms: usize, mut phi: G) -> QResult<f64>
where
    G: FnMut(i64) -> QResult<Option<f64>>,
{
    tail_series(min_terms, |j| {
        let Some(v) = phi(j)? else { return Ok(None) };
        if v == 0.0 {
            return Ok(Some(0.0));
        }
        let t = x * q.powi(-j as i32);
        Ok(Some(t * (1.0 - q) * qpoch_pow(q, j as f64, alpha - 1.0)? * t.powf(-eta - 1.0) * v))
    })
}

/// Al-Salam `K_q^{η,α}φ(x)`; samples `φ(t q^{1-α})`, so `φ` must be callable
/// off the lattice unless `α` is an integer.
pub fn kober_k(order: FracOrder, f: &LatticeFunction, x: f64, lat: &QLattice) -> QResult<f64> {
    let FracOrder { eta, alpha } = order;
    let q = lat.q;
    if alpha < 0.0 && alpha == alpha.round() {
        return Err(QError::Pole(format!("K operator undefined for order {alpha}")));
    }
    let shift = q.powf(1.0 - alpha);
    let s = kober_tail(eta, alpha, x, q, tail_min(lat, x)?, |j| match f.eval(x * q.powi(-j as i32) * shift) {
        Ok(v) => Ok(Some(v)),
        Err(QError::Window(_)) if f.is_table() => Ok(None),
        Err(e) => Err(e),
    })?;
    Ok(q.powf(-eta) * x.powf(eta) / qgamma(alpha, q)? * s)
}

/// Two-parameter `𝒦_q^{η,α}φ(x)` with an exponent sampler `g(j) = φ(x q^{-j})`.
pub fn calk_two_param<G>(eta: f64, alpha: f64, x: f64, q: f64, min_terms: usize, mut g: G) -> QResult<f64>
where
    G: FnMut(i64) -> QResult<Option<f64>>,
{
    if alpha == 0.0 {
        return g(0)?.ok_or_else(|| QError::Window("no sample at x".into()));
    }
    if is_nonpos_int(alpha) {
        return Err(QError::Pole(format!("calK undefined for order {alpha}")));
    }
    // φ(q t) at t = x q^{-j} is φ(x q^{1-j})
    let s = kober_tail(eta, alpha, x, q, min_terms, |j| g(j - 1))?;
    Ok(q.powf(-eta) * x.powf(eta) / qgamma(alpha, q)? * s)
}

/// One-parameter `𝒦_q^α f(x)` with an exponent sampler `g(j) = f(x q^{-j})`.
pub fn calk_pure<G>(alpha: f64, x: f64, q: f64, norm: CalKNorm, min_terms: usize, g: G) -> QResult<f64>
where
    G: FnMut(i64) -> QResult<Option<f64>>,
{
    let mut g = g;
    if alpha == 0.0 {
        return g(0)?.ok_or_else(|| QError::Window("no sample at x".into()));
    }
    if is_nonpos_int(alpha) {
        return Err(QError::Pole(format!("calK undefined for order {alpha}")));
    }
    let s = tail_series(min_terms, |j| {
        let Some(v) = g(j - 1)? else { return Ok(None) };
        if v == 0.0 {
            return Ok(Some(0.0));
        }
        let t = x * q.powi(-j as i32);
        Ok(Some(t * (1.0 - q) * t.powf(alpha - 1.0) * qpoch_pow(q, j as f64, alpha - 1.0)? * v))
    })?;
    let pref = match norm {
        CalKNorm::Semigroup => 1.0,
        CalKNorm::Printed => q.powf(-alpha * (alpha - 1.0) / 2.0),
    };
    Ok(pref / qgamma(alpha, q)? * s)
}

/// `𝒦_q^{η,α}φ(x)` on a lattice function.
pub fn kober_calk(order: FracOrder, f: &LatticeFunction, x: f64, lat: &QLattice) -> QResult<f64> {
    let q = lat.q;
    calk_two_param(order.eta, order.alpha, x, q, tail_min(lat, x)?, |j| sample(f, x, q, -j))
}

/// `𝒦_q^α f(x)` on a lattice function.
pub fn kober_calk_pure(alpha: f64, norm: CalKNorm, f: &LatticeFunction, x: f64, lat: &QLattice) -> QResult<f64> {
    let q = lat.q;
    calk_pure(alpha, x, q, norm, tail_min(lat, x)?, |j| sample(f, x, q, -j))
}

/// Erdélyi–Kober head operator `I_q^{η,α} f(x) = x^{-η-α} I_q^α(t^η f)(x)`.
pub fn kober_i(order: FracOrder, f: &LatticeFunction, x: f64, lat: &QLattice) -> QResult<f64> {
    let FracOrder { eta, alpha } = order;
    let q = lat.q;
    let v = riemann_liouville(alpha, x, q, head_min(lat, x)?, |j| {
        Ok(sample(f, x, q, j)?.map(|v| (x * q.powi(j as i32)).powf(eta) * v))
    })?;
    Ok(x.powf(-eta - alpha) * v)
}

/// Erdélyi–Kober head operator with an exponent sampler `g(j) = f(x q^j)`.
pub fn kober_i_with<G>(eta: f64, alpha: f64, x: f64, q: f64, min_terms: usize, mut g: G) -> QResult<f64>
where
    G: FnMut(i64) -> QResult<Option<f64>>,
{
    let v = riemann_liouville(alpha, x, q, min_terms, |j| Ok(g(j)?.map(|v| (x * q.powi(j as i32)).powf(eta) * v)))?;
    Ok(x.powf(-eta - alpha) * v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qlattice::Decay;

    fn lat(q: f64) -> QLattice {
        QLattice::default_window(q, 1.0).unwrap()
    }

    #[test]
    fn order_one_is_plain_integral() {
        let f = LatticeFunction::from_fn(|t| t, Decay::Power);
        let v = frac_integral_iq(1.0, &f, 1.0, &lat(0.5)).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn zero_function_maps_to_zero() {
        let z = LatticeFunction::zero();
        let l = lat(0.5);
        assert_eq!(frac_derivative_dq(0.5, &z, 1.0, &l).unwrap(), 0.0);
        assert_eq!(kober_calk(FracOrder::new(0.2, 0.5), &z, 2.0, &l).unwrap(), 0.0);
        assert_eq!(kober_i(FracOrder::new(0.2, 0.5), &z, 0.5, &l).unwrap(), 0.0);
        assert_eq!(kober_k(FracOrder::new(0.2, 0.5), &z, 2.0, &l).unwrap(), 0.0);
    }

    #[test]
    fn calk_order_zero_is_identity() {
        let f = LatticeFunction::from_fn(|t| t.powi(-3), Decay::Power);
        let l = lat(0.5);
        assert_eq!(kober_calk_pure(0.0, CalKNorm::Semigroup, &f, 4.0, &l).unwrap(), 4f64.powi(-3));
    }
}
