//! q-shifted factorials, q-gamma, q-bracket, the third Jackson (Hahn–Exton)
//! q-Bessel function and the q-trigonometric pair built on it.
//!
//! Everything is real-valued. Infinite products stop once the factor
//! `|a q^k|` drops below `series_tol`; the bounded variants also return a
//! relative bound on the discarded tail.

use crate::error::{QError, QResult};

/// Default absolute tolerance for series and products.
pub const SERIES_TOL: f64 = 1e-17;
/// Default hard cap on the number of factors or terms.
pub const MAX_TERMS: usize = 20_000;

/// Base `q` plus truncation controls.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QParams {
    pub q: f64,
    pub series_tol: f64,
    pub max_terms: usize,
}

impl QParams {
    pub fn new(q: f64) -> QResult<Self> {
        Self::with_controls(q, SERIES_TOL, MAX_TERMS)
    }

    pub fn with_controls(q: f64, series_tol: f64, max_terms: usize) -> QResult<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(QError::Domain(format!("q must lie in (0,1), got {q}")));
        }
        if !(series_tol > 0.0) {
            return Err(QError::Domain("series_tol must be positive".into()));
        }
        if max_terms == 0 {
            return Err(QError::Domain("max_terms must be at least 1".into()));
        }
        Ok(Self { q, series_tol, max_terms })
    }
}

/// Order of a q-shifted factorial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PochOrder {
    Finite(u32),
    Infinite,
    Real(f64),
}

fn check_base(q: f64) -> QResult<()> {
    if q > 0.0 && q < 1.0 {
        Ok(())
    } else {
        Err(QError::Domain(format!("q must lie in (0,1), got {q}")))
    }
}

/// `(a;q)_n` as an exact product of `n` factors.
pub fn qpoch_finite(a: f64, q: f64, n: u32) -> f64 {
    let mut prod = 1.0;
    let mut x = a;
    for _ in 0..n {
        prod *= 1.0 - x;
        x *= q;
    }
    prod
}

/// `(a;q)_∞` together with a relative bound on the truncated tail.
pub fn qpoch_inf_bounded(a: f64, q: f64, tol: f64, max_terms: usize) -> QResult<(f64, f64)> {
    check_base(q)?;
    let mut prod = 1.0;
    let mut x = a;
    for _ in 0..max_terms {
        if x.abs() < tol {
            // log|tail| <= sum |x q^j| / (1 - |x q^j|) <= 2|x|/(1-q)
            return Ok((prod, 2.0 * x.abs() / (1.0 - q)));
        }
        prod *= 1.0 - x;
        x *= q;
    }
    Err(QError::NonConvergence { what: format!("({a};{q})_inf"), max_terms })
}

/// `(a;q)_∞`.
pub fn qpoch_inf(a: f64, q: f64) -> QResult<f64> {
    qpoch_inf_bounded(a, q, SERIES_TOL, MAX_TERMS).map(|v| v.0)
}

fn real_order_product<F: Fn(usize) -> (f64, f64)>(factors: F, q: f64, tol: f64, max_terms: usize, what: &dyn Fn() -> String) -> QResult<(f64, f64)> {
    let mut prod = 1.0;
    for k in 0..max_terms {
        let (num, den) = factors(k);
        if num.abs() < tol && den.abs() < tol {
            return Ok((prod, 2.0 * (num.abs() + den.abs()) / (1.0 - q)));
        }
        let d = 1.0 - den;
        if d.abs() < 1e-14 {
            return Err(QError::Pole(what()));
        }
        prod *= (1.0 - num) / d;
    }
    Err(QError::NonConvergence { what: what(), max_terms })
}

/// `(a;q)_α = (a;q)_∞ / (a q^α;q)_∞` with the tail bound.
pub fn qpoch_real_bounded(a: f64, q: f64, alpha: f64, tol: f64, max_terms: usize) -> QResult<(f64, f64)> {
    check_base(q)?;
    let shift = q.powf(alpha);
    real_order_product(
        |k| {
            let qk = q.powi(k as i32);
            (a * qk, a * shift * qk)
        },
        q,
        tol,
        max_terms,
        &|| format!("({a};{q})_{alpha}"),
    )
}

/// `(a;q)_α` for real `α`.
pub fn qpoch_real(a: f64, q: f64, alpha: f64) -> QResult<f64> {
    qpoch_real_bounded(a, q, alpha, SERIES_TOL, MAX_TERMS).map(|v| v.0)
}

/// `(q^e;q)_α` with every factor formed as `q^(e+k)`, so a lattice argument
/// `e = -m` yields an exact zero factor instead of round-off.
pub fn qpoch_pow(q: f64, e: f64, alpha: f64) -> QResult<f64> {
    check_base(q)?;
    real_order_product(
        |k| {
            let s = e + k as f64;
            (q.powf(s), q.powf(s + alpha))
        },
        q,
        SERIES_TOL,
        MAX_TERMS,
        &|| format!("(q^{e};q)_{alpha}"),
    )
    .map(|v| v.0)
}

/// Dispatch over the three kinds of order.
pub fn qpochhammer(a: f64, q: f64, order: PochOrder) -> QResult<f64> {
    check_base(q)?;
    match order {
        PochOrder::Finite(n) => Ok(qpoch_finite(a, q, n)),
        PochOrder::Infinite => qpoch_inf(a, q),
        PochOrder::Real(alpha) => qpoch_real(a, q, alpha),
    }
}

/// `Γ_q(z) = (q;q)_∞ / (q^z;q)_∞ · (1-q)^(1-z)`.
pub fn qgamma(z: f64, q: f64) -> QResult<f64> {
    check_base(q)?;
    if z <= 0.0 && z == z.round() {
        return Err(QError::Pole(format!("Gamma_q pole at z = {z}")));
    }
    // (q;q)_inf/(q^z;q)_inf = (q;q)_{z-1}
    let ratio = qpoch_pow(q, 1.0, z - 1.0)?;
    Ok(ratio * (1.0 - q).powf(1.0 - z))
}

/// q-bracket `[α over k]_q`.
pub fn qbracket(alpha: f64, k: u32, q: f64) -> f64 {
    let mut num = 1.0;
    for j in 0..k {
        num *= 1.0 - q.powf(alpha - j as f64);
    }
    num / qpoch_finite(q, q, k)
}

fn check_order(nu: f64) -> QResult<()> {
    if nu > -1.0 {
        Ok(())
    } else {
        Err(QError::Domain(format!("q-Bessel order must exceed -1, got {nu}")))
    }
}

/// Direct power series; well conditioned while `qb z^2 <= 1`.
fn bessel_direct(nu: f64, z: f64, p: f64) -> QResult<f64> {
    if z == 0.0 {
        return match nu {
            0.0 => Ok(1.0),
            n if n > 0.0 => Ok(0.0),
            _ => Err(QError::Domain("J_nu(0) is unbounded for nu < 0".into())),
        };
    }
    let pref = qpoch_inf(p.powf(nu + 1.0), p)? / qpoch_inf(p, p)?;
    let z2 = z * z;
    let mut term = 1.0;
    let mut sum = 1.0;
    let mut pn = 1.0;
    for n in 1..MAX_TERMS {
        pn *= p;
        term *= -pn * z2 / ((1.0 - pn) * (1.0 - pn * p.powf(nu)));
        sum += term;
        if term.abs() <= 1e-18 * sum.abs() && pn * z2 < 0.5 {
            return Ok(pref * z.powf(nu) * sum);
        }
        if n > 4 && term == 0.0 {
            return Ok(pref * z.powf(nu) * sum);
        }
    }
    Err(QError::NonConvergence { what: format!("J_{nu}({z})"), max_terms: MAX_TERMS })
}

fn qpn(p: f64, n: usize) -> f64 {
    qpoch_finite(p, p, n as u32)
}

/// Symmetric expansion at the lattice point `z^2 = qb^(-m)`, `m >= 1`;
/// every retained term is well conditioned.
fn bessel_lattice_neg(nu: f64, m: i64, p: f64) -> QResult<f64> {
    let mf = m as f64;
    let logp = p.ln();
    let log_lead = -0.5 * mf * nu * logp + (mf * (mf - 1.0) / 2.0 + (nu + 1.0) * mf) * logp - qpn(p, m as usize).ln();
    let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
    let mut r = 1.0;
    let mut sum = 1.0;
    let pnu1 = p.powf(nu + 1.0);
    for j in 1..MAX_TERMS {
        let n = m + j as i64;
        let pj = p.powi(j as i32);
        r *= -p.powi((n - 1) as i32) * pnu1 / ((1.0 - p.powi(n as i32)) * (1.0 - pj));
        sum += r;
        if r.abs() <= 1e-18 * sum.abs() {
            return Ok(sign * log_lead.exp() * sum);
        }
    }
    Err(QError::NonConvergence { what: format!("J_{nu} at lattice exponent -{m}"), max_terms: MAX_TERMS })
}

/// Symmetric expansion for off-lattice `qb z^2 > 1`, summed in scaled form.
fn bessel_symmetric(nu: f64, z: f64, p: f64) -> QResult<f64> {
    let z2 = z * z;
    // log|(p^(n+1) z^2; p)_inf| and its sign for n = 0
    let mut log_mag = 0.0;
    let mut sgn = 1.0;
    let mut x = p * z2;
    let mut k = 0;
    while x.abs() >= 1e-18 {
        let f = 1.0 - x;
        if f == 0.0 {
            return Err(QError::Domain("symmetric Bessel expansion hit a lattice zero".into()));
        }
        log_mag += f.abs().ln();
        if f < 0.0 {
            sgn = -sgn;
        }
        x *= p;
        k += 1;
        if k > MAX_TERMS {
            return Err(QError::NonConvergence { what: format!("J_{nu}({z})"), max_terms: MAX_TERMS });
        }
    }
    let pnu1 = p.powf(nu + 1.0);
    let mut logs = vec![(log_mag, sgn)];
    let (mut lm, mut sg) = (log_mag, sgn);
    for n in 1..MAX_TERMS {
        let pn = p.powi(n as i32);
        let f = 1.0 - pn * z2;
        let ratio = -p.powi(n as i32 - 1) * pnu1 / ((1.0 - pn) * f);
        lm += ratio.abs().ln();
        if ratio < 0.0 {
            sg = -sg;
        }
        logs.push((lm, sg));
        if pn * z2 < 1e-3 && lm < logs.iter().map(|v| v.0).fold(f64::MIN, f64::max) - 42.0 {
            break;
        }
        if n + 1 == MAX_TERMS {
            return Err(QError::NonConvergence { what: format!("J_{nu}({z})"), max_terms: MAX_TERMS });
        }
    }
    let top = logs.iter().map(|v| v.0).fold(f64::MIN, f64::max);
    let sum: f64 = logs.iter().map(|(l, s)| s * (l - top).exp()).sum();
    let lead = top + nu * z.ln() - qpoch_inf(p, p)?.ln();
    Ok(sum * lead.exp())
}

/// Third Jackson q-Bessel function `J_ν(z; qb)` for real `ν > -1`, `z >= 0`.
pub fn qbessel3(nu: f64, z: f64, qb: f64) -> QResult<f64> {
    check_base(qb)?;
    check_order(nu)?;
    if z < 0.0 {
        return Err(QError::Domain(format!("q-Bessel argument must be nonnegative, got {z}")));
    }
    if z == 0.0 || qb * z * z <= 1.0 {
        return bessel_direct(nu, z, qb);
    }
    let e = (z * z).ln() / qb.ln();
    if (e - e.round()).abs() < 1e-11 {
        return bessel_lattice_neg(nu, -(e.round() as i64), qb);
    }
    bessel_symmetric(nu, z, qb)
}

/// `J_ν(q^k; q^2)` addressed by lattice exponent.
pub fn qbessel3_lattice(nu: f64, k: i64, q: f64) -> QResult<f64> {
    check_base(q)?;
    check_order(nu)?;
    let p = q * q;
    if k >= 0 {
        bessel_direct(nu, q.powi(k as i32), p)
    } else {
        bessel_lattice_neg(nu, -k, p)
    }
}

/// Right side of the growth bound for `|J_ν(q^n; q^2)|`.
pub fn bessel_bound(nu: f64, n: i64, q: f64) -> QResult<f64> {
    let p = q * q;
    let c = qpoch_inf(-p, p)? * qpoch_inf(-p.powf(nu + 1.0), p)? / qpoch_inf(p, p)?;
    let nf = n as f64;
    Ok(if n >= 0 { c * q.powf(nf * nu) } else { c * q.powf(nf * nf - (nu + 1.0) * nf) })
}

/// Cached `J_ν(q^k; q^2)` for `k` in a closed exponent range.
#[derive(Debug, Clone)]
pub struct BesselTable {
    pub nu: f64,
    pub q: f64,
    k_min: i64,
    vals: Vec<f64>,
}

impl BesselTable {
    pub fn new(nu: f64, q: f64, k_min: i64, k_max: i64) -> QResult<Self> {
        use rayon::prelude::*;
        let vals = (k_min..=k_max)
            .into_par_iter()
            .map(|k| qbessel3_lattice(nu, k, q))
            .collect::<QResult<Vec<_>>>()?;
        Ok(Self { nu, q, k_min, vals })
    }

    pub fn k_range(&self) -> (i64, i64) {
        (self.k_min, self.k_min + self.vals.len() as i64 - 1)
    }

    /// Cached value, falling back to direct evaluation outside the range.
    pub fn get(&self, k: i64) -> f64 {
        let idx = k - self.k_min;
        if idx >= 0 && (idx as usize) < self.vals.len() {
            self.vals[idx as usize]
        } else {
            qbessel3_lattice(self.nu, k, self.q).unwrap_or(0.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TrigKind {
    Cos,
    Sin,
}

/// `cos(z;q)` and `sin(z;q)` through `J_{∓1/2}(·; q^2)`.
pub fn qtrig(kind: TrigKind, z: f64, q: f64) -> QResult<f64> {
    check_base(q)?;
    if z < 0.0 {
        return Err(QError::Domain("q-trigonometric argument must be nonnegative".into()));
    }
    let p = q * q;
    let c = qpoch_inf(p, p)? / qpoch_inf(q, p)?;
    match kind {
        TrigKind::Cos => {
            let arg = z * (1.0 - q) / q.sqrt();
            if arg == 0.0 {
                // (arg)^{1/2} J_{-1/2}(arg) -> (q;q^2)_inf/(q^2;q^2)_inf
                return Ok(c * qpoch_inf(q, p)? / qpoch_inf(p, p)?);
            }
            Ok(c * arg.sqrt() * qbessel3(-0.5, arg, p)?)
        }
        TrigKind::Sin => {
            let arg = z * (1.0 - q);
            Ok(c * arg.sqrt() * qbessel3(0.5, arg, p)?)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finite_products() {
        assert_eq!(qpoch_finite(0.0, 0.5, 7), 1.0);
        assert!((qpoch_finite(0.5, 0.5, 2) - 0.375).abs() < 1e-16);
    }

    #[test]
    fn gamma_normalisation() {
        for q in [0.3, 0.5, 0.7] {
            assert!((qgamma(1.0, q).unwrap() - 1.0).abs() < 1e-14);
            assert!((qgamma(2.0, q).unwrap() - 1.0).abs() < 1e-14);
        }
        assert!(matches!(qgamma(-2.0, 0.5), Err(QError::Pole(_))));
    }

    #[test]
    fn bracket_vanishes_past_integer() {
        assert_eq!(qbracket(3.0, 5, 0.5), 0.0);
        assert_eq!(qbracket(0.7, 0, 0.5), 1.0);
    }

    #[test]
    fn bessel_zero_argument() {
        assert!((qbessel3(0.0, 0.0, 0.25).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn lattice_and_general_agree() {
        let q: f64 = 0.5;
        for k in [-6i64, -3, -1, 0, 2, 7] {
            let a = qbessel3_lattice(1.5, k, q).unwrap();
            let b = qbessel3(1.5, q.powi(k as i32), q * q).unwrap();
            assert!((a - b).abs() <= 1e-13 * a.abs().max(1e-300), "k={k}: {a} vs {b}");
        }
    }

    #[test]
    fn sin_vanishes_at_origin() {
        assert_eq!(qtrig(TrigKind::Sin, 0.0, 0.5).unwrap(), 0.0);
    }
}
