//! Geometric lattices `{t q^k}`, lattice functions and Jackson q-integration.
//!
//! Points are addressed by their integer exponent `k`; a floating value is
//! only mapped back to an exponent at the API boundary, where a mismatch is a
//! domain error.

use std::fmt;
use std::sync::Arc;

use crate::error::{QError, QResult};

/// Relative threshold for stopping a Jackson sum past the window.
pub const TERM_TOL: f64 = 1e-15;
/// Consecutive non-decreasing terms that flag a divergent tail.
pub const GUARD_BLOCK: usize = 16;
/// Window cap applied by [`QLattice::default_window`].
pub const WINDOW_CAP: usize = 400;
/// Extra terms a callable integrand may use beyond the window.
const EXTRA_CAP: usize = 4000;

/// The lattice `t q^k`, `k` in `[-n_neg, n_pos]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QLattice {
    pub q: f64,
    pub t: f64,
    pub n_neg: usize,
    pub n_pos: usize,
}

impl QLattice {
    pub fn new(q: f64, t: f64, n_neg: usize, n_pos: usize) -> QResult<Self> {
        if !(q > 0.0 && q < 1.0) {
            return Err(QError::Domain(format!("q must lie in (0,1), got {q}")));
        }
        if !(t > 0.0 && t.is_finite()) {
            return Err(QError::Domain(format!("lattice scale must be positive, got {t}")));
        }
        Ok(Self { q, t, n_neg, n_pos })
    }

    /// `ceil(log(eps)/log(q))` on both sides, capped at [`WINDOW_CAP`].
    pub fn default_window(q: f64, t: f64) -> QResult<Self> {
        let n = ((f64::EPSILON.ln() / q.ln()).ceil() as usize).min(WINDOW_CAP);
        Self::new(q, t, n, n)
    }

    pub fn point(&self, k: i64) -> f64 {
        self.t * self.q.powi(k as i32)
    }

    pub fn k_min(&self) -> i64 {
        -(self.n_neg as i64)
    }

    pub fn k_max(&self) -> i64 {
        self.n_pos as i64
    }

    pub fn in_window(&self, k: i64) -> bool {
        k >= self.k_min() && k <= self.k_max()
    }

    /// Exponents of the bounded slice `A` (k >= 0) inside the window.
    pub fn a_exponents(&self) -> impl Iterator<Item = i64> {
        0..=self.k_max()
    }

    /// Exponents of the unbounded slice `B` (k < 0) inside the window.
    pub fn b_exponents(&self) -> impl Iterator<Item = i64> {
        self.k_min()..0
    }

    /// All exponents, largest point first.
    pub fn exponents(&self) -> impl Iterator<Item = i64> {
        self.k_min()..=self.k_max()
    }

    /// Exponent of `x`, or a domain error if `x` is not a lattice point.
    pub fn exponent_of(&self, x: f64) -> QResult<i64> {
        exponent_on(self.q, self.t, x)
    }
}

pub(crate) fn exponent_on(q: f64, t: f64, x: f64) -> QResult<i64> {
    if !(x > 0.0) {
        return Err(QError::Domain(format!("{x} is not a positive lattice point")));
    }
    let e = (x / t).ln() / q.ln();
    let k = e.round();
    if (e - k).abs() > 1e-9 {
        return Err(QError::Domain(format!("{x} is not on the lattice {t}*{q}^k")));
    }
    Ok(k as i64)
}

/// Decay declared for a lattice function; drives tail estimates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decay {
    None,
    Power,
    SuperGeometric,
}

type Callable = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

#[derive(Clone)]
enum Samples {
    Callable(Callable),
    Table { q: f64, t: f64, k_min: i64, values: Vec<f64> },
}

/// A function sampled on, or evaluable at, the points of a q-lattice.
#[derive(Clone)]
pub struct LatticeFunction {
    samples: Samples,
    pub decay: Decay,
}

impl fmt::Debug for LatticeFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.samples {
            Samples::Callable(_) => write!(f, "LatticeFunction::Callable({:?})", self.decay),
            Samples::Table { k_min, values, .. } => {
                write!(f, "LatticeFunction::Table(k={}..{}, {:?})", k_min, k_min + values.len() as i64 - 1, self.decay)
            }
        }
    }
}

impl LatticeFunction {
    pub fn from_fn<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F, decay: Decay) -> Self {
        Self { samples: Samples::Callable(Arc::new(f)), decay }
    }

    pub fn zero() -> Self {
        Self::from_fn(|_| 0.0, Decay::SuperGeometric)
    }

    /// Table of values at exponents `k_min, k_min+1, ...` of `lat`.
    pub fn from_table(lat: &QLattice, k_min: i64, values: Vec<f64>, decay: Decay) -> QResult<Self> {
        if let Some(v) = values.iter().find(|v| !v.is_finite()) {
            return Err(QError::Domain(format!("non-finite table value {v}")));
        }
        Ok(Self { samples: Samples::Table { q: lat.q, t: lat.t, k_min, values }, decay })
    }

    pub fn is_table(&self) -> bool {
        matches!(self.samples, Samples::Table { .. })
    }

    /// Exponent range of a table, `None` for callables.
    pub fn table_range(&self) -> Option<(i64, i64)> {
        match &self.samples {
            Samples::Table { k_min, values, .. } => Some((*k_min, k_min + values.len() as i64 - 1)),
            Samples::Callable(_) => None,
        }
    }

    /// Value at the point `x`.
    pub fn eval(&self, x: f64) -> QResult<f64> {
        match &self.samples {
            Samples::Callable(f) => Ok(f(x)),
            Samples::Table { q, t, k_min, values } => {
                let k = exponent_on(*q, *t, x)?;
                lookup(values, *k_min, k)
                    .ok_or_else(|| QError::Window(format!("table has no value at {x} (exponent {k})")))
            }
        }
    }

    /// Value at the lattice point `t q^k` of `lat`.
    pub fn eval_exp(&self, lat: &QLattice, k: i64) -> QResult<f64> {
        match &self.samples {
            Samples::Callable(f) => Ok(f(lat.point(k))),
            Samples::Table { q, t, k_min, values } => {
                let shift = if *q == lat.q && *t == lat.t { 0 } else { exponent_on(*q, *t, lat.t)? };
                if *q != lat.q {
                    return Err(QError::Domain("table and lattice use different bases".into()));
                }
                lookup(values, *k_min, k + shift)
                    .ok_or_else(|| QError::Window(format!("table has no value at exponent {k}")))
            }
        }
    }
}

fn lookup(values: &[f64], k_min: i64, k: i64) -> Option<f64> {
    let i = k - k_min;
    if i >= 0 && (i as usize) < values.len() {
        Some(values[i as usize])
    } else {
        None
    }
}

/// Range of a Jackson integral.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JacksonMode {
    ZeroToX,
    XToInf,
    ZeroToInf,
}

/// Jackson sum with its truncation-error estimate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub err_est: f64,
}

/// Jackson q-integral of `f` over the lattice of `lat`.
pub fn jackson_integral(f: &LatticeFunction, mode: JacksonMode, x: Option<f64>, lat: &QLattice) -> QResult<f64> {
    jackson_integral_est(f, mode, x, lat).map(|i| i.value)
}

/// As [`jackson_integral`], also returning the tail estimate.
pub fn jackson_integral_est(f: &LatticeFunction, mode: JacksonMode, x: Option<f64>, lat: &QLattice) -> QResult<Integral> {
    let q = lat.q;
    match mode {
        JacksonMode::ZeroToX => {
            let k0 = lat.exponent_of(x.ok_or_else(|| QError::Domain("upper limit required".into()))?)?;
            let head = walk(f, lat, k0, 1, lat.k_max())?;
            Ok(finish(head, q, true))
        }
        JacksonMode::XToInf => {
            let k0 = lat.exponent_of(x.ok_or_else(|| QError::Domain("lower limit required".into()))?)?;
            require_decay(f)?;
            let tail = walk(f, lat, k0 - 1, -1, lat.k_min())?;
            Ok(finish(tail, q, false))
        }
        JacksonMode::ZeroToInf => {
            require_decay(f)?;
            let mut terms = walk(f, lat, -1, -1, lat.k_min())?;
            let head = walk(f, lat, 0, 1, lat.k_max())?;
            terms.reverse();
            terms.extend(head);
            // stored largest point first; tail estimate from both ends
            let err = tail_estimate(&terms, q) + tail_estimate(&terms.iter().rev().cloned().collect::<Vec<_>>(), q);
            let value = sum_smallest_first(&terms);
            Ok(Integral { value, err_est: err })
        }
    }
}

fn require_decay(f: &LatticeFunction) -> QResult<()> {
    if f.decay == Decay::None && !f.is_table() {
        return Err(QError::Divergence("improper range needs a decay tag other than none".into()));
    }
    Ok(())
}

/// Terms `t_k = x_k (1-q) f(x_k)` walking from `k0` in direction `dir`,
/// through the window end `k_end` and onward until the relative tolerance
/// is met. Returned in walk order.
fn walk(f: &LatticeFunction, lat: &QLattice, k0: i64, dir: i64, k_end: i64) -> QResult<Vec<f64>> {
    let mut terms = Vec::new();
    let mut k = k0;
    let mut abs_sum = 0.0;
    let range = f.table_range();
    loop {
        let past_window = (k - k_end) * dir > 0;
        if let Some((lo, hi)) = range {
            if k < lo || k > hi {
                break;
            }
        }
        let xk = lat.point(k);
        let term = xk * (1.0 - lat.q) * f.eval_exp(lat, k)?;
        if !term.is_finite() {
            return Err(QError::Divergence(format!("non-finite integrand at exponent {k}")));
        }
        if past_window && term.abs() <= TERM_TOL * abs_sum {
            break;
        }
        abs_sum += term.abs();
        terms.push(term);
        if past_window && terms.len() > EXTRA_CAP + (k_end - k0).unsigned_abs() as usize {
            break;
        }
        k += dir;
    }
    guard(&terms)?;
    Ok(terms)
}

fn guard(terms: &[f64]) -> QResult<()> {
    if terms.len() <= GUARD_BLOCK {
        return Ok(());
    }
    let tail = &terms[terms.len() - GUARD_BLOCK - 1..];
    let rising = tail.windows(2).all(|w| w[1].abs() >= w[0].abs() && w[1] != 0.0);
    if rising {
        return Err(QError::Divergence("terms did not decrease over the guard block".into()));
    }
    Ok(())
}

fn tail_estimate(terms: &[f64], q: f64) -> f64 {
    match terms.last() {
        Some(t) => t.abs() * q / (1.0 - q),
        None => 0.0,
    }
}

/// `largest_first` tells whether the walk visited points in decreasing order.
fn finish(terms: Vec<f64>, q: f64, largest_first: bool) -> Integral {
    let err_est = tail_estimate(&terms, q);
    let value = if largest_first { sum_smallest_first(&terms) } else { terms.iter().fold(0.0, |s, t| s + t) };
    Integral { value, err_est }
}

/// Terms stored largest point first; summed smallest point first.
fn sum_smallest_first(terms: &[f64]) -> f64 {
    terms.iter().rev().fold(0.0, |s, t| s + t)
}

/// `D_q f(x) = (f(x) - f(qx)) / (x (1-q))`; at `x = 0` the limit of the
/// difference quotients along `x0 q^k` for `x0 = 1`.
pub fn q_derivative(f: &LatticeFunction, x: f64, q: f64) -> QResult<f64> {
    if !(q > 0.0 && q < 1.0) {
        return Err(QError::Domain(format!("q must lie in (0,1), got {q}")));
    }
    if x != 0.0 {
        return Ok((f.eval(x)? - f.eval(q * x)?) / (x * (1.0 - q)));
    }
    let mut prev: Option<f64> = None;
    let mut xk: f64 = 1.0;
    for _ in 0..200 {
        let d = (f.eval(xk)? - f.eval(q * xk)?) / (xk * (1.0 - q));
        if let Some(p) = prev {
            if (d - p).abs() <= 1e-12 * d.abs().max(1.0) {
                return Ok(d);
            }
        }
        prev = Some(d);
        xk *= q;
        if xk < 1e-250 {
            break;
        }
    }
    Err(QError::NoLimit("difference quotients at 0 fail the Cauchy test".into()))
}

/// Direction of a base change.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rebase {
    ToQ2,
    FromQ2,
}

/// Transport `f` between the lattices `(q,t)` and `(q^2,t^2)`:
/// `ToQ2` gives `F(s) = f(sqrt s)`, `FromQ2` gives `f(x) = F(x^2)`.
/// Returns the transported function and its lattice.
pub fn rebase_q2(f: &LatticeFunction, lat: &QLattice, direction: Rebase) -> QResult<(LatticeFunction, QLattice)> {
    let target = match direction {
        Rebase::ToQ2 => QLattice::new(lat.q * lat.q, lat.t * lat.t, lat.n_neg, lat.n_pos)?,
        Rebase::FromQ2 => QLattice::new(lat.q.sqrt(), lat.t.sqrt(), lat.n_neg, lat.n_pos)?,
    };
    let out = match &f.samples {
        Samples::Table { k_min, values, .. } => LatticeFunction {
            samples: Samples::Table { q: target.q, t: target.t, k_min: *k_min, values: values.clone() },
            decay: f.decay,
        },
        Samples::Callable(g) => {
            let g = g.clone();
            match direction {
                Rebase::ToQ2 => LatticeFunction::from_fn(move |s| g(s.sqrt()), f.decay),
                Rebase::FromQ2 => LatticeFunction::from_fn(move |x| g(x * x), f.decay),
            }
        }
    };
    Ok((out, target))
}

/// Jackson integral directly over exponents: `Σ_{k in ks} x_k (1-q) g(k)`,
/// summed smallest point first. `ks` must be given largest point first.
pub fn jackson_sum<I, G>(q: f64, t: f64, ks: I, g: G) -> f64
where
    I: IntoIterator<Item = i64>,
    G: Fn(i64) -> f64,
{
    let terms: Vec<f64> = ks.into_iter().map(|k| t * q.powi(k as i32) * (1.0 - q) * g(k)).collect();
    sum_smallest_first(&terms)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_head_integral() {
        let lat = QLattice::default_window(0.5, 1.0).unwrap();
        let one = LatticeFunction::from_fn(|_| 1.0, Decay::Power);
        let v = jackson_integral(&one, JacksonMode::ZeroToX, Some(1.0), &lat).unwrap();
        assert!((v - 1.0).abs() < 1e-15);
    }

    #[test]
    fn off_lattice_limit_is_domain_error() {
        let lat = QLattice::default_window(0.5, 1.0).unwrap();
        let one = LatticeFunction::from_fn(|_| 1.0, Decay::Power);
        assert!(matches!(jackson_integral(&one, JacksonMode::ZeroToX, Some(0.3), &lat), Err(QError::Domain(_))));
    }

    #[test]
    fn growing_tail_is_divergent() {
        let lat = QLattice::default_window(0.5, 1.0).unwrap();
        let one = LatticeFunction::from_fn(|_| 1.0, Decay::Power);
        assert!(matches!(jackson_integral(&one, JacksonMode::XToInf, Some(1.0), &lat), Err(QError::Divergence(_))));
    }

    #[test]
    fn table_outside_window_errors() {
        let lat = QLattice::new(0.5, 1.0, 2, 2).unwrap();
        let f = LatticeFunction::from_table(&lat, -2, vec![1.0; 5], Decay::SuperGeometric).unwrap();
        assert!(f.eval(1.0).is_ok());
        assert!(matches!(f.eval(0.125), Err(QError::Window(_))));
    }

    #[test]
    fn constant_derivative_is_zero() {
        let c = LatticeFunction::from_fn(|_| 3.0, Decay::None);
        assert_eq!(q_derivative(&c, 0.7, 0.4).unwrap(), 0.0);
        assert_eq!(q_derivative(&c, 0.0, 0.4).unwrap(), 0.0);
    }
}
