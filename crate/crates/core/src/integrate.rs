//! Shared ODE integration: adaptive Dormand–Prince 5(4) and fixed-step RK4.
//!
//! Every routine in this crate that evolves a state goes through
//! [`integrate`], which reports the solution exactly at the requested
//! output times and restarts at discontinuities of ω(t).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    /// Embedded Dormand–Prince 5(4) pair with error-per-step control.
    #[default]
    Adaptive,
    /// Classical fourth-order Runge–Kutta with step `fixed_step`.
    FixedRk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, bound(deserialize = "T: Scalar + Deserialize<'de>"))]
pub struct IntegratorConfig<T> {
    pub method: Method,
    pub abs_tol: T,
    pub rel_tol: T,
    /// Largest step the adaptive method may take; `null` means unbounded.
    #[serde(deserialize_with = "unbounded_if_null")]
    pub max_step: T,
    pub fixed_step: T,
    /// Accepted plus rejected steps before giving up.
    pub max_steps: usize,
}

fn unbounded_if_null<'de, D, T>(d: D) -> std::result::Result<T, D::Error>
where
    D: serde::Deserializer<'de>,
    T: Scalar + Deserialize<'de>,
{
    Ok(Option::<T>::deserialize(d)?.unwrap_or_else(T::infinity))
}

impl<T: Scalar> Default for IntegratorConfig<T> {
    fn default() -> Self {
        IntegratorConfig {
            method: Method::Adaptive,
            abs_tol: T::lit(1e-10),
            rel_tol: T::lit(1e-10),
            max_step: T::infinity(),
            fixed_step: T::lit(1e-3),
            max_steps: 10_000_000,
        }
    }
}

impl<T: Scalar> IntegratorConfig<T> {
    pub fn adaptive(tol: T) -> Self {
        IntegratorConfig { abs_tol: tol, rel_tol: tol, ..Default::default() }
    }

    pub fn fixed(step: T) -> Self {
        IntegratorConfig { method: Method::FixedRk4, fixed_step: step, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let pos = |v: T| v > T::zero();
        match self.method {
            Method::Adaptive if !(pos(self.abs_tol) && pos(self.rel_tol)) => {
                Err(Error::InvalidConfig("tolerances must be positive".into()))
            }
            Method::FixedRk4 if !(pos(self.fixed_step) && self.fixed_step.is_finite()) => {
                Err(Error::InvalidConfig("fixed_step must be positive".into()))
            }
            _ if !pos(self.max_step) => Err(Error::InvalidConfig("max_step must be positive".into())),
            _ => Ok(()),
        }
    }
}

pub(crate) fn check_grid<T: Scalar>(t_grid: &[T]) -> Result<()> {
    if t_grid.is_empty() {
        return Err(Error::InvalidConfig("empty time grid".into()));
    }
    if t_grid.iter().any(|t| !t.is_finite()) || t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidConfig("time grid must be finite and strictly increasing".into()));
    }
    Ok(())
}

#[inline]
fn axpy<T: Scalar, const N: usize>(y: &[T; N], h: T, terms: &[(T, &[T; N])]) -> [T; N] {
    let mut out = *y;
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = T::zero();
        for (c, k) in terms {
            acc = acc + *c * k[i];
        }
        *o = *o + h * acc;
    }
    out
}

// Dormand–Prince 5(4) tableau.
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
// b - b*, the coefficients of the embedded error estimate.
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

struct Dopri<T, const N: usize> {
    a: [[T; 5]; 5],
    c: [T; 4],
    b: [T; 5],
    e: [T; 6],
}

impl<T: Scalar, const N: usize> Dopri<T, N> {
    fn new() -> Self {
        let l = T::lit;
        Dopri {
            a: [
                [l(A21), T::zero(), T::zero(), T::zero(), T::zero()],
                [l(A31), l(A32), T::zero(), T::zero(), T::zero()],
                [l(A41), l(A42), l(A43), T::zero(), T::zero()],
                [l(A51), l(A52), l(A53), l(A54), T::zero()],
                [l(A61), l(A62), l(A63), l(A64), l(A65)],
            ],
            c: [l(C2), l(C3), l(C4), l(C5)],
            b: [l(B1), l(B3), l(B4), l(B5), l(B6)],
            e: [l(E1), l(E3), l(E4), l(E5), l(E6), l(E7)],
        }
    }

    /// One trial step; returns the 5th-order solution, its derivative (FSAL)
    /// and the scaled error norm.
    fn step<F>(&self, f: &F, t: T, y: &[T; N], k1: &[T; N], h: T, cfg: &IntegratorConfig<T>) -> ([T; N], [T; N], T)
    where
        F: Fn(T, &[T; N]) -> [T; N],
    {
        let a = &self.a;
        let k2 = f(t + self.c[0] * h, &axpy(y, h, &[(a[0][0], k1)]));
        let k3 = f(t + self.c[1] * h, &axpy(y, h, &[(a[1][0], k1), (a[1][1], &k2)]));
        let k4 = f(t + self.c[2] * h, &axpy(y, h, &[(a[2][0], k1), (a[2][1], &k2), (a[2][2], &k3)]));
        let k5 = f(t + self.c[3] * h, &axpy(y, h, &[(a[3][0], k1), (a[3][1], &k2), (a[3][2], &k3), (a[3][3], &k4)]));
        let k6 =
            f(t + h, &axpy(y, h, &[(a[4][0], k1), (a[4][1], &k2), (a[4][2], &k3), (a[4][3], &k4), (a[4][4], &k5)]));
        let b = &self.b;
        let y_new = axpy(y, h, &[(b[0], k1), (b[1], &k3), (b[2], &k4), (b[3], &k5), (b[4], &k6)]);
        let k7 = f(t + h, &y_new);
        let e = &self.e;
        let mut sum = T::zero();
        for i in 0..N {
            let err = h * (e[0] * k1[i] + e[1] * k3[i] + e[2] * k4[i] + e[3] * k5[i] + e[4] * k6[i] + e[5] * k7[i]);
            let sc = cfg.abs_tol + cfg.rel_tol * y[i].abs().max(y_new[i].abs());
            let r = err / sc;
            sum = sum + r * r;
        }
        let norm = (sum / T::from_usize(N.max(1)).unwrap()).sqrt();
        (y_new, k7, norm)
    }
}

fn rk4_step<T: Scalar, const N: usize, F>(f: &F, t: T, y: &[T; N], h: T) -> [T; N]
where
    F: Fn(T, &[T; N]) -> [T; N],
{
    let half = T::lit(0.5);
    let k1 = f(t, y);
    let k2 = f(t + half * h, &axpy(y, half * h, &[(T::one(), &k1)]));
    let k3 = f(t + half * h, &axpy(y, half * h, &[(T::one(), &k2)]));
    let k4 = f(t + h, &axpy(y, h, &[(T::one(), &k3)]));
    let sixth = T::one() / T::lit(6.0);
    let third = T::one() / T::lit(3.0);
    axpy(y, h, &[(sixth, &k1), (third, &k2), (third, &k3), (sixth, &k4)])
}

/// Integrates `y' = f(t, y)` from `(t_grid[0], y0)` and returns the state at
/// every entry of `t_grid`.
///
/// `breakpoints` are times where `f` is discontinuous; steps never straddle
/// them. `guard` sees every accepted state and may abort the integration.
pub fn integrate<T, const N: usize, F, G>(
    f: F,
    y0: [T; N],
    t_grid: &[T],
    breakpoints: &[T],
    cfg: &IntegratorConfig<T>,
    mut guard: G,
) -> Result<Vec<[T; N]>>
where
    T: Scalar,
    F: Fn(T, &[T; N]) -> [T; N],
    G: FnMut(T, &[T; N]) -> Result<()>,
{
    cfg.validate()?;
    check_grid(t_grid)?;
    guard(t_grid[0], &y0)?;

    // Merge output times and breakpoints into one ordered stop list.
    let t0 = t_grid[0];
    let t_end = t_grid[t_grid.len() - 1];
    let mut stops: Vec<(T, Option<usize>)> = t_grid.iter().enumerate().skip(1).map(|(i, &t)| (t, Some(i))).collect();
    stops.extend(breakpoints.iter().filter(|&&b| b > t0 && b < t_end).map(|&b| (b, None)));
    stops.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());

    // Stage times of a step ending on a breakpoint are clamped just below it,
    // so right-continuous profiles are sampled on the correct side.
    let is_break = |stop: T| breakpoints.contains(&stop);
    let limit = |stop: T| {
        if is_break(stop) {
            stop - stop.abs().max(T::min_positive_value()) * T::epsilon()
        } else {
            T::infinity()
        }
    };

    let mut out = Vec::with_capacity(t_grid.len());
    out.push(y0);
    let mut t = t0;
    let mut y = y0;
    let mut steps = 0usize;

    match cfg.method {
        Method::FixedRk4 => {
            for &(stop, idx) in &stops {
                let span = stop - t;
                if span > T::zero() {
                    let lim = limit(stop);
                    let f = |ts: T, y: &[T; N]| f(ts.min(lim), y);
                    let n = (span / cfg.fixed_step).ceil().max(T::one());
                    let h = span / n;
                    let n = n.to_usize().unwrap_or(usize::MAX);
                    for k in 0..n {
                        let tk = t + h * T::from_usize(k).unwrap();
                        y = rk4_step(&f, tk, &y, h);
                        steps += 1;
                        if steps > cfg.max_steps {
                            return Err(Error::StepSizeUnderflow { t: tk.as_f64() });
                        }
                        let t_next = if k + 1 == n { stop } else { tk + h };
                        guard(t_next, &y)?;
                    }
                    t = stop;
                }
                if idx.is_some() {
                    out.push(y);
                }
            }
        }
        Method::Adaptive => {
            let tab = Dopri::<T, N>::new();
            let mut k1 = f(t, &y);
            let mut h = initial_step(&f, t, &y, &k1, cfg).min(cfg.max_step);
            let tiny = T::epsilon() * T::lit(16.0);
            for &(stop, idx) in &stops {
                let lim = limit(stop);
                let fc = |ts: T, y: &[T; N]| f(ts.min(lim), y);
                while t < stop {
                    let remaining = stop - t;
                    let last = h >= remaining * (T::one() - tiny);
                    let h_try = if last { remaining } else { h };
                    if h_try <= tiny * t.abs().max(T::one()) {
                        return Err(Error::StepSizeUnderflow { t: t.as_f64() });
                    }
                    let (y_new, k_new, err) = tab.step(&fc, t, &y, &k1, h_try, cfg);
                    steps += 1;
                    if steps > cfg.max_steps {
                        return Err(Error::StepSizeUnderflow { t: t.as_f64() });
                    }
                    let err_ok = err.is_finite() && y_new.iter().all(|v| v.is_finite());
                    let factor = if !err_ok {
                        T::lit(0.1)
                    } else if err == T::zero() {
                        T::lit(5.0)
                    } else {
                        (T::lit(0.9) * err.powf(T::lit(-0.2))).max(T::lit(0.2)).min(T::lit(5.0))
                    };
                    if err_ok && err <= T::one() {
                        t = if last { stop } else { t + h_try };
                        y = y_new;
                        k1 = k_new;
                        guard(t, &y)?;
                        // A step shortened to land on `stop` says nothing about
                        // the next one; only grow from the proposed size.
                        let base = if last { h.max(h_try) } else { h_try };
                        h = (base * factor).min(cfg.max_step);
                    } else {
                        h = h_try * factor.min(T::one());
                    }
                }
                if idx.is_some() {
                    out.push(y);
                }
                // ω may jump here; the stored derivative is stale.
                if idx.is_none() {
                    k1 = f(t, &y);
                }
            }
        }
    }
    Ok(out)
}

/// Starting step from the Hairer–Wanner heuristic.
fn initial_step<T, const N: usize, F>(f: &F, t: T, y: &[T; N], k1: &[T; N], cfg: &IntegratorConfig<T>) -> T
where
    T: Scalar,
    F: Fn(T, &[T; N]) -> [T; N],
{
    let n = T::from_usize(N.max(1)).unwrap();
    let scale = |i: usize| cfg.abs_tol + cfg.rel_tol * y[i].abs();
    let d0 = ((0..N).map(|i| (y[i] / scale(i)).powi(2)).fold(T::zero(), |a, b| a + b) / n).sqrt();
    let d1 = ((0..N).map(|i| (k1[i] / scale(i)).powi(2)).fold(T::zero(), |a, b| a + b) / n).sqrt();
    let small = T::lit(1e-5);
    let h0 = if d0 < small || d1 < small { T::lit(1e-6) } else { T::lit(0.01) * d0 / d1 };
    let y1 = axpy(y, h0, &[(T::one(), k1)]);
    let k2 = f(t + h0, &y1);
    let d2 = ((0..N).map(|i| ((k2[i] - k1[i]) / scale(i)).powi(2)).fold(T::zero(), |a, b| a + b) / n).sqrt() / h0;
    let dm = d1.max(d2);
    let h1 =
        if dm <= T::lit(1e-15) { (h0 * T::lit(1e-3)).max(T::lit(1e-6)) } else { (T::lit(0.01) / dm).powf(T::lit(0.2)) };
    (T::lit(100.0) * h0).min(h1)
}
