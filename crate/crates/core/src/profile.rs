//! Time-dependent frequency profiles ω(t).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// The oscillator frequency as a function of time.
///
/// `Constant(0)` is free motion. A piecewise-constant profile holds
/// `segments[k].1` on `[segments[k].0, segments[k+1].0)`; times before the
/// first switch use the first value. A sampled profile interpolates
/// linearly between knots and is held constant outside them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FrequencyProfile<T> {
    Constant { omega0: T },
    PiecewiseConstant { segments: Vec<(T, T)> },
    Sampled { times: Vec<T>, values: Vec<T> },
}

impl<T: Scalar> FrequencyProfile<T> {
    pub fn constant(omega0: T) -> Result<Self> {
        let p = FrequencyProfile::Constant { omega0 };
        p.validate()?;
        Ok(p)
    }

    pub fn piecewise(segments: Vec<(T, T)>) -> Result<Self> {
        let p = FrequencyProfile::PiecewiseConstant { segments };
        p.validate()?;
        Ok(p)
    }

    pub fn sampled(times: Vec<T>, values: Vec<T>) -> Result<Self> {
        let p = FrequencyProfile::Sampled { times, values };
        p.validate()?;
        Ok(p)
    }

    /// Checks non-negative frequencies and strictly increasing times.
    pub fn validate(&self) -> Result<()> {
        let check_omega = |w: T| {
            if !(w >= T::zero()) || !w.is_finite() {
                Err(Error::InvalidProfile(format!("frequency {w} must be finite and >= 0")))
            } else {
                Ok(())
            }
        };
        let check_increasing = |ts: &mut dyn Iterator<Item = T>| -> Result<()> {
            let mut prev: Option<T> = None;
            for t in ts {
                if !t.is_finite() {
                    return Err(Error::InvalidProfile(format!("time {t} is not finite")));
                }
                if let Some(p) = prev {
                    if !(t > p) {
                        return Err(Error::InvalidProfile("switch/sample times must be strictly increasing".into()));
                    }
                }
                prev = Some(t);
            }
            Ok(())
        };
        match self {
            FrequencyProfile::Constant { omega0 } => check_omega(*omega0),
            FrequencyProfile::PiecewiseConstant { segments } => {
                if segments.is_empty() {
                    return Err(Error::InvalidProfile("piecewise profile needs a segment".into()));
                }
                segments.iter().try_for_each(|&(_, w)| check_omega(w))?;
                check_increasing(&mut segments.iter().map(|s| s.0))
            }
            FrequencyProfile::Sampled { times, values } => {
                if times.len() != values.len() || times.is_empty() {
                    return Err(Error::InvalidProfile(
                        "sampled profile needs equally many (>0) times and values".into(),
                    ));
                }
                values.iter().try_for_each(|&w| check_omega(w))?;
                check_increasing(&mut times.iter().copied())
            }
        }
    }

    /// ω(t).
    pub fn eval(&self, t: T) -> T {
        match self {
            FrequencyProfile::Constant { omega0 } => *omega0,
            FrequencyProfile::PiecewiseConstant { segments } => {
                let k = segments.partition_point(|s| s.0 <= t);
                segments[k.saturating_sub(1)].1
            }
            FrequencyProfile::Sampled { times, values } => {
                let n = times.len();
                if t <= times[0] {
                    return values[0];
                }
                if t >= times[n - 1] {
                    return values[n - 1];
                }
                let k = times.partition_point(|&s| s <= t);
                let (t0, t1) = (times[k - 1], times[k]);
                if t == t0 {
                    return values[k - 1];
                }
                let w = (t - t0) / (t1 - t0);
                values[k - 1] + w * (values[k] - values[k - 1])
            }
        }
    }

    /// ω²(t).
    #[inline]
    pub fn omega_sq(&self, t: T) -> T {
        let w = self.eval(t);
        w * w
    }

    /// dω/dt away from switch times (zero for constant pieces).
    pub fn derivative(&self, t: T) -> T {
        match self {
            FrequencyProfile::Sampled { times, values } => {
                let n = times.len();
                if n < 2 || t < times[0] || t >= times[n - 1] {
                    return T::zero();
                }
                let k = times.partition_point(|&s| s <= t);
                (values[k] - values[k - 1]) / (times[k] - times[k - 1])
            }
            _ => T::zero(),
        }
    }

    /// Times where ω or its derivative is discontinuous, restricted to `(t0, t1)`.
    pub fn breakpoints(&self, t0: T, t1: T) -> Vec<T> {
        let inside = |t: &T| *t > t0 && *t < t1;
        match self {
            FrequencyProfile::Constant { .. } => Vec::new(),
            FrequencyProfile::PiecewiseConstant { segments } => segments.iter().map(|s| s.0).filter(inside).collect(),
            FrequencyProfile::Sampled { times, .. } => times.iter().copied().filter(inside).collect(),
        }
    }

    pub fn as_constant(&self) -> Option<T> {
        match self {
            FrequencyProfile::Constant { omega0 } => Some(*omega0),
            FrequencyProfile::PiecewiseConstant { segments } if segments.len() == 1 => Some(segments[0].1),
            _ => None,
        }
    }

    pub fn max_omega(&self) -> T {
        match self {
            FrequencyProfile::Constant { omega0 } => *omega0,
            FrequencyProfile::PiecewiseConstant { segments } => segments.iter().fold(T::zero(), |m, s| m.max(s.1)),
            FrequencyProfile::Sampled { values, .. } => values.iter().fold(T::zero(), |m, &v| m.max(v)),
        }
    }

    /// Profile seen from a clock started at `t_start`, i.e. `ω'(t) = ω(t + t_start)`.
    ///
    /// Used to evaluate propagators with a nonzero initial time.
    pub fn shifted(&self, t_start: T) -> Self {
        match self {
            FrequencyProfile::Constant { omega0 } => FrequencyProfile::Constant { omega0: *omega0 },
            FrequencyProfile::PiecewiseConstant { segments } => FrequencyProfile::PiecewiseConstant {
                segments: segments.iter().map(|&(t, w)| (t - t_start, w)).collect(),
            },
            FrequencyProfile::Sampled { times, values } => FrequencyProfile::Sampled {
                times: times.iter().map(|&t| t - t_start).collect(),
                values: values.clone(),
            },
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn piecewise_switches_at_boundaries() {
        let p = FrequencyProfile::piecewise(vec![(0.0, 1.0), (1.0, 2.0)]).unwrap();
        assert_eq!(p.eval(-1.0), 1.0);
        assert_eq!(p.eval(0.999), 1.0);
        assert_eq!(p.eval(1.0), 2.0);
        assert_eq!(p.eval(5.0), 2.0);
        assert_eq!(p.breakpoints(0.0, 3.0), vec![1.0]);
        assert_eq!(p.breakpoints(1.0, 3.0), Vec::<f64>::new());
    }

    #[test]
    fn sampled_reproduces_knots() {
        let ts = vec![0.0, 0.3, 1.1, 2.0];
        let ws = vec![1.0, 0.7, 1.9, 0.2];
        let p: FrequencyProfile<f64> = FrequencyProfile::sampled(ts.clone(), ws.clone()).unwrap();
        for (t, w) in ts.iter().zip(&ws) {
            assert_eq!(p.eval(*t), *w);
        }
        assert!((p.eval(0.15) - 0.85).abs() < 1e-15);
        assert!((p.derivative(0.5) - 1.5).abs() < 1e-12);
        assert_eq!(p.eval(3.0), 0.2);
    }

    #[test]
    fn rejects_bad_profiles() {
        assert!(FrequencyProfile::constant(-1.0).is_err());
        assert!(FrequencyProfile::piecewise(vec![(1.0, 1.0), (0.5, 2.0)]).is_err());
        assert!(FrequencyProfile::<f64>::piecewise(vec![]).is_err());
        assert!(FrequencyProfile::sampled(vec![0.0, 1.0], vec![1.0]).is_err());
        assert!(FrequencyProfile::sampled(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn shift_moves_switches() {
        let p = FrequencyProfile::piecewise(vec![(0.0, 1.0), (1.0, 2.0)]).unwrap();
        let q = p.shifted(0.5);
        assert_eq!(q.eval(0.4), 1.0);
        assert_eq!(q.eval(0.5), 2.0);
    }
}
