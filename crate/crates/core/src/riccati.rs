//! The complex Riccati equation `Ċ + C² + ω²(t) = 0`.
//!
//! For constant ω₀ the equation is solved in closed form by splitting off a
//! particular solution `C̃ = ±iω₀` and linearizing the remaining Bernoulli
//! equation with `V = 1/κ`. Any profile can be integrated numerically.
//! Phase-plane arrows point forward in time.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegratorConfig};
use crate::model::{PlaneField, RiccatiState, SystemSpec, UncertaintyTriple};
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

/// A constant solution `C̃ = ±iω₀`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParticularSolution<T> {
    pub value: Complex<T>,
    pub branch: Branch,
}

/// Initial datum of the Bernoulli part `V = C − C̃`.
///
/// `V0(0)` keeps the solution on the particular solution; the matching
/// `κ₀` would be infinite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum BernoulliInitial<T> {
    V0(Complex<T>),
    Kappa0(Complex<T>),
}

/// Returns `(C̃₊, C̃₋) = (+iω₀, −iω₀)`.
pub fn particular_solutions<T: Scalar>(omega0: T) -> (ParticularSolution<T>, ParticularSolution<T>) {
    (
        ParticularSolution { value: Complex::new(T::zero(), omega0), branch: Branch::Plus },
        ParticularSolution { value: Complex::new(T::zero(), -omega0), branch: Branch::Minus },
    )
}

/// `V(t) = e^{−2C̃t} / (κ₀ + (1 − e^{−2C̃t})/(2C̃))`, with `t₀ = 0`.
///
/// For `C̃ = 0` the limit `V = 1/(κ₀ + t)` is used.
pub fn bernoulli_solution<T: Scalar>(
    ctilde: ParticularSolution<T>,
    init: BernoulliInitial<T>,
    t: T,
) -> Result<Complex<T>> {
    let kappa0 = match init {
        BernoulliInitial::V0(v0) if v0 == Complex::new(T::zero(), T::zero()) => {
            return Ok(Complex::new(T::zero(), T::zero()))
        }
        BernoulliInitial::V0(v0) => v0.inv(),
        BernoulliInitial::Kappa0(k) => {
            if k.norm() == T::zero() {
                return Err(Error::Domain("kappa0 must be nonzero".into()));
            }
            k
        }
    };
    let c = ctilde.value;
    let (num, den) = if c.norm() == T::zero() {
        (Complex::new(T::one(), T::zero()), kappa0 + t)
    } else {
        let decay = (c * (-T::lit(2.0) * t)).exp();
        let one = Complex::new(T::one(), T::zero());
        (decay, kappa0 + (one - decay) / (c * T::lit(2.0)))
    };
    let scale = kappa0.norm() + T::one();
    if den.norm() <= T::epsilon() * T::lit(64.0) * scale {
        return Err(Error::Singularity { t: t.as_f64() });
    }
    Ok(num / den)
}

/// Closed-form trajectory through `c0` for constant ω₀: `C = C̃₊ + V₊(t)`
/// (or `C = 1/(1/C₀ + t)` style free motion for ω₀ = 0).
pub fn riccati_closed_form<T: Scalar>(omega0: T, c0: RiccatiState<T>, t: T) -> Result<RiccatiState<T>> {
    let (plus, _) = particular_solutions(omega0);
    let v0 = c0.to_complex() - plus.value;
    let v = bernoulli_solution(plus, BernoulliInitial::V0(v0), t)?;
    Ok(RiccatiState::from_complex(plus.value + v))
}

/// `κ₀` in terms of the initial moments, relative to `C̃₊ = iω₀`.
pub fn kappa0_from_initial_moments<T: Scalar>(
    s: &SystemSpec<T>,
    omega0: T,
    u: UncertaintyTriple<T>,
) -> Result<Complex<T>> {
    let (m, hbar) = (s.mass, s.hbar);
    let half = T::lit(0.5);
    let num = Complex::new(half * u.sigma_xp, -(hbar / T::lit(4.0) - half * m * omega0 * u.sigma_xx));
    let t1 = u.sigma_pp / (T::lit(2.0) * m);
    let t2 = half * m * omega0 * omega0 * u.sigma_xx;
    let t3 = half * hbar * omega0;
    let den = t1 + t2 - t3;
    if den.abs() <= T::epsilon() * T::lit(16.0) * (t1.abs() + t2.abs() + t3.abs()) {
        return Err(Error::CoherentDegeneracy);
    }
    Ok(num / den)
}

/// Default blow-up bound `10⁶ · max(ω_max, 1)`.
pub fn default_blowup_bound<T: Scalar>(s: &SystemSpec<T>) -> T {
    T::lit(1e6) * s.omega.max_omega().max(T::one())
}

/// Integrates `Ċ = −C² − ω²(t)` on `t_grid` (which starts at the time of `c0`).
pub fn integrate_riccati<T: Scalar>(
    s: &SystemSpec<T>,
    c0: RiccatiState<T>,
    t_grid: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Vec<RiccatiState<T>>> {
    integrate_riccati_bounded(s, c0, t_grid, cfg, default_blowup_bound(s))
}

/// [`integrate_riccati`] with an explicit blow-up bound on `|C|`.
pub fn integrate_riccati_bounded<T: Scalar>(
    s: &SystemSpec<T>,
    c0: RiccatiState<T>,
    t_grid: &[T],
    cfg: &IntegratorConfig<T>,
    bound: T,
) -> Result<Vec<RiccatiState<T>>> {
    if !(c0.c_r.is_finite() && c0.c_i.is_finite()) {
        return Err(Error::Domain("initial C must be finite".into()));
    }
    let (t0, t1) = (t_grid.first().copied().unwrap_or_default(), t_grid.last().copied().unwrap_or_default());
    let rhs = |t: T, y: &[T; 2]| {
        let w2 = s.omega.omega_sq(t);
        [y[1] * y[1] - y[0] * y[0] - w2, -T::lit(2.0) * y[0] * y[1]]
    };
    let guard = |t: T, y: &[T; 2]| {
        let mag = y[0].hypot(y[1]);
        if mag > bound || !mag.is_finite() {
            Err(Error::BlowUp { t: t.as_f64(), magnitude: mag.as_f64() })
        } else {
            Ok(())
        }
    };
    let traj = integrate(rhs, [c0.c_r, c0.c_i], t_grid, &s.omega.breakpoints(t0, t1), cfg, guard)?;
    Ok(traj.into_iter().map(|y| RiccatiState::new(y[0], y[1])).collect())
}

/// Right-hand side `(−C_R² + C_I² − ω₀², −2C_R C_I)` at one point.
pub fn field_at<T: Scalar>(omega0: T, c_r: T, c_i: T) -> (T, T) {
    (c_i * c_i - c_r * c_r - omega0 * omega0, -T::lit(2.0) * c_r * c_i)
}

/// Samples the Riccati vector field on an `n_grid × n_grid` lattice
/// (`x` = C_R, `y` = C_I).
pub fn vector_field<T: Scalar>(omega0: T, cr_range: (T, T), ci_range: (T, T), n_grid: usize) -> Result<PlaneField<T>> {
    PlaneField::sample(cr_range, ci_range, n_grid, |x, y| field_at(omega0, x, y))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn cx(re: f64, im: f64) -> Complex<f64> {
        Complex::new(re, im)
    }

    #[test]
    fn particular_solution_examples() {
        let (p, m) = particular_solutions(1.0);
        assert_eq!((p.value, m.value), (cx(0.0, 1.0), cx(0.0, -1.0)));
        let (p, m) = particular_solutions(0.0);
        assert_eq!(p.value.norm(), 0.0);
        assert_eq!(m.value.norm(), 0.0);
        let (p, m) = particular_solutions(2.0);
        assert_eq!((p.value, m.value), (cx(0.0, 2.0), cx(0.0, -2.0)));
    }

    #[test]
    fn bernoulli_examples() {
        let (plus, _) = particular_solutions(1.0);
        let k0 = BernoulliInitial::Kappa0(cx(0.0, 2.0));
        let v = bernoulli_solution(plus, k0, 0.0).unwrap();
        assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(v.im, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!((plus.value + v).im, 0.5, epsilon = 1e-15);
        let v = bernoulli_solution(plus, k0, PI).unwrap();
        assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(v.im, -0.5, epsilon = 1e-14);
        let (free, _) = particular_solutions(0.0);
        let v = bernoulli_solution(free, BernoulliInitial::Kappa0(cx(1.0, 0.0)), 1.0).unwrap();
        assert_eq!(v, cx(0.5, 0.0));
    }

    #[test]
    fn bernoulli_v0_zero_stays_on_particular_solution() {
        let (plus, _) = particular_solutions(1.0);
        let v = bernoulli_solution(plus, BernoulliInitial::V0(cx(0.0, 0.0)), 3.0).unwrap();
        assert_eq!(v, cx(0.0, 0.0));
    }

    #[test]
    fn bernoulli_reports_singularity() {
        // Free motion with kappa0 = -1 diverges at t = 1.
        let (free, _) = particular_solutions(0.0);
        let err = bernoulli_solution(free, BernoulliInitial::Kappa0(cx(-1.0, 0.0)), 1.0).unwrap_err();
        assert_eq!(err, Error::Singularity { t: 1.0 });
        // C0 = 0 with omega0 = 1: kappa0 = 1/(0 - i) = i; denominator
        // i + (1 - e^{-2it})/(2i) vanishes at t = pi/2.
        let (plus, _) = particular_solutions(1.0);
        let err = bernoulli_solution(plus, BernoulliInitial::Kappa0(cx(0.0, 1.0)), PI / 2.0);
        assert!(matches!(err, Err(Error::Singularity { .. })));
        assert!(bernoulli_solution(plus, BernoulliInitial::Kappa0(cx(0.0, 0.0)), 1.0).is_err());
    }

    #[test]
    fn kappa0_examples() {
        let s = SystemSpec::natural(1.0).unwrap();
        let k = kappa0_from_initial_moments(&s, 1.0, UncertaintyTriple::new(1.0, 0.25, 0.0)).unwrap();
        assert_abs_diff_eq!(k.re, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k.im, 2.0, epsilon = 1e-15);
        assert_eq!(
            kappa0_from_initial_moments(&s, 1.0, UncertaintyTriple::new(0.5, 0.5, 0.0)),
            Err(Error::CoherentDegeneracy)
        );
        let k = kappa0_from_initial_moments(&s, 1.0, UncertaintyTriple::new(1.0, 0.5, 0.5)).unwrap();
        assert_abs_diff_eq!(k.re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(k.im, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn kappa0_agrees_with_initial_c() {
        // V0 = C0 - i omega0 must equal 1/kappa0.
        let s = SystemSpec::new(1.5, 0.7, crate::profile::FrequencyProfile::constant(1.3).unwrap()).unwrap();
        let e = crate::model::ErmakovState::new(0.9, 0.4);
        let u = crate::model::uncertainties_from_ermakov(&s, e).unwrap();
        let c0 = crate::model::riccati_from_ermakov(e).unwrap().to_complex();
        let k = kappa0_from_initial_moments(&s, 1.3, u).unwrap();
        let v0 = c0 - Complex::new(0.0, 1.3);
        assert!((k.inv() - v0).norm() < 1e-13);
    }

    #[test]
    fn vector_field_examples() {
        assert_eq!(field_at(1.0, 0.0, 1.0), (0.0, 0.0));
        assert_eq!(field_at(1.0, 0.0, -1.0), (0.0, -0.0));
        assert_eq!(field_at(1.0, 0.0, 0.0), (-1.0, 0.0));
        assert_eq!(field_at(1.0, 1.0, 1.0), (-1.0, -2.0));
        let f = vector_field(1.0, (-2.0, 2.0), (-2.0, 2.0), 5).unwrap();
        assert_eq!(f.at(2, 3), (0.0, 0.0));
        assert_eq!(f.at(2, 1), (0.0, 0.0));
        assert!(vector_field(1.0, (-1.0, 1.0), (-1.0, 1.0), 1).is_err());
    }

    #[test]
    fn integrate_fixed_point_and_period() {
        let s = SystemSpec::natural(1.0).unwrap();
        let cfg = IntegratorConfig::default();
        let grid = [0.0, 1.0, 5.0];
        let traj = integrate_riccati(&s, RiccatiState::new(0.0, 1.0), &grid, &cfg).unwrap();
        for c in traj {
            assert_abs_diff_eq!(c.c_r, 0.0, epsilon = 1e-12);
            assert_abs_diff_eq!(c.c_i, 1.0, epsilon = 1e-12);
        }
        let traj = integrate_riccati(&s, RiccatiState::new(0.0, 0.5), &[0.0, PI], &cfg).unwrap();
        assert_abs_diff_eq!(traj[1].c_r, 0.0, epsilon = 1e-8);
        assert_abs_diff_eq!(traj[1].c_i, 0.5, epsilon = 1e-8);
    }

    #[test]
    fn real_axis_start_blows_up_at_quarter_period() {
        // C0 = 0 gives C = -tan t, which diverges at pi/2.
        let s = SystemSpec::natural(1.0).unwrap();
        let err =
            integrate_riccati(&s, RiccatiState::new(0.0, 0.0), &[0.0, 3.0], &IntegratorConfig::default()).unwrap_err();
        match err {
            Error::BlowUp { t, magnitude } => {
                assert!((t - PI / 2.0).abs() < 1e-5, "t = {t}");
                assert!(magnitude > 1e6);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn lower_half_plane_orbit_mirrors_upper() {
        // C -> conj(C) maps solutions to solutions; -0.5i circles -i.
        let s = SystemSpec::natural(1.0).unwrap();
        let grid: Vec<f64> = (0..=40).map(|i| i as f64 * 0.25).collect();
        let cfg = IntegratorConfig::default();
        let lo = integrate_riccati(&s, RiccatiState::new(0.0, -0.5), &grid, &cfg).unwrap();
        let up = integrate_riccati(&s, RiccatiState::new(0.0, 0.5), &grid, &cfg).unwrap();
        for (a, b) in lo.iter().zip(&up) {
            assert!(a.c_i < 0.0);
            assert_abs_diff_eq!(a.c_r, b.c_r, epsilon = 1e-9);
            assert_abs_diff_eq!(a.c_i, -b.c_i, epsilon = 1e-9);
        }
    }
}
