//! Complex Newton representation `λ̈ + ω²(t)λ = 0` with `C = λ̇/λ`.
//!
//! Sign convention: `λ_I = cη` and `λ_R` takes the sign that makes the
//! Wronskian `λ̇_I λ_R − λ_I λ̇_R` equal to `+1`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegratorConfig};
use crate::model::{riccati_from_uncertainties, Centroid, ErmakovState, LambdaState, SystemSpec, UncertaintyTriple};
use crate::scalar::Scalar;

/// Tolerance on the initial Wronskian accepted by [`integrate_lambda`].
pub const WRONSKIAN_TOL: f64 = 1e-10;

/// Invariant written in terms of the centroid and the moments.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InvariantObservableForm<T> {
    pub value: T,
    /// `σ_p²⟨x⟩²`, `−2σ_xp⟨x⟩⟨p⟩`, `σ_x²⟨p⟩²`.
    pub components: [T; 3],
}

impl<T: Scalar> InvariantObservableForm<T> {
    /// Scale `c = √(m/2ℏI)` linking `λ` to the centroid.
    pub fn scale(&self, s: &SystemSpec<T>) -> Result<T> {
        scale_from_invariant(s, self.value)
    }
}

fn scale_from_invariant<T: Scalar>(s: &SystemSpec<T>, invariant: T) -> Result<T> {
    if !(invariant > T::zero()) || !invariant.is_finite() {
        return Err(Error::ZeroCentroid);
    }
    Ok((s.mass / (T::lit(2.0) * s.hbar * invariant)).sqrt())
}

/// `I = (1/ℏ²)[σ_p²⟨x⟩² − 2σ_xp⟨x⟩⟨p⟩ + σ_x²⟨p⟩²]`.
pub fn invariant_observable_form<T: Scalar>(
    s: &SystemSpec<T>,
    c: Centroid<T>,
    u: UncertaintyTriple<T>,
) -> InvariantObservableForm<T> {
    let x = c.position();
    let p = c.momentum(s.mass);
    let components = [u.sigma_pp * x * x, -T::lit(2.0) * u.sigma_xp * x * p, u.sigma_xx * p * p];
    let value = (components[0] + components[1] + components[2]) / (s.hbar * s.hbar);
    InvariantObservableForm { value, components }
}

/// Integrates both components of `λ`. The initial Wronskian must be 1.
pub fn integrate_lambda<T: Scalar>(
    s: &SystemSpec<T>,
    l0: LambdaState<T>,
    t_grid: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Vec<LambdaState<T>>> {
    let w = l0.wronskian();
    if !((w - T::one()).abs() <= T::lit(WRONSKIAN_TOL)) {
        return Err(Error::WronskianViolation { value: w.as_f64() });
    }
    let (t0, t1) = (t_grid.first().copied().unwrap_or_default(), t_grid.last().copied().unwrap_or_default());
    let rhs = |t: T, y: &[T; 4]| {
        let w2 = s.omega.omega_sq(t);
        [y[2], y[3], -w2 * y[0], -w2 * y[1]]
    };
    let y0 = [l0.lambda_r, l0.lambda_i, l0.lambda_r_dot, l0.lambda_i_dot];
    let traj = integrate(rhs, y0, t_grid, &s.omega.breakpoints(t0, t1), cfg, |_, _| Ok(()))?;
    Ok(traj.into_iter().map(|y| LambdaState::new(y[0], y[1], y[2], y[3])).collect())
}

/// Classical centroid `η̈ = −ω²η`.
pub fn integrate_centroid<T: Scalar>(
    s: &SystemSpec<T>,
    c0: Centroid<T>,
    t_grid: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Vec<Centroid<T>>> {
    let (t0, t1) = (t_grid.first().copied().unwrap_or_default(), t_grid.last().copied().unwrap_or_default());
    let rhs = |t: T, y: &[T; 2]| [y[1], -s.omega.omega_sq(t) * y[0]];
    let traj = integrate(rhs, [c0.eta, c0.eta_dot], t_grid, &s.omega.breakpoints(t0, t1), cfg, |_, _| Ok(()))?;
    Ok(traj.into_iter().map(|y| Centroid::new(y[0], y[1])).collect())
}

/// `λ_R = c α² (η̇ − (α̇/α) η)` with `c = √(m/2ℏI)`.
pub fn lambda_r_from_eta_alpha<T: Scalar>(
    s: &SystemSpec<T>,
    c: Centroid<T>,
    e: ErmakovState<T>,
    invariant: T,
) -> Result<T> {
    let scale = scale_from_invariant(s, invariant)?;
    e.check()?;
    Ok(scale * e.alpha * (e.alpha * c.eta_dot - e.alpha_dot * c.eta))
}

/// Full `λ` state from the centroid and the Ermakov variable; `λ̇ = Cλ`.
pub fn lambda_from_eta_alpha<T: Scalar>(
    s: &SystemSpec<T>,
    c: Centroid<T>,
    e: ErmakovState<T>,
    invariant: T,
) -> Result<LambdaState<T>> {
    let lambda_r = lambda_r_from_eta_alpha(s, c, e, invariant)?;
    let lambda_i = scale_from_invariant(s, invariant)? * c.eta;
    let cc = crate::model::riccati_from_ermakov(e)?.to_complex();
    let lambda = num_complex::Complex::new(lambda_r, lambda_i);
    Ok(LambdaState::from_complex(lambda, cc * lambda))
}

/// `λ` from the observables:
/// `λ_R = (2c/ℏ)(σ_x²⟨p⟩ − σ_xp⟨x⟩)`, `λ_I = c⟨x⟩`, `λ̇ = Cλ`.
pub fn lambda_from_observables<T: Scalar>(
    s: &SystemSpec<T>,
    c: Centroid<T>,
    u: UncertaintyTriple<T>,
    invariant: T,
) -> Result<LambdaState<T>> {
    let scale = scale_from_invariant(s, invariant)?;
    let cc = riccati_from_uncertainties(s, u)?.to_complex();
    let k = T::lit(2.0) * scale / s.hbar;
    let x = c.position();
    let lambda = num_complex::Complex::new(k * (u.sigma_xx * c.momentum(s.mass) - u.sigma_xp * x), scale * x);
    Ok(LambdaState::from_complex(lambda, cc * lambda))
}

/// Polar angles `atan2(λ_I, λ_R)` made continuous along a trajectory.
pub fn unwrapped_phase<T: Scalar>(traj: &[LambdaState<T>]) -> Vec<T> {
    let two_pi = T::TAU();
    let mut out: Vec<T> = Vec::with_capacity(traj.len());
    for l in traj {
        let raw = l.phase();
        let next = match out.last() {
            None => raw,
            Some(&prev) => raw + two_pi * ((prev - raw) / two_pi).round(),
        };
        out.push(next);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ermakov::{ermakov_invariant, integrate_ermakov_with_centroid};
    use crate::model::{linspace, riccati_from_ermakov, uncertainties_from_ermakov};
    use crate::profile::FrequencyProfile;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::{PI, TAU};

    fn unit(w: f64) -> SystemSpec<f64> {
        SystemSpec::natural(w).unwrap()
    }

    #[test]
    fn coherent_generator() {
        let s = unit(1.0);
        let grid = linspace(0.0, 10.0, 41);
        let l0 = LambdaState::new(1.0, 0.0, 0.0, 1.0);
        for (t, l) in grid.iter().zip(integrate_lambda(&s, l0, &grid, &IntegratorConfig::default()).unwrap()) {
            assert_abs_diff_eq!(l.lambda_r, t.cos(), epsilon = 1e-8);
            assert_abs_diff_eq!(l.lambda_i, t.sin(), epsilon = 1e-8);
            let c = l.riccati();
            assert_abs_diff_eq!(c.c_r, 0.0, epsilon = 1e-8);
            assert_abs_diff_eq!(c.c_i, 1.0, epsilon = 1e-8);
        }
    }

    #[test]
    fn free_spreading() {
        let s = unit(0.0);
        let grid = [0.0, 1.0, 3.0];
        let traj =
            integrate_lambda(&s, LambdaState::new(1.0, 0.0, 0.0, 1.0), &grid, &IntegratorConfig::default()).unwrap();
        for (t, l) in grid.iter().zip(traj) {
            assert_abs_diff_eq!(l.lambda_r, 1.0, epsilon = 1e-12);
            assert_abs_diff_eq!(l.lambda_i, *t, epsilon = 1e-12);
            let c = l.riccati();
            assert_abs_diff_eq!(c.c_r, t / (1.0 + t * t), epsilon = 1e-12);
            assert_abs_diff_eq!(c.c_i, 1.0 / (1.0 + t * t), epsilon = 1e-12);
            assert_abs_diff_eq!(l.modulus_sq(), 1.0 + t * t, epsilon = 1e-12);
        }
    }

    #[test]
    fn periodic_after_full_period() {
        let s = unit(1.0);
        let l0 = LambdaState::from_ermakov(ErmakovState::new(1.3, 0.4)).unwrap();
        let traj = integrate_lambda(&s, l0, &[0.0, TAU], &IntegratorConfig::default()).unwrap();
        assert_abs_diff_eq!(traj[1].lambda_r, l0.lambda_r, epsilon = 1e-8);
        assert_abs_diff_eq!(traj[1].lambda_i, l0.lambda_i, epsilon = 1e-8);
        assert_abs_diff_eq!(traj[1].lambda_r_dot, l0.lambda_r_dot, epsilon = 1e-8);
        assert_abs_diff_eq!(traj[1].lambda_i_dot, l0.lambda_i_dot, epsilon = 1e-8);
    }

    #[test]
    fn rejects_bad_wronskian() {
        let s = unit(1.0);
        let res = integrate_lambda(&s, LambdaState::new(1.0, 0.0, 0.0, 1.1), &[0.0, 1.0], &IntegratorConfig::default());
        assert!(matches!(res, Err(Error::WronskianViolation { .. })));
    }

    #[test]
    fn wronskian_survives_piecewise_profile() {
        let p = FrequencyProfile::piecewise(vec![(0.0, 1.0), (3.0, 2.0), (7.0, 0.5)]).unwrap();
        let s = SystemSpec::new(1.0, 1.0, p).unwrap();
        let grid = linspace(0.0, 20.0 * PI, 400);
        let l0 = LambdaState::from_ermakov(ErmakovState::new(0.8, -0.3)).unwrap();
        for l in integrate_lambda(&s, l0, &grid, &IntegratorConfig::adaptive(1e-12)).unwrap() {
            assert!((l.wronskian() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn lambda_r_examples() {
        let s = unit(1.0);
        let e = ErmakovState::new(1.0, 0.0);
        for t in [0.0, 0.4, 2.0] {
            let c = Centroid::new(f64::cos(t), -f64::sin(t));
            let lr = lambda_r_from_eta_alpha(&s, c, e, 0.5).unwrap();
            assert_abs_diff_eq!(lr, -t.sin(), epsilon = 1e-15);
            let l = lambda_from_eta_alpha(&s, c, e, 0.5).unwrap();
            assert_abs_diff_eq!(l.lambda_i, t.cos(), epsilon = 1e-15);
            assert_abs_diff_eq!(l.modulus_sq(), 1.0, epsilon = 1e-15);
            assert_abs_diff_eq!(l.wronskian(), 1.0, epsilon = 1e-15);
        }
        let l = lambda_from_eta_alpha(&s, Centroid::new(1.0, 0.0), e, 0.5).unwrap();
        assert_eq!((l.lambda_r, l.lambda_i), (0.0, 1.0));
        assert_eq!(lambda_r_from_eta_alpha(&s, Centroid::new(0.0, 0.0), e, 0.0), Err(Error::ZeroCentroid));
    }

    #[test]
    fn observable_examples() {
        let s = unit(1.0);
        let l =
            lambda_from_observables(&s, Centroid::new(1.0, 0.0), UncertaintyTriple::new(0.5, 0.5, 0.0), 0.5).unwrap();
        assert_abs_diff_eq!(l.lambda_r, 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(l.lambda_i, 1.0, epsilon = 1e-15);

        let u = UncertaintyTriple::new(0.5, 0.5, 0.0);
        let l = lambda_from_observables(&s, Centroid::new(0.0, 3.0), u, 1.0).unwrap();
        let c = (0.5f64).sqrt();
        assert_eq!(l.lambda_i, 0.0);
        assert_abs_diff_eq!(l.lambda_r, 2.0 * c * 0.5 * 3.0, epsilon = 1e-15);

        let u = UncertaintyTriple::new(1.0, 1.25, 1.0);
        let c = Centroid::new(1.0, 2.0);
        let inv = invariant_observable_form(&s, c, u);
        assert_abs_diff_eq!(inv.value, 1.25, epsilon = 1e-15);
        let l = lambda_from_observables(&s, c, u, inv.value).unwrap();
        assert_abs_diff_eq!(l.lambda_i, 0.4f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(l.lambda_r, 2.0 * 0.4f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(l.modulus_sq(), 2.0, epsilon = 1e-14);
        assert_abs_diff_eq!(l.wronskian(), 1.0, epsilon = 1e-14);
    }

    #[test]
    fn observable_invariant_examples() {
        let s = unit(1.0);
        let u = UncertaintyTriple::new(0.5, 0.5, 0.0);
        for t in [0.0, 1.0, 5.5] {
            let inv = invariant_observable_form(&s, Centroid::new(f64::cos(t), -f64::sin(t)), u);
            assert_abs_diff_eq!(inv.value, 0.5, epsilon = 1e-15);
        }
        assert_eq!(invariant_observable_form(&s, Centroid::new(0.0, 0.0), u).value, 0.0);
    }

    #[test]
    fn phase_unwraps_monotonically() {
        let s = unit(1.0);
        let grid = linspace(0.0, 30.0, 301);
        let traj =
            integrate_lambda(&s, LambdaState::new(1.0, 0.0, 0.0, 1.0), &grid, &IntegratorConfig::default()).unwrap();
        let phi = unwrapped_phase(&traj);
        for (t, p) in grid.iter().zip(&phi) {
            assert_abs_diff_eq!(*p, *t, epsilon = 1e-7);
        }
    }

    proptest! {
        #[test]
        fn eta_alpha_and_observables_agree(
            eta in -2.0f64..2.0, eta_dot in -2.0f64..2.0,
            a in 0.3f64..3.0, ad in -2.0f64..2.0,
            m in 0.5f64..2.0, hbar in 0.5f64..2.0,
        ) {
            prop_assume!(eta.abs() + eta_dot.abs() > 0.1);
            let s = SystemSpec::new(m, hbar, FrequencyProfile::constant(1.0).unwrap()).unwrap();
            let c = Centroid::new(eta, eta_dot);
            let e = ErmakovState::new(a, ad);
            let u = uncertainties_from_ermakov(&s, e).unwrap();
            let i_e = ermakov_invariant(&s, c, e);
            let i_o = invariant_observable_form(&s, c, u).value;
            prop_assert!((i_e - i_o).abs() < 1e-10 * i_e.max(1.0));
            let l1 = lambda_from_eta_alpha(&s, c, e, i_e).unwrap();
            let l2 = lambda_from_observables(&s, c, u, i_e).unwrap();
            let scale = l1.modulus_sq().sqrt().max(1.0);
            prop_assert!((l1.lambda_r - l2.lambda_r).abs() < 1e-10 * scale);
            prop_assert!((l1.lambda_i - l2.lambda_i).abs() < 1e-10 * scale);
            prop_assert!((l1.modulus_sq() - a * a).abs() < 1e-9 * a * a);
            prop_assert!((l1.wronskian() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn modulus_tracks_ermakov_along_trajectory() {
        let p = FrequencyProfile::piecewise(vec![(0.0, 1.0), (1.0, 2.0)]).unwrap();
        let s = SystemSpec::new(1.0, 1.0, p).unwrap();
        let grid = linspace(0.0, 12.0, 121);
        let c0 = Centroid::new(1.0, 0.3);
        let e0 = ErmakovState::new(2f64.sqrt(), 0.0);
        let i0 = ermakov_invariant(&s, c0, e0);
        let l0 = lambda_from_eta_alpha(&s, c0, e0, i0).unwrap();
        let cfg = IntegratorConfig::adaptive(1e-12);
        let lam = integrate_lambda(&s, l0, &grid, &cfg).unwrap();
        let joint = integrate_ermakov_with_centroid(&s, c0, e0, &grid, &cfg).unwrap();
        for (l, (c, e)) in lam.iter().zip(&joint) {
            assert!((l.modulus_sq() - e.alpha * e.alpha).abs() < 1e-8);
            let cr = riccati_from_ermakov(*e).unwrap();
            let cl = l.riccati();
            if l.modulus_sq().sqrt() > 1e-6 * e.alpha {
                assert!((cl.c_r - cr.c_r).abs() < 1e-8 && (cl.c_i - cr.c_i).abs() < 1e-8);
            }
            // λ_I stays proportional to the centroid.
            assert!((l.lambda_i - (s.mass / (2.0 * s.hbar * i0)).sqrt() * c.eta).abs() < 1e-8);
        }
    }
}
