//! Second moments `(σ_x², σ_p², σ_xp)` by every available route.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegratorConfig};
use crate::model::{Centroid, ErmakovState, SystemSpec, UncertaintyTriple};
use crate::profile::FrequencyProfile;
use crate::scalar::Scalar;

/// Moments for constant `omega0 > 0` in closed form.
pub fn ho_uncertainty_closed_form<T: Scalar>(
    s: &SystemSpec<T>,
    u0: UncertaintyTriple<T>,
    omega0: T,
    t: T,
) -> Result<UncertaintyTriple<T>> {
    if !(omega0 > T::zero()) {
        return Err(Error::Domain(format!("omega0 = {omega0} must be positive")));
    }
    let m = s.mass;
    let mw = m * omega0;
    let two = T::lit(2.0);
    let (sn, cs) = (omega0 * t).sin_cos();
    let (sn2, cs2) = (two * omega0 * t).sin_cos();
    Ok(UncertaintyTriple {
        sigma_xx: u0.sigma_pp / (mw * mw) * sn * sn + u0.sigma_xx * cs * cs + two * u0.sigma_xp / mw * sn * cs,
        sigma_pp: u0.sigma_pp * cs * cs + mw * mw * u0.sigma_xx * sn * sn - two * mw * u0.sigma_xp * sn * cs,
        sigma_xp: (u0.sigma_pp / (two * mw) - mw * u0.sigma_xx / two) * sn2 + u0.sigma_xp * cs2,
    })
}

/// Free-motion moments (`ω = 0`), physical correlation branch.
pub fn free_motion_uncertainties<T: Scalar>(s: &SystemSpec<T>, u0: UncertaintyTriple<T>, t: T) -> UncertaintyTriple<T> {
    let m = s.mass;
    UncertaintyTriple {
        sigma_xx: u0.sigma_pp * t * t / (m * m) + u0.sigma_xx + T::lit(2.0) * u0.sigma_xp * t / m,
        sigma_pp: u0.sigma_pp,
        sigma_xp: u0.sigma_pp * t / m + u0.sigma_xp,
    }
}

/// Integrates the closed first-order moment system
/// `σ̇_xx = 2σ_xp/m`, `σ̇_pp = −2mω²σ_xp`, `σ̇_xp = σ_pp/m − mω²σ_xx`.
pub fn integrate_uncertainty_system<T: Scalar>(
    s: &SystemSpec<T>,
    u0: UncertaintyTriple<T>,
    t_grid: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Vec<UncertaintyTriple<T>>> {
    u0.check()?;
    let m = s.mass;
    let two = T::lit(2.0);
    let rhs = |t: T, y: &[T; 3]| {
        let mw2 = m * s.omega.omega_sq(t);
        [two * y[2] / m, -two * mw2 * y[2], y[1] / m - mw2 * y[0]]
    };
    let (t0, t1) = (t_grid.first().copied().unwrap_or_default(), t_grid.last().copied().unwrap_or_default());
    let traj =
        integrate(rhs, [u0.sigma_xx, u0.sigma_pp, u0.sigma_xp], t_grid, &s.omega.breakpoints(t0, t1), cfg, |_, _| {
            Ok(())
        })?;
    Ok(traj.into_iter().map(|y| UncertaintyTriple::new(y[0], y[1], y[2])).collect())
}

/// Minimum number of samples accepted by [`third_order_residual`].
pub const MIN_RESIDUAL_POINTS: usize = 7;

/// Residual `σ⃛ + 4ω²σ̇ + 4ωω̇σ` of the third-order equation for `σ = σ_x²`,
/// by second-order centered differences. Returns `(t, residual)` at every
/// sample that has two neighbours on each side.
///
/// Non-uniform grids are resampled onto a uniform grid with the same number
/// of points by natural cubic-spline interpolation first.
pub fn third_order_residual<T: Scalar>(
    times: &[T],
    sigma_xx: &[T],
    omega: &FrequencyProfile<T>,
) -> Result<Vec<(T, T)>> {
    let n = times.len();
    if n < MIN_RESIDUAL_POINTS || sigma_xx.len() != n {
        return Err(Error::GridTooCoarse { points: n.min(sigma_xx.len()), required: MIN_RESIDUAL_POINTS });
    }
    crate::integrate::check_grid(times)?;
    let h = (times[n - 1] - times[0]) / T::from_usize(n - 1).unwrap();
    let uniform = times.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= T::lit(1e-9) * h);
    let (ts, ys) = if uniform {
        (times.to_vec(), sigma_xx.to_vec())
    } else {
        let ts = crate::model::linspace(times[0], times[n - 1], n);
        let spline = NaturalSpline::new(times, sigma_xx);
        let ys = ts.iter().map(|&t| spline.eval(t)).collect();
        (ts, ys)
    };
    let two = T::lit(2.0);
    let four = T::lit(4.0);
    let h3 = two * h * h * h;
    Ok((2..n - 2)
        .map(|i| {
            let d3 = (ys[i + 2] - two * ys[i + 1] + two * ys[i - 1] - ys[i - 2]) / h3;
            let d1 = (ys[i + 1] - ys[i - 1]) / (two * h);
            let w = omega.eval(ts[i]);
            let wd = omega.derivative(ts[i]);
            (ts[i], d3 + four * w * w * d1 + four * w * wd * ys[i])
        })
        .collect())
}

/// Natural cubic spline through `(xs, ys)`.
struct NaturalSpline<T> {
    xs: Vec<T>,
    ys: Vec<T>,
    m: Vec<T>,
}

impl<T: Scalar> NaturalSpline<T> {
    fn new(xs: &[T], ys: &[T]) -> Self {
        let n = xs.len();
        let mut m = vec![T::zero(); n];
        if n > 2 {
            // Thomas algorithm for the second derivatives.
            let two = T::lit(2.0);
            let six = T::lit(6.0);
            let mut c = vec![T::zero(); n];
            let mut d = vec![T::zero(); n];
            for i in 1..n - 1 {
                let h0 = xs[i] - xs[i - 1];
                let h1 = xs[i + 1] - xs[i];
                let rhs = six * ((ys[i + 1] - ys[i]) / h1 - (ys[i] - ys[i - 1]) / h0);
                let diag = two * (h0 + h1) - h0 * c[i - 1];
                c[i] = h1 / diag;
                d[i] = (rhs - h0 * d[i - 1]) / diag;
            }
            for i in (1..n - 1).rev() {
                m[i] = d[i] - c[i] * m[i + 1];
            }
        }
        NaturalSpline { xs: xs.to_vec(), ys: ys.to_vec(), m }
    }

    fn eval(&self, x: T) -> T {
        let n = self.xs.len();
        let k = self.xs.partition_point(|&s| s <= x).clamp(1, n - 1);
        let (x0, x1) = (self.xs[k - 1], self.xs[k]);
        let h = x1 - x0;
        let a = (x1 - x) / h;
        let b = (x - x0) / h;
        let six = T::lit(6.0);
        a * self.ys[k - 1]
            + b * self.ys[k]
            + ((a * a * a - a) * self.m[k - 1] + (b * b * b - b) * self.m[k]) * h * h / six
    }
}

/// `Cor = |σ_xp| / (σ_x σ_p)`.
pub fn correlation_coefficient<T: Scalar>(u: UncertaintyTriple<T>) -> Result<T> {
    u.check()?;
    Ok(u.sigma_xp.abs() / (u.sigma_xx * u.sigma_pp).sqrt())
}

/// Position variance below which the packet is squeezed: `ℏ/(2mω₀)`.
pub fn position_squeezing_level<T: Scalar>(s: &SystemSpec<T>, omega0: T) -> T {
    s.coherent_sigma_xx(omega0)
}

/// Momentum variance below which the packet is squeezed: `ℏmω₀/2`.
pub fn momentum_squeezing_level<T: Scalar>(s: &SystemSpec<T>, omega0: T) -> T {
    s.coherent_sigma_pp(omega0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VelocityFieldSample<T> {
    pub x: T,
    pub v: T,
}

/// Velocity field `v(x) = η̇ + (α̇/α)(x − η)` of the probability current.
pub fn velocity_field<T: Scalar>(c: Centroid<T>, e: ErmakovState<T>, x: T) -> Result<VelocityFieldSample<T>> {
    e.check()?;
    Ok(VelocityFieldSample { x, v: c.eta_dot + e.alpha_dot / e.alpha * (x - c.eta) })
}
