//! The Ermakov equation `α̈ + ω²(t)α = 1/α³` and its closed-form solutions.
//!
//! Besides direct integration, `α(t)` is built from two fundamental
//! solutions of the classical equation `η̈ + ω²η = 0` with
//! `η₁(0) = 0, η̇₁(0) = −1/m` and `η₂(0) = 1, η̇₂(0) = 0`:
//!
//! `α² = (2m/ℏ)[σ_p₀²η₁² + σ_x₀²η₂² − 2σ_xp₀η₁η₂]`.
//!
//! Only `α > 0` is represented. The orbits with `α < 0` are the mirror
//! image under `α → −α`, which leaves the equation invariant.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::{integrate, IntegratorConfig};
use crate::model::{Centroid, ErmakovState, PlaneField, SystemSpec, UncertaintyTriple};
use crate::scalar::Scalar;

/// Selects the sign of the cross term `σ_xp₀` in the closed forms.
///
/// `Physical` reproduces `σ_xp(0) = σ_xp₀` (equivalently
/// `α̇(0) = √(2/ℏm) σ_xp₀/σ_x₀`). `Mirrored` is the other root of the
/// quadratic form; it solves the Ermakov equation with `α̇(0)` reversed and
/// is kept only for comparison.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignBranch {
    #[default]
    Physical,
    Mirrored,
}

impl SignBranch {
    fn sign<T: Scalar>(self) -> T {
        match self {
            SignBranch::Physical => T::one(),
            SignBranch::Mirrored => -T::one(),
        }
    }
}

/// Two solutions of `η̈ + ω²(t)η = 0` with the normalization above.
#[derive(Debug, Clone, PartialEq)]
pub enum FundamentalPair<T> {
    /// `η₁ = −sin(ω₀t)/(mω₀)`, `η₂ = cos(ω₀t)` (and the `ω₀ → 0` limit).
    Closed { omega0: T, mass: T },
    /// Dense trajectories `[η, η̇]`, interpolated by cubic Hermite polynomials.
    Sampled { times: Vec<T>, eta1: Vec<[T; 2]>, eta2: Vec<[T; 2]> },
}

impl<T: Scalar> FundamentalPair<T> {
    pub fn closed(mass: T, omega0: T) -> Self {
        FundamentalPair::Closed { omega0, mass }
    }

    /// Integrates both solutions on `t_grid` (starting at `t₀ = t_grid[0]`).
    pub fn integrate(s: &SystemSpec<T>, t_grid: &[T], cfg: &IntegratorConfig<T>) -> Result<Self> {
        let (t0, t1) = (t_grid[0], t_grid[t_grid.len() - 1]);
        let bps = s.omega.breakpoints(t0, t1);
        let rhs = |t: T, y: &[T; 2]| [y[1], -s.omega.omega_sq(t) * y[0]];
        let eta1 = integrate(rhs, [T::zero(), -s.mass.recip()], t_grid, &bps, cfg, |_, _| Ok(()))?;
        let eta2 = integrate(rhs, [T::one(), T::zero()], t_grid, &bps, cfg, |_, _| Ok(()))?;
        Ok(FundamentalPair::Sampled { times: t_grid.to_vec(), eta1, eta2 })
    }

    /// Closed form for constant profiles, otherwise [`FundamentalPair::integrate`].
    pub fn for_system(s: &SystemSpec<T>, t_grid: &[T], cfg: &IntegratorConfig<T>) -> Result<Self> {
        match s.omega.as_constant() {
            Some(w) => Ok(Self::closed(s.mass, w)),
            None => Self::integrate(s, t_grid, cfg),
        }
    }

    /// `([η₁, η̇₁], [η₂, η̇₂])` at time `t`.
    pub fn eval(&self, t: T) -> ([T; 2], [T; 2]) {
        match self {
            FundamentalPair::Closed { omega0, mass } => {
                let w = *omega0;
                if w == T::zero() {
                    ([-t / *mass, -mass.recip()], [T::one(), T::zero()])
                } else {
                    let (sn, cs) = (w * t).sin_cos();
                    ([-sn / (*mass * w), -cs / *mass], [cs, -w * sn])
                }
            }
            FundamentalPair::Sampled { times, eta1, eta2 } => {
                let n = times.len();
                if n == 1 {
                    return (eta1[0], eta2[0]);
                }
                let k = times.partition_point(|&s| s <= t).clamp(1, n - 1);
                let (ta, tb) = (times[k - 1], times[k]);
                (hermite(ta, tb, eta1[k - 1], eta1[k], t), hermite(ta, tb, eta2[k - 1], eta2[k], t))
            }
        }
    }
}

/// Cubic Hermite interpolation of `[y, ẏ]`; the derivative comes from the
/// interpolant.
fn hermite<T: Scalar>(ta: T, tb: T, ya: [T; 2], yb: [T; 2], t: T) -> [T; 2] {
    let h = tb - ta;
    let s = (t - ta) / h;
    let (two, three) = (T::lit(2.0), T::lit(3.0));
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = two * s3 - three * s2 + T::one();
    let h10 = s3 - two * s2 + s;
    let h01 = -two * s3 + three * s2;
    let h11 = s3 - s2;
    let y = h00 * ya[0] + h10 * h * ya[1] + h01 * yb[0] + h11 * h * yb[1];
    let six = T::lit(6.0);
    let d00 = (six * s2 - six * s) / h;
    let d10 = three * s2 - T::lit(4.0) * s + T::one();
    let d01 = (six * s - six * s2) / h;
    let d11 = three * s2 - two * s;
    let yd = d00 * ya[0] + d10 * ya[1] + d01 * yb[0] + d11 * yb[1];
    [y, yd]
}

/// Default lower bound on α during integration.
pub const DEFAULT_ALPHA_FLOOR: f64 = 1e-8;

/// Integrates the Ermakov equation on `t_grid`.
pub fn integrate_ermakov<T: Scalar>(
    s: &SystemSpec<T>,
    e0: ErmakovState<T>,
    t_grid: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Vec<ErmakovState<T>>> {
    integrate_ermakov_with_floor(s, e0, t_grid, cfg, T::lit(DEFAULT_ALPHA_FLOOR))
}

pub fn integrate_ermakov_with_floor<T: Scalar>(
    s: &SystemSpec<T>,
    e0: ErmakovState<T>,
    t_grid: &[T],
    cfg: &IntegratorConfig<T>,
    floor: T,
) -> Result<Vec<ErmakovState<T>>> {
    e0.check()?;
    let (t0, t1) = (t_grid.first().copied().unwrap_or_default(), t_grid.last().copied().unwrap_or_default());
    let rhs = |t: T, y: &[T; 2]| [y[1], -s.omega.omega_sq(t) * y[0] + y[0].powi(3).recip()];
    let traj =
        integrate(rhs, [e0.alpha, e0.alpha_dot], t_grid, &s.omega.breakpoints(t0, t1), cfg, alpha_guard(floor, 0))?;
    Ok(traj.into_iter().map(|y| ErmakovState::new(y[0], y[1])).collect())
}

fn alpha_guard<T: Scalar, const N: usize>(floor: T, idx: usize) -> impl FnMut(T, &[T; N]) -> Result<()> {
    move |t, y| {
        if y[idx] < floor || !y[idx].is_finite() {
            Err(Error::AlphaFloor { t: t.as_f64(), floor: floor.as_f64() })
        } else {
            Ok(())
        }
    }
}

/// Jointly integrates the classical centroid and the Ermakov variable.
pub fn integrate_ermakov_with_centroid<T: Scalar>(
    s: &SystemSpec<T>,
    c0: Centroid<T>,
    e0: ErmakovState<T>,
    t_grid: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Vec<(Centroid<T>, ErmakovState<T>)>> {
    e0.check()?;
    let (t0, t1) = (t_grid.first().copied().unwrap_or_default(), t_grid.last().copied().unwrap_or_default());
    let rhs = |t: T, y: &[T; 4]| {
        let w2 = s.omega.omega_sq(t);
        [y[1], -w2 * y[0], y[3], -w2 * y[2] + y[2].powi(3).recip()]
    };
    let y0 = [c0.eta, c0.eta_dot, e0.alpha, e0.alpha_dot];
    let floor = T::lit(DEFAULT_ALPHA_FLOOR);
    let traj = integrate(rhs, y0, t_grid, &s.omega.breakpoints(t0, t1), cfg, alpha_guard(floor, 2))?;
    Ok(traj.into_iter().map(|y| (Centroid::new(y[0], y[1]), ErmakovState::new(y[2], y[3]))).collect())
}

fn alpha_from_radicand<T: Scalar>(s: &SystemSpec<T>, radicand: T) -> Result<T> {
    if radicand < T::zero() || !radicand.is_finite() {
        return Err(Error::NegativeRadicand { value: radicand.as_f64() });
    }
    Ok((T::lit(2.0) * s.mass / s.hbar * radicand).sqrt())
}

/// `α(t)` from the fundamental pair and the initial moments.
pub fn ermakov_from_fundamental<T: Scalar>(
    s: &SystemSpec<T>,
    u0: UncertaintyTriple<T>,
    pair: &FundamentalPair<T>,
    t: T,
    branch: SignBranch,
) -> Result<T> {
    Ok(ermakov_state_from_fundamental(s, u0, pair, t, branch)?.alpha)
}

/// `(α, α̇)` from the fundamental pair; `α̇` follows by differentiating the
/// quadratic form.
pub fn ermakov_state_from_fundamental<T: Scalar>(
    s: &SystemSpec<T>,
    u0: UncertaintyTriple<T>,
    pair: &FundamentalPair<T>,
    t: T,
    branch: SignBranch,
) -> Result<ErmakovState<T>> {
    let ([e1, d1], [e2, d2]) = pair.eval(t);
    let two = T::lit(2.0);
    let cross = -branch.sign::<T>() * two * u0.sigma_xp;
    let radicand = u0.sigma_pp * e1 * e1 + u0.sigma_xx * e2 * e2 + cross * e1 * e2;
    let alpha = alpha_from_radicand(s, radicand)?;
    let d_radicand = two * u0.sigma_pp * e1 * d1 + two * u0.sigma_xx * e2 * d2 + cross * (d1 * e2 + e1 * d2);
    // d(α²)/dt = (2m/ℏ) d(radicand)/dt
    let alpha_dot = if alpha > T::zero() { s.mass / s.hbar * d_radicand / alpha } else { T::zero() };
    Ok(ErmakovState::new(alpha, alpha_dot))
}

/// Closed-form α(t) for a constant frequency `omega0 > 0`.
pub fn ermakov_closed_form_ho<T: Scalar>(
    s: &SystemSpec<T>,
    u0: UncertaintyTriple<T>,
    omega0: T,
    t: T,
    branch: SignBranch,
) -> Result<T> {
    if !(omega0 > T::zero()) {
        return Err(Error::Domain(format!("omega0 = {omega0} must be positive")));
    }
    let m = s.mass;
    let (sn, cs) = (omega0 * t).sin_cos();
    let mw = m * omega0;
    let radicand = u0.sigma_pp / (mw * mw) * sn * sn
        + u0.sigma_xx * cs * cs
        + branch.sign::<T>() * T::lit(2.0) * u0.sigma_xp / mw * sn * cs;
    alpha_from_radicand(s, radicand)
}

/// Free-motion α(t), the `ω₀ → 0` limit of [`ermakov_closed_form_ho`].
pub fn ermakov_free_motion<T: Scalar>(
    s: &SystemSpec<T>,
    u0: UncertaintyTriple<T>,
    t: T,
    branch: SignBranch,
) -> Result<T> {
    let m = s.mass;
    let radicand = u0.sigma_pp * t * t / (m * m) + u0.sigma_xx + branch.sign::<T>() * T::lit(2.0) * u0.sigma_xp * t / m;
    alpha_from_radicand(s, radicand)
}

/// Ermakov invariant `I = (m/2ℏ)[(η̇α − ηα̇)² + (η/α)²]`.
pub fn ermakov_invariant<T: Scalar>(s: &SystemSpec<T>, c: Centroid<T>, e: ErmakovState<T>) -> T {
    let a = c.eta_dot * e.alpha - c.eta * e.alpha_dot;
    let b = c.eta / e.alpha;
    s.mass / (T::lit(2.0) * s.hbar) * (a * a + b * b)
}

/// Coefficients of the quadratic invariant built from the linear invariants.
///
/// `c_cross` carries the sign of `σ_xp₀`; its magnitude is `|C|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadraticInvariantCoefficients<T> {
    pub a: T,
    pub b: T,
    pub c_cross: T,
}

impl<T: Scalar> QuadraticInvariantCoefficients<T> {
    /// `A·B − |C|² − 1/ℏ²`, zero for states satisfying Schrödinger–Robertson.
    pub fn defect(&self, hbar: T) -> T {
        self.a * self.b - self.c_cross * self.c_cross - (hbar * hbar).recip()
    }

    /// `|C| = √(AB − 1/ℏ²)`.
    pub fn c_abs_from_ab(&self, hbar: T) -> T {
        (self.a * self.b - (hbar * hbar).recip()).max(T::zero()).sqrt()
    }

    /// `α = √(mℏ) [A f₁² + B f₂² − 2C f₁f₂]^{1/2}` with `f_i` the fundamental pair.
    pub fn alpha(&self, s: &SystemSpec<T>, f1: T, f2: T, branch: SignBranch) -> Result<T> {
        let radicand = self.a * f1 * f1 + self.b * f2 * f2 - branch.sign::<T>() * T::lit(2.0) * self.c_cross * f1 * f2;
        if radicand < T::zero() {
            return Err(Error::NegativeRadicand { value: radicand.as_f64() });
        }
        Ok((s.mass * s.hbar).sqrt() * radicand.sqrt())
    }
}

/// `A = 2σ_p₀²/ℏ²`, `B = 2σ_x₀²/ℏ²`, `C = 2σ_xp₀/ℏ²`.
pub fn invariant_coefficients_from_initial<T: Scalar>(
    s: &SystemSpec<T>,
    u0: UncertaintyTriple<T>,
) -> QuadraticInvariantCoefficients<T> {
    let k = T::lit(2.0) / (s.hbar * s.hbar);
    QuadraticInvariantCoefficients { a: k * u0.sigma_pp, b: k * u0.sigma_xx, c_cross: k * u0.sigma_xp }
}

/// `(α̇, −ω₀²α + 1/α³)`.
pub fn field_at<T: Scalar>(omega0: T, alpha: T, alpha_dot: T) -> (T, T) {
    (alpha_dot, -omega0 * omega0 * alpha + alpha.powi(3).recip())
}

/// The stationary point `(1/√ω₀, 0)`.
pub fn fixed_point<T: Scalar>(omega0: T) -> Result<ErmakovState<T>> {
    if !(omega0 > T::zero()) {
        return Err(Error::Domain("free motion has no Ermakov fixed point".into()));
    }
    Ok(ErmakovState::new(omega0.sqrt().recip(), T::zero()))
}

/// Samples the Ermakov phase-plane field (`x` = α, `y` = α̇).
/// The α range must not contain 0.
pub fn vector_field<T: Scalar>(
    omega0: T,
    alpha_range: (T, T),
    alpha_dot_range: (T, T),
    n_grid: usize,
) -> Result<PlaneField<T>> {
    let (lo, hi) = (alpha_range.0.min(alpha_range.1), alpha_range.0.max(alpha_range.1));
    if lo <= T::zero() && hi >= T::zero() {
        return Err(Error::Domain("alpha range must not contain 0".into()));
    }
    PlaneField::sample(alpha_range, alpha_dot_range, n_grid, |a, ad| field_at(omega0, a, ad))
}
