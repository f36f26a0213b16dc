//! Gaussian Feynman kernel built from `λ`, and its action on Gaussian states.
//!
//! The kernel uses the `λ` trajectory started at `λ(0) = α₀`, `λ̇(0) = i/α₀`,
//! so `α₀λ_I` and `λ_R/α₀` are the usual fundamental solutions `u`, `v`
//! with `u(0) = 0`, `u̇(0) = 1`, `v(0) = 1`, `v̇(0) = 0`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::integrate::IntegratorConfig;
use crate::model::{Centroid, ErmakovState, GaussianWavePacket, LambdaState, RiccatiState, SystemSpec};
use crate::newton::integrate_lambda;
use crate::scalar::Scalar;

/// Relative size of `λ_I` below which the kernel is treated as focal.
pub const FOCAL_TOL: f64 = 1e-9;

/// Spatial finite-difference step used by [`verify_kernel_satisfies_tdse`].
pub const TDSE_DX: f64 = 1e-3;

/// `G(x, x′) = prefactor · exp(a_xx x² + a_xxp x x′ + a_pp x′²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianKernelParams<T> {
    pub prefactor: Complex<T>,
    pub a_xx: Complex<T>,
    pub a_xxp: Complex<T>,
    pub a_pp: Complex<T>,
}

impl<T: Scalar> GaussianKernelParams<T> {
    pub fn eval(&self, x: T, xp: T) -> Complex<T> {
        self.prefactor * (self.a_xx * x * x + self.a_xxp * x * xp + self.a_pp * xp * xp).exp()
    }
}

/// Initial packet `Ψ(x′, 0)` with width `α₀`, chirp `α̇₀`, momentum `p₀`
/// and centre `x_center`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InitialGaussian<T> {
    pub alpha0: T,
    #[serde(default)]
    pub alpha0_dot: T,
    pub p0: T,
    #[serde(default)]
    pub x_center: T,
}

impl<T: Scalar> InitialGaussian<T> {
    pub fn new(alpha0: T, p0: T) -> Self {
        InitialGaussian { alpha0, alpha0_dot: T::zero(), p0, x_center: T::zero() }
    }

    pub fn from_state(s: &SystemSpec<T>, c: Centroid<T>, e: ErmakovState<T>) -> Self {
        InitialGaussian { alpha0: e.alpha, alpha0_dot: e.alpha_dot, p0: c.momentum(s.mass), x_center: c.eta }
    }

    fn validate(&self) -> Result<()> {
        if !(self.alpha0 > T::zero()) || !self.alpha0.is_finite() {
            return Err(Error::Domain(format!("alpha0 = {} must be positive", self.alpha0)));
        }
        Ok(())
    }

    /// `C₀ = α̇₀/α₀ + i/α₀²`.
    pub fn riccati(&self) -> RiccatiState<T> {
        RiccatiState::new(self.alpha0_dot / self.alpha0, (self.alpha0 * self.alpha0).recip())
    }

    /// Normalized `Ψ(x′, 0)`.
    pub fn eval(&self, s: &SystemSpec<T>, xp: T) -> Complex<T> {
        self.form(s).eval(xp)
    }

    /// `Ψ(x′, 0)` as `exp(a x′² + b x′ + d)`.
    pub fn form(&self, s: &SystemSpec<T>) -> GaussianForm<T> {
        let k = Complex::new(T::zero(), s.mass / (T::lit(2.0) * s.hbar));
        let c0 = self.riccati().to_complex();
        let ip = Complex::new(T::zero(), self.p0 / s.hbar);
        let x0 = self.x_center;
        let norm = (s.mass / (T::PI() * s.hbar * self.alpha0 * self.alpha0)).powf(T::lit(0.25));
        GaussianForm {
            a: k * c0,
            b: -k * c0 * x0 * T::lit(2.0) + ip,
            d: k * c0 * x0 * x0 - ip * x0 + Complex::new(norm.ln(), T::zero()),
        }
    }
}

/// `ψ(x) = exp(a x² + b x + d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GaussianForm<T> {
    pub a: Complex<T>,
    pub b: Complex<T>,
    pub d: Complex<T>,
}

impl<T: Scalar> GaussianForm<T> {
    pub fn eval(&self, x: T) -> Complex<T> {
        (self.a * x * x + self.b * x + self.d).exp()
    }

    /// `∫|ψ|² dx`, requiring `Re a < 0`.
    pub fn norm(&self) -> Result<T> {
        let alpha = -T::lit(2.0) * self.a.re;
        if !(alpha > T::zero()) {
            return Err(Error::Domain("Gaussian form is not normalizable".into()));
        }
        let beta = T::lit(2.0) * self.b.re;
        Ok((T::PI() / alpha).sqrt() * (T::lit(2.0) * self.d.re + beta * beta / (T::lit(4.0) * alpha)).exp())
    }

    /// Reads `C`, `η` and `⟨p⟩` off the exponent.
    pub fn to_packet(&self, s: &SystemSpec<T>) -> Result<GaussianWavePacket<T>> {
        if !(self.a.re < T::zero()) {
            return Err(Error::Domain("Gaussian form is not normalizable".into()));
        }
        let two = T::lit(2.0);
        let c = self.a * Complex::new(T::zero(), -two * s.hbar / s.mass);
        let eta = -self.b.re / (two * self.a.re);
        let p = s.hbar * (self.b.im + two * self.a.im * eta);
        Ok(GaussianWavePacket {
            centroid: Centroid::from_means(eta, p, s.mass),
            riccati: RiccatiState::from_complex(c),
        })
    }
}

/// Kernel coefficients from the kernel `λ` at time `t` and the initial width `α₀`.
pub fn kernel_params<T: Scalar>(s: &SystemSpec<T>, l: LambdaState<T>, alpha0: T) -> Result<GaussianKernelParams<T>> {
    if !(alpha0 > T::zero()) {
        return Err(Error::Domain(format!("alpha0 = {alpha0} must be positive")));
    }
    let modulus = l.modulus_sq().sqrt();
    if !(l.lambda_i.abs() >= T::lit(FOCAL_TOL) * modulus) || modulus == T::zero() {
        return Err(Error::FocalPoint { lambda_i: l.lambda_i.as_f64() });
    }
    let two = T::lit(2.0);
    let k = Complex::new(T::zero(), s.mass / (two * s.hbar));
    let li = l.lambda_i;
    let pre = Complex::new(s.mass, T::zero()) / Complex::new(T::zero(), two * T::PI() * s.hbar * alpha0 * li);
    Ok(GaussianKernelParams {
        prefactor: pre.sqrt(),
        a_xx: k * (l.lambda_i_dot / li),
        a_xxp: -k * two / (li * alpha0),
        a_pp: k * (l.lambda_r / (li * alpha0 * alpha0)),
    })
}

/// Kernel `λ` at `t` for constant `ω₀ ≥ 0`.
pub fn kernel_lambda_closed<T: Scalar>(omega0: T, alpha0: T, t: T) -> LambdaState<T> {
    if omega0 == T::zero() {
        return LambdaState::new(alpha0, t / alpha0, T::zero(), alpha0.recip());
    }
    let (sn, cs) = (omega0 * t).sin_cos();
    LambdaState::new(alpha0 * cs, sn / (omega0 * alpha0), -alpha0 * omega0 * sn, cs / alpha0)
}

/// Kernel `λ` along `t_grid` for any profile.
pub fn kernel_lambda_trajectory<T: Scalar>(
    s: &SystemSpec<T>,
    alpha0: T,
    t_grid: &[T],
    cfg: &IntegratorConfig<T>,
) -> Result<Vec<LambdaState<T>>> {
    integrate_lambda(s, LambdaState::new(alpha0, T::zero(), T::zero(), alpha0.recip()), t_grid, cfg)
}

/// `∫ G(x, x′) Ψ(x′, 0) dx′` in closed form.
pub fn apply_kernel<T: Scalar>(
    s: &SystemSpec<T>,
    init: &InitialGaussian<T>,
    l: LambdaState<T>,
) -> Result<GaussianForm<T>> {
    init.validate()?;
    let g = kernel_params(s, l, init.alpha0)?;
    let psi = init.form(s);
    // Exponent in x′: −P x′² + (q1 x + q0) x′ + rest.
    let p = -(g.a_pp + psi.a);
    if !(p.re > T::zero()) {
        return Err(Error::Domain("kernel integral does not converge".into()));
    }
    let four = T::lit(4.0);
    let q1 = g.a_xxp;
    let q0 = psi.b;
    let scale = (Complex::new(T::PI(), T::zero()) / p).sqrt() * g.prefactor;
    Ok(GaussianForm {
        a: g.a_xx + q1 * q1 / (p * four),
        b: q1 * q0 / (p * T::lit(2.0)),
        d: psi.d + q0 * q0 / (p * four) + scale.ln(),
    })
}

/// Packet at time `t` obtained from the kernel `λ` at `t`.
pub fn evolve_via_kernel<T: Scalar>(
    s: &SystemSpec<T>,
    init: &InitialGaussian<T>,
    l: LambdaState<T>,
) -> Result<GaussianWavePacket<T>> {
    apply_kernel(s, init, l)?.to_packet(s)
}

/// Maximum of `|iℏ∂G/∂t − HG| / |G|` over `xs × x_primes` at the interior
/// samples of a kernel trajectory on a uniform time grid.
///
/// Both derivatives are fourth-order centered differences: five neighbouring
/// time samples for `∂G/∂t`, five points spaced [`TDSE_DX`] for `∂²G/∂x²`.
pub fn verify_kernel_satisfies_tdse<T: Scalar>(
    s: &SystemSpec<T>,
    alpha0: T,
    times: &[T],
    l_traj: &[LambdaState<T>],
    xs: &[T],
    x_primes: &[T],
) -> Result<T> {
    let n = times.len();
    if n < 5 || l_traj.len() != n {
        return Err(Error::GridTooCoarse { points: n.min(l_traj.len()), required: 5 });
    }
    crate::integrate::check_grid(times)?;
    let dt = (times[n - 1] - times[0]) / T::from_usize(n - 1).unwrap();
    let dx = T::lit(TDSE_DX);
    let (two, eight, twelve, sixteen, thirty) = (T::lit(2.0), T::lit(8.0), T::lit(12.0), T::lit(16.0), T::lit(30.0));
    let i_hbar = Complex::new(T::zero(), s.hbar);
    let kin = s.hbar * s.hbar / (two * s.mass);
    let params = l_traj.iter().map(|&l| kernel_params(s, l, alpha0)).collect::<Result<Vec<_>>>()?;
    let mut worst = T::zero();
    for k in 2..n - 2 {
        let g = &params[k];
        let w2 = s.omega.omega_sq(times[k]);
        for &xp in x_primes {
            for &x in xs {
                let at = |j: usize| params[j].eval(x, xp);
                let dg_dt = (at(k - 2) - at(k - 1) * eight + at(k + 1) * eight - at(k + 2)) / (twelve * dt);
                let gx = |d: T| g.eval(x + d, xp);
                let g0 = gx(T::zero());
                let d2g = (-gx(-two * dx) + gx(-dx) * sixteen - g0 * thirty + gx(dx) * sixteen - gx(two * dx))
                    / (twelve * dx * dx);
                let h_g = -d2g * kin + g0 * (s.mass * w2 * x * x / two);
                let r = (i_hbar * dg_dt - h_g).norm() / g0.norm();
                if !(r <= worst) {
                    worst = r;
                }
            }
        }
    }
    Ok(worst)
}
