//! Domain types and the maps between the four state representations.
//!
//! Conventions: the wave packet is
//! `Ψ ∝ exp{ i (m/2ℏ) C(t) (x-η)² + i ⟨p⟩ (x-η)/ℏ }`, so `C_I > 0` is
//! required for normalizability, and `α = √(2mσ_x²/ℏ)` with
//! `C = α̇/α + i/α²`.

use num_complex::Complex;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::profile::FrequencyProfile;
use crate::scalar::Scalar;

/// Mass, reduced Planck constant and the frequency profile of
/// `H = p²/2m + mω²(t)x²/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SystemSpec<T> {
    pub mass: T,
    pub hbar: T,
    pub omega: FrequencyProfile<T>,
}

impl<T: Scalar> SystemSpec<T> {
    pub fn new(mass: T, hbar: T, omega: FrequencyProfile<T>) -> Result<Self> {
        let s = SystemSpec { mass, hbar, omega };
        s.validate()?;
        Ok(s)
    }

    /// `m = ℏ = 1` with a constant frequency.
    pub fn natural(omega0: T) -> Result<Self> {
        Self::new(T::one(), T::one(), FrequencyProfile::constant(omega0)?)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mass > T::zero()) || !self.mass.is_finite() {
            return Err(Error::Domain(format!("mass {} must be positive", self.mass)));
        }
        if !(self.hbar > T::zero()) || !self.hbar.is_finite() {
            return Err(Error::Domain(format!("hbar {} must be positive", self.hbar)));
        }
        self.omega.validate()
    }

    /// Position variance of the coherent state of frequency `omega`: `ℏ/2mω`.
    pub fn coherent_sigma_xx(&self, omega: T) -> T {
        self.hbar / (T::lit(2.0) * self.mass * omega)
    }

    /// Momentum variance of the coherent state of frequency `omega`: `ℏmω/2`.
    pub fn coherent_sigma_pp(&self, omega: T) -> T {
        self.hbar * self.mass * omega / T::lit(2.0)
    }

    /// Initial moments of the coherent state belonging to frequency `omega`.
    pub fn coherent_state(&self, omega: T) -> UncertaintyTriple<T> {
        UncertaintyTriple {
            sigma_xx: self.coherent_sigma_xx(omega),
            sigma_pp: self.coherent_sigma_pp(omega),
            sigma_xp: T::zero(),
        }
    }
}

/// Complex width variable `C = C_R + i C_I` of the Riccati equation.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct RiccatiState<T> {
    pub c_r: T,
    pub c_i: T,
}

impl<T: Scalar> RiccatiState<T> {
    pub fn new(c_r: T, c_i: T) -> Self {
        RiccatiState { c_r, c_i }
    }

    pub fn from_complex(c: Complex<T>) -> Self {
        RiccatiState { c_r: c.re, c_i: c.im }
    }

    pub fn to_complex(self) -> Complex<T> {
        Complex::new(self.c_r, self.c_i)
    }

    pub fn is_physical(&self) -> bool {
        self.c_i > T::zero()
    }
}

/// Real Ermakov variable and its time derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ErmakovState<T> {
    pub alpha: T,
    pub alpha_dot: T,
}

impl<T: Scalar> ErmakovState<T> {
    pub fn new(alpha: T, alpha_dot: T) -> Self {
        ErmakovState { alpha, alpha_dot }
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.alpha > T::zero() && self.alpha.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!("alpha = {} must be positive", self.alpha)))
        }
    }
}

/// Wave-packet maximum `η` and its velocity; `⟨x⟩ = η`, `⟨p⟩ = mη̇`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Centroid<T> {
    pub eta: T,
    pub eta_dot: T,
}

impl<T: Scalar> Centroid<T> {
    pub fn new(eta: T, eta_dot: T) -> Self {
        Centroid { eta, eta_dot }
    }

    /// Centroid from the phase-space means `(⟨x⟩, ⟨p⟩)`.
    pub fn from_means(x: T, p: T, mass: T) -> Self {
        Centroid { eta: x, eta_dot: p / mass }
    }

    pub fn position(&self) -> T {
        self.eta
    }

    pub fn momentum(&self, mass: T) -> T {
        mass * self.eta_dot
    }

    /// `⟨p⟩²/2m + mω²⟨x⟩²/2`.
    pub fn classical_energy(&self, mass: T, omega: T) -> T {
        let half = T::lit(0.5);
        half * mass * self.eta_dot * self.eta_dot + half * mass * omega * omega * self.eta * self.eta
    }
}

/// Second moments `(σ_x², σ_p², σ_xp)`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct UncertaintyTriple<T> {
    pub sigma_xx: T,
    pub sigma_pp: T,
    pub sigma_xp: T,
}

impl<T: Scalar> UncertaintyTriple<T> {
    pub fn new(sigma_xx: T, sigma_pp: T, sigma_xp: T) -> Self {
        UncertaintyTriple { sigma_xx, sigma_pp, sigma_xp }
    }

    /// `σ_x²σ_p² − σ_xp²`.
    pub fn sr_product(&self) -> T {
        self.sigma_xx * self.sigma_pp - self.sigma_xp * self.sigma_xp
    }

    /// `(σ_x²σ_p² − σ_xp²) − ℏ²/4`.
    pub fn sr_defect(&self, hbar: T) -> T {
        self.sr_product() - hbar * hbar / T::lit(4.0)
    }

    /// Relative Schrödinger–Robertson defect `|SR − ℏ²/4| / (ℏ²/4)`.
    pub fn sr_relative_defect(&self, hbar: T) -> T {
        let q = hbar * hbar / T::lit(4.0);
        (self.sr_product() - q).abs() / q
    }

    pub(crate) fn check(&self) -> Result<()> {
        if self.sigma_xx > T::zero() && self.sigma_pp > T::zero() && self.sigma_xp.is_finite() {
            Ok(())
        } else {
            Err(Error::Domain(format!(
                "variances must be positive (sigma_xx = {}, sigma_pp = {})",
                self.sigma_xx, self.sigma_pp
            )))
        }
    }

    /// Checks positivity and the Schrödinger–Robertson equality to `rel_tol`.
    pub fn validate(&self, hbar: T, rel_tol: T) -> Result<()> {
        self.check()?;
        let d = self.sr_relative_defect(hbar);
        if d > rel_tol {
            return Err(Error::Domain(format!(
                "moments violate sigma_xx*sigma_pp - sigma_xp^2 = hbar^2/4 (relative defect {d})"
            )));
        }
        Ok(())
    }
}

/// `λ = λ_R + iλ_I` of the complex Newton equation and its derivative.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LambdaState<T> {
    pub lambda_r: T,
    pub lambda_i: T,
    pub lambda_r_dot: T,
    pub lambda_i_dot: T,
}

impl<T: Scalar> LambdaState<T> {
    pub fn new(lambda_r: T, lambda_i: T, lambda_r_dot: T, lambda_i_dot: T) -> Self {
        LambdaState { lambda_r, lambda_i, lambda_r_dot, lambda_i_dot }
    }

    pub fn from_complex(lambda: Complex<T>, lambda_dot: Complex<T>) -> Self {
        LambdaState {
            lambda_r: lambda.re,
            lambda_i: lambda.im,
            lambda_r_dot: lambda_dot.re,
            lambda_i_dot: lambda_dot.im,
        }
    }

    pub fn lambda(&self) -> Complex<T> {
        Complex::new(self.lambda_r, self.lambda_i)
    }

    pub fn lambda_dot(&self) -> Complex<T> {
        Complex::new(self.lambda_r_dot, self.lambda_i_dot)
    }

    /// `λ̇_I λ_R − λ_I λ̇_R`.
    pub fn wronskian(&self) -> T {
        self.lambda_i_dot * self.lambda_r - self.lambda_i * self.lambda_r_dot
    }

    /// `|λ|²`, equal to `α²` for consistently initialized states.
    pub fn modulus_sq(&self) -> T {
        self.lambda_r * self.lambda_r + self.lambda_i * self.lambda_i
    }

    /// Polar angle `φ = atan2(λ_I, λ_R)` in `(-π, π]`.
    pub fn phase(&self) -> T {
        self.lambda_i.atan2(self.lambda_r)
    }

    /// `C = λ̇/λ`.
    pub fn riccati(&self) -> RiccatiState<T> {
        RiccatiState::from_complex(self.lambda_dot() / self.lambda())
    }

    /// `λ(0) = α₀`, `λ̇(0) = C₀ α₀`: the generator of the Riccati trajectory
    /// starting at `C₀ = α̇₀/α₀ + i/α₀²`, with unit Wronskian.
    pub fn from_ermakov(e: ErmakovState<T>) -> Result<Self> {
        e.check()?;
        Ok(LambdaState {
            lambda_r: e.alpha,
            lambda_i: T::zero(),
            lambda_r_dot: e.alpha_dot,
            lambda_i_dot: e.alpha.recip(),
        })
    }
}

/// Gaussian packet shape: centroid plus complex width.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct GaussianWavePacket<T> {
    pub centroid: Centroid<T>,
    pub riccati: RiccatiState<T>,
}

/// Samples of a planar vector field on a uniform grid.
///
/// `values[iy * xs.len() + ix]` is the field at `(xs[ix], ys[iy])`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaneField<T> {
    pub xs: Vec<T>,
    pub ys: Vec<T>,
    pub values: Vec<(T, T)>,
}

impl<T: Scalar> PlaneField<T> {
    pub(crate) fn sample<F>(x_range: (T, T), y_range: (T, T), n_grid: usize, f: F) -> Result<Self>
    where
        F: Fn(T, T) -> (T, T),
    {
        if n_grid < 2 {
            return Err(Error::GridTooCoarse { points: n_grid, required: 2 });
        }
        let xs = linspace(x_range.0, x_range.1, n_grid);
        let ys = linspace(y_range.0, y_range.1, n_grid);
        let values = ys.iter().flat_map(|&y| xs.iter().map(move |&x| (x, y))).map(|(x, y)| f(x, y)).collect();
        Ok(PlaneField { xs, ys, values })
    }

    pub fn at(&self, ix: usize, iy: usize) -> (T, T) {
        self.values[iy * self.xs.len() + ix]
    }
}

/// `n` uniformly spaced points from `a` to `b` inclusive; endpoints are exact.
pub fn linspace<T: Scalar>(a: T, b: T, n: usize) -> Vec<T> {
    match n {
        0 => Vec::new(),
        1 => vec![a],
        _ => {
            let last = T::from_usize(n - 1).unwrap();
            (0..n).map(|i| if i == n - 1 { b } else { a + (b - a) * T::from_usize(i).unwrap() / last }).collect()
        }
    }
}

/// `C_R = α̇/α`, `C_I = 1/α²`.
pub fn riccati_from_ermakov<T: Scalar>(e: ErmakovState<T>) -> Result<RiccatiState<T>> {
    e.check()?;
    Ok(RiccatiState { c_r: e.alpha_dot / e.alpha, c_i: (e.alpha * e.alpha).recip() })
}

/// Inverse of [`riccati_from_ermakov`]: `α = 1/√C_I`, `α̇ = C_R/√C_I`.
pub fn ermakov_from_riccati<T: Scalar>(c: RiccatiState<T>) -> Result<ErmakovState<T>> {
    if !(c.c_i > T::zero()) {
        return Err(Error::UnphysicalState { c_i: c.c_i.as_f64() });
    }
    let root = c.c_i.sqrt();
    Ok(ErmakovState { alpha: root.recip(), alpha_dot: c.c_r / root })
}

/// Moments of the packet with Ermakov state `e`:
/// `σ_x² = (ℏ/2m)α²`, `σ_p² = (mℏ/2)(α̇² + 1/α²)`, `σ_xp = (ℏ/2)αα̇`.
pub fn uncertainties_from_ermakov<T: Scalar>(s: &SystemSpec<T>, e: ErmakovState<T>) -> Result<UncertaintyTriple<T>> {
    e.check()?;
    let half_hbar = s.hbar / T::lit(2.0);
    let a2 = e.alpha * e.alpha;
    Ok(UncertaintyTriple {
        sigma_xx: half_hbar / s.mass * a2,
        sigma_pp: half_hbar * s.mass * (e.alpha_dot * e.alpha_dot + a2.recip()),
        sigma_xp: half_hbar * e.alpha * e.alpha_dot,
    })
}

/// `α₀ = √(2m/ℏ) σ_x`, `α̇₀ = √(2/ℏm) σ_xp/σ_x`.
///
/// `σ_p²` is not consulted; it is fixed by the Schrödinger–Robertson
/// equality for Gaussian states.
pub fn ermakov_from_uncertainties<T: Scalar>(s: &SystemSpec<T>, u: UncertaintyTriple<T>) -> Result<ErmakovState<T>> {
    u.check()?;
    let two = T::lit(2.0);
    let sigma_x = u.sigma_xx.sqrt();
    Ok(ErmakovState {
        alpha: (two * s.mass / s.hbar).sqrt() * sigma_x,
        alpha_dot: (two / (s.hbar * s.mass)).sqrt() * u.sigma_xp / sigma_x,
    })
}

/// `C = σ_xp/(mσ_x²) + iℏ/(2mσ_x²)`.
pub fn riccati_from_uncertainties<T: Scalar>(s: &SystemSpec<T>, u: UncertaintyTriple<T>) -> Result<RiccatiState<T>> {
    u.check()?;
    let denom = s.mass * u.sigma_xx;
    Ok(RiccatiState { c_r: u.sigma_xp / denom, c_i: s.hbar / (T::lit(2.0) * denom) })
}

/// Moments from the Riccati variable: `σ_x² = ℏ/(2mC_I)`,
/// `σ_p² = (mℏ/2)|C|²/C_I`, `σ_xp = (ℏ/2)C_R/C_I`.
pub fn uncertainties_from_riccati<T: Scalar>(s: &SystemSpec<T>, c: RiccatiState<T>) -> Result<UncertaintyTriple<T>> {
    if !(c.c_i > T::zero()) {
        return Err(Error::UnphysicalState { c_i: c.c_i.as_f64() });
    }
    let half_hbar = s.hbar / T::lit(2.0);
    Ok(UncertaintyTriple {
        sigma_xx: half_hbar / (s.mass * c.c_i),
        sigma_pp: half_hbar * s.mass * (c.c_r * c.c_r + c.c_i * c.c_i) / c.c_i,
        sigma_xp: half_hbar * c.c_r / c.c_i,
    })
}
