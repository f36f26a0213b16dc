//! Wigner function of a Gaussian packet on phase space.

use std::io::{self, Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{linspace, Centroid, SystemSpec, UncertaintyTriple};
use crate::scalar::Scalar;

/// `W(x, p) = (1/πℏ) exp{−(2/ℏ²)[σ_p²x̃² − 2σ_xp x̃p̃ + σ_x²p̃²]}`.
pub fn wigner_value<T: Scalar>(s: &SystemSpec<T>, c: Centroid<T>, u: UncertaintyTriple<T>, x: T, p: T) -> T {
    let xt = x - c.position();
    let pt = p - c.momentum(s.mass);
    let q = u.sigma_pp * xt * xt - T::lit(2.0) * u.sigma_xp * xt * pt + u.sigma_xx * pt * pt;
    (-T::lit(2.0) * q / (s.hbar * s.hbar)).exp() / (T::PI() * s.hbar)
}

/// Centroid and second moments at one instant.
pub type PhaseState<T> = (Centroid<T>, UncertaintyTriple<T>);

/// Phase-space window of a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Extent<T> {
    /// `±k` standard deviations around the centroid, per axis.
    Sigmas {
        k: T,
    },
    Fixed {
        x_min: T,
        x_max: T,
        p_min: T,
        p_max: T,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec<T> {
    pub n_x: usize,
    pub n_p: usize,
    pub extent: Extent<T>,
}

/// Default half-width in standard deviations. At `±5σ` the two-axis tail
/// mass is `1.15e-6` and the truncated variance is low by `1.5e-5`.
pub const DEFAULT_SIGMAS: f64 = 6.0;
pub const DEFAULT_POINTS: usize = 201;

impl<T: Scalar> Default for GridSpec<T> {
    fn default() -> Self {
        GridSpec { n_x: DEFAULT_POINTS, n_p: DEFAULT_POINTS, extent: Extent::Sigmas { k: T::lit(DEFAULT_SIGMAS) } }
    }
}

impl<T: Scalar> GridSpec<T> {
    pub fn fixed(n: usize, x: (T, T), p: (T, T)) -> Self {
        GridSpec { n_x: n, n_p: n, extent: Extent::Fixed { x_min: x.0, x_max: x.1, p_min: p.0, p_max: p.1 } }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_x < 2 || self.n_p < 2 {
            return Err(Error::GridTooCoarse { points: self.n_x.min(self.n_p), required: 2 });
        }
        let ok = match self.extent {
            Extent::Sigmas { k } => k > T::zero() && k.is_finite(),
            Extent::Fixed { x_min, x_max, p_min, p_max } => {
                x_max > x_min && p_max > p_min && [x_min, x_max, p_min, p_max].iter().all(|v| v.is_finite())
            }
        };
        if !ok {
            return Err(Error::InvalidConfig("grid extents must be finite and positive".into()));
        }
        Ok(())
    }

    fn window(&self, s: &SystemSpec<T>, c: Centroid<T>, u: UncertaintyTriple<T>) -> (T, T, T, T) {
        match self.extent {
            Extent::Sigmas { k } => {
                let (x0, p0) = (c.position(), c.momentum(s.mass));
                let (hx, hp) = (k * u.sigma_xx.sqrt(), k * u.sigma_pp.sqrt());
                (x0 - hx, x0 + hx, p0 - hp, p0 + hp)
            }
            Extent::Fixed { x_min, x_max, p_min, p_max } => (x_min, x_max, p_min, p_max),
        }
    }
}

/// `W` sampled on a uniform grid; `values[ix * n_p + ip]` is `W(x_ix, p_ip)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseSpaceGrid<T> {
    pub x_min: T,
    pub x_max: T,
    pub n_x: usize,
    pub p_min: T,
    pub p_max: T,
    pub n_p: usize,
    pub values: Vec<T>,
}

impl<T: Scalar> PhaseSpaceGrid<T> {
    pub fn xs(&self) -> Vec<T> {
        linspace(self.x_min, self.x_max, self.n_x)
    }

    pub fn ps(&self) -> Vec<T> {
        linspace(self.p_min, self.p_max, self.n_p)
    }

    pub fn dx(&self) -> T {
        (self.x_max - self.x_min) / T::from_usize(self.n_x - 1).unwrap()
    }

    pub fn dp(&self) -> T {
        (self.p_max - self.p_min) / T::from_usize(self.n_p - 1).unwrap()
    }

    pub fn at(&self, ix: usize, ip: usize) -> T {
        self.values[ix * self.n_p + ip]
    }

    /// `∑ W Δx Δp`.
    pub fn normalization(&self) -> T {
        self.values.iter().fold(T::zero(), |a, &w| a + w) * self.dx() * self.dp()
    }

    /// Grid coordinates of the largest sample.
    pub fn argmax(&self) -> (T, T) {
        let (k, _) =
            self.values
                .iter()
                .enumerate()
                .fold((0, T::neg_infinity()), |best, (k, &w)| if w > best.1 { (k, w) } else { best });
        (self.xs()[k / self.n_p], self.ps()[k % self.n_p])
    }

    /// One `x,p,W` line per sample, `x` outermost.
    pub fn write_csv<W: Write>(&self, mut w: W) -> io::Result<()> {
        let (xs, ps) = (self.xs(), self.ps());
        writeln!(w, "x,p,W")?;
        for (ix, x) in xs.iter().enumerate() {
            for (ip, p) in ps.iter().enumerate() {
                writeln!(w, "{:.16e},{:.16e},{:.16e}", x.as_f64(), p.as_f64(), self.at(ix, ip).as_f64())?;
            }
        }
        Ok(())
    }

    /// Little-endian `u64 n_x, u64 n_p, f64 x_min, x_max, p_min, p_max`,
    /// then `n_x·n_p` `f64` values row-major in `x`.
    pub fn write_binary<W: Write>(&self, mut w: W) -> io::Result<()> {
        w.write_all(&(self.n_x as u64).to_le_bytes())?;
        w.write_all(&(self.n_p as u64).to_le_bytes())?;
        for v in [self.x_min, self.x_max, self.p_min, self.p_max] {
            w.write_all(&v.as_f64().to_le_bytes())?;
        }
        for v in &self.values {
            w.write_all(&v.as_f64().to_le_bytes())?;
        }
        Ok(())
    }
}

impl PhaseSpaceGrid<f64> {
    pub fn read_binary<R: Read>(mut r: R) -> io::Result<Self> {
        let mut b8 = [0u8; 8];
        let mut next_u64 = |r: &mut R| -> io::Result<u64> {
            r.read_exact(&mut b8)?;
            Ok(u64::from_le_bytes(b8))
        };
        let n_x = next_u64(&mut r)? as usize;
        let n_p = next_u64(&mut r)? as usize;
        let mut ext = [0f64; 4];
        for e in &mut ext {
            *e = f64::from_bits(next_u64(&mut r)?);
        }
        let count =
            n_x.checked_mul(n_p).ok_or_else(|| io::Error::new(io::ErrorKind::InvalidData, "grid size overflows"))?;
        let mut values = Vec::with_capacity(count);
        for _ in 0..count {
            values.push(f64::from_bits(next_u64(&mut r)?));
        }
        Ok(PhaseSpaceGrid { x_min: ext[0], x_max: ext[1], n_x, p_min: ext[2], p_max: ext[3], n_p, values })
    }
}

/// Evaluates `W` on the grid, rows in parallel.
pub fn wigner_grid<T: Scalar>(
    s: &SystemSpec<T>,
    c: Centroid<T>,
    u: UncertaintyTriple<T>,
    spec: &GridSpec<T>,
) -> Result<PhaseSpaceGrid<T>> {
    spec.validate()?;
    u.check()?;
    let (x_min, x_max, p_min, p_max) = spec.window(s, c, u);
    let xs = linspace(x_min, x_max, spec.n_x);
    let ps = linspace(p_min, p_max, spec.n_p);
    let mut values = vec![T::zero(); spec.n_x * spec.n_p];
    values.par_chunks_mut(spec.n_p).zip(xs.par_iter()).for_each(|(row, &x)| {
        for (w, &p) in row.iter_mut().zip(&ps) {
            *w = wigner_value(s, c, u, x, p);
        }
    });
    Ok(PhaseSpaceGrid { x_min, x_max, n_x: spec.n_x, p_min, p_max, n_p: spec.n_p, values })
}

/// Position and momentum densities of a grid with their first two moments.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Marginals<T> {
    pub xs: Vec<T>,
    pub position: Vec<T>,
    pub ps: Vec<T>,
    pub momentum: Vec<T>,
    pub mean_x: T,
    pub var_x: T,
    pub mean_p: T,
    pub var_p: T,
}

fn moments<T: Scalar>(axis: &[T], density: &[T], step: T) -> (T, T) {
    let mass = density.iter().fold(T::zero(), |a, &d| a + d) * step;
    let mean = axis.iter().zip(density).fold(T::zero(), |a, (&x, &d)| a + x * d) * step / mass;
    let var = axis.iter().zip(density).fold(T::zero(), |a, (&x, &d)| a + (x - mean) * (x - mean) * d) * step / mass;
    (mean, var)
}

/// `∫W dp` and `∫W dx` by Riemann sums.
pub fn marginals<T: Scalar>(grid: &PhaseSpaceGrid<T>) -> Marginals<T> {
    let (dx, dp) = (grid.dx(), grid.dp());
    let position: Vec<T> =
        grid.values.chunks(grid.n_p).map(|row| row.iter().fold(T::zero(), |a, &w| a + w) * dp).collect();
    let momentum: Vec<T> =
        (0..grid.n_p).map(|ip| (0..grid.n_x).fold(T::zero(), |a, ix| a + grid.at(ix, ip)) * dx).collect();
    let (xs, ps) = (grid.xs(), grid.ps());
    let (mean_x, var_x) = moments(&xs, &position, dx);
    let (mean_p, var_p) = moments(&ps, &momentum, dp);
    Marginals { xs, position, ps, momentum, mean_x, var_x, mean_p, var_p }
}

/// Minimum number of trajectory samples for [`continuity_residual`].
pub const MIN_CONTINUITY_SAMPLES: usize = 5;

/// Maximum over the grid of `|∂W/∂t + (p/m)∂W/∂x − mω²x ∂W/∂p| · πℏ`.
///
/// `∂W/∂t` is a five-point centered difference along the sampled trajectory
/// (uniform `times`); phase-space gradients are analytic. The grid follows
/// the state at each evaluated time.
pub fn continuity_residual<T: Scalar>(
    s: &SystemSpec<T>,
    times: &[T],
    traj: &[PhaseState<T>],
    spec: &GridSpec<T>,
) -> Result<T> {
    let n = times.len();
    if n < MIN_CONTINUITY_SAMPLES || traj.len() != n {
        return Err(Error::GridTooCoarse { points: n.min(traj.len()), required: MIN_CONTINUITY_SAMPLES });
    }
    crate::integrate::check_grid(times)?;
    spec.validate()?;
    let h = (times[n - 1] - times[0]) / T::from_usize(n - 1).unwrap();
    let (eight, twelve, two) = (T::lit(8.0), T::lit(12.0), T::lit(2.0));
    let hb2 = s.hbar * s.hbar;
    let mut worst = T::zero();
    for k in 2..n - 2 {
        let (c, u) = traj[k];
        u.check()?;
        let (x_min, x_max, p_min, p_max) = spec.window(s, c, u);
        let w2 = s.omega.omega_sq(times[k]);
        let (x0, p0) = (c.position(), c.momentum(s.mass));
        let row_worst = linspace(x_min, x_max, spec.n_x)
            .into_par_iter()
            .map(|x| {
                let mut m = T::zero();
                for p in linspace(p_min, p_max, spec.n_p) {
                    let w_at = |j: usize| wigner_value(s, traj[j].0, traj[j].1, x, p);
                    let dw_dt = (w_at(k - 2) - eight * w_at(k - 1) + eight * w_at(k + 1) - w_at(k + 2)) / (twelve * h);
                    let w = wigner_value(s, c, u, x, p);
                    let (xt, pt) = (x - x0, p - p0);
                    let dw_dx = -w * two * two * (u.sigma_pp * xt - u.sigma_xp * pt) / hb2;
                    let dw_dp = -w * two * two * (u.sigma_xx * pt - u.sigma_xp * xt) / hb2;
                    let r = (dw_dt + p / s.mass * dw_dx - s.mass * w2 * x * dw_dp).abs();
                    if !(r <= m) {
                        m = r;
                    }
                }
                m
            })
            .reduce(T::zero, |a, b| if b > a || b.is_nan() { b } else { a });
        if !(row_worst <= worst) {
            worst = row_worst;
        }
    }
    Ok(worst * T::PI() * s.hbar)
}
