//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on failure.

use std::f64::consts::PI;
use std::path::PathBuf;
use std::time::{Duration, Instant};

use num_complex::Complex64;
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use riccati_dynamics::ermakov::{self, integrate_ermakov};
use riccati_dynamics::newton::integrate_lambda;
use riccati_dynamics::propagator::{
    apply_kernel, kernel_lambda_trajectory, kernel_params, verify_kernel_satisfies_tdse, InitialGaussian,
};
use riccati_dynamics::riccati::{self, integrate_riccati};
use riccati_dynamics::scenario::{evolve, propagate, Scenario};
use riccati_dynamics::uncertainty::{correlation_coefficient, integrate_uncertainty_system, position_squeezing_level};
use riccati_dynamics::wigner::{marginals, wigner_grid, wigner_value, GridSpec};
use riccati_dynamics::{
    ermakov_from_uncertainties, linspace, uncertainties_from_ermakov, uncertainties_from_riccati, Centroid64,
    ErmakovState64, FrequencyProfile, IntegratorConfig64, LambdaState64, RiccatiState64, SystemSpec64,
    UncertaintyTriple64,
};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn scenario_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../scenarios")
}

fn bundled() -> Vec<Scenario> {
    let mut paths: Vec<_> = std::fs::read_dir(scenario_dir())
        .expect("scenarios directory")
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    paths.sort();
    paths.iter().map(|p| Scenario::from_path(p).expect("bundled scenario parses")).collect()
}

fn load(name: &str) -> Scenario {
    Scenario::from_path(&scenario_dir().join(format!("{name}.toml"))).expect("bundled scenario parses")
}

fn tight() -> IntegratorConfig64 {
    IntegratorConfig64 { abs_tol: 1e-12, rel_tol: 1e-12, ..Default::default() }
}

fn ensure(ok: bool, msg: String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg)
    }
}

fn err<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// The squeezed example: m = ℏ = ω₀ = 1, σ_x₀² = 1, σ_p₀² = 1/4, σ_xp₀ = 0.
fn squeezed() -> (SystemSpec64, UncertaintyTriple64) {
    (SystemSpec64::natural(1.0).unwrap(), UncertaintyTriple64::new(1.0, 0.25, 0.0))
}

fn sr_conservation() -> Outcome {
    let mut worst = (0.0, String::new());
    let mut slowest = (Duration::ZERO, String::new());
    for sc in bundled() {
        let start = Instant::now();
        let ev = evolve(&sc).map_err(err)?;
        let dt = start.elapsed();
        if ev.summary.max_sr_violation > worst.0 {
            worst = (ev.summary.max_sr_violation, sc.name.clone());
        }
        if dt > slowest.0 {
            slowest = (dt, sc.name.clone());
        }
        ensure(
            ev.summary.max_sr_violation < 1e-9,
            format!("{}: SR drift {:.3e}", sc.name, ev.summary.max_sr_violation),
        )?;
        ensure(dt < Duration::from_secs(1), format!("{}: took {dt:?}", sc.name))?;
    }
    Ok(format!("max SR drift {:.2e} ({}), slowest {:?} ({})", worst.0, worst.1, slowest.0, slowest.1))
}

fn ermakov_invariant() -> Outcome {
    let mut worst = (0.0, String::new());
    for sc in bundled() {
        let ev = evolve(&sc).map_err(err)?;
        if ev.summary.invariant_drift > worst.0 {
            worst = (ev.summary.invariant_drift, sc.name.clone());
        }
        ensure(
            ev.summary.invariant_drift < 1e-8,
            format!("{}: invariant drift {:.3e}", sc.name, ev.summary.invariant_drift),
        )?;
    }
    // The piecewise scenario must change its classical energy while I holds.
    let sc = load("piecewise");
    let ev = evolve(&sc).map_err(err)?;
    let s = sc.system().map_err(err)?;
    let energy =
        |r: &riccati_dynamics::scenario::Row| 0.5 * r.eta_dot * r.eta_dot + 0.5 * s.omega.omega_sq(r.t) * r.eta * r.eta;
    let (e0, e1) = (energy(&ev.rows[0]), energy(ev.rows.last().unwrap()));
    ensure((e1 - e0).abs() > 0.1 * e0, format!("piecewise energy barely changes: {e0} -> {e1}"))?;
    Ok(format!(
        "max drift {:.2e} ({}); piecewise energy {e0:.3} -> {e1:.3}, drift {:.2e}",
        worst.0, worst.1, ev.summary.invariant_drift
    ))
}

fn four_routes() -> Outcome {
    let (s, u0) = squeezed();
    let cfg = tight();
    let grid = linspace(0.0, 20.0 * PI, 4001);
    let e0 = ermakov_from_uncertainties(&s, u0).map_err(err)?;
    let c0 = riccati_dynamics::riccati_from_ermakov(e0).map_err(err)?;
    let via_riccati = integrate_riccati(&s, c0, &grid, &cfg).map_err(err)?;
    let via_ermakov = integrate_ermakov(&s, e0, &grid, &cfg).map_err(err)?;
    let via_lambda = integrate_lambda(&s, LambdaState64::from_ermakov(e0).map_err(err)?, &grid, &cfg).map_err(err)?;
    let via_moments = integrate_uncertainty_system(&s, u0, &grid, &cfg).map_err(err)?;
    let mut worst = 0f64;
    for k in 0..grid.len() {
        let sx = [
            uncertainties_from_riccati(&s, via_riccati[k]).map_err(err)?.sigma_xx,
            uncertainties_from_ermakov(&s, via_ermakov[k]).map_err(err)?.sigma_xx,
            uncertainties_from_riccati(&s, via_lambda[k].riccati()).map_err(err)?.sigma_xx,
            via_moments[k].sigma_xx,
        ];
        for a in 0..4 {
            for b in a + 1..4 {
                worst = worst.max((sx[a] - sx[b]).abs());
            }
        }
    }
    ensure(worst < 1e-7, format!("pairwise σx² spread {worst:.3e}"))?;
    Ok(format!("pairwise σx² spread {worst:.2e} over 10 periods"))
}

fn correlation_extrema() -> Outcome {
    let ev = evolve(&load("fig3")).map_err(err)?;
    let cor = ev.summary.cor;
    ensure((cor.max - 0.6).abs() <= 1e-3, format!("max Cor {}", cor.max))?;
    ensure(cor.min.abs() <= 1e-9, format!("min Cor {}", cor.min))?;
    // Independent check at the analytic maximum t = π/4.
    let direct = correlation_coefficient(UncertaintyTriple64::new(0.625, 0.625, -0.375)).map_err(err)?;
    ensure((direct - 0.6).abs() < 1e-15, format!("Cor(π/4) = {direct}"))?;
    Ok(format!("Cor in [{:.3e}, {:.6}]", cor.min, cor.max))
}

fn fixed_points() -> Outcome {
    for w in [0.25f64, 1.0, 4.0] {
        let (a, b) = (riccati::field_at(w, 0.0, w), riccati::field_at(w, 0.0, -w));
        ensure(a == (0.0, 0.0) && b == (0.0, 0.0), format!("Riccati field at (0, ±{w}): {a:?} {b:?}"))?;
        let fp = ermakov::fixed_point(w).map_err(err)?;
        ensure(fp.alpha == 1.0 / w.sqrt() && fp.alpha_dot == 0.0, format!("Ermakov fixed point {fp:?}"))?;
        let f = ermakov::field_at(w, fp.alpha, fp.alpha_dot);
        ensure(f == (0.0, 0.0), format!("Ermakov field at fixed point for ω₀={w}: {f:?}"))?;
    }
    let cfg = tight();
    let grid = linspace(0.0, 20.0, 2001);
    let mut worst = 0f64;
    for w in [0.5, 1.0, 2.0] {
        let s = SystemSpec64::natural(w).map_err(err)?;
        let c0 = RiccatiState64::new(0.0, w);
        for c in integrate_riccati(&s, c0, &grid, &cfg).map_err(err)? {
            worst = worst.max(c.c_r.abs()).max((c.c_i - w).abs());
        }
        let e0 = ermakov::fixed_point(w).map_err(err)?;
        for e in integrate_ermakov(&s, e0, &grid, &cfg).map_err(err)? {
            worst = worst.max((e.alpha - e0.alpha).abs()).max(e.alpha_dot.abs());
        }
    }
    ensure(worst < 1e-9, format!("stationarity drift {worst:.3e}"))?;
    Ok(format!("fields vanish exactly; drift over [0, 20] {worst:.2e}"))
}

fn squeezing() -> Outcome {
    let (s, u0) = squeezed();
    let ev = evolve(&load("fig3")).map_err(err)?;
    let min = ev.summary.sigma_xx.min;
    let level = position_squeezing_level(&s, 1.0);
    ensure((min - 0.25).abs() <= 1e-6 && min < level, format!("min σx² {min}, level {level}"))?;

    // Minima of σx² sit where α̇ = 0 with α̈ > 0; refine each by Newton on α̇.
    let cfg = tight();
    let e0 = ermakov_from_uncertainties(&s, u0).map_err(err)?;
    let grid = linspace(0.0, 20.0 * PI, 4001);
    let traj = integrate_ermakov(&s, e0, &grid, &cfg).map_err(err)?;
    let accel = |e: ErmakovState64| -e.alpha + e.alpha.powi(-3);
    let mut minima = Vec::new();
    for k in 0..grid.len() - 1 {
        let (a, b) = (traj[k], traj[k + 1]);
        if a.alpha_dot < 0.0 && b.alpha_dot >= 0.0 {
            let (t0, mut t, mut e) = (grid[k], grid[k], a);
            for _ in 0..20 {
                let step = -e.alpha_dot / accel(e);
                if step.abs() < 1e-15 {
                    break;
                }
                t += step;
                e = *integrate_ermakov(&s, a, &[t0, t], &cfg).map_err(err)?.last().unwrap();
            }
            minima.push(t);
        }
    }
    ensure(minima.len() >= 19, format!("found {} minima", minima.len()))?;
    let worst = minima.windows(2).map(|w| (w[1] - w[0] - PI).abs()).fold(0.0, f64::max);
    ensure(worst < 1e-8, format!("period error {worst:.3e}"))?;
    Ok(format!("min σx² = {min:.12} < {level}; {} minima, period error {worst:.2e}", minima.len()))
}

fn free_motion() -> Outcome {
    let s = SystemSpec64::new(1.0, 1.0, FrequencyProfile::constant(0.0).map_err(err)?).map_err(err)?;
    let times = [0.0, 1.0, 2.0, 5.0];
    let cfg = tight();
    let mut worst = 0f64;
    for u0 in [UncertaintyTriple64::new(0.5, 0.5, 0.0), UncertaintyTriple64::new(1.0, 0.5, 0.5)] {
        let oracle = |t: f64| u0.sigma_pp * t * t + u0.sigma_xx + 2.0 * u0.sigma_xp * t;
        let e0 = ermakov_from_uncertainties(&s, u0).map_err(err)?;
        let c0 = riccati_dynamics::riccati_from_ermakov(e0).map_err(err)?;
        let r = integrate_riccati(&s, c0, &times, &cfg).map_err(err)?;
        let e = integrate_ermakov(&s, e0, &times, &cfg).map_err(err)?;
        let l = integrate_lambda(&s, LambdaState64::from_ermakov(e0).map_err(err)?, &times, &cfg).map_err(err)?;
        let m = integrate_uncertainty_system(&s, u0, &times, &cfg).map_err(err)?;
        for (k, &t) in times.iter().enumerate() {
            let routes = [
                uncertainties_from_riccati(&s, r[k]).map_err(err)?.sigma_xx,
                uncertainties_from_ermakov(&s, e[k]).map_err(err)?.sigma_xx,
                uncertainties_from_riccati(&s, l[k].riccati()).map_err(err)?.sigma_xx,
                m[k].sigma_xx,
            ];
            for v in routes {
                worst = worst.max((v - oracle(t)).abs());
            }
        }
    }
    ensure(worst < 1e-9, format!("max deviation {worst:.3e}"))?;
    let ev = evolve(&load("free")).map_err(err)?;
    let row = ev.rows.iter().find(|r| (r.t - 2.0).abs() < 1e-12).ok_or("free.toml has no t = 2 row")?;
    ensure((row.sigma_xx - 2.5).abs() < 1e-9, format!("free.toml σx²(2) = {}", row.sigma_xx))?;
    Ok(format!("four routes within {worst:.2e} of closed form; free.toml σx²(2) = {:.12}", row.sigma_xx))
}

fn propagator() -> Outcome {
    let mut summary = Vec::new();
    for name in ["coherent", "fig3", "omega2", "free"] {
        let rep = propagate(&load(name)).map_err(err)?;
        ensure(
            rep.max_c_diff < 1e-8 && rep.max_eta_diff < 1e-8,
            format!("{name}: |ΔC| {:.3e}, |Δη| {:.3e}", rep.max_c_diff, rep.max_eta_diff),
        )?;
        let tdse = rep.tdse_residual.ok_or(format!("{name}: no TDSE residual"))?;
        ensure(tdse < 1e-4, format!("{name}: TDSE residual {tdse:.3e}"))?;
        summary.push(format!("{name} |ΔC| {:.1e} TDSE {tdse:.1e}", rep.max_c_diff));
    }
    // λ_R corruption on a 1e-3 time grid.
    let s = SystemSpec64::natural(1.0).map_err(err)?;
    let times = linspace(0.5, 1.0, 501);
    let mut full = vec![0.0];
    full.extend(&times);
    let traj = kernel_lambda_trajectory(&s, 1.0, &full, &tight()).map_err(err)?[1..].to_vec();
    let xs = linspace(-2.0, 2.0, 41);
    let xps = [-0.8, 0.0, 0.6];
    let clean = verify_kernel_satisfies_tdse(&s, 1.0, &times, &traj, &xs, &xps).map_err(err)?;
    let corrupted: Vec<_> = traj
        .iter()
        .map(|l| LambdaState64 { lambda_r: 1.1 * l.lambda_r, lambda_r_dot: 1.1 * l.lambda_r_dot, ..*l })
        .collect();
    let bad = verify_kernel_satisfies_tdse(&s, 1.0, &times, &corrupted, &xs, &xps).map_err(err)?;
    ensure(clean < 1e-4, format!("clean residual {clean:.3e}"))?;
    ensure(bad >= 100.0 * clean, format!("corruption ratio {:.1}", bad / clean))?;
    Ok(format!("{}; corruption ratio {:.1e}", summary.join(", "), bad / clean))
}

/// `(m/2ℏ)[(p̃α/m − x̃α̇)² + (x̃/α)²]` for the width `α` at the same time.
fn quadratic_invariant(s: &SystemSpec64, e: ErmakovState64, xt: f64, pt: f64) -> f64 {
    let v = pt / s.mass * e.alpha - xt * e.alpha_dot;
    s.mass / (2.0 * s.hbar) * (v * v + (xt / e.alpha).powi(2))
}

fn wigner_identity() -> Outcome {
    let sc = load("fig4");
    let s = sc.system().map_err(err)?;
    let times = sc.wigner.times.clone();
    ensure(times.len() == 8, format!("fig4 has {} snapshot times", times.len()))?;
    let states = sc.states_at(&times).map_err(err)?;
    let spec = GridSpec::default();
    let (mut pointwise, mut var_err, mut norm_err) = (0f64, 0f64, 0f64);
    for &(c, u) in &states {
        let e = ermakov_from_uncertainties(&s, u).map_err(err)?;
        let grid = wigner_grid(&s, c, u, &spec).map_err(err)?;
        let (xs, ps) = (grid.xs(), grid.ps());
        for (ix, &x) in xs.iter().enumerate() {
            for (ip, &p) in ps.iter().enumerate() {
                let expected = (-2.0 * quadratic_invariant(&s, e, x - c.position(), p - c.momentum(s.mass))).exp();
                pointwise = pointwise.max((grid.at(ix, ip) * PI * s.hbar - expected).abs());
            }
        }
        let m = marginals(&grid);
        var_err = var_err.max((m.var_x - u.sigma_xx).abs() / u.sigma_xx).max((m.var_p - u.sigma_pp).abs() / u.sigma_pp);
        norm_err = norm_err.max((grid.normalization() - 1.0).abs());
        let (gx, gp) = grid.argmax();
        ensure(
            (gx - c.position()).abs() <= grid.dx() && (gp - c.momentum(s.mass)).abs() <= grid.dp(),
            format!("grid peak ({gx}, {gp}) far from centroid"),
        )?;
    }
    ensure(pointwise < 1e-12, format!("pointwise {pointwise:.3e}"))?;
    ensure(var_err < 1e-5, format!("marginal variance {var_err:.3e}"))?;
    ensure(norm_err < 1e-6, format!("normalization {norm_err:.3e}"))?;

    // The peak of W is the centroid; follow it densely over one period.
    let dense = linspace(0.0, 2.0 * PI, 721);
    let orbit = sc.states_at(&dense).map_err(err)?;
    let energy = |c: Centroid64| c.classical_energy(s.mass, 1.0);
    let e0 = energy(orbit[0].0);
    let ellipse = orbit.iter().map(|(c, _)| (energy(*c) - e0).abs() / e0).fold(0.0, f64::max);
    ensure(ellipse < 1e-9, format!("peak leaves the ellipse by {ellipse:.3e}"))?;
    Ok(format!(
        "pointwise {pointwise:.1e}, marginal var {var_err:.1e}, normalization {norm_err:.1e}, ellipse {ellipse:.1e}"
    ))
}

/// `(1/πℏ)∫ψ*(x+y)ψ(x−y)e^{2ipy/ℏ}dy` by the trapezoid rule.
fn wigner_quadrature(s: &SystemSpec64, psi: impl Fn(f64) -> Complex64, x: f64, p: f64, half: f64, n: usize) -> f64 {
    let h = 2.0 * half / (n - 1) as f64;
    let mut acc = Complex64::new(0.0, 0.0);
    for k in 0..n {
        let y = -half + h * k as f64;
        let w = if k == 0 || k == n - 1 { 0.5 } else { 1.0 };
        acc += psi(x + y).conj() * psi(x - y) * Complex64::from_polar(1.0, 2.0 * p * y / s.hbar) * w;
    }
    (acc * h).re / (PI * s.hbar)
}

fn quadrature_oracles() -> Outcome {
    // Wigner transform of a chirped, displaced packet.
    let (s, u0) = squeezed();
    let c0 = Centroid64::from_means(1.0, 0.5, 1.0);
    let e0 = ermakov_from_uncertainties(&s, u0).map_err(err)?;
    let t = PI / 4.0 + 0.1;
    let (c, e) = ermakov::integrate_ermakov_with_centroid(&s, c0, e0, &[0.0, t], &tight()).map_err(err)?[1];
    let u = uncertainties_from_ermakov(&s, e).map_err(err)?;
    let form = InitialGaussian::from_state(&s, c, e).form(&s);
    let (sx, sp) = (u.sigma_xx.sqrt(), u.sigma_pp.sqrt());
    let mut rng = StdRng::seed_from_u64(0x5eed);
    let mut w_err = 0f64;
    for _ in 0..20 {
        let x = c.position() + rng.gen_range(-3.0..3.0) * sx;
        let p = c.momentum(s.mass) + rng.gen_range(-3.0..3.0) * sp;
        let num = wigner_quadrature(&s, |y| form.eval(y), x, p, 12.0 * sx, 4001);
        w_err = w_err.max((num - wigner_value(&s, c, u, x, p)).abs());
    }
    ensure(w_err < 1e-6, format!("Wigner quadrature {w_err:.3e}"))?;

    // Kernel applied by quadrature against the closed-form convolution.
    let mut k_err = 0f64;
    for (omega, t) in [(1.0, 1.0), (0.0, 1.5)] {
        let s = SystemSpec64::new(1.0, 1.0, FrequencyProfile::constant(omega).map_err(err)?).map_err(err)?;
        let init = InitialGaussian { alpha0: 1.2, alpha0_dot: 0.3, p0: 0.7, x_center: 0.4 };
        let l = kernel_lambda_trajectory(&s, init.alpha0, &[0.0, t], &tight()).map_err(err)?[1];
        let g = kernel_params(&s, l, init.alpha0).map_err(err)?;
        let closed = apply_kernel(&s, &init, l).map_err(err)?;
        let psi0 = init.form(&s);
        let width = init.alpha0 * (s.hbar / (2.0 * s.mass)).sqrt();
        let xps = linspace(init.x_center - 14.0 * width, init.x_center + 14.0 * width, 40001);
        let h = xps[1] - xps[0];
        for x in linspace(-2.0, 3.0, 11) {
            let mut acc = Complex64::new(0.0, 0.0);
            for (k, &xp) in xps.iter().enumerate() {
                let w = if k == 0 || k == xps.len() - 1 { 0.5 } else { 1.0 };
                acc += g.eval(x, xp) * psi0.eval(xp) * w;
            }
            k_err = k_err.max((acc * h - closed.eval(x)).norm());
        }
    }
    ensure(k_err < 1e-6, format!("kernel quadrature {k_err:.3e}"))?;
    Ok(format!("Wigner transform {w_err:.1e} at 20 points; kernel convolution {k_err:.1e}"))
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("Schrödinger–Robertson conservation", sr_conservation),
        ("Ermakov invariant constancy", ermakov_invariant),
        ("four-way representation equivalence", four_routes),
        ("correlation coefficient extrema", correlation_extrema),
        ("fixed points", fixed_points),
        ("squeezing and period", squeezing),
        ("free-motion closed forms", free_motion),
        ("propagator equivalence", propagator),
        ("Wigner identity", wigner_identity),
        ("quadrature oracles", quadrature_oracles),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {:>2} {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {:>2} {name}: {detail}", i + 1);
            }
        }
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
