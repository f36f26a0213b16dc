//! `rd`: run Gaussian wave-packet scenarios and render their artifacts.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod svg;

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use riccati_dynamics::scenario::{check, evolve, propagate, Artifact, Scenario, ScenarioError, Thresholds, CSV_HEADER};
use riccati_dynamics::wigner::{marginals, wigner_grid};
use riccati_dynamics::{ermakov, riccati, uncertainty, Error};
use serde::Serialize;

use crate::svg::{HLine, Marker, Series};

#[derive(Parser)]
#[command(name = "rd", version, about = "Gaussian wave-packet dynamics of quadratic Hamiltonians")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Time series CSV, summary JSON and trace plots for a scenario.
    Evolve {
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Phase-plane vector field of the Riccati or Ermakov equation.
    VectorField {
        #[arg(value_enum)]
        kind: FieldKind,
        #[arg(long)]
        omega0: f64,
        /// Arrows per axis.
        #[arg(long, default_value_t = 21)]
        grid: usize,
        /// Output file; defaults to `<kind>_field.svg` in the current directory.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Wigner heatmaps and grids at the given times.
    Wigner {
        scenario: PathBuf,
        /// Comma-separated snapshot times; overrides the scenario's list.
        #[arg(long, value_delimiter = ',')]
        times: Option<Vec<f64>>,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Kernel-propagated packet against direct evolution.
    Propagate {
        scenario: PathBuf,
        #[arg(long, default_value = ".")]
        out_dir: PathBuf,
    },
    /// Run the invariant suite; exits 3 on any violation.
    Check { scenario: PathBuf },
}

#[derive(Clone, Copy, ValueEnum)]
enum FieldKind {
    Riccati,
    Ermakov,
}

struct Failure {
    code: u8,
    message: String,
}

impl From<ScenarioError> for Failure {
    fn from(e: ScenarioError) -> Self {
        Failure { code: e.exit_code() as u8, message: e.to_string() }
    }
}

fn invalid(e: Error) -> Failure {
    Failure { code: 2, message: format!("invalid input: {e}") }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure { code: 1, message: format!("cannot write {}: {e}", path.display()) }
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> Result<(), Failure> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let run = || -> std::io::Result<()> {
        std::fs::create_dir_all(&dir)?;
        let mut tmp = tempfile::NamedTempFile::new_in(&dir)?;
        tmp.write_all(bytes)?;
        tmp.as_file().sync_all()?;
        tmp.persist(path).map_err(|e| e.error)?;
        Ok(())
    };
    run().map_err(|e| io_failure(path, e))
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(value).expect("plain data serializes");
    s.push('\n');
    s.into_bytes()
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(raw) = std::env::var("RD_THREADS") else {
        return Ok(());
    };
    let n: usize =
        raw.trim().parse().ok().filter(|&n| n > 0).ok_or_else(|| Failure {
            code: 2,
            message: format!("RD_THREADS must be a positive integer, got {raw:?}"),
        })?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure { code: 2, message: format!("cannot configure {n} threads: {e}") })
}

fn load(path: &Path) -> Result<Scenario, Failure> {
    let sc = Scenario::from_path(path)?;
    sc.validate()?;
    Ok(sc)
}

fn cmd_evolve(path: &Path, out_dir: &Path) -> Result<(), Failure> {
    let sc = load(path)?;
    let ev = evolve(&sc)?;
    let name = &sc.name;
    let wants = |a: Artifact| sc.outputs.contains(&a);
    if wants(Artifact::TimeSeries) {
        let mut csv = String::with_capacity(ev.rows.len() * 320);
        csv.push_str(CSV_HEADER);
        csv.push('\n');
        for r in &ev.rows {
            csv.push_str(&r.to_csv_line());
            csv.push('\n');
        }
        write_atomic(&out_dir.join(format!("{name}.csv")), csv.as_bytes())?;
    }
    if wants(Artifact::Summary) {
        write_atomic(&out_dir.join(format!("{name}_summary.json")), &to_json(&ev.summary))?;
    }
    let ts: Vec<f64> = ev.rows.iter().map(|r| r.t).collect();
    if wants(Artifact::Traces) {
        let sxx: Vec<f64> = ev.rows.iter().map(|r| r.sigma_xx).collect();
        let spp: Vec<f64> = ev.rows.iter().map(|r| r.sigma_pp).collect();
        let sxp: Vec<f64> = ev.rows.iter().map(|r| r.sigma_xp).collect();
        let s = sc.system()?;
        let w0 = s.omega.eval(0.0);
        let mut lines = Vec::new();
        let (lx, lp) = (uncertainty::position_squeezing_level(&s, w0), uncertainty::momentum_squeezing_level(&s, w0));
        let (label_x, label_p) = (format!("ħ/2mω₀ = {}", fmt_short(lx)), format!("ħmω₀/2 = {}", fmt_short(lp)));
        if w0 > 0.0 {
            lines.push(HLine { y: lx, label: &label_x, color: "#1f77b4" });
            lines.push(HLine { y: lp, label: &label_p, color: "#d62728" });
        }
        let doc = svg::line_plot(
            &[
                Series { label: "σx²", xs: &ts, ys: &sxx, color: "#1f77b4" },
                Series { label: "σp²", xs: &ts, ys: &spp, color: "#d62728" },
                Series { label: "σxp", xs: &ts, ys: &sxp, color: "#2ca02c" },
            ],
            &lines,
            &format!("{name}: second moments"),
            "t",
            "moment",
        );
        write_atomic(&out_dir.join(format!("{name}_traces.svg")), doc.as_bytes())?;
    }
    if wants(Artifact::Correlation) {
        let cor: Vec<f64> = ev.rows.iter().map(|r| r.cor).collect();
        let doc = svg::line_plot(
            &[Series { label: "Cor", xs: &ts, ys: &cor, color: "#9467bd" }],
            &[],
            &format!("{name}: correlation coefficient"),
            "t",
            "Cor",
        );
        write_atomic(&out_dir.join(format!("{name}_cor.svg")), doc.as_bytes())?;
    }
    println!(
        "{name}: {} rows, max SR violation {:.3e}, invariant drift {:.3e}, Wronskian drift {:.3e}, Cor in [{:.6}, {:.6}]",
        ev.rows.len(),
        ev.summary.max_sr_violation,
        ev.summary.invariant_drift,
        ev.summary.wronskian_drift,
        ev.summary.cor.min,
        ev.summary.cor.max
    );
    Ok(())
}

fn fmt_short(v: f64) -> String {
    let s = format!("{v:.4}");
    s.trim_end_matches('0').trim_end_matches('.').to_string()
}

fn cmd_vector_field(kind: FieldKind, omega0: f64, grid: usize, out: Option<PathBuf>) -> Result<(), Failure> {
    if !(omega0 >= 0.0) || !omega0.is_finite() {
        return Err(invalid(Error::Domain(format!("omega0 = {omega0} must be non-negative"))));
    }
    let (doc, default_name) = match kind {
        FieldKind::Riccati => {
            let r = 2.5 * omega0.max(0.5);
            let field = riccati::vector_field(omega0, (-r, r), (-r, r), grid).map_err(invalid)?;
            let fixed = if omega0 > 0.0 {
                vec![
                    Marker { x: 0.0, y: omega0, label: format!("(0, {})", fmt_short(omega0)) },
                    Marker { x: 0.0, y: -omega0, label: format!("(0, -{})", fmt_short(omega0)) },
                ]
            } else {
                vec![Marker { x: 0.0, y: 0.0, label: "(0, 0)".into() }]
            };
            let title = format!("Riccati field, ω₀ = {}", fmt_short(omega0));
            (svg::vector_field(&field, &fixed, &title, "C_R", "C_I"), "riccati_field.svg")
        }
        FieldKind::Ermakov => {
            let a_star = if omega0 > 0.0 { omega0.sqrt().recip() } else { 1.0 };
            let v = 2.0 * omega0.sqrt().max(1.0);
            let field = ermakov::vector_field(omega0, (0.15 * a_star, 3.0 * a_star), (-v, v), grid).map_err(invalid)?;
            let fixed = match ermakov::fixed_point(omega0) {
                Ok(e) => {
                    vec![Marker { x: e.alpha, y: 0.0, label: format!("(1/√ω₀, 0) = ({}, 0)", fmt_short(e.alpha)) }]
                }
                Err(_) => Vec::new(),
            };
            let title = format!("Ermakov field, ω₀ = {}", fmt_short(omega0));
            (svg::vector_field(&field, &fixed, &title, "α", "α̇"), "ermakov_field.svg")
        }
    };
    let path = out.unwrap_or_else(|| PathBuf::from(default_name));
    write_atomic(&path, doc.as_bytes())?;
    println!("wrote {}", path.display());
    Ok(())
}

#[derive(Serialize)]
struct Snapshot {
    index: usize,
    t: f64,
    mean_x: f64,
    mean_p: f64,
    peak_x: f64,
    peak_p: f64,
    classical_energy: Option<f64>,
    normalization: f64,
    marginal_var_x: f64,
    marginal_var_p: f64,
    sigma_xx: f64,
    sigma_pp: f64,
}

fn cmd_wigner(path: &Path, times: Option<Vec<f64>>, out_dir: &Path) -> Result<(), Failure> {
    let sc = load(path)?;
    let times = times.unwrap_or_else(|| sc.wigner.times.clone());
    if times.is_empty() {
        return Err(invalid(Error::InvalidConfig("no snapshot times: pass --times or set wigner.times".into())));
    }
    let s = sc.system()?;
    let states = sc.states_at(&times)?;
    let spec = sc.wigner.grid.unwrap_or_default();
    let name = &sc.name;
    let omega0 = s.omega.as_constant();
    let vmax = 1.0 / (std::f64::consts::PI * s.hbar);
    let mut snaps = Vec::with_capacity(times.len());
    for (k, (&t, &(c, u))) in times.iter().zip(&states).enumerate() {
        let grid = wigner_grid(&s, c, u, &spec).map_err(|e| Failure { code: 3, message: e.to_string() })?;
        let m = marginals(&grid);
        let (px, pp) = grid.argmax();
        let energy = omega0.map(|w| c.classical_energy(s.mass, w));
        // Classical energy ellipse p²/2m + mω₀²x²/2 = E through the peak.
        let ellipse: Vec<(f64, f64)> = match (omega0, energy) {
            (Some(w), Some(e)) if w > 0.0 && e > 0.0 => (0..=180)
                .map(|j| {
                    let th = std::f64::consts::TAU * j as f64 / 180.0;
                    ((2.0 * e / (s.mass * w * w)).sqrt() * th.cos(), (2.0 * s.mass * e).sqrt() * th.sin())
                })
                .collect(),
            _ => Vec::new(),
        };
        let title = format!("{name}: W(x, p) at t = {}", fmt_short(t));
        let stem = out_dir.join(format!("{name}_wigner_{k:02}"));
        let doc = svg::heatmap(&grid, vmax, &ellipse, Some((c.position(), c.momentum(s.mass))), &title, 101);
        write_atomic(&stem.with_extension("svg"), doc.as_bytes())?;
        write_atomic(&stem.with_extension("png"), &svg::heatmap_png(&grid, vmax))?;
        let mut csv = Vec::new();
        grid.write_csv(&mut csv).map_err(|e| io_failure(&stem, e))?;
        write_atomic(&stem.with_extension("csv"), &csv)?;
        let mut bin = Vec::new();
        grid.write_binary(&mut bin).map_err(|e| io_failure(&stem, e))?;
        write_atomic(&stem.with_extension("bin"), &bin)?;
        snaps.push(Snapshot {
            index: k,
            t,
            mean_x: c.position(),
            mean_p: c.momentum(s.mass),
            peak_x: px,
            peak_p: pp,
            classical_energy: energy,
            normalization: grid.normalization(),
            marginal_var_x: m.var_x,
            marginal_var_p: m.var_p,
            sigma_xx: u.sigma_xx,
            sigma_pp: u.sigma_pp,
        });
    }
    write_atomic(&out_dir.join(format!("{name}_wigner.json")), &to_json(&snaps))?;
    println!("{name}: {} Wigner snapshots", snaps.len());
    Ok(())
}

fn cmd_propagate(path: &Path, out_dir: &Path) -> Result<(), Failure> {
    let sc = load(path)?;
    let report = propagate(&sc)?;
    let json = to_json(&report);
    write_atomic(&out_dir.join(format!("{}_propagate.json", sc.name)), &json)?;
    std::io::stdout().write_all(&json).ok();
    let tol = 1e-8;
    if report.max_c_diff > tol || report.max_eta_diff > tol {
        return Err(Failure {
            code: 3,
            message: format!(
                "kernel and direct evolution disagree: |ΔC| = {:.3e}, |Δη| = {:.3e}",
                report.max_c_diff, report.max_eta_diff
            ),
        });
    }
    Ok(())
}

fn cmd_check(path: &Path) -> Result<(), Failure> {
    let sc = load(path)?;
    let ev = evolve(&sc)?;
    let results = check(&ev.summary, &Thresholds::default());
    let mut out = String::new();
    for r in &results {
        let _ = writeln!(
            out,
            "{} {} {:.3e} (limit {:.0e})",
            if r.pass { "PASS" } else { "FAIL" },
            r.name,
            r.value,
            r.threshold
        );
    }
    print!("{out}");
    let failed: Vec<&str> = results.iter().filter(|r| !r.pass).map(|r| r.name.as_str()).collect();
    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure { code: 3, message: format!("{}: violated {}", sc.name, failed.join(", ")) })
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    match cli.command {
        Command::Evolve { scenario, out_dir } => cmd_evolve(&scenario, &out_dir),
        Command::VectorField { kind, omega0, grid, out } => cmd_vector_field(kind, omega0, grid, out),
        Command::Wigner { scenario, times, out_dir } => cmd_wigner(&scenario, times, &out_dir),
        Command::Propagate { scenario, out_dir } => cmd_propagate(&scenario, &out_dir),
        Command::Check { scenario } => cmd_check(&scenario),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
