mod fast;
mod manifest;

use std::f64::consts::PI;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use aquid_core::gbh::{refined_samples, Extractor, GbhCurve, PeffSampling, SweepOptions};
use aquid_core::gp2d::{f0_numeric, pi_state, write_stationary, zero_state, GpSystem, RelaxOptions};
use aquid_core::qspec::{self, QubitOptions, QubitReport, CURRENT_LEVELS, TRACKING_LEVELS};
use aquid_core::tmdyn::{self, current_params, FastModel, JunctionCurrentParams, ParamCurve, SampledCurve};
use aquid_core::{constants, load_scenario_file, Error, ScenarioConfig};
use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use fast::FastParams;
use manifest::{sha256_file, RunManifest, StageRecord, StageStatus};

#[derive(Parser, Debug)]
#[command(name = "aquid", version, about = "Ring-condensate interferometer pipeline: mean field, two-mode and quantum-phase stages")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Scenario TOML file.
    #[arg(long, global = true)]
    scenario: Option<PathBuf>,
    /// Output directory.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Grid points per axis (odd), overriding the scenario.
    #[arg(long, global = true)]
    grid: Option<usize>,
    /// Lower end of the frequency grid (units of f₀).
    #[arg(long, global = true)]
    fmin: Option<f64>,
    /// Upper end of the frequency grid (units of f₀).
    #[arg(long, global = true)]
    fmax: Option<f64>,
    /// Number of uniform frequency samples.
    #[arg(long, global = true)]
    fsamples: Option<usize>,
    /// Also evaluate critical quantities at the sampled mean-field points.
    #[arg(long, global = true)]
    gp_points: bool,
    /// Tabulated two-mode parameter file; skips the mean-field stages.
    #[arg(long, global = true, value_name = "FILE")]
    table5_fast: Option<PathBuf>,
    /// Which sweep points get P_eff period measurements.
    #[arg(long, global = true, value_enum, default_value_t = PeffArg::Every)]
    peff: PeffArg,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Relax one stationary state and write it with a JSON sidecar.
    Stationary {
        #[arg(long, default_value_t = 0.0)]
        f_over_f0: f64,
        #[arg(long, value_enum, default_value_t = StateArg::Zero)]
        state: StateArg,
    },
    /// Two-mode parameter sweep (default 41 points on [0, 1]).
    Gbh,
    /// Critical imbalance, critical currents and interference (default 201 points on [0, 1]).
    Critical,
    /// Quantum spectrum, level currents and qubit report (default 200 points on [0.45, 0.55]).
    Qubit,
    /// Stationary states at Ω = 0, then gbh, critical and qubit with their defaults.
    All,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum StateArg {
    Zero,
    Pi,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum PeffArg {
    Every,
    Centre,
}

/// Frequency grid with per-command defaults.
struct Grid {
    fmin: f64,
    fmax: f64,
    samples: usize,
}

impl Cli {
    fn grid(&self, fmin: f64, fmax: f64, samples: usize) -> Result<Grid, Fail> {
        let g = Grid {
            fmin: self.fmin.unwrap_or(fmin),
            fmax: self.fmax.unwrap_or(fmax),
            samples: self.fsamples.unwrap_or(samples),
        };
        if g.samples == 0 {
            return Err(Fail::usage("empty frequency grid (--fsamples 0)"));
        }
        if !(0.0..=1.0).contains(&g.fmin) || !(0.0..=1.0).contains(&g.fmax) || g.fmin > g.fmax {
            return Err(Fail::usage("frequency range must satisfy 0 <= fmin <= fmax <= 1"));
        }
        Ok(g)
    }
}

impl Grid {
    fn uniform(&self) -> Vec<f64> {
        if self.samples == 1 {
            return vec![self.fmin];
        }
        (0..self.samples)
            .map(|i| self.fmin + (self.fmax - self.fmin) * i as f64 / (self.samples - 1) as f64)
            .collect()
    }
}

/// Error with its process exit code.
#[derive(Debug)]
struct Fail {
    code: u8,
    message: String,
}

impl Fail {
    fn usage(msg: impl Into<String>) -> Self {
        Fail {
            code: 2,
            message: msg.into(),
        }
    }
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Parse(_) | Error::Invariant { .. } | Error::Domain(_) => 2,
        Error::AtFrequency { source, .. } => exit_code(source),
        Error::Io(_) | Error::Json(_) => 1,
        _ => 3,
    }
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail {
            code: exit_code(&e),
            message: e.to_string(),
        }
    }
}

impl From<std::io::Error> for Fail {
    fn from(e: std::io::Error) -> Self {
        Fail {
            code: 1,
            message: e.to_string(),
        }
    }
}

impl From<serde_json::Error> for Fail {
    fn from(e: serde_json::Error) -> Self {
        Fail {
            code: 1,
            message: e.to_string(),
        }
    }
}

struct Ctx<'a> {
    cli: &'a Cli,
    out: PathBuf,
    manifest: RunManifest,
    partial: bool,
}

impl Ctx<'_> {
    fn scenario(&mut self) -> Result<ScenarioConfig, Fail> {
        let path = self
            .cli
            .scenario
            .as_ref()
            .ok_or_else(|| Fail::usage("--scenario is required for mean-field stages"))?;
        let cfg = load_scenario_file(path)?;
        self.manifest.scenario_hash = Some(sha256_file(path)?);
        let cfg = match self.cli.grid {
            Some(n) => cfg.with_grid(n),
            None => cfg,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn fast(&mut self) -> Result<Option<FastParams>, Fail> {
        match &self.cli.table5_fast {
            None => Ok(None),
            Some(p) => {
                let fp = FastParams::load(p).map_err(Fail::usage)?;
                self.manifest.scenario_hash = Some(sha256_file(p)?);
                Ok(Some(fp))
            }
        }
    }

    fn record(&mut self, name: &str, t: Instant, status: StageStatus, messages: Vec<String>) {
        if status != StageStatus::Ok {
            self.partial = true;
        }
        self.manifest.stage(StageRecord {
            name: name.to_string(),
            status,
            wall_s: t.elapsed().as_secs_f64(),
            messages,
        });
    }

    fn emit(&mut self, file: &str) -> Result<String, Fail> {
        let d = self.manifest.output(&self.out, file)?;
        println!("wrote {}", self.out.join(file).display());
        Ok(d)
    }

    fn write_json<T: Serialize>(&mut self, file: &str, value: &T) -> Result<String, Fail> {
        std::fs::write(self.out.join(file), serde_json::to_string_pretty(value)? + "\n")?;
        self.emit(file)
    }
}

#[derive(Serialize)]
struct StationaryReport {
    f_over_f0: f64,
    f0_hz: Option<f64>,
    state: &'static str,
    mu_nk: f64,
    mu_over_vb: f64,
    energy_per_particle_nk: f64,
    winding: i32,
    residual: f64,
}

fn cmd_stationary(ctx: &mut Ctx, f: f64, state: StateArg) -> Result<(), Fail> {
    let t = Instant::now();
    if !(0.0..=1.0).contains(&f) {
        return Err(Fail::usage("--f-over-f0 must lie in [0, 1]"));
    }
    let cfg = ctx.scenario()?;
    let sys = GpSystem::new(&cfg);
    let relax = RelaxOptions::from_config(&cfg);
    let f0 = if f == 0.0 { None } else { Some(f0_numeric(&sys, &cfg, &relax)?.f0_hz) };
    let omega = 2.0 * PI * f0.unwrap_or(0.0) * f;
    let (s, tag) = match state {
        StateArg::Zero => (zero_state(&sys, &cfg, omega, None, &relax, f < 0.999)?, "zero"),
        StateArg::Pi => (pi_state(&sys, &cfg, omega, None, &relax, f > 0.001)?, "pi"),
    };
    let stem = format!("stationary_{tag}_f{f:.4}");
    write_stationary(ctx.out.join(format!("{stem}.bin")), &s)?;
    ctx.emit(&format!("{stem}.bin"))?;
    ctx.emit(&format!("{stem}.json"))?;
    let report = StationaryReport {
        f_over_f0: f,
        f0_hz: f0,
        state: tag,
        mu_nk: s.mu,
        mu_over_vb: s.mu / cfg.vb(),
        energy_per_particle_nk: s.energy_per_particle,
        winding: s.winding,
        residual: s.residual,
    };
    println!("{tag} state at f/f0 = {f}: mu = {:.4} nK (mu/Vb = {:.4}), winding {}", s.mu, report.mu_over_vb, s.winding);
    ctx.write_json(&format!("{stem}_report.json"), &report)?;
    ctx.record(&format!("stationary_{tag}"), t, StageStatus::Ok, vec![]);
    Ok(())
}

#[derive(Serialize)]
struct GbhSummaryFile<'a> {
    summary: aquid_core::gbh::GbhSummary,
    f0_one_dim_hz: f64,
    calibration: &'a aquid_core::gbh::Calibration,
    failures: &'a [aquid_core::gbh::SweepFailure],
}

fn cmd_gbh(ctx: &mut Ctx, grid: &Grid) -> Result<GbhCurve, Fail> {
    let t = Instant::now();
    let cfg = ctx.scenario()?;
    let sys = GpSystem::new(&cfg);
    let f0 = f0_numeric(&sys, &cfg, &RelaxOptions::from_config(&cfg))?;
    println!("f0 = {:.5} Hz (one-dimensional {:.5} Hz)", f0.f0_hz, f0.f0_one_dim_hz);
    let ex = Extractor::new(&sys, &cfg, f0.f0_hz);
    let mut opts = SweepOptions::new(&cfg, &sys, grid.samples);
    opts.f_over_f0 = refined_samples(grid.samples, grid.fmin, grid.fmax);
    if !opts.f_over_f0.iter().any(|&f| (f - 0.5).abs() < 1e-12) {
        return Err(Fail::usage("the gbh frequency range must contain f/f0 = 0.5"));
    }
    opts.peff = match ctx.cli.peff {
        PeffArg::Every => PeffSampling::Every,
        PeffArg::Centre => PeffSampling::CentreOnly,
    };
    let curve = ex.sweep(&opts)?;
    curve.write_csv(ctx.out.join("gbh_curve.csv"))?;
    ctx.emit("gbh_curve.csv")?;
    ctx.write_json("gbh_curve.json", &curve)?;
    let summary = curve.summary();
    println!(
        "U_eff/U = {:.4}, P_eff/P(f0/2) = {}, central interval {:?}",
        summary.u_eff_over_u,
        summary.p_eff_over_p_half.map(|v| format!("{v:.5}")).unwrap_or("-".into()),
        summary.central_interval
    );
    ctx.write_json(
        "gbh_summary.json",
        &GbhSummaryFile {
            summary,
            f0_one_dim_hz: f0.f0_one_dim_hz,
            calibration: &curve.calibration,
            failures: &curve.failures,
        },
    )?;
    let messages: Vec<String> = curve.failures.iter().map(|f| format!("f/f0 = {}: {}", f.f_over_f0, f.message)).collect();
    for m in &messages {
        eprintln!("sweep point failed: {m}");
    }
    let status = if messages.is_empty() { StageStatus::Ok } else { StageStatus::Partial };
    ctx.record("gbh", t, status, messages);
    Ok(curve)
}

/// Parameter source for the formula and quantum stages.
struct Source {
    kind: &'static str,
    /// Digest of the file the curve came from.
    curve_hash: String,
    model: FastModel,
    sampled: Option<SampledCurve>,
    /// Frequencies carried by the sampled curve.
    sample_f: Vec<f64>,
    junction: JunctionCurrentParams,
}

impl Source {
    fn curve(&self) -> &dyn ParamCurve {
        match &self.sampled {
            Some(s) => s,
            None => &self.model,
        }
    }
}

fn source(ctx: &mut Ctx, curve: Option<&GbhCurve>) -> Result<Source, Fail> {
    if let Some(fp) = ctx.fast()? {
        let path = ctx.cli.table5_fast.as_ref().expect("checked by fast()");
        return Ok(Source {
            kind: "table5-fast",
            curve_hash: sha256_file(path)?,
            model: fp.model(),
            sampled: None,
            sample_f: vec![],
            junction: fp.junction(),
        });
    }
    let path = ctx.out.join("gbh_curve.json");
    let loaded;
    let curve = match curve {
        Some(c) => c,
        None => {
            let text = std::fs::read_to_string(&path).map_err(|_| {
                Fail::usage(format!(
                    "{} not found; run `aquid gbh` first or pass --table5-fast",
                    path.display()
                ))
            })?;
            loaded = serde_json::from_str::<GbhCurve>(&text)?;
            &loaded
        }
    };
    let cal = &curve.calibration;
    let hbar = constants().hbar_over_kb;
    // P_eff(0) equals the bare P by construction of the U_eff calibration
    let junction = current_params(cal.integrals.k, cal.integrals.p, hbar)?;
    let half = curve
        .at(0.5)
        .and_then(|p| p.p_eff)
        .ok_or_else(|| Fail::from(Error::Domain("gbh curve has no P_eff at f0/2".into())))?;
    let n = curve.points.first().map(|p| p.n_atoms).unwrap_or_default();
    Ok(Source {
        kind: "gbh",
        curve_hash: sha256_file(&path)?,
        model: FastModel::from_currents(&junction, cal.u_eff, half, n),
        sampled: Some(SampledCurve::from_gbh(curve)?),
        sample_f: curve.points.iter().map(|p| p.f_over_f0).collect(),
        junction,
    })
}

fn cmd_critical(ctx: &mut Ctx, grid: &Grid, curve: Option<&GbhCurve>) -> Result<(), Fail> {
    let t = Instant::now();
    let src = source(ctx, curve)?;
    let f = grid.uniform();
    let rows = tmdyn::critical_curves(&src.model, &src.junction, &f);
    tmdyn::write_critical_csv(ctx.out.join("critical_curves.csv"), &rows)?;
    ctx.emit("critical_curves.csv")?;
    let inter = tmdyn::interference_curve(&src.junction, src.model.u_eff, src.model.n_atoms, &f);
    tmdyn::write_interference_csv(ctx.out.join("interference.csv"), &inter)?;
    ctx.emit("interference.csv")?;
    let mut messages = vec![];
    if ctx.cli.gp_points {
        match &src.sampled {
            Some(sampled) => {
                let pts = tmdyn::critical_curves(sampled, &src.junction, &src.sample_f);
                tmdyn::write_critical_csv(ctx.out.join("critical_gp_points.csv"), &pts)?;
                ctx.emit("critical_gp_points.csv")?;
            }
            None => messages.push("--gp-points ignored with --table5-fast".to_string()),
        }
    }
    let max_ic = rows
        .iter()
        .filter_map(|r| r.ic_zero_per_n.into_iter().chain(r.ic_pi_per_n).reduce(f64::max))
        .fold(0.0, f64::max);
    println!("critical curves from {} parameters: max Ic/N = {:.4} s^-1", src.kind, max_ic);
    ctx.record("critical", t, StageStatus::Ok, messages);
    Ok(())
}

#[derive(Serialize)]
struct QubitReportFile<'a> {
    #[serde(flatten)]
    report: &'a QubitReport,
    source: &'static str,
    scenario_hash: Option<String>,
    gbh_curve_hash: String,
}

fn cmd_qubit(ctx: &mut Ctx, grid: &Grid, curve: Option<&GbhCurve>) -> Result<(), Fail> {
    let t = Instant::now();
    let src = source(ctx, curve)?;
    let pc = src.curve();
    let report = qspec::qubit_report(pc, &QubitOptions::default())?;
    let f = grid.uniform();
    let spectra = qspec::spectra_on_grid(pc, &f, report.n_max, TRACKING_LEVELS)?;
    qspec::write_spectrum_csv(ctx.out.join("spectrum.csv"), &spectra)?;
    ctx.emit("spectrum.csv")?;
    let mut messages = vec![];
    let mut status = StageStatus::Ok;
    if grid.samples < 3 {
        messages.push("level currents need at least three frequencies".to_string());
        status = StageStatus::Partial;
    } else {
        match qspec::level_currents(&spectra, CURRENT_LEVELS) {
            Ok(lc) => {
                qspec::write_levels_currents_csv(ctx.out.join("levels_currents.csv"), &lc)?;
                ctx.emit("levels_currents.csv")?;
            }
            Err(e @ (Error::AmbiguousTracking { .. } | Error::Domain(_))) => {
                eprintln!("level currents skipped: {e}");
                messages.push(e.to_string());
                status = StageStatus::Partial;
            }
            Err(e) => return Err(e.into()),
        }
    }
    let file = QubitReportFile {
        report: &report,
        source: src.kind,
        scenario_hash: ctx.manifest.scenario_hash.clone(),
        gbh_curve_hash: src.curve_hash.clone(),
    };
    ctx.write_json("qubit_report.json", &file)?;
    println!(
        "q = {:.4}, Q = {:.5e}, T = {:.5e} s, Q*dfpp/f0 = {:.5}",
        report.q, report.quality, report.t_osc_s, report.product_q_dfpp
    );
    ctx.record("qubit", t, status, messages);
    Ok(())
}

fn run(cli: &Cli) -> Result<bool, Fail> {
    std::fs::create_dir_all(&cli.out)?;
    let mut ctx = Ctx {
        cli,
        out: cli.out.clone(),
        manifest: RunManifest::open(&cli.out),
        partial: false,
    };
    let result = match &cli.command {
        Command::Stationary { f_over_f0, state } => cmd_stationary(&mut ctx, *f_over_f0, *state),
        Command::Gbh => cli.grid(0.0, 1.0, 41).and_then(|g| cmd_gbh(&mut ctx, &g).map(|_| ())),
        Command::Critical => cli.grid(0.0, 1.0, 201).and_then(|g| cmd_critical(&mut ctx, &g, None)),
        Command::Qubit => cli.grid(0.45, 0.55, 200).and_then(|g| cmd_qubit(&mut ctx, &g, None)),
        Command::All => (|| {
            let gbh_grid = cli.grid(0.0, 1.0, 41)?;
            let curve = if cli.table5_fast.is_some() {
                None
            } else {
                cmd_stationary(&mut ctx, 0.0, StateArg::Zero)?;
                cmd_stationary(&mut ctx, 0.0, StateArg::Pi)?;
                Some(cmd_gbh(&mut ctx, &gbh_grid)?)
            };
            let crit = Grid {
                fmin: 0.0,
                fmax: 1.0,
                samples: 201,
            };
            cmd_critical(&mut ctx, &crit, curve.as_ref())?;
            let q = Grid {
                fmin: 0.45,
                fmax: 0.55,
                samples: 200,
            };
            cmd_qubit(&mut ctx, &q, curve.as_ref())
        })(),
    };
    ctx.manifest.write(&ctx.out)?;
    result.map(|_| ctx.partial)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => {
            eprintln!("finished with partial failures; see {}", Path::new(&cli.out).join(manifest::MANIFEST_FILE).display());
            ExitCode::from(4)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
