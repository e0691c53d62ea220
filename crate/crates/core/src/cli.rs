//! Experiment harness: Monte Carlo trials, certificate sweeps and analytic
//! tables written as `#`-headed CSV files.
//!
//! Every file starts with a block of `# key: value` lines recording the
//! tool version and the full configuration, so rerunning a command with the
//! same flags reproduces its files byte for byte. Numbers are written with
//! 17 significant digits (`{:.16e}`), which round-trips every `f64`.
//!
//! Trial `i` of a simulation with master seed `s` draws its graph from
//! seed [`trial_seed`]`(s, i)`, the SplitMix64 finaliser applied to
//! `s + 0x9E3779B97F4A7C15 * (i + 1)` (wrapping).

use std::ffi::OsString;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use tempfile::NamedTempFile;

use crate::certificate::{self, CertVars};
use crate::matching::{components, hall_witness_from, max_matching};
use crate::model::{generate, ModelParams, Threshold};
use crate::moments::{self, MomentReport};
use crate::optimizer::{self, SimplexConfig, SweepGrid, SweepPoint, SweepTrajectory};
use crate::rng::trial_seed;
use crate::svg::{self, Series};
use crate::{Error, Result};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// Exit status for arguments rejected before any work starts.
pub const EXIT_USAGE: i32 = 2;
/// Exit status when a computation ran but did not converge or failed.
pub const EXIT_FAILURE: i32 = 1;

#[derive(Debug, Parser)]
#[command(name = "pmcert", version, about = "Perfect matchings in two-round random bipartite digraphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Draw B(n, m) repeatedly and record matchings, witnesses, components.
    Simulate(SimulateArgs),
    /// Minimise the certificate over a grid of t = k/n.
    Sweep(SweepArgs),
    /// Tabulate gamma_m, c_m, expected out-degree, k_n, H(sigma), lambda.
    Analytic(AnalyticArgs),
    /// Log-space first-moment values and bounds.
    Moments(MomentsArgs),
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub n: usize,
    /// Popularity threshold: an integer or `inf`.
    #[arg(long)]
    pub m: Threshold,
    #[arg(long, default_value_t = 100)]
    pub trials: u64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long)]
    pub m: Threshold,
    #[arg(long, default_value_t = 1)]
    pub stride: u64,
    /// First t; defaults to 1/n.
    #[arg(long)]
    pub t_from: Option<f64>,
    #[arg(long, default_value_t = 0.5)]
    pub t_to: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Also write an SVG chart of H_min against t.
    #[arg(long)]
    pub svg: bool,
    #[arg(long, default_value_t = 1e-8)]
    pub func_tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub opt_tol: f64,
}

#[derive(Debug, Args)]
pub struct AnalyticArgs {
    /// Single threshold; all of 0..=5 and inf when absent.
    #[arg(long)]
    pub m: Option<Threshold>,
    /// n at which k_n is evaluated.
    #[arg(long, default_value_t = 1_000_000)]
    pub n: u64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct MomentsArgs {
    #[arg(long)]
    pub n: u64,
    #[arg(long, default_value = "1")]
    pub m: Threshold,
    /// k for the small-k and connectivity bounds; defaults to floor(n^delta).
    #[arg(long)]
    pub k: Option<u64>,
    #[arg(long, default_value_t = 0.3)]
    pub delta: f64,
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
}

/// Parses `args` (including the program name) and runs the command.
/// Returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { 0 };
        }
    };
    match execute(&cli.command) {
        Ok(Outcome { files, complete }) => {
            for f in files {
                println!("wrote {}", f.display());
            }
            if complete {
                0
            } else {
                eprintln!("pmcert: some computations did not converge");
                EXIT_FAILURE
            }
        }
        Err(e) => {
            eprintln!("pmcert: {e}");
            match e {
                Error::InvalidArgument(_) | Error::Domain { .. } | Error::Unsupported(_) => EXIT_USAGE,
                _ => EXIT_FAILURE,
            }
        }
    }
}

/// Files written by a command and whether every computation completed.
#[derive(Debug)]
pub struct Outcome {
    pub files: Vec<PathBuf>,
    pub complete: bool,
}

pub fn execute(command: &Command) -> Result<Outcome> {
    match command {
        Command::Simulate(a) => cmd_simulate(a),
        Command::Sweep(a) => cmd_sweep(a),
        Command::Analytic(a) => cmd_analytic(a),
        Command::Moments(a) => cmd_moments(a),
    }
}

/// Formats with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

/// The `# key: value` block that opens every output file.
pub fn header(command: &str, config: &[(&str, String)]) -> String {
    let mut h = format!("# pmcert {VERSION}\n# command: {command}\n");
    for (k, v) in config {
        h.push_str(&format!("# {k}: {v}\n"));
    }
    h
}

/// Writes `contents` to `path` through a temporary file in the same
/// directory, so a failure never leaves a partial file behind.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    fs::create_dir_all(dir)?;
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error))?;
    Ok(())
}

fn csv_body(records: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_writer(vec![]);
    for r in records {
        w.write_record(&r)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn with_header(header: &str, body: Vec<u8>) -> Vec<u8> {
    let mut out = header.as_bytes().to_vec();
    out.extend(body);
    out
}

/// Header entries and the data rows after them.
fn split_header(path: &Path) -> Result<(Vec<(String, String)>, String)> {
    let reader = BufReader::new(fs::File::open(path)?);
    let mut meta = Vec::new();
    let mut body = String::new();
    for line in reader.lines() {
        let line = line?;
        if let Some(rest) = line.strip_prefix('#') {
            if let Some((k, v)) = rest.trim().split_once(':') {
                meta.push((k.trim().to_string(), v.trim().to_string()));
            }
        } else {
            body.push_str(&line);
            body.push('\n');
        }
    }
    Ok((meta, body))
}

fn meta_value<'a>(meta: &'a [(String, String)], key: &str) -> Result<&'a str> {
    meta.iter()
        .find(|(k, _)| k == key)
        .map(|(_, v)| v.as_str())
        .ok_or_else(|| Error::Parse(format!("missing header entry `{key}`")))
}

fn parse_field<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad {what}: `{s}`")))
}

// ---------------------------------------------------------------- simulate

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub matching_size: usize,
    pub has_pm: bool,
    /// `|K|` of the Hall witness when there is no perfect matching.
    pub witness_k: Option<usize>,
    pub n_components: usize,
    pub largest_component: usize,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Simulation {
    pub n: usize,
    pub m: Threshold,
    pub seed: u64,
    pub records: Vec<TrialRecord>,
}

impl Simulation {
    pub fn pm_fraction(&self) -> f64 {
        self.records.iter().filter(|r| r.has_pm).count() as f64 / self.records.len() as f64
    }

    pub fn mean_matching_ratio(&self) -> f64 {
        let total: usize = self.records.iter().map(|r| r.matching_size).sum();
        total as f64 / (self.records.len() * self.n) as f64
    }
}

/// One draw of `B(n, m)` with the given graph seed.
pub fn run_trial(n: usize, m: Threshold, trial: u64, seed: u64) -> Result<TrialRecord> {
    let graph = generate(&ModelParams::new(n, m, seed)?);
    let matching = max_matching(&graph);
    let witness = hall_witness_from(&graph, &matching);
    let comps = components(&graph);
    Ok(TrialRecord {
        trial,
        seed,
        matching_size: matching.size,
        has_pm: matching.is_perfect(),
        witness_k: witness.map(|w| w.k.len()),
        n_components: comps.len(),
        largest_component: comps.first().map_or(0, |c| c.size()),
    })
}

/// Runs `trials` independent draws in parallel. The output order and
/// contents depend only on `(n, m, trials, seed)`.
pub fn simulate(n: usize, m: Threshold, trials: u64, seed: u64) -> Result<Simulation> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    ModelParams::new(n, m, seed)?;
    let records = (0..trials)
        .into_par_iter()
        .map(|i| run_trial(n, m, i, trial_seed(seed, i)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Simulation { n, m, seed, records })
}

const SIMULATE_COLUMNS: [&str; 7] = [
    "trial",
    "seed",
    "matching_size",
    "has_pm",
    "witness_k",
    "n_components",
    "largest_component",
];

/// Serialises a simulation: one row per trial, then a `summary` row
/// holding `pm_fraction` and `mean_matching_ratio`.
pub fn simulation_csv(sim: &Simulation) -> Result<Vec<u8>> {
    let head = header(
        "simulate",
        &[
            ("n", sim.n.to_string()),
            ("m", sim.m.to_string()),
            ("trials", sim.records.len().to_string()),
            ("seed", sim.seed.to_string()),
            ("seed_rule", "mix64(seed + 0x9E3779B97F4A7C15 * (trial + 1))".into()),
            ("summary_columns", "pm_fraction, mean_matching_ratio".into()),
        ],
    );
    let mut rows = vec![SIMULATE_COLUMNS.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    for r in &sim.records {
        rows.push(vec![
            r.trial.to_string(),
            r.seed.to_string(),
            r.matching_size.to_string(),
            u8::from(r.has_pm).to_string(),
            r.witness_k.map_or(String::new(), |k| k.to_string()),
            r.n_components.to_string(),
            r.largest_component.to_string(),
        ]);
    }
    rows.push(vec![
        "summary".into(),
        fmt_f64(sim.pm_fraction()),
        fmt_f64(sim.mean_matching_ratio()),
    ]);
    Ok(with_header(&head, csv_body(rows)?))
}

pub fn read_simulation(path: &Path) -> Result<Simulation> {
    let (meta, body) = split_header(path)?;
    let n = parse_field(meta_value(&meta, "n")?, "n")?;
    let m = parse_field(meta_value(&meta, "m")?, "m")?;
    let seed = parse_field(meta_value(&meta, "seed")?, "seed")?;
    let mut reader = csv::ReaderBuilder::new().flexible(true).from_reader(body.as_bytes());
    let mut records = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.get(0) == Some("summary") {
            continue;
        }
        let field = |i: usize| rec.get(i).ok_or_else(|| Error::Parse(format!("short row {rec:?}")));
        let witness = field(4)?;
        records.push(TrialRecord {
            trial: parse_field(field(0)?, "trial")?,
            seed: parse_field(field(1)?, "seed")?,
            matching_size: parse_field(field(2)?, "matching_size")?,
            has_pm: field(3)? == "1",
            witness_k: if witness.is_empty() { None } else { Some(parse_field(witness, "witness_k")?) },
            n_components: parse_field(field(5)?, "n_components")?,
            largest_component: parse_field(field(6)?, "largest_component")?,
        });
    }
    Ok(Simulation { n, m, seed, records })
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<Outcome> {
    let sim = simulate(a.n, a.m, a.trials, a.seed)?;
    let path = a.out.join(format!("simulate_n{}_m{}_seed{}.csv", a.n, a.m, a.seed));
    write_atomic(&path, &simulation_csv(&sim)?)?;
    println!(
        "pm_fraction {}  mean_matching_ratio {}",
        fmt_f64(sim.pm_fraction()),
        fmt_f64(sim.mean_matching_ratio())
    );
    Ok(Outcome {
        files: vec![path],
        complete: true,
    })
}

// ------------------------------------------------------------------- sweep

const SWEEP_COLUMNS: [&str; 9] = ["k", "t", "x", "y", "z", "u", "rho", "H_min", "converged"];

pub fn trajectory_csv(traj: &SweepTrajectory, config: &[(&str, String)]) -> Result<Vec<u8>> {
    let mut entries = vec![("n", traj.n.to_string()), ("m", traj.m.to_string())];
    entries.extend(config.iter().cloned());
    let head = header("sweep", &entries);
    let mut rows = vec![SWEEP_COLUMNS.iter().map(|s| s.to_string()).collect::<Vec<_>>()];
    for p in &traj.points {
        rows.push(vec![
            p.k.to_string(),
            fmt_f64(p.t),
            fmt_f64(p.vars.x),
            fmt_f64(p.vars.y),
            fmt_f64(p.vars.z),
            fmt_f64(p.vars.u),
            fmt_f64(p.rho),
            fmt_f64(p.h_min),
            u8::from(p.converged).to_string(),
        ]);
    }
    Ok(with_header(&head, csv_body(rows)?))
}

pub fn read_trajectory(path: &Path) -> Result<SweepTrajectory> {
    let (meta, body) = split_header(path)?;
    let n = parse_field(meta_value(&meta, "n")?, "n")?;
    let m = parse_field(meta_value(&meta, "m")?, "m")?;
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let mut points = Vec::new();
    for rec in reader.records() {
        let rec = rec?;
        if rec.len() != SWEEP_COLUMNS.len() {
            return Err(Error::Parse(format!("expected {} fields, got {rec:?}", SWEEP_COLUMNS.len())));
        }
        let f = |i: usize| parse_field::<f64>(&rec[i], SWEEP_COLUMNS[i]);
        points.push(SweepPoint {
            k: parse_field(&rec[0], "k")?,
            t: f(1)?,
            vars: CertVars::from_array([f(2)?, f(3)?, f(4)?, f(5)?]),
            rho: f(6)?,
            h_min: f(7)?,
            converged: &rec[8] == "1",
        });
    }
    Ok(SweepTrajectory { n, m, points })
}

/// Summary statistics of a sweep, as `(name, value)` rows. Entries that do
/// not apply (no zero crossing, fewer than 100 points, `t = 1/2` not on the
/// grid) are omitted.
pub fn sweep_summary(traj: &SweepTrajectory) -> Vec<(&'static str, f64)> {
    let mut out = vec![];
    if let Some(p) = traj.min_point() {
        out.push(("min_t", p.t));
        out.push(("min_H", p.h_min));
    }
    if let Some(p) = traj.points.iter().find(|p| 2 * p.k == traj.n) {
        out.push(("H_half", p.h_min));
    }
    if let Some(t) = optimizer::zero_crossing(traj) {
        out.push(("zero_crossing_t", t));
    }
    if let Ok(s) = optimizer::slope_fit(traj, 100) {
        out.push(("slope_first_100", s));
    }
    out.push(("all_converged", if traj.all_converged() { 1.0 } else { 0.0 }));
    out
}

fn finite_m(m: Threshold, what: &str) -> Result<u32> {
    m.finite()
        .ok_or_else(|| Error::InvalidArgument(format!("{what} needs a finite m")))
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<Outcome> {
    let m = finite_m(a.m, "sweep")?;
    if a.n < 2 {
        return Err(Error::InvalidArgument(format!("sweep needs n >= 2, got {}", a.n)));
    }
    let t_from = a.t_from.unwrap_or(1.0 / a.n as f64);
    let grid = SweepGrid::from_t(a.n, t_from, a.t_to, a.stride)?;
    let config = SimplexConfig {
        func_tol: a.func_tol,
        opt_tol: a.opt_tol,
        ..SimplexConfig::default()
    };
    config.validate()?;
    let traj = optimizer::sweep(&grid, m, &config)?;

    let stem = format!("sweep_n{}_m{}_stride{}", a.n, m, a.stride);
    let entries = vec![
        ("k_from", grid.k_from.to_string()),
        ("k_to", grid.k_to.to_string()),
        ("stride", grid.stride.to_string()),
        ("func_tol", fmt_f64(config.func_tol)),
        ("opt_tol", fmt_f64(config.opt_tol)),
        ("penalty", fmt_f64(config.penalty)),
        ("max_iters", config.max_iters.to_string()),
        ("restarts", config.restarts.to_string()),
    ];
    let mut files = vec![];

    let path = a.out.join(format!("{stem}.csv"));
    write_atomic(&path, &trajectory_csv(&traj, &entries)?)?;
    files.push(path);

    let head = header("sweep", &[&[("n", a.n.to_string()), ("m", m.to_string())], &entries[..]].concat());
    let plot = csv_body(
        std::iter::once(vec!["t".to_string(), "H_min".to_string()])
            .chain(traj.points.iter().map(|p| vec![fmt_f64(p.t), fmt_f64(p.h_min)])),
    )?;
    let path = a.out.join(format!("{stem}_plot.csv"));
    write_atomic(&path, &with_header(&head, plot))?;
    files.push(path);

    let summary = sweep_summary(&traj);
    let body = csv_body(
        std::iter::once(vec!["name".to_string(), "value".to_string()])
            .chain(summary.iter().map(|(k, v)| vec![k.to_string(), fmt_f64(*v)])),
    )?;
    let path = a.out.join(format!("{stem}_summary.csv"));
    write_atomic(&path, &with_header(&head, body))?;
    files.push(path);
    for (k, v) in &summary {
        println!("{k} {}", fmt_f64(*v));
    }

    if a.svg {
        let series = Series::new(format!("m={m}"), traj.points.iter().map(|p| (p.t, p.h_min)).collect());
        let chart = svg::line_chart(&format!("n = {}", a.n), "t", "min H", &[series]);
        let path = a.out.join(format!("{stem}.svg"));
        write_atomic(&path, chart.as_bytes())?;
        files.push(path);
    }

    Ok(Outcome {
        files,
        complete: traj.all_converged(),
    })
}

// ---------------------------------------------------------------- analytic

/// One row of the analytic table; entries undefined for the threshold are
/// `None`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticRow {
    pub m: Threshold,
    pub gamma: f64,
    pub c: Option<f64>,
    pub d: f64,
    pub k_n: Option<f64>,
}

pub fn analytic_row(m: Threshold, n: u64) -> AnalyticRow {
    AnalyticRow {
        m,
        gamma: certificate::gamma_closed(m),
        c: certificate::c_m(m).ok(),
        d: crate::model::expected_out_degree(m),
        k_n: certificate::k_n(m, n as f64).ok(),
    }
}

pub fn cmd_analytic(a: &AnalyticArgs) -> Result<Outcome> {
    if a.n < 2 {
        return Err(Error::InvalidArgument(format!("analytic needs n >= 2, got {}", a.n)));
    }
    let ms: Vec<Threshold> = match a.m {
        Some(m) => vec![m],
        None => (0..=5).map(Threshold::Finite).chain([Threshold::Infinite]).collect(),
    };
    let opt = |v: Option<f64>| v.map_or(String::new(), fmt_f64);
    let mut rows = vec![vec!["m", "gamma", "c", "d", "k_n"].into_iter().map(String::from).collect::<Vec<_>>()];
    for &m in &ms {
        let r = analytic_row(m, a.n);
        rows.push(vec![m.to_string(), fmt_f64(r.gamma), opt(r.c), fmt_f64(r.d), opt(r.k_n)]);
    }
    let s = moments::sigma();
    rows.push(vec!["sigma".into(), fmt_f64(s)]);
    rows.push(vec!["H_sigma".into(), fmt_f64(moments::h_z(s))]);
    rows.push(vec!["lambda".into(), fmt_f64(moments::lambda())]);

    let m_label = a.m.map_or("all".to_string(), |m| m.to_string());
    let head = header("analytic", &[("m", m_label.clone()), ("n", a.n.to_string())]);
    let body = csv_body(rows)?;
    print!("{}", String::from_utf8_lossy(&body));
    let path = a.out.join(format!("analytic_m{m_label}_n{}.csv", a.n));
    write_atomic(&path, &with_header(&head, body))?;
    Ok(Outcome {
        files: vec![path],
        complete: true,
    })
}

// ----------------------------------------------------------------- moments

/// Two-column `name,value` table of a report; omitted-term flags follow as
/// `flag:<name>,<label>` rows.
pub fn moments_csv(r: &MomentReport) -> Result<Vec<u8>> {
    let head = header(
        "moments",
        &[
            ("n", r.n.to_string()),
            ("m", r.m.to_string()),
            ("k", r.k.to_string()),
            ("delta", fmt_f64(r.delta)),
            ("k_yn", r.k_yn.to_string()),
        ],
    );
    let mut rows = vec![vec!["name".to_string(), "value".to_string()]];
    for (k, v) in r.values() {
        rows.push(vec![k.to_string(), fmt_f64(v)]);
    }
    for (name, flag) in &r.omitted {
        rows.push(vec![format!("flag:{name}"), flag.to_string()]);
    }
    Ok(with_header(&head, csv_body(rows)?))
}

pub fn cmd_moments(a: &MomentsArgs) -> Result<Outcome> {
    let m = finite_m(a.m, "moments")?;
    let report = MomentReport::compute(a.n, m, a.k, a.delta)?;
    let bytes = moments_csv(&report)?;
    let path = a.out.join(format!("moments_n{}_m{}_k{}_delta{}.csv", a.n, m, report.k, a.delta));
    write_atomic(&path, &bytes)?;
    for (k, v) in report.values() {
        println!("{k} {}", fmt_f64(v));
    }
    Ok(Outcome {
        files: vec![path],
        complete: report.values().iter().all(|(_, v)| v.is_finite()),
    })
}

/// Parses a `name,value` table written by [`cmd_moments`] or the sweep
/// summary, skipping flag rows.
pub fn read_name_values(path: &Path) -> Result<Vec<(String, f64)>> {
    let (_, body) = split_header(path)?;
    let mut reader = csv::Reader::from_reader(body.as_bytes());
    let mut out = vec![];
    for rec in reader.records() {
        let rec = rec?;
        if rec[0].starts_with("flag:") {
            continue;
        }
        out.push((rec[0].to_string(), parse_field(&rec[1], &rec[0])?));
    }
    Ok(out)
}
