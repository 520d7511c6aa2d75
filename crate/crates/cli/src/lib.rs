//! `refracto` command-line interface.
//!
//! Exit codes: 0 success, 1 runtime or domain error, 2 usage error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use refracto_core::calibration::{self, build_model, calibrate_zero, compute_k2, measure};
use refracto_core::dsp_pipeline::{process_frame_traced, PipelineTrace};
use refracto_core::io::{load_model, read_capture, save_model, write_capture, RunConfig};
use refracto_core::oversampling::{dc_sweep, required_sampling_rate};
use refracto_core::sensor_sim::{preset_scenario, synth_frame_detailed, PRESET_NAMES};
use refracto_core::stats;
use refracto_core::{Error, LiquidLevel};

pub const EXIT_OK: i32 = 0;
pub const EXIT_RUNTIME: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "refracto", version, about = "CMOS critical-angle refractometer toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Synthesize a sensor capture.
    Simulate(SimulateArgs),
    /// Detect the boundary in captures and optionally convert to Brix.
    Process(ProcessArgs),
    /// Build a calibration model from (position, brix) pairs and water captures.
    Calibrate(CalibrateArgs),
    /// Paired t-test, confidence interval, RSD or correlation over CSV columns.
    Stats(StatsArgs),
    /// DC sweep comparing plain and dithered-oversampled conversion.
    #[command(name = "oversample-demo")]
    OversampleDemo(OversampleArgs),
}

#[derive(Debug, Args)]
struct SimulateArgs {
    /// Concentration in % Brix (defaults to the preset's).
    #[arg(long)]
    brix: Option<f64>,
    /// One of: normal, empty, very-low, weak-led, t160, t800, t1600.
    #[arg(long, default_value = "normal")]
    scenario: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    temperature: Option<f64>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct ProcessArgs {
    #[arg(required = true)]
    captures: Vec<PathBuf>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Write pixel,raw,deburred,smoothed,difference CSV (single capture only).
    #[arg(long)]
    plot: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CalibrateArgs {
    /// CSV of position,brix pairs.
    #[arg(long)]
    pairs: PathBuf,
    /// Pure-water captures used for the zero offset.
    #[arg(long, num_args = 1..)]
    water: Vec<PathBuf>,
    /// Brix breakpoints between segments (repeatable).
    #[arg(long = "breakpoint", default_values_t = [calibration::DEFAULT_BREAKPOINT_BRIX])]
    breakpoints: Vec<f64>,
    /// Display scale; overrides the slope pair below.
    #[arg(long, conflicts_with_all = ["reference_slope", "prototype_slope"])]
    k2: Option<f64>,
    #[arg(long, requires = "prototype_slope")]
    reference_slope: Option<f64>,
    #[arg(long, requires = "reference_slope")]
    prototype_slope: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    temp_coeff: f64,
    #[arg(long, default_value_t = 20.0)]
    temp_ref: f64,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct StatsArgs {
    file: PathBuf,
    #[arg(long)]
    paired: bool,
    #[arg(long)]
    pearson: bool,
    #[arg(long)]
    ci: bool,
    #[arg(long)]
    rsd: bool,
    /// Column names or 0-based indices, comma separated (default: last two).
    #[arg(long, value_delimiter = ',')]
    cols: Vec<String>,
    /// Confidence level.
    #[arg(long, default_value_t = 0.95)]
    level: f64,
}

#[derive(Debug, Args)]
struct OversampleArgs {
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Extra bits w (overrides config).
    #[arg(long)]
    w: Option<u32>,
    #[arg(long)]
    bits: Option<u32>,
    /// Dither amplitude in LSB (overrides config).
    #[arg(long)]
    dither: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    points: usize,
    /// First swept voltage (default: base code 1000).
    #[arg(long)]
    start: Option<f64>,
    /// Swept span in base LSB.
    #[arg(long, default_value_t = 1.0)]
    span_lsb: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Runs the CLI with `argv` (including the program name).
pub fn run_cli<O: Write, E: Write>(argv: &[String], out: &mut O, err: &mut E) -> i32 {
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => EXIT_OK,
                _ => EXIT_USAGE,
            };
            let rendered = e.render().to_string();
            if code == EXIT_OK {
                let _ = write!(out, "{rendered}");
            } else {
                let _ = write!(err, "{rendered}");
            }
            return code;
        }
    };
    let result = match cli.command {
        Command::Simulate(a) => simulate(a, out),
        Command::Process(a) => process(a, out),
        Command::Calibrate(a) => calibrate(a, out),
        Command::Stats(a) => run_stats(a, out),
        Command::OversampleDemo(a) => oversample_demo(a, out),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.to_string().replace('\n', " "));
            EXIT_RUNTIME
        }
    }
}

#[derive(Debug)]
enum CliError {
    Core(Error),
    Other(String),
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Core(e) => write!(f, "{e}"),
            CliError::Other(s) => f.write_str(s),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Core(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Other(e.to_string())
    }
}

type CliResult = std::result::Result<(), CliError>;

fn load_config(path: Option<&Path>) -> Result<RunConfig, Error> {
    match path {
        Some(p) => RunConfig::load(p),
        None => Ok(RunConfig::default()),
    }
}

fn write_file(path: &Path, text: &str) -> CliResult {
    fs::write(path, text).map_err(|e| CliError::Other(format!("{}: {e}", path.display())))
}

fn simulate<O: Write>(a: SimulateArgs, out: &mut O) -> CliResult {
    let cfg = load_config(a.config.as_deref())?;
    let mut scn = preset_scenario(&a.scenario).map_err(|e| {
        CliError::Other(format!("{e} (known: {})", PRESET_NAMES.join(", ")))
    })?;
    cfg.sim.apply(&mut scn);
    if let Some(b) = a.brix {
        scn.brix = b;
    }
    if let Some(t) = a.temperature {
        scn.temperature_c = t;
    }
    scn.seed = a.seed;
    let (frame, truth) = synth_frame_detailed(&scn, &cfg.geometry)?;
    write_capture(&frame, &a.out)?;
    let boundary = truth
        .boundary_px
        .map_or_else(|| "none".to_string(), |p| format!("{p:.3}"));
    writeln!(
        out,
        "wrote {} pixels={} level={} boundary_px={} burrs={}",
        a.out.display(),
        frame.len(),
        scn.level,
        boundary,
        truth.burrs.len()
    )?;
    Ok(())
}

fn plot_csv(raw: &[f64], trace: &PipelineTrace) -> String {
    let cell = |v: &[f64], i: usize| v.get(i).map_or_else(String::new, |x| x.to_string());
    let mut s = String::from("pixel,raw,deburred,smoothed,difference\n");
    for (i, r) in raw.iter().enumerate() {
        s.push_str(&format!(
            "{i},{r},{},{},{}\n",
            cell(&trace.deburred, i),
            cell(&trace.smoothed, i),
            cell(&trace.difference, i)
        ));
    }
    s
}

fn process<O: Write>(a: ProcessArgs, out: &mut O) -> CliResult {
    let cfg = load_config(a.config.as_deref())?;
    let model = a.model.as_deref().map(load_model).transpose()?;
    if a.plot.is_some() && a.captures.len() != 1 {
        return Err(CliError::Other("--plot needs exactly one capture".into()));
    }
    for path in &a.captures {
        let frame = read_capture(path)?;
        let trace = process_frame_traced(&frame, &cfg.pipeline)?;
        if let Some(plot) = &a.plot {
            write_file(plot, &plot_csv(&frame.voltages, &trace))?;
        }
        let det = &trace.detection;
        if det.level != LiquidLevel::Normal {
            writeln!(out, "{}: level={} ALERT {}", path.display(), det.level, det.level)?;
            continue;
        }
        let (index1, max_diff) = (det.index1.unwrap_or(0), det.max_diff_volts.unwrap_or(0.0));
        match &model {
            None => writeln!(
                out,
                "{}: level={} index1={index1} max_diff={max_diff:.4} accepted={}",
                path.display(),
                det.level,
                det.accepted
            )?,
            Some(model) => {
                let m = measure(&frame, model, &cfg.pipeline)?;
                writeln!(
                    out,
                    "{}: level={} index1={index1} max_diff={max_diff:.4} brix_raw={:.3} brix={:.2}",
                    path.display(),
                    m.level,
                    m.brix_raw.unwrap_or(f64::NAN),
                    m.brix_final.unwrap_or(f64::NAN)
                )?;
            }
        }
    }
    Ok(())
}

/// Numeric table read with the csv crate. A first row that does not parse
/// as numbers is taken as a header; `#` lines are comments.
struct Table {
    header: Option<Vec<String>>,
    columns: Vec<Vec<f64>>,
}

fn read_table(path: &Path) -> std::result::Result<Table, CliError> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .flexible(false)
        .from_path(path)
        .map_err(|e| CliError::Other(format!("{}: {e}", path.display())))?;
    let mut header = None;
    let mut columns: Vec<Vec<f64>> = Vec::new();
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| CliError::Other(format!("{}: {e}", path.display())))?;
        let line = rec.position().map_or(i + 1, |p| p.line() as usize);
        let parsed: Vec<Option<f64>> = rec.iter().map(|f| f.parse::<f64>().ok()).collect();
        if i == 0 && parsed.iter().any(Option::is_none) {
            header = Some(rec.iter().map(str::to_string).collect());
            columns = vec![Vec::new(); rec.len()];
            continue;
        }
        if columns.is_empty() {
            columns = vec![Vec::new(); rec.len()];
        }
        for (c, v) in parsed.into_iter().enumerate() {
            let v = v.ok_or_else(|| {
                CliError::Other(format!(
                    "{}:{line}: non-numeric value `{}`",
                    path.display(),
                    &rec[c]
                ))
            })?;
            columns[c].push(v);
        }
    }
    if columns.is_empty() || columns[0].is_empty() {
        return Err(CliError::Other(format!("{}: no data rows", path.display())));
    }
    Ok(Table { header, columns })
}

impl Table {
    fn column(&self, name: &str) -> std::result::Result<&[f64], CliError> {
        let idx = self
            .header
            .as_ref()
            .and_then(|h| h.iter().position(|c| c == name))
            .or_else(|| name.parse::<usize>().ok())
            .filter(|&i| i < self.columns.len())
            .ok_or_else(|| CliError::Other(format!("no column `{name}`")))?;
        Ok(&self.columns[idx])
    }

    fn name(&self, idx: usize) -> String {
        self.header
            .as_ref()
            .map_or_else(|| format!("col{idx}"), |h| h[idx].clone())
    }
}

fn run_stats<O: Write>(a: StatsArgs, out: &mut O) -> CliResult {
    let table = read_table(&a.file)?;
    let ncols = table.columns.len();
    let any_mode = a.paired || a.pearson || a.ci || a.rsd;
    let two_col = a.paired || a.pearson || (!any_mode && ncols >= 2);

    if two_col {
        let (x, y, xn, yn) = if a.cols.is_empty() {
            if ncols < 2 {
                return Err(CliError::Other("paired statistics need two columns".into()));
            }
            (
                &table.columns[ncols - 2][..],
                &table.columns[ncols - 1][..],
                table.name(ncols - 2),
                table.name(ncols - 1),
            )
        } else if a.cols.len() == 2 {
            (
                table.column(&a.cols[0])?,
                table.column(&a.cols[1])?,
                a.cols[0].clone(),
                a.cols[1].clone(),
            )
        } else {
            return Err(CliError::Other("--cols needs two columns for paired statistics".into()));
        };
        writeln!(out, "a={xn}")?;
        writeln!(out, "b={yn}")?;
        if a.paired || !any_mode {
            let r = stats::paired_t_test(x, y, a.level)?;
            writeln!(out, "n={}", r.n)?;
            writeln!(out, "mean_a={:.3}", r.mean_a)?;
            writeln!(out, "sd_a={:.3}", r.sd_a)?;
            writeln!(out, "mean_b={:.3}", r.mean_b)?;
            writeln!(out, "sd_b={:.3}", r.sd_b)?;
            writeln!(out, "mean_diff={:.3}", r.mean_diff)?;
            writeln!(out, "sd_diff={:.3}", r.sd_diff)?;
            writeln!(out, "t={:.3}", r.t_value)?;
            writeln!(out, "df={}", r.df)?;
            writeln!(out, "p={:.3}", r.p_two_sided)?;
            writeln!(out, "cohens_d={:.3}", r.cohens_d)?;
            writeln!(out, "level={}", r.level)?;
            writeln!(out, "ci_low={:.3}", r.ci_low)?;
            writeln!(out, "ci_high={:.3}", r.ci_high)?;
        }
        if a.pearson || !any_mode {
            writeln!(out, "pearson_r={:.4}", stats::pearson_r(x, y)?)?;
        }
    }

    // A table of (n, mean, sd) rows describes samples already summarised.
    if a.ci && !a.rsd && a.cols.is_empty() {
        if let (Ok(ns), Ok(means), Ok(sds)) =
            (table.column("n"), table.column("mean"), table.column("sd"))
        {
            for ((&n, &mean), &sd) in ns.iter().zip(means).zip(sds) {
                if n.fract() != 0.0 || n < 0.0 {
                    return Err(CliError::Other(format!("sample count {n} is not a whole number")));
                }
                let (lo, hi) = stats::confidence_interval_from_summary(mean, sd, n as usize, a.level)?;
                writeln!(out, "n={n}")?;
                writeln!(out, "mean={mean:.4}")?;
                writeln!(out, "sd={sd:.4}")?;
                writeln!(out, "level={}", a.level)?;
                writeln!(out, "ci_low={lo:.4}")?;
                writeln!(out, "ci_high={hi:.4}")?;
            }
            return Ok(());
        }
    }

    if a.ci || a.rsd || (!any_mode && ncols == 1) {
        let idx = match a.cols.as_slice() {
            [] => ncols - 1,
            [c] => table
                .header
                .as_ref()
                .and_then(|h| h.iter().position(|n| n == c))
                .or_else(|| c.parse().ok())
                .filter(|&i| i < ncols)
                .ok_or_else(|| CliError::Other(format!("no column `{c}`")))?,
            _ if two_col => ncols - 1,
            _ => return Err(CliError::Other("--ci/--rsd take a single column".into())),
        };
        let xs = &table.columns[idx];
        let (mean, sd) = stats::mean_sd(xs)?;
        writeln!(out, "column={}", table.name(idx))?;
        writeln!(out, "n={}", xs.len())?;
        writeln!(out, "mean={mean:.4}")?;
        writeln!(out, "sd={sd:.4}")?;
        if a.ci || !any_mode {
            let (lo, hi) = stats::confidence_interval(xs, a.level)?;
            writeln!(out, "level={}", a.level)?;
            writeln!(out, "ci_low={lo:.4}")?;
            writeln!(out, "ci_high={hi:.4}")?;
        }
        if a.rsd || !any_mode {
            writeln!(out, "rsd_percent={:.4}", stats::rsd_percent(xs)?)?;
        }
    }
    Ok(())
}

fn calibrate<O: Write>(a: CalibrateArgs, out: &mut O) -> CliResult {
    let cfg = load_config(a.config.as_deref())?;
    let table = read_table(&a.pairs)?;
    let (pos, brix) = match (table.column("position"), table.column("brix")) {
        (Ok(p), Ok(b)) => (p, b),
        _ if table.columns.len() == 2 => (&table.columns[0][..], &table.columns[1][..]),
        _ => {
            return Err(CliError::Other(
                "pairs CSV needs `position` and `brix` columns".into(),
            ))
        }
    };
    let points: Vec<(f64, f64)> = pos.iter().copied().zip(brix.iter().copied()).collect();
    let mut model = build_model(&points, &a.breakpoints)?;
    if !a.water.is_empty() {
        let frames = a
            .water
            .iter()
            .map(|p| read_capture(p))
            .collect::<Result<Vec<_>, _>>()?;
        model = calibrate_zero(&frames, &model, &cfg.pipeline)?;
    }
    let k2 = match (a.k2, a.reference_slope, a.prototype_slope) {
        (Some(k2), _, _) => k2,
        (None, Some(r), Some(p)) => compute_k2(r, p)?,
        _ => 1.0,
    };
    model = model
        .with_k2(k2)
        .with_temperature_compensation(a.temp_coeff, a.temp_ref);
    save_model(&model, &a.out)?;
    writeln!(out, "wrote {}", a.out.display())?;
    for (i, s) in model.segments.iter().enumerate() {
        writeln!(
            out,
            "segment {i}: [{:.2}, {:.2}] slope={:.6} intercept={:.4} r2={:.6}",
            s.lo, s.hi, s.slope, s.intercept, s.r_squared
        )?;
    }
    writeln!(out, "c0={:.4} k2={:.6}", model.c0, model.k2)?;
    Ok(())
}

fn oversample_demo<O: Write>(a: OversampleArgs, out: &mut O) -> CliResult {
    let cfg = load_config(a.config.as_deref())?;
    let mut os = cfg.oversample.clone();
    if let Some(w) = a.w {
        os.extra_bits_w = w;
    }
    if let Some(b) = a.bits {
        os.adc_bits = b;
    }
    if let Some(d) = a.dither {
        os.dither_amp_lsb = d;
    }
    os.seed = a.seed;
    os.validate()?;
    let lsb = os.lsb_volts();
    let start = a.start.unwrap_or(1000.0 * lsb);
    let sweep = dc_sweep(&os, start, a.span_lsb * lsb, a.points)?;

    let mut csv = String::from(
        "true_volts,base_code,enhanced_code,base_error_volts,enhanced_error_volts\n",
    );
    for r in &sweep.rows {
        csv.push_str(&format!(
            "{},{},{},{},{}\n",
            r.true_volts, r.base_code, r.enhanced_code, r.base_error_volts, r.enhanced_error_volts
        ));
    }
    let Some(path) = &a.out else {
        write!(out, "{csv}")?;
        return Ok(());
    };
    write_file(path, &csv)?;
    writeln!(out, "wrote {}", path.display())?;
    writeln!(out, "f_os={}", required_sampling_rate(&os))?;
    writeln!(out, "samples_per_output={}", os.samples_per_output())?;
    writeln!(out, "base_rms_lsb={:.4}", sweep.base_rms_volts / lsb)?;
    writeln!(out, "enhanced_rms_lsb={:.4}", sweep.enhanced_rms_volts / lsb)?;
    writeln!(out, "ratio={:.4}", sweep.enhanced_rms_volts / sweep.base_rms_volts)?;
    Ok(())
}
