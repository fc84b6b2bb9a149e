//! `cheshire-sim` command line.
//!
//! Exit codes: 0 success, 2 invalid configuration, 3 a physics invariant
//! failed (a defect in the simulator, reported loudly).

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::SimError;
use crate::hilbert::C64;
use crate::scenarios::{self, PointerConfig, PolarizationInput, ScenarioConfig, ScenarioReport};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INVARIANT: i32 = 3;

/// Environment variable capping worker threads; 0 or unset means one per core.
pub const THREADS_ENV: &str = "CHESHIRE_SIM_THREADS";

#[derive(Debug, Parser)]
#[command(name = "cheshire-sim", version, about = "Pre/post-selected interferometry with weak pointers")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Plain interferometer with H input.
    Cheshire(Common),
    /// Arbitrary input polarization teleported before the final selection.
    Teleport(TeleportArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Args)]
struct Common {
    /// Coupling strengths g/σ, strictly decreasing.
    #[arg(long = "g", value_delimiter = ',', default_values_t = vec![0.4, 0.2, 0.1, 0.05])]
    strengths: Vec<f64>,
    /// Pointer grid points (power of two).
    #[arg(long = "n", default_value_t = 4096)]
    grid_points: usize,
    /// Pointer width σ.
    #[arg(long, default_value_t = 1.0)]
    sigma: f64,
    /// Grid span in units of σ.
    #[arg(long, default_value_t = 20.0)]
    span: f64,
    #[arg(long, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Write the report here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct TeleportArgs {
    #[command(flatten)]
    common: Common,
    /// H amplitude, `re`, `im i` or `re+im i`.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "random")]
    alpha: Option<String>,
    /// V amplitude, same syntax as --alpha.
    #[arg(long, allow_hyphen_values = true, conflicts_with = "random")]
    beta: Option<String>,
    /// Draw the input polarization from --seed.
    #[arg(long, requires = "seed")]
    random: bool,
    /// Seed for the random input and for sampling a single Bell outcome.
    #[arg(long)]
    seed: Option<u64>,
    /// Dave repeats the weak measurements after Bob's correction.
    #[arg(long)]
    dave_check: bool,
}

/// Parses `re`, `im i` or `re±im i`.
pub fn parse_complex(s: &str) -> Result<C64, SimError> {
    let bad = || SimError::InvalidInput(format!("cannot parse complex number `{s}`"));
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let num = |x: &str| x.parse::<f64>().map_err(|_| bad());
    let Some(body) = t.strip_suffix('i') else {
        return Ok(C64::new(num(&t)?, 0.0));
    };
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'));
    match split {
        Some(k) => Ok(C64::new(num(&body[..k])?, num(&body[k..])?)),
        None => Ok(C64::new(0.0, num(body)?)),
    }
}

impl Common {
    fn config(&self) -> ScenarioConfig {
        ScenarioConfig {
            strengths: self.strengths.clone(),
            pointer: PointerConfig {
                grid_points: self.grid_points,
                width: self.sigma,
                span: self.span,
            },
            seed: None,
            dave_check: false,
        }
    }
}

fn exit_code(e: &SimError) -> i32 {
    match e {
        SimError::InvalidInput(_)
        | SimError::InvalidStrengths(_)
        | SimError::InvalidPointer(_)
        | SimError::Wraparound { .. }
        | SimError::NonIntegerSpectrum(_)
        | SimError::ZeroNorm => EXIT_CONFIG,
        _ => EXIT_INVARIANT,
    }
}

fn threads_from_env() -> Result<usize, SimError> {
    match std::env::var(THREADS_ENV) {
        Ok(v) => v
            .trim()
            .parse::<usize>()
            .map_err(|_| SimError::InvalidInput(format!("{THREADS_ENV}={v} is not a thread count"))),
        Err(_) => Ok(0),
    }
}

fn teleport_input(args: &TeleportArgs) -> Result<PolarizationInput, SimError> {
    if args.random {
        return Ok(PolarizationInput::random(args.seed.expect("clap requires --seed")));
    }
    let alpha = args.alpha.as_deref().map(parse_complex).transpose()?;
    let beta = args.beta.as_deref().map(parse_complex).transpose()?;
    match (alpha, beta) {
        (None, None) => Ok(PolarizationInput::horizontal()),
        (a, b) => PolarizationInput::normalized(
            a.unwrap_or(C64::new(0.0, 0.0)),
            b.unwrap_or(C64::new(0.0, 0.0)),
        ),
    }
}

fn execute(command: &Command) -> Result<(ScenarioReport, Format, Option<PathBuf>), SimError> {
    match command {
        Command::Cheshire(common) => Ok((
            scenarios::run_cheshire(&common.config())?,
            common.format,
            common.out.clone(),
        )),
        Command::Teleport(args) => {
            let inp = teleport_input(args)?;
            let config = ScenarioConfig {
                seed: args.seed,
                dave_check: args.dave_check,
                ..args.common.config()
            };
            Ok((
                scenarios::run_teleport_cheshire(&inp, &config)?,
                args.common.format,
                args.common.out.clone(),
            ))
        }
    }
}

/// Runs the command line and returns the process exit code. The report goes
/// to `stdout` unless `--out` is given; diagnostics go to stderr.
pub fn run<I, T>(args: I, stdout: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    let threads = match threads_from_env() {
        Ok(n) => n,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_CONFIG;
        }
    };
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(threads).build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("error: cannot start worker threads: {e}");
            return EXIT_CONFIG;
        }
    };
    let (report, format, out) = match pool.install(|| execute(&cli.command)) {
        Ok(r) => r,
        Err(e) => {
            let code = exit_code(&e);
            if code == EXIT_INVARIANT {
                eprintln!("invariant violated: {e}");
            } else {
                eprintln!("error: {e}");
            }
            return code;
        }
    };
    let text = match render(&report, format) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return EXIT_INVARIANT;
        }
    };
    let written = match out {
        Some(path) => std::fs::write(&path, text.as_bytes()).map_err(|e| format!("{}: {e}", path.display())),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        eprintln!("error: cannot write report: {e}");
        return EXIT_CONFIG;
    }
    EXIT_OK
}

pub fn render(report: &ScenarioReport, format: Format) -> Result<String, SimError> {
    match format {
        Format::Json => to_json(report),
        Format::Csv => to_csv(report),
        Format::Table => Ok(to_table(report)),
    }
}

pub fn to_json(report: &ScenarioReport) -> Result<String, SimError> {
    let mut s = serde_json::to_string_pretty(report).map_err(|e| SimError::InvariantViolation(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn from_json(text: &str) -> Result<ScenarioReport, SimError> {
    serde_json::from_str(text).map_err(|e| SimError::InvalidInput(e.to_string()))
}

fn observable_name(e: &scenarios::WeakValueEntry) -> String {
    match e.branch {
        Some(b) => format!("{}[{b}]", e.label),
        None => e.label.clone(),
    }
}

pub const CSV_HEADER: [&str; 8] = [
    "scenario",
    "observable",
    "g",
    "analytic_re",
    "analytic_im",
    "est_re",
    "est_im",
    "abs_err",
];

pub fn to_csv(report: &ScenarioReport) -> Result<String, SimError> {
    let io = |e: csv::Error| SimError::InvariantViolation(e.to_string());
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(CSV_HEADER).map_err(io)?;
    for e in &report.weak_values {
        let name = observable_name(e);
        for est in &e.estimates {
            w.write_record([
                report.scenario.clone(),
                name.clone(),
                est.g.to_string(),
                e.analytic.re.to_string(),
                e.analytic.im.to_string(),
                est.re.to_string(),
                est.im.to_string(),
                est.abs_err.to_string(),
            ])
            .map_err(io)?;
        }
    }
    let bytes = w.into_inner().map_err(|e| SimError::InvariantViolation(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| SimError::InvariantViolation(e.to_string()))
}

fn fmt_c(re: f64, im: f64) -> String {
    format!("{re:+.6}{im:+.6}i")
}

pub fn to_table(report: &ScenarioReport) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "scenario: {}", report.scenario);
    if let (Some(a), Some(b)) = (report.config.alpha, report.config.beta) {
        let _ = writeln!(s, "input: alpha = {}, beta = {}", fmt_c(a.re, a.im), fmt_c(b.re, b.im));
    }
    let _ = writeln!(
        s,
        "pointer: N = {}, sigma = {}, span = {} sigma",
        report.config.grid_points, report.config.width, report.config.span
    );
    let _ = writeln!(s, "postselection probability: {:.12}", report.postselection_probability);
    let _ = writeln!(s);
    let _ = writeln!(
        s,
        "{:<24} {:>24} {:>8} {:>24} {:>12} {:>10}",
        "observable", "analytic", "g", "estimate", "abs_err", "converging"
    );
    for e in &report.weak_values {
        table_rows(&mut s, e);
    }
    if let Some(t) = &report.teleport {
        let _ = writeln!(s);
        let _ = writeln!(s, "teleport fidelity: {:.12}", t.fidelity);
        for m in &t.outcome {
            let _ = writeln!(
                s,
                "message {} -> {}: {}{}",
                m.sender, m.receiver, m.payload[0], m.payload[1]
            );
        }
        let _ = writeln!(
            s,
            "{:<8} {:>12} {:>12} {:>10} {:>14} {:>14} {:>10}",
            "branch", "p(bell)", "p(bell,D1)", "fidelity", "trace_dist", "1-F(pointers)", "phase"
        );
        for (b, p) in t.branches.iter().zip(&t.phases) {
            let _ = writeln!(
                s,
                "{:<8} {:>12.9} {:>12.9} {:>10.7} {:>14.3e} {:>14.3e} {:>10.6}",
                b.outcome.to_string(),
                b.bell_probability,
                b.joint_probability,
                b.fidelity,
                b.trace_distance,
                b.pointer_infidelity,
                p.phase
            );
        }
        if !t.dave_check.is_empty() {
            let _ = writeln!(s);
            let _ = writeln!(s, "dave's check after correction:");
            for e in &t.dave_check {
                table_rows(&mut s, e);
            }
        }
    }
    if !report.endgame.is_empty() {
        let _ = writeln!(s);
        let _ = writeln!(s, "end-game reduced states:");
        for e in &report.endgame {
            let branch = e.branch.map(|b| format!(" [{b}]")).unwrap_or_default();
            let _ = writeln!(s, "{}{} on {}:", e.party, branch, e.subsystems.join(","));
            for row in &e.matrix {
                let cells: Vec<String> = row.iter().map(|z| fmt_c(z.re, z.im)).collect();
                let _ = writeln!(s, "  {}", cells.join("  "));
            }
        }
    }
    s
}

fn table_rows(s: &mut String, e: &scenarios::WeakValueEntry) {
    let name = observable_name(e);
    for (k, est) in e.estimates.iter().enumerate() {
        let (label, analytic, conv) = if k == 0 {
            (
                name.as_str(),
                fmt_c(e.analytic.re, e.analytic.im),
                if e.converging { "yes" } else { "no" },
            )
        } else {
            ("", String::new(), "")
        };
        let _ = writeln!(
            s,
            "{:<24} {:>24} {:>8.4} {:>24} {:>12.3e} {:>10}",
            label,
            analytic,
            est.g,
            fmt_c(est.re, est.im),
            est.abs_err,
            conv
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn complex_syntax() {
        let cases = [
            ("0.6", C64::new(0.6, 0.0)),
            ("0.0+0.8i", C64::new(0.0, 0.8)),
            ("0.8i", C64::new(0.0, 0.8)),
            ("-0.3-0.4i", C64::new(-0.3, -0.4)),
            ("1e-1+2E-1i", C64::new(0.1, 0.2)),
            ("-2e-3i", C64::new(0.0, -2e-3)),
        ];
        for (s, want) in cases {
            assert_eq!(parse_complex(s).unwrap(), want, "{s}");
        }
        for s in ["", "abc", "1+i", "0.5+0.5j"] {
            assert!(parse_complex(s).is_err(), "{s}");
        }
    }

    #[test]
    fn bad_flags_exit_with_config_code() {
        let mut out = Vec::new();
        assert_eq!(run(["cheshire-sim", "cheshire", "--g", "0.1,0.2"], &mut out), EXIT_CONFIG);
        assert_eq!(run(["cheshire-sim", "teleport", "--random"], &mut out), EXIT_CONFIG);
        assert_eq!(run(["cheshire-sim", "teleport", "--alpha", "x"], &mut out), EXIT_CONFIG);
        assert_eq!(run(["cheshire-sim", "cheshire", "--n", "100"], &mut out), EXIT_CONFIG);
        assert!(out.is_empty());
    }

    #[test]
    fn csv_has_one_row_per_observable_and_strength() {
        let mut out = Vec::new();
        let code = run(["cheshire-sim", "cheshire", "--g", "0.2,0.1", "--format", "csv"], &mut out);
        assert_eq!(code, EXIT_OK);
        let text = String::from_utf8(out).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER.join(","));
        assert_eq!(lines.len(), 1 + 4 * 2);
        assert!(lines[1].starts_with("cheshire,Pi_L,0.2,1,0,"));
    }
}
