//! Command-line front end.
//!
//! Exit codes: 0 success, 1 malformed input or I/O failure, 2 not a
//! quasigroup, 3 a residual or verification check failed.

use std::ffi::OsString;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::error::{Error, Result};
use crate::gallery;
use crate::quasigroup::{GenericMap, RationalQuasigroup};
use crate::reducibility::{
    check_structure, classify, Classification, CrossValidationConfig, ReducibilityStructure,
    SampleBox, SamplerConfig, DEFAULT_SAMPLES, DEFAULT_TOL,
};
use crate::verify::run_verify;
use crate::web::{export_web, ExportFormat};

pub const EXIT_OK: i32 = 0;
pub const EXIT_INPUT: i32 = 1;
pub const EXIT_NOT_QUASIGROUP: i32 = 2;
pub const EXIT_CHECK_FAILED: i32 = 3;

#[derive(Parser, Debug)]
#[command(
    name = "quasiweb",
    version,
    about = "Reducibility of rational local n-quasigroups"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Classify an instance exactly and print the verdict as JSON.
    Classify(InputArgs),
    /// Sample the reducibility conditions of a block structure.
    Check {
        #[command(flatten)]
        input: InputArgs,
        /// Nested brackets, e.g. "[[1,2],3,4]".
        #[arg(long)]
        structure: String,
        /// Generic map in prefix notation instead of a rational spec.
        #[arg(long, conflicts_with_all = ["spec", "example"])]
        map: Option<String>,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Cross-validate the exact and sampled paths and check derivatives.
    Verify {
        #[arg(long, default_value_t = 200)]
        trials: usize,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
    /// Sample level hypersurfaces and export them with their normals.
    WebExport {
        #[command(flatten)]
        input: InputArgs,
        /// Comma-separated level values.
        #[arg(long, default_value = "")]
        levels: String,
        #[arg(long)]
        allow_empty: bool,
        #[command(flatten)]
        sampling: SamplingArgs,
        #[command(flatten)]
        output: OutputArgs,
    },
}

#[derive(Args, Debug)]
struct InputArgs {
    /// Spec JSON file, or an inline JSON object.
    #[arg(long)]
    spec: Option<String>,
    /// Built-in instance: weighted, spheres or circles.
    #[arg(long)]
    example: Option<String>,
    /// Arity for --example and --map.
    #[arg(long, default_value_t = 3)]
    n: usize,
}

#[derive(Args, Debug)]
struct SamplingArgs {
    #[arg(long, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// "lo:hi" for every coordinate or "lo:hi,lo:hi,..." per coordinate.
    #[arg(long = "box")]
    domain: Option<String>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Args, Debug)]
struct OutputArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn load_input(input: &InputArgs) -> Result<RationalQuasigroup> {
    match (&input.spec, &input.example) {
        (Some(_), Some(_)) => Err(Error::InvalidArgument(
            "use either --spec or --example".into(),
        )),
        (Some(spec), None) => {
            let text = if spec.trim_start().starts_with('{') {
                spec.clone()
            } else {
                std::fs::read_to_string(spec).map_err(|e| Error::Io(format!("{spec}: {e}")))?
            };
            RationalQuasigroup::from_json_str(&text)
        }
        (None, Some(name)) => gallery::by_name(name, input.n).ok_or_else(|| {
            Error::InvalidArgument(format!("unknown example {name:?} for n = {}", input.n))
        }),
        (None, None) => Err(Error::InvalidArgument(
            "one of --spec or --example is required".into(),
        )),
    }
}

fn sampler(args: &SamplingArgs, n: usize, fallback: SampleBox) -> Result<SamplerConfig> {
    let domain = match &args.domain {
        Some(text) => SampleBox::parse(n, text)?,
        None => fallback,
    };
    SamplerConfig::new(args.samples, domain, args.seed, args.tol)
}

fn emit(output: &OutputArgs, body: &str, stdout: &mut dyn Write) -> Result<()> {
    match &output.out {
        Some(path) => {
            std::fs::write(path, body).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
        }
        None => stdout.write_all(body.as_bytes()).map_err(Error::from),
    }
}

fn parse_levels(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .enumerate()
        .map(|(k, s)| {
            s.parse::<f64>()
                .map_err(|_| Error::parse(format!("levels[{k}]"), format!("bad number {s:?}")))
        })
        .collect()
}

fn cmd_classify(input: &InputArgs, stdout: &mut dyn Write) -> Result<i32> {
    let q = load_input(input)?;
    let class = classify(&q);
    writeln!(stdout, "{}", class.to_json())?;
    Ok(match class {
        Classification::NotAQuasigroup { .. } => EXIT_NOT_QUASIGROUP,
        _ => EXIT_OK,
    })
}

fn cmd_check(
    input: &InputArgs,
    structure: &str,
    map: Option<&str>,
    sampling: &SamplingArgs,
    output: &OutputArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let report = if let Some(text) = map {
        let m = GenericMap::parse(input.n, text)?;
        let s = ReducibilityStructure::parse(input.n, structure)?;
        let cfg = sampler(sampling, input.n, SampleBox::cube(input.n, 3.0, 7.0)?)?;
        check_structure(&m, &s, &cfg)?
    } else {
        let q = load_input(input)?;
        let s = ReducibilityStructure::parse(q.arity(), structure)?;
        if let Err(e) = q.solvability_check() {
            writeln!(stderr, "{e}")?;
            return Ok(EXIT_NOT_QUASIGROUP);
        }
        let cfg = sampler(sampling, q.arity(), SampleBox::default_for(&q))?;
        check_structure(&q, &s, &cfg)?
    };
    let body = match output.format {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv()?,
    };
    emit(output, &body, stdout)?;
    Ok(if report.holds {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

fn cmd_verify(
    trials: usize,
    sampling: &SamplingArgs,
    output: &OutputArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    if sampling.tol.is_nan() || sampling.tol <= 0.0 || sampling.samples == 0 {
        return Err(Error::InvalidArgument(
            "tol must be positive and samples at least 1".into(),
        ));
    }
    let cfg = CrossValidationConfig {
        trials,
        samples: sampling.samples,
        tol: sampling.tol,
        seed: sampling.seed,
        ..CrossValidationConfig::default()
    };
    let report = run_verify(&cfg)?;
    for w in &report.warnings {
        writeln!(stderr, "warning: {w}")?;
    }
    let body = serde_json::to_string_pretty(&report).unwrap_or_default() + "\n";
    emit(output, &body, stdout)?;
    if !report.passed {
        writeln!(
            stderr,
            "verification failed: {} of {} trials agree, {} jet and {} finite-difference mismatches",
            report.agreement.agreements,
            report.agreement.trials,
            report.derivatives.jet_failures,
            report.derivatives.fd_failures
        )?;
    }
    Ok(if report.passed {
        EXIT_OK
    } else {
        EXIT_CHECK_FAILED
    })
}

fn cmd_web_export(
    input: &InputArgs,
    levels: &str,
    allow_empty: bool,
    sampling: &SamplingArgs,
    output: &OutputArgs,
    stdout: &mut dyn Write,
    stderr: &mut dyn Write,
) -> Result<i32> {
    let q = load_input(input)?;
    if let Err(e) = q.solvability_check() {
        writeln!(stderr, "{e}")?;
        return Ok(EXIT_NOT_QUASIGROUP);
    }
    let levels = parse_levels(levels)?;
    if levels.is_empty() && !allow_empty {
        return Err(Error::InvalidArgument(
            "--levels is empty; pass --allow-empty to write a header only".into(),
        ));
    }
    let domain = match &sampling.domain {
        Some(text) => SampleBox::parse(q.arity(), text)?,
        None => SampleBox::default_for(&q),
    };
    let format = match output.format {
        Format::Json => ExportFormat::Json,
        Format::Csv => ExportFormat::Csv,
    };
    let dest = output
        .out
        .clone()
        .ok_or_else(|| Error::InvalidArgument("web-export needs --out".into()))?;
    let summary = export_web(
        &q,
        &levels,
        sampling.samples,
        &domain,
        sampling.seed,
        format,
        &dest,
    )
    .map_err(|e| match e {
        Error::Io(m) => Error::Io(format!("{}: {m}", dest.display())),
        other => other,
    })?;
    for alpha in &summary.failed_levels {
        writeln!(stderr, "warning: no points found on level {alpha}")?;
    }
    for (alpha, points, base) in &summary.slices {
        writeln!(stdout, "level {alpha}: {points} points, {base} base points")?;
    }
    if !levels.is_empty() && summary.slices.is_empty() {
        writeln!(stderr, "no level produced any points")?;
        return Ok(EXIT_INPUT);
    }
    Ok(EXIT_OK)
}

/// Runs the CLI and returns the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { EXIT_OK };
            let _ = if e.use_stderr() {
                write!(stderr, "{}", e.render())
            } else {
                write!(stdout, "{}", e.render())
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Classify(input) => cmd_classify(input, stdout),
        Command::Check {
            input,
            structure,
            map,
            sampling,
            output,
        } => cmd_check(
            input,
            structure,
            map.as_deref(),
            sampling,
            output,
            stdout,
            stderr,
        ),
        Command::Verify {
            trials,
            sampling,
            output,
        } => cmd_verify(*trials, sampling, output, stdout, stderr),
        Command::WebExport {
            input,
            levels,
            allow_empty,
            sampling,
            output,
        } => cmd_web_export(
            input,
            levels,
            *allow_empty,
            sampling,
            output,
            stdout,
            stderr,
        ),
    };
    match result {
        Ok(code) => code,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            EXIT_INPUT
        }
    }
}
