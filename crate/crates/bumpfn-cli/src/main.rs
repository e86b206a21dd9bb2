//! Command-line front end: coefficient tables, derivative evaluation, limit
//! classification, monotonicity verification, and partition-of-unity weights,
//! emitted as CSV/JSON/table for plotting and CI.
//!
//! Exit codes are a stable contract: 0 success/verified, 1 verification or
//! coverage failure, 2 usage or parse error.

use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde_json::json;

use bumpfn::coeff::CoefficientTriangle;
use bumpfn::eval::{eval_derivative, limit_at_zero, write_trace_csv, FunctionId, ZeroSide};
use bumpfn::monotone::{check_am, check_cm, check_lcm, IntervalSpec, LcmTarget, Verdict};
use bumpfn::pou::{pou_over_cover, write_pou_csv, Cover, PointWeights, DEFAULT_JET_ORDER};
use bumpfn::Error;

#[derive(Parser)]
#[command(
    name = "bumpfn",
    version,
    about = "Exact derivatives, monotonicity checks, and partitions of unity for exp(-1/t) bump functions"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Csv,
    Json,
    Table,
}

#[derive(Subcommand)]
enum Command {
    /// Emit the exact coefficient triangle for orders 1..=max-order
    Coeffs {
        #[arg(long)]
        max_order: u32,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Evaluate the order-i derivative of f, g, or h at points
    Eval {
        /// Function: f, g, or h
        #[arg(long = "fn")]
        function: String,
        #[arg(long, default_value_t = 0)]
        order: u32,
        /// Comma-separated evaluation points
        #[arg(
            long,
            value_delimiter = ',',
            required = true,
            allow_hyphen_values = true
        )]
        points: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// One-sided limit classifications of g and h at t = 0
    Limits {
        /// Restrict to one function (g or h)
        #[arg(long = "fn")]
        function: Option<String>,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Verify a monotonicity property; prints a JSON report, exits 1 on violation
    Verify {
        /// One of: cm, am, lcm
        #[arg(long)]
        kind: String,
        /// Function: f, g, or h
        #[arg(long = "fn")]
        function: String,
        /// Check the reciprocal 1/fn instead (lcm only)
        #[arg(long, default_value_t = false)]
        reciprocal: bool,
        /// Interval as a:b with inf/-inf literals, e.g. 0:inf
        #[arg(long, allow_hyphen_values = true)]
        interval: String,
        #[arg(long, default_value_t = 20)]
        max_order: u32,
        #[arg(long, default_value_t = 200)]
        samples: usize,
    },
    /// Partition-of-unity weights over a JSON cover file
    Pou {
        /// Cover description: `{"domain":[A,B],"patches":[{"lower":..,"upper":..,"ramp":..}]}`
        #[arg(long)]
        cover: PathBuf,
        /// Comma-separated query points
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        points: Vec<f64>,
        /// Evaluate on N uniform points across the domain instead
        #[arg(long)]
        grid: Option<usize>,
        /// Jet order (number of derivatives per weight)
        #[arg(long, default_value_t = DEFAULT_JET_ORDER)]
        order: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
}

/// Failure modes with their contractual exit codes.
enum Failure {
    /// Exit 1: a verification failed or the cover has a gap.
    Data(String),
    /// Exit 2: bad flags, bad files, bad values.
    Usage(String),
}

fn usage(e: impl ToString) -> Failure {
    Failure::Usage(e.to_string())
}

fn main() -> ExitCode {
    // Data goes to stdout for pipelines; die quietly when the pipe closes
    // instead of panicking mid-write.
    #[cfg(unix)]
    unsafe {
        libc::signal(libc::SIGPIPE, libc::SIG_DFL);
    }
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Data(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Coeffs { max_order, format } => run_coeffs(max_order, format),
        Command::Eval {
            function,
            order,
            points,
            format,
        } => run_eval(&function, order, &points, format),
        Command::Limits { function, format } => run_limits(function.as_deref(), format),
        Command::Verify {
            kind,
            function,
            reciprocal,
            interval,
            max_order,
            samples,
        } => run_verify(&kind, &function, reciprocal, &interval, max_order, samples),
        Command::Pou {
            cover,
            points,
            grid,
            order,
            format,
        } => run_pou(&cover, &points, grid, order, format),
    }
}

fn run_coeffs(max_order: u32, format: Format) -> Result<(), Failure> {
    if max_order < 1 {
        return Err(Failure::Usage("--max-order must be at least 1".into()));
    }
    let triangle =
        CoefficientTriangle::build(max_order).map_err(|e| Failure::Data(e.to_string()))?;
    match format {
        Format::Csv => print!("{}", triangle.to_csv()),
        Format::Json => println!("{}", triangle.to_json()),
        Format::Table => {
            println!("{:>3} {:>3}  a_ik", "i", "k");
            for row in triangle.rows() {
                for (k, a) in row.entries().iter().enumerate() {
                    println!("{:>3} {:>3}  {}", row.order(), k, a);
                }
            }
        }
    }
    Ok(())
}

fn run_eval(function: &str, order: u32, points: &[f64], format: Format) -> Result<(), Failure> {
    let function: FunctionId = function.parse().map_err(usage)?;
    if order > 512 {
        return Err(Failure::Usage("--order is capped at 512".into()));
    }
    if points.iter().any(|t| !t.is_finite()) {
        return Err(Failure::Usage("points must be finite".into()));
    }
    match format {
        Format::Csv => {
            let mut out = std::io::stdout().lock();
            write_trace_csv(&mut out, function, order, points).map_err(usage)?;
        }
        Format::Json => {
            let rows: Vec<_> = points
                .iter()
                .map(|&t| {
                    let r = eval_derivative(function, order, t);
                    json!({
                        "fn": function.to_string(),
                        "i": order,
                        "t": t,
                        "value": r.value,
                        "status": r.status.to_string(),
                        "sign": r.sign(),
                        "log_magnitude": r.log_form.map(|lf| lf.log_magnitude),
                    })
                })
                .collect();
            println!("{}", serde_json::Value::Array(rows));
        }
        Format::Table => {
            println!(
                "{:<3} {:<3} {:>12} {:>24} {:<17} {:>4} {:>18}",
                "fn", "i", "t", "value", "status", "sign", "log_magnitude"
            );
            for &t in points {
                let r = eval_derivative(function, order, t);
                let lm = r
                    .log_form
                    .map(|lf| format!("{}", lf.log_magnitude))
                    .unwrap_or_default();
                println!(
                    "{:<3} {:<3} {:>12} {:>24} {:<17} {:>4} {:>18}",
                    function.to_string(),
                    order,
                    t,
                    r.value,
                    r.status.to_string(),
                    r.sign(),
                    lm
                );
            }
        }
    }
    Ok(())
}

fn run_limits(function: Option<&str>, format: Format) -> Result<(), Failure> {
    let functions: Vec<FunctionId> = match function {
        Some(name) => vec![name.parse().map_err(usage)?],
        None => vec![FunctionId::G, FunctionId::H],
    };
    let mut rows = Vec::new();
    for function in functions {
        for side in [ZeroSide::LeftOfZero, ZeroSide::RightOfZero] {
            let c = limit_at_zero(function, side).map_err(usage)?;
            rows.push(c);
        }
    }
    match format {
        Format::Csv => {
            println!("fn,side,limit");
            for c in rows {
                println!("{},{},{}", c.function, c.side, c.limit);
            }
        }
        Format::Json => {
            let items: Vec<_> = rows
                .iter()
                .map(|c| {
                    json!({
                        "function": c.function.to_string(),
                        "side": c.side.to_string(),
                        "limit": c.limit.to_string(),
                    })
                })
                .collect();
            println!("{}", serde_json::Value::Array(items));
        }
        Format::Table => {
            println!("{:<3} {:<14} limit", "fn", "side");
            for c in rows {
                println!(
                    "{:<3} {:<14} {}",
                    c.function.to_string(),
                    c.side.to_string(),
                    c.limit
                );
            }
        }
    }
    Ok(())
}

fn run_verify(
    kind: &str,
    function: &str,
    reciprocal: bool,
    interval: &str,
    max_order: u32,
    samples: usize,
) -> Result<(), Failure> {
    let function: FunctionId = function.parse().map_err(usage)?;
    let interval: IntervalSpec = interval.parse().map_err(usage)?;
    if reciprocal && kind != "lcm" {
        return Err(Failure::Usage(
            "--reciprocal only applies to --kind lcm".into(),
        ));
    }
    let report = match kind {
        "cm" => check_cm(function, interval, max_order, samples),
        "am" => check_am(function, interval, max_order, samples),
        "lcm" => {
            let target = LcmTarget {
                function,
                reciprocal,
            };
            check_lcm(target, interval, max_order)
        }
        other => {
            return Err(Failure::Usage(format!(
                "unknown kind '{other}' (expected cm, am, or lcm)"
            )))
        }
    }
    .map_err(usage)?;
    println!("{}", report.to_json());
    match report.verdict {
        Verdict::ProvedExact | Verdict::VerifiedSampled => Ok(()),
        Verdict::Violated => Err(Failure::Data(format!(
            "{} is violated for {} on {}",
            report.kind, report.function, report.interval
        ))),
    }
}

fn run_pou(
    cover_path: &PathBuf,
    points: &[f64],
    grid: Option<usize>,
    order: usize,
    format: Format,
) -> Result<(), Failure> {
    let text = fs::read_to_string(cover_path)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", cover_path.display())))?;
    let cover = Cover::from_json(&text).map_err(|e| match e {
        Error::CoverageGap { .. } => Failure::Data(e.to_string()),
        other => Failure::Usage(other.to_string()),
    })?;
    let mut all_points = points.to_vec();
    if let Some(n) = grid {
        if n < 2 {
            return Err(Failure::Usage("--grid needs at least 2 points".into()));
        }
        let (a, b) = cover.domain();
        all_points.extend((0..n).map(|j| a + (b - a) * j as f64 / (n - 1) as f64));
    }
    let rows = pou_over_cover(&cover, &all_points, order).map_err(|e| match e {
        Error::CoverageGap { .. } => Failure::Data(e.to_string()),
        other => Failure::Usage(other.to_string()),
    })?;
    match format {
        Format::Csv => {
            let mut out = std::io::stdout().lock();
            write_pou_csv(&mut out, &rows, order).map_err(usage)?;
            out.flush().map_err(usage)?;
        }
        Format::Json => {
            let items: Vec<_> = rows.iter().map(|row| pou_row_json(row, order)).collect();
            println!("{}", serde_json::Value::Array(items));
        }
        Format::Table => {
            println!("{:>12} {:>5} {:>22}  derivatives", "x", "patch", "weight");
            for row in &rows {
                for (j, jet) in row.weights.iter().enumerate() {
                    let ds: Vec<String> = (1..=order)
                        .map(|m| format!("{}", jet.derivative(m)))
                        .collect();
                    println!(
                        "{:>12} {:>5} {:>22}  [{}]",
                        row.point,
                        j,
                        jet.value(),
                        ds.join(", ")
                    );
                }
            }
        }
    }
    Ok(())
}

fn pou_row_json(row: &PointWeights, order: usize) -> serde_json::Value {
    let weights: Vec<_> = row
        .weights
        .iter()
        .enumerate()
        .map(|(j, jet)| {
            let derivatives: Vec<f64> = (1..=order).map(|m| jet.derivative(m)).collect();
            json!({
                "patch": j,
                "weight": jet.value(),
                "derivatives": derivatives,
            })
        })
        .collect();
    json!({ "x": row.point, "weights": weights })
}
