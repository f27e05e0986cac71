//! `zenerwave --spec run.json [--out DIR] [--strict] [--quiet]`
//!
//! Exit codes: 0 success, 1 usage, schema or I/O error, 2 inadmissible
//! parameters, 3 numerical failure.

// `!(x > y)` rejects NaN as well.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod output;
mod spec;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::Parser;
use serde::Serialize;
use serde_json::json;
use zenerwave::inversion::{kernel_grid, QuadratureConfig};
use zenerwave::modulus::{frequency_response, winding_number};
use zenerwave::params::{validate, ValidationReport};
use zenerwave::simulate::simulate;
use zenerwave::{oracle, BoundarySignal, Error, MaterialParams};

use output::{csv, plot_blocks, Artifacts, FileEntry};
use spec::{Command, RunSpec};

#[derive(Parser, Debug)]
#[command(name = "zenerwave", version, about = "Fractional Zener rod runs from a JSON spec")]
struct Args {
    /// Run specification (JSON).
    #[arg(long)]
    spec: PathBuf,
    /// Output directory; overrides `output_dir` in the spec.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Require strictly positive admissibility margins.
    #[arg(long)]
    strict: bool,
    /// Print nothing on success.
    #[arg(long)]
    quiet: bool,
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Inadmissible(String),
    Numeric(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Inadmissible(_) => 2,
            Failure::Numeric(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Inadmissible(m) | Failure::Numeric(m) => m,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParams(_)
            | Error::GridMismatch(_)
            | Error::LengthMismatch { .. }
            | Error::Domain(_) => Failure::Usage(e.to_string()),
            _ => Failure::Numeric(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Usage(format!("I/O error: {e}"))
    }
}

#[derive(Serialize)]
struct Manifest<'a> {
    tool: &'static str,
    version: &'static str,
    command: Command,
    params: &'a MaterialParams,
    strict: bool,
    seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    quadrature: Option<QuadratureConfig>,
    #[serde(skip_serializing_if = "Option::is_none")]
    signal: Option<&'a BoundarySignal>,
    report: &'a ValidationReport,
    exit_code: u8,
    files: &'a [FileEntry],
}

struct Run<'a> {
    spec: &'a RunSpec,
    strict: bool,
    report: ValidationReport,
    out: Artifacts,
    quadrature: Option<QuadratureConfig>,
}

impl Run<'_> {
    fn finish(mut self, result: Result<String, Failure>) -> Result<String, Failure> {
        let code = result.as_ref().map_or_else(Failure::code, |_| 0);
        let files = self.out.files.clone();
        let manifest = Manifest {
            tool: "zenerwave",
            version: env!("CARGO_PKG_VERSION"),
            command: self.spec.command,
            params: &self.spec.params,
            strict: self.strict,
            seed: self.spec.seed,
            quadrature: self.quadrature,
            signal: self.spec.signal.as_ref(),
            report: &self.report,
            exit_code: code,
            files: &files,
        };
        self.out.write_json("manifest.json", &manifest)?;
        result
    }

    fn gate(&mut self) -> Result<(), Failure> {
        if self.report.verdict.is_admissible() {
            return Ok(());
        }
        self.out.write_json("report.json", &self.report)?;
        Err(Failure::Inadmissible(format!(
            "parameters are inadmissible: {:?}",
            self.report.verdict
        )))
    }

    fn grids(&self) -> Result<(Vec<f64>, Vec<f64>), Failure> {
        let g = self
            .spec
            .grid
            .as_ref()
            .ok_or_else(|| Failure::Usage("this command needs a \"grid\" block".into()))?;
        let xs = g.xs.points().map_err(|e| Failure::Usage(format!("xs: {e}")))?;
        let ts = g.ts.points().map_err(|e| Failure::Usage(format!("ts: {e}")))?;
        Ok((xs, ts))
    }

    fn check(&mut self) -> Result<String, Failure> {
        self.out.write_json("report.json", &self.report)?;
        let v = &self.report.verdict;
        if v.is_admissible() {
            Ok(format!("verdict: {v:?}"))
        } else {
            Err(Failure::Inadmissible(format!("verdict: {v:?}")))
        }
    }

    fn modulus(&mut self) -> Result<String, Failure> {
        let p = &self.spec.params;
        let block = &self.spec.modulus;
        let omegas = block.omega.points().map_err(|e| Failure::Usage(format!("omega: {e}")))?;
        let fr = frequency_response(&omegas, p)?;
        let rows = (0..omegas.len()).map(|k| {
            vec![fr.omegas[k], fr.storage[k], fr.loss[k], fr.m[k].re, fr.m[k].im]
        });
        let table = csv(&["omega", "re_E", "im_E", "re_M", "im_M"], rows);
        self.out.write("modulus.csv", table.as_bytes())?;
        let curve = |v: &[f64]| fr.omegas.iter().copied().zip(v.iter().copied()).collect();
        let plot = plot_blocks(
            [
                ("storage modulus Re E(omega)".to_string(), curve(&fr.storage)),
                ("loss modulus Im E(omega)".to_string(), curve(&fr.loss)),
            ]
            .into_iter(),
        );
        self.out.write("modulus.dat", plot.as_bytes())?;
        let w = &block.winding;
        let cert = winding_number(p, w.epsilon, w.r, w.samples)?;
        self.out.write_json("winding.json", &cert)?;
        self.out.write_json("report.json", &self.report)?;
        Ok(format!("{} frequencies, winding {}", omegas.len(), cert.winding))
    }

    fn kernel(&mut self) -> Result<String, Failure> {
        self.gate()?;
        let (xs, ts) = self.grids()?;
        let g = kernel_grid(&xs, &ts, &self.spec.params, &self.spec.quadrature)?;
        self.quadrature = Some(g.config_used);
        let rows = xs.iter().enumerate().flat_map(|(i, &x)| {
            let g = &g;
            ts.iter().enumerate().map(move |(j, &t)| vec![x, t, g.values[i][j]])
        });
        self.out.write("kernel.csv", csv(&["x", "t", "K"], rows).as_bytes())?;
        let blocks = xs.iter().enumerate().map(|(i, &x)| {
            (format!("x = {x}"), ts.iter().copied().zip(g.values[i].iter().copied()).collect())
        });
        self.out.write("kernel.dat", plot_blocks(blocks).as_bytes())?;
        self.out.write_json(
            "kernel.json",
            &json!({
                "delta_weight": g.delta_weight,
                "analytic": g.analytic,
                "impulses": g.impulses,
                "max_imag_residual": g.max_imag_residual,
                "max_error": g.max_error,
            }),
        )?;
        Ok(format!(
            "{}x{} kernel grid, max imaginary residual {:.1e}",
            xs.len(),
            ts.len(),
            g.max_imag_residual
        ))
    }

    fn simulate(&mut self) -> Result<String, Failure> {
        self.gate()?;
        let signal = self
            .spec
            .signal
            .as_ref()
            .ok_or_else(|| Failure::Usage("simulate needs a \"signal\" block".into()))?;
        let (xs, ts) = self.grids()?;
        let f = simulate(signal, &xs, &ts, &self.spec.params, &self.spec.quadrature)?;
        self.quadrature = Some(f.config_used);
        let rows = xs.iter().enumerate().flat_map(|(i, &x)| {
            let f = &f;
            ts.iter().enumerate().map(move |(j, &t)| vec![x, t, f.u[i][j]])
        });
        self.out.write("field.csv", csv(&["x", "t", "u"], rows).as_bytes())?;
        let blocks = ts.iter().enumerate().map(|(j, &t)| {
            (format!("t = {t}"), xs.iter().enumerate().map(|(i, &x)| (x, f.u[i][j])).collect())
        });
        self.out.write("field.dat", plot_blocks(blocks).as_bytes())?;
        self.out.write_json(
            "field.json",
            &json!({
                "impulses": f.impulses,
                "max_imag_residual": f.max_imag_residual,
            }),
        )?;
        Ok(format!(
            "{}x{} field, max imaginary residual {:.1e}",
            xs.len(),
            ts.len(),
            f.max_imag_residual
        ))
    }

    fn oracle(&mut self) -> Result<String, Failure> {
        self.gate()?;
        self.quadrature = Some(self.spec.quadrature);
        let r = oracle::run_checks(&self.spec.params, self.spec.oracle.dt, &self.spec.quadrature)?;
        self.out.write_json("oracle.json", &r)?;
        let summary = format!(
            "residuals: elastic {:.1e}, zener {:.2e}, field {:.2e}",
            r.elastic, r.zener, r.field
        );
        if r.passed {
            Ok(summary)
        } else {
            Err(Failure::Numeric(format!("oracle thresholds exceeded; {summary}")))
        }
    }
}

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var("ZENERWAVE_THREADS") else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .map_err(|_| Failure::Usage(format!("ZENERWAVE_THREADS must be a count, got {v:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Usage(format!("thread pool: {e}")))
}

fn run(args: &Args) -> Result<String, Failure> {
    configure_threads()?;
    let text = std::fs::read_to_string(&args.spec)
        .map_err(|e| Failure::Usage(format!("cannot read {}: {e}", args.spec.display())))?;
    let spec = RunSpec::from_json(&text)
        .map_err(|e| Failure::Usage(format!("{}: {e}", args.spec.display())))?;
    let dir = args
        .out
        .clone()
        .or_else(|| spec.output_dir.clone())
        .unwrap_or_else(|| PathBuf::from("zenerwave-out"));
    let strict = args.strict || spec.strict;
    let mut run = Run {
        spec: &spec,
        strict,
        report: validate(&spec.params, strict, spec.td1_tol),
        out: Artifacts::new(Path::new(&dir))?,
        quadrature: None,
    };
    let result = match spec.command {
        Command::Check => run.check(),
        Command::Modulus => run.modulus(),
        Command::Kernel => run.kernel(),
        Command::Simulate => run.simulate(),
        Command::Oracle => run.oracle(),
    };
    run.finish(result)
}

fn main() -> ExitCode {
    let args = match Args::try_parse() {
        Ok(a) => a,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&args) {
        Ok(summary) => {
            if !args.quiet {
                println!("{summary}");
            }
            ExitCode::SUCCESS
        }
        Err(f) => {
            eprintln!("zenerwave: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
