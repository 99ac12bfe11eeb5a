//! Command-line front end.
//!
//! Exit codes: 0 on success, 1 on numerical failure, 2 on usage errors.
//! JSON output carries `"schema": "autocov-spectra/1"`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::autocov::lag_autocov;
use crate::datagen::{generate_panel, Dist, PanelSpec};
use crate::empirics::{
    lemma_diagnostics, run_experiment, DiagnosticEntry, ExperimentOptions, FitReport,
};
use crate::error::{Error, Result};
use crate::factor::{estimate_num_factors, simulate_factor_panel, FactorModelSpec};
use crate::lsd::{raw_support_edges, solve_stieltjes, support_endpoints, Law, LsdModel};

pub const SCHEMA: &str = "autocov-spectra/1";

#[derive(Debug, Parser)]
#[command(
    name = "autocov-spectra",
    version,
    about = "Spectra of lag-tau sample autocovariance matrices"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Density curve of the limiting law as CSV.
    Density(DensityArgs),
    /// Support edges of the limiting law.
    Support(SupportArgs),
    /// Stieltjes transform of the limiting law at one point.
    Stieltjes(StieltjesArgs),
    /// Simulate panels and compare their spectrum with the limiting law.
    Simulate(SimulateArgs),
    /// Shifted resolvent trace diagnostics for one simulated panel.
    LemmaCheck(LemmaArgs),
    /// Count factors in simulated factor-model panels.
    FactorDemo(FactorArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum LawArg {
    #[value(name = "A", alias = "a")]
    A,
    #[value(name = "B", alias = "b")]
    B,
}

impl From<LawArg> for Law {
    fn from(l: LawArg) -> Self {
        match l {
            LawArg::A => Law::ALaw,
            LawArg::B => Law::BLaw,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DistArg {
    Gaussian,
    Rademacher,
    #[value(alias = "centered-uniform")]
    Uniform,
    #[value(alias = "t")]
    StudentT,
}

#[derive(Debug, Args)]
pub struct NoiseArgs {
    #[arg(long, value_enum, default_value = "gaussian")]
    pub dist: DistArg,
    /// Degrees of freedom for student-t entries.
    #[arg(long, default_value_t = 6.0)]
    pub df: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl NoiseArgs {
    fn dist(&self) -> Dist {
        match self.dist {
            DistArg::Gaussian => Dist::Gaussian,
            DistArg::Rademacher => Dist::Rademacher,
            DistArg::Uniform => Dist::CenteredUniform,
            DistArg::StudentT => Dist::StandardizedStudentT { df: self.df },
        }
    }
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct DensityArgs {
    #[arg(long)]
    pub c: f64,
    #[arg(long, value_enum, default_value = "A")]
    pub law: LawArg,
    #[arg(long, default_value_t = 400)]
    pub points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SupportArgs {
    #[arg(long)]
    pub c: f64,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct StieltjesArgs {
    #[arg(long)]
    pub c: f64,
    #[arg(long)]
    pub alpha_re: f64,
    #[arg(long)]
    pub alpha_im: f64,
    #[arg(long, value_enum, default_value = "A")]
    pub law: LawArg,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct SimulateArgs {
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub t: usize,
    #[arg(long, default_value_t = 1)]
    pub tau: usize,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(long, default_value_t = 1)]
    pub replicates: usize,
    /// Worker threads for replicates.
    #[arg(long)]
    pub jobs: Option<usize>,
    #[arg(long, value_enum, default_value = "A")]
    pub law: LawArg,
    /// Clip entries at eta·T^(1/4) and re-standardize.
    #[arg(long)]
    pub eta: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct LemmaArgs {
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub t: usize,
    #[arg(long, default_value_t = 1)]
    pub tau: usize,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(long, default_value_t = 1.0)]
    pub alpha_re: f64,
    #[arg(long, default_value_t = 1.0)]
    pub alpha_im: f64,
    #[arg(long, default_value_t = 5)]
    pub kmax: usize,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
#[command(allow_negative_numbers = true)]
pub struct FactorArgs {
    #[arg(long)]
    pub p: usize,
    #[arg(long)]
    pub t: usize,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 5.0)]
    pub loading: f64,
    #[arg(long, default_value_t = 0.5)]
    pub ar: f64,
    #[arg(long, default_value_t = crate::factor::DEFAULT_DELTA)]
    pub delta: f64,
    #[arg(long, default_value_t = 20)]
    pub seeds: u64,
    #[command(flatten)]
    pub noise: NoiseArgs,
    #[arg(long, value_enum, default_value = "text")]
    pub format: Format,
}

#[derive(Serialize)]
struct Tagged<T: Serialize> {
    schema: &'static str,
    #[serde(flatten)]
    body: T,
}

fn to_json<T: Serialize>(body: T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(&Tagged { schema: SCHEMA, body })?;
    s.push('\n');
    Ok(s)
}

/// Parse `args` (including the program name) and run; returns the exit code.
pub fn run<I, S>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let rendered = e.render().to_string();
            let _ = if code == 0 {
                out.write_all(rendered.as_bytes())
            } else {
                err.write_all(rendered.as_bytes())
            };
            return code;
        }
    };
    match execute(&cli.command, out) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            if e.is_usage() {
                2
            } else {
                1
            }
        }
    }
}

pub fn execute(command: &Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Density(a) => density(a, out),
        Command::Support(a) => support(a, out),
        Command::Stieltjes(a) => stieltjes(a, out),
        Command::Simulate(a) => simulate(a, out),
        Command::LemmaCheck(a) => lemma_check(a, out),
        Command::FactorDemo(a) => factor_demo(a, out),
    }
}

fn emit(text: &str, path: Option<&PathBuf>, out: &mut dyn Write) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text)?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn density(args: &DensityArgs, out: &mut dyn Write) -> Result<()> {
    let model = LsdModel::new(args.c, args.law.into())?;
    if args.points < 2 {
        return Err(Error::Invalid(format!("--points must be at least 2, got {}", args.points)));
    }
    let curve = model.density_curve(args.points)?;
    let text = match args.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Point {
                u: f64,
                density: f64,
            }
            #[derive(Serialize)]
            struct Body {
                c: f64,
                law: Law,
                points: Vec<Point>,
            }
            to_json(Body {
                c: args.c,
                law: model.law(),
                points: curve.iter().map(|&(u, density)| Point { u, density }).collect(),
            })?
        }
        _ => {
            let mut s = String::from("u,density\n");
            for (u, d) in &curve {
                s.push_str(&format!("{u},{d}\n"));
            }
            s
        }
    };
    emit(&text, args.out.as_ref(), out)
}

fn support(args: &SupportArgs, out: &mut dyn Write) -> Result<()> {
    let (a, b) = support_endpoints(args.c)?;
    let (raw_a, _) = raw_support_edges(args.c)?;
    let text = match args.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body {
                c: f64,
                a: f64,
                b: f64,
                raw_a: f64,
            }
            to_json(Body { c: args.c, a, b, raw_a })?
        }
        _ => format!("a={a} b={b}\n"),
    };
    emit(&text, None, out)
}

fn stieltjes(args: &StieltjesArgs, out: &mut dyn Write) -> Result<()> {
    let alpha = Complex64::new(args.alpha_re, args.alpha_im);
    let sol = solve_stieltjes(alpha, args.c, args.law.into())?;
    let text = match args.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body {
                c: f64,
                law: Law,
                alpha_re: f64,
                alpha_im: f64,
                value_re: f64,
                value_im: f64,
                residual: f64,
            }
            to_json(Body {
                c: args.c,
                law: sol.law,
                alpha_re: alpha.re,
                alpha_im: alpha.im,
                value_re: sol.value.re,
                value_im: sol.value.im,
                residual: sol.residual,
            })?
        }
        _ => format!(
            "value_re={} value_im={} residual={}\n",
            sol.value.re, sol.value.im, sol.residual
        ),
    };
    emit(&text, None, out)
}

fn simulate(args: &SimulateArgs, out: &mut dyn Write) -> Result<()> {
    let mut spec = PanelSpec::new(args.p, args.t, args.tau, args.noise.dist(), args.noise.seed);
    if let Some(eta) = args.eta {
        spec = spec.with_truncation(eta);
    }
    spec.validate()?;
    if args.replicates == 0 {
        return Err(Error::Invalid("--replicates must be at least 1".into()));
    }
    let opts = ExperimentOptions { law: args.law.into(), jobs: args.jobs, ..Default::default() };
    let report = run_experiment(&spec, args.replicates, &opts)?;
    let text = match args.format {
        Format::Csv => report_csv(&report),
        _ => to_json(&report)?,
    };
    match &args.out {
        Some(path) => {
            fs::write(path, text)?;
            writeln!(out, "ks={}", report.ks)?;
        }
        None => out.write_all(text.as_bytes())?,
    }
    Ok(())
}

fn report_csv(r: &FitReport) -> String {
    let mut header = vec!["p", "T", "tau", "c", "law", "ks", "seed", "replicates"]
        .into_iter()
        .map(String::from)
        .collect::<Vec<_>>();
    let mut row = vec![
        r.p.to_string(),
        r.t.to_string(),
        r.tau.to_string(),
        r.c.to_string(),
        r.law.to_string(),
        r.ks.to_string(),
        r.seed.to_string(),
        r.replicates.to_string(),
    ];
    for (k, (e, l)) in r.moments_emp.iter().zip(&r.moments_lsd).enumerate() {
        header.push(format!("m{}_emp", k + 1));
        header.push(format!("m{}_lsd", k + 1));
        row.push(e.to_string());
        row.push(l.to_string());
    }
    for d in &r.diagnostics {
        header.push(format!("abs_x{}", d.k));
        header.push(format!("abs_y{}", d.k));
        row.push(d.abs_xk.to_string());
        row.push(d.abs_yk.to_string());
    }
    format!("{}\n{}\n", header.join(","), row.join(","))
}

fn lemma_check(args: &LemmaArgs, out: &mut dyn Write) -> Result<()> {
    let spec = PanelSpec::new(args.p, args.t, args.tau, args.noise.dist(), args.noise.seed);
    spec.validate()?;
    let alpha = Complex64::new(args.alpha_re, args.alpha_im);
    if alpha.im == 0.0 {
        return Err(Error::RealAlpha("nonzero"));
    }
    let set = lag_autocov(&generate_panel(&spec)?);
    let powers: Vec<usize> = (0..=args.kmax.min(args.t)).collect();
    let rows: Vec<DiagnosticEntry> =
        lemma_diagnostics(&set, alpha, &powers)?.into_iter().map(DiagnosticEntry::from).collect();
    let text = match args.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body {
                p: usize,
                #[serde(rename = "T")]
                t: usize,
                tau: usize,
                alpha_re: f64,
                alpha_im: f64,
                seed: u64,
                diagnostics: Vec<DiagnosticEntry>,
            }
            to_json(Body {
                p: args.p,
                t: args.t,
                tau: args.tau,
                alpha_re: alpha.re,
                alpha_im: alpha.im,
                seed: args.noise.seed,
                diagnostics: rows,
            })?
        }
        _ => {
            let mut s = String::from("k,abs_xk,abs_yk\n");
            for d in rows {
                s.push_str(&format!("{},{},{}\n", d.k, d.abs_xk, d.abs_yk));
            }
            s
        }
    };
    emit(&text, None, out)
}

fn factor_demo(args: &FactorArgs, out: &mut dyn Write) -> Result<()> {
    if args.seeds == 0 {
        return Err(Error::Invalid("--seeds must be at least 1".into()));
    }
    let estimates = (0..args.seeds)
        .into_par_iter()
        .map(|offset| {
            let mut spec = FactorModelSpec::new(
                args.p,
                args.t,
                args.m,
                args.loading,
                args.ar,
                args.noise.seed + offset,
            );
            spec.noise = args.noise.dist();
            estimate_num_factors(&simulate_factor_panel(&spec)?, args.delta)
        })
        .collect::<Result<Vec<usize>>>()?;
    let max = *estimates.iter().max().expect("at least one seed");
    let mut counts = vec![0usize; max + 1];
    estimates.iter().for_each(|&e| counts[e] += 1);
    // Ties resolve to the smallest estimate.
    let modal = counts
        .iter()
        .enumerate()
        .fold((0, 0), |best, (k, &n)| if n > best.1 { (k, n) } else { best })
        .0;
    let hits = estimates.iter().filter(|&&e| e == args.m).count();
    let text = match args.format {
        Format::Json => {
            #[derive(Serialize)]
            struct Body<'a> {
                p: usize,
                #[serde(rename = "T")]
                t: usize,
                m: usize,
                loading: f64,
                ar: f64,
                delta: f64,
                seeds: u64,
                estimates: &'a [usize],
                modal: usize,
                hit_rate: f64,
            }
            to_json(Body {
                p: args.p,
                t: args.t,
                m: args.m,
                loading: args.loading,
                ar: args.ar,
                delta: args.delta,
                seeds: args.seeds,
                estimates: &estimates,
                modal,
                hit_rate: hits as f64 / args.seeds as f64,
            })?
        }
        _ => {
            let list: Vec<String> = estimates.iter().map(usize::to_string).collect();
            format!(
                "modal={modal}\nhit_rate={}\nestimates={}\n",
                hits as f64 / args.seeds as f64,
                list.join(",")
            )
        }
    };
    emit(&text, None, out)
}
