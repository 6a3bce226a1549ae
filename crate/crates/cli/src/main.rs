use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context as _;
use clap::{Args, Parser, Subcommand, ValueEnum};
use lyapspec::mapspec::{parse_list, MapSpec};
use lyapspec::orbits::BackwardTree;
use lyapspec::pipeline::{self, Context, RunConfig};
use lyapspec::{Metric, SpherePoint};
use serde::Serialize;
use sha2::{Digest, Sha256};

#[derive(Parser, Debug)]
#[command(name = "lyapspec", version, about = "Pressure, spectrum and conformal measures of rational maps")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exceptional set, essential exponents, D and χ_sup
    Analyze(Opts),
    /// Hidden and full pressure curves and the transition point
    Pressure(Opts),
    /// Lyapunov spectrum and its audit
    Spectrum(Opts),
    /// Truncated conformal measure with mass and defect diagnostics
    Measure(Opts),
    /// Pliss times and periodic shadowing of one orbit
    Pliss(Opts),
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Power,
    Chebyshev,
    Quadratic,
    Paper,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MetricArg {
    Planar,
    Spherical,
}

#[derive(Args, Debug)]
struct Opts {
    /// Map specification file
    #[arg(long, conflicts_with = "family")]
    map: Option<PathBuf>,
    #[arg(long, value_enum)]
    family: Option<FamilyArg>,
    /// λ of the `paper` family, as `re` or `re,im`
    #[arg(long, allow_hyphen_values = true)]
    lambda: Option<String>,
    /// c of the `quadratic` family, as `re` or `re,im`
    #[arg(long, allow_hyphen_values = true)]
    c: Option<String>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long, default_value_t = 14)]
    depth: usize,
    #[arg(long, default_value_t = -3.0, allow_hyphen_values = true)]
    t_min: f64,
    #[arg(long, default_value_t = 2.0, allow_hyphen_values = true)]
    t_max: f64,
    #[arg(long, default_value_t = 0.25)]
    t_step: f64,
    /// Radius of the neighbourhood V of the exceptional set
    #[arg(long, default_value_t = 0.2)]
    radius: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Worker threads; results do not depend on it
    #[arg(long)]
    workers: Option<usize>,
    /// Output directory
    #[arg(long, default_value = ".")]
    out: PathBuf,
    /// Prune whole branches that enter V instead of only their endpoints
    #[arg(long)]
    strict_exclusion: bool,
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    /// Basepoint as `re,im`; sampled from the Julia set by default
    #[arg(long, allow_hyphen_values = true)]
    basepoint: Option<String>,
    /// Number of α samples (spectrum)
    #[arg(long, default_value_t = 41)]
    alpha_samples: usize,
    /// Parameter t (measure)
    #[arg(long, default_value_t = 1.0, allow_hyphen_values = true)]
    t: f64,
    /// Parameter p (measure); defaults to the pressure plus 0.05
    #[arg(long, allow_hyphen_values = true)]
    p: Option<f64>,
    /// Rate χ (pliss); defaults to the orbit exponent
    #[arg(long, allow_hyphen_values = true)]
    chi: Option<f64>,
    /// Orbit length (pliss)
    #[arg(long, default_value_t = 50)]
    length: usize,
}

/// Failure classes mapped to exit codes.
enum Failure {
    Config(anyhow::Error),
    Numeric(anyhow::Error),
}

impl From<lyapspec::Error> for Failure {
    fn from(e: lyapspec::Error) -> Self {
        if e.is_config_error() {
            Failure::Config(e.into())
        } else {
            Failure::Numeric(e.into())
        }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Config(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(2) } else { ExitCode::SUCCESS };
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Config(e)) => {
            eprintln!("configuration error: {e:#}");
            ExitCode::from(2)
        }
        Err(Failure::Numeric(e)) => {
            eprintln!("numeric failure: {e:#}");
            ExitCode::from(3)
        }
    }
}

fn run(command: Command) -> Result<(), Failure> {
    let (name, opts) = match &command {
        Command::Analyze(o) => ("analyze", o),
        Command::Pressure(o) => ("pressure", o),
        Command::Spectrum(o) => ("spectrum", o),
        Command::Measure(o) => ("measure", o),
        Command::Pliss(o) => ("pliss", o),
    };
    let config = build_config(opts)?;
    config.validate()?;
    if let Some(n) = opts.workers {
        if n == 0 {
            return Err(Failure::Config(anyhow::anyhow!("--workers must be positive")));
        }
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("configuring worker pool")?;
    }
    fs::create_dir_all(&opts.out).with_context(|| format!("creating {}", opts.out.display()))?;
    let out = Output { dir: opts.out.clone(), hash: config_hash(name, &config)? };
    let ctx = Context::new(config)?;
    match command {
        Command::Analyze(_) => {
            let report = pipeline::analyze(&ctx)?;
            out.json("analyze.json", &report)?;
            out.json("exceptional.json", &report.exceptional)?;
        }
        Command::Pressure(_) => {
            let (curve, summary) = pipeline::pressure(&ctx)?;
            let rows = (0..curve.t_grid.len())
                .map(|i| (curve.t_grid[i], curve.hidden[i], curve.full[i], curve.convergence[i]));
            out.csv("pressure.csv", &["t", "hidden", "full", "convergence"], rows)?;
            out.json("pressure.json", &summary)?;
            let tree = ctx.tree(ctx.v.clone(), ctx.config.mode())?;
            write_tree(&out, &tree)?;
        }
        Command::Spectrum(_) => {
            let (spec, audit) = pipeline::spectrum(&ctx)?;
            let rows = spec.alpha_grid.iter().zip(&spec.f_values).map(|(a, f)| (*a, *f));
            out.csv("spectrum.csv", &["alpha", "F"], rows)?;
            out.json("spectrum_audit.json", &audit)?;
        }
        Command::Measure(_) => {
            let run = pipeline::measure(&ctx)?;
            let atoms = run.atoms.iter().map(|a| {
                let (re, im) = coords(&a.point);
                (re, im, a.weight, a.n)
            });
            out.csv("atoms.csv", &["re", "im", "weight", "n"], atoms)?;
            out.csv("defects.csv", &["p", "depth", "defect"], run.sweep.iter().map(|r| (r.p, r.depth, r.defect)))?;
            out.json("measure.json", &run.summary)?;
        }
        Command::Pliss(_) => {
            let run = pipeline::pliss(&ctx)?;
            out.csv("pliss.csv", &["n", "a", "hyperbolic"], run.rows.iter().map(|r| (r.n, r.a, r.hyperbolic)))?;
            out.csv("shadow.csv", &["j", "dist", "bound"], run.shadow_table.iter().map(|r| (r.j, r.dist, r.bound)))?;
            out.json("pliss.json", &run.summary)?;
        }
    }
    Ok(())
}

fn build_config(opts: &Opts) -> anyhow::Result<RunConfig> {
    let spec = match (&opts.map, opts.family) {
        (Some(path), None) => {
            if opts.lambda.is_some() || opts.c.is_some() || opts.d.is_some() {
                anyhow::bail!("--lambda, --c and --d go with --family, not --map");
            }
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            MapSpec::parse(&text).with_context(|| format!("in {}", path.display()))?
        }
        (None, Some(family)) => MapSpec::parse(&family_record(family, opts)?)?,
        (None, None) => anyhow::bail!("give a map with --map FILE or --family NAME"),
        (Some(_), Some(_)) => unreachable!("rejected by the argument parser"),
    };
    let basepoint = match &opts.basepoint {
        Some(s) => match parse_list(s).map_err(anyhow::Error::from)?.as_slice() {
            [z] => Some(SpherePoint::new(*z)),
            [re, im] if re.im == 0.0 && im.im == 0.0 => Some(SpherePoint::new(num_complex::Complex64::new(re.re, im.re))),
            _ => anyhow::bail!("--basepoint takes `re,im`"),
        },
        None => None,
    };
    Ok(RunConfig {
        map: spec,
        depth: opts.depth,
        t_min: opts.t_min,
        t_max: opts.t_max,
        t_step: opts.t_step,
        alpha_samples: opts.alpha_samples,
        radius: opts.radius,
        seed: opts.seed,
        strict_exclusion: opts.strict_exclusion,
        metric: opts.metric.map(|m| match m {
            MetricArg::Planar => Metric::Planar,
            MetricArg::Spherical => Metric::Spherical,
        }),
        basepoint,
        t: opts.t,
        p: opts.p,
        chi: opts.chi,
        length: opts.length,
    })
}

/// The flags of a named family as a map record, so both paths share one parser.
fn family_record(family: FamilyArg, opts: &Opts) -> anyhow::Result<String> {
    let complex = |s: &str| format!("({})", if s.contains(',') { s.to_string() } else { format!("{s}, 0") });
    let mut lines = vec![format!(
        "family: {}",
        match family {
            FamilyArg::Power => "power",
            FamilyArg::Chebyshev => "chebyshev",
            FamilyArg::Quadratic => "quadratic",
            FamilyArg::Paper => "paper",
        }
    )];
    if let Some(d) = opts.d {
        lines.push(format!("d: {d}"));
    }
    if let Some(c) = &opts.c {
        lines.push(format!("c: {}", complex(c)));
    }
    if let Some(l) = &opts.lambda {
        lines.push(format!("lambda: {}", complex(l)));
    }
    Ok(lines.join("\n"))
}

/// SHA-256 of the subcommand and the canonical JSON of the run configuration.
fn config_hash(command: &str, config: &RunConfig) -> anyhow::Result<String> {
    let mut h = Sha256::new();
    h.update(command.as_bytes());
    h.update([0]);
    h.update(serde_json::to_vec(config)?);
    Ok(hex::encode(h.finalize()))
}

fn coords(z: &SpherePoint) -> (f64, f64) {
    match z.finite() {
        Some(c) => (c.re, c.im),
        None => (f64::INFINITY, f64::INFINITY),
    }
}

fn write_tree(out: &Output, tree: &BackwardTree) -> Result<(), Failure> {
    let rows = tree.leaves().iter().map(|x| {
        let (re, im) = coords(&x.point);
        (re, im, x.log_deriv, x.excluded)
    });
    out.csv("tree.csv", &["re", "im", "log_deriv", "excluded"], rows)?;
    Ok(())
}

struct Output {
    dir: PathBuf,
    hash: String,
}

impl Output {
    fn create(&self, name: &str) -> anyhow::Result<(PathBuf, BufWriter<File>)> {
        let path = self.dir.join(name);
        let file = File::create(&path).with_context(|| format!("creating {}", path.display()))?;
        Ok((path, BufWriter::new(file)))
    }

    fn csv<R: Serialize>(&self, name: &str, header: &[&str], rows: impl IntoIterator<Item = R>) -> anyhow::Result<()> {
        let (path, mut file) = self.create(name)?;
        writeln!(file, "# config {}", self.hash)?;
        let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(file);
        w.write_record(header)?;
        for row in rows {
            w.serialize(row)?;
        }
        w.flush().with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }

    fn json<T: Serialize>(&self, name: &str, value: &T) -> anyhow::Result<()> {
        let mut v = serde_json::to_value(value)?;
        if let serde_json::Value::Object(map) = &mut v {
            map.insert("config_hash".into(), self.hash.clone().into());
        }
        let (path, mut file) = self.create(name)?;
        serde_json::to_writer_pretty(&mut file, &v)?;
        writeln!(file)?;
        file.flush().with_context(|| format!("writing {}", path.display()))?;
        Ok(())
    }
}
