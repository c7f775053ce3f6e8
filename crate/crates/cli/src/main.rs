//! `hypomodel`: moments, kernels, exterior fields and identity suites for a
//! planar domain.

use std::f64::consts::PI;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hypomodel::field::{div_curl_check, velocity_field, FieldGrid, GridSpec, ORIENTATION};
use hypomodel::hilbert::{HElement, Monomial};
use hypomodel::kernels::KernelEvaluator;
use hypomodel::verify::{self, DomainConfig, RunConfig, Suite};
use hypomodel::{Complex64, Error};

#[derive(Parser, Debug)]
#[command(name = "hypomodel", version, about = "Resolvent functional model of a planar domain")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Harmonic moments M_k, k = -k_int..=order.
    Moments(Common),
    /// Run an identity suite and write report.json / report.txt.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        suite: Option<SuiteArg>,
    },
    /// Evaluate one kernel at a pair of points.
    Kernel {
        #[arg(value_enum)]
        which: Which,
        /// First point, e.g. `0.1`, `1+2i`, `1e6i`.
        #[arg(allow_hyphen_values = true)]
        z: String,
        #[arg(allow_hyphen_values = true)]
        w: String,
        #[command(flatten)]
        common: Common,
    },
    /// Export the exterior field of sources in the domain to field.csv.
    Field {
        #[command(flatten)]
        common: Common,
        /// Point source `x,y[,re,im]`; the weight defaults to π (unit source).
        #[arg(long = "source", allow_hyphen_values = true)]
        sources: Vec<String>,
        /// Density term `n,k,re,im` for c·z^n·z̄^k.
        #[arg(long = "density", allow_hyphen_values = true)]
        densities: Vec<String>,
        /// Sampling rectangle `x0,x1,y0,y1,h`.
        #[arg(long, allow_hyphen_values = true)]
        grid: String,
    },
}

#[derive(Args, Debug, Default)]
struct Common {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    domain: Option<DomainArg>,
    #[arg(long)]
    r: Option<f64>,
    #[arg(long)]
    a: Option<f64>,
    #[arg(long)]
    b: Option<f64>,
    #[arg(long)]
    order: Option<usize>,
    #[arg(long)]
    k_int: Option<usize>,
    #[arg(long)]
    nodes: Option<usize>,
    #[arg(long, value_delimiter = ',')]
    eps: Option<Vec<f64>>,
    #[arg(long)]
    tol: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum DomainArg {
    Disk,
    Ellipse,
    Smooth,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum SuiteArg {
    Kernels,
    Operators,
    Hilbert,
    Reproducing,
    Nulls,
    Fields,
    All,
}

impl From<SuiteArg> for Suite {
    fn from(s: SuiteArg) -> Self {
        match s {
            SuiteArg::Kernels => Suite::Kernels,
            SuiteArg::Operators => Suite::Operators,
            SuiteArg::Hilbert => Suite::Hilbert,
            SuiteArg::Reproducing => Suite::Reproducing,
            SuiteArg::Nulls => Suite::Nulls,
            SuiteArg::Fields => Suite::Fields,
            SuiteArg::All => Suite::All,
        }
    }
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum Which {
    #[value(name = "E")]
    E,
    #[value(name = "F")]
    F,
    #[value(name = "G")]
    G,
    #[value(name = "Gstar")]
    GStar,
    #[value(name = "H")]
    H,
    #[value(name = "L")]
    L,
}

/// Failures mapped onto the exit-code contract.
enum Failure {
    Usage(String),
    Infrastructure(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidArgument(_) | Error::Region(_) | Error::Geometry(_) | Error::OutsideDomain(_) => {
                Failure::Usage(e.to_string())
            }
            _ => Failure::Infrastructure(e.to_string()),
        }
    }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    Failure::Infrastructure(format!("{}: {e}", path.display()))
}

fn build_config(c: &Common) -> Result<RunConfig, Failure> {
    let mut cfg = match &c.config {
        Some(p) => {
            let text = fs::read_to_string(p).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?;
            serde_json::from_str(&text).map_err(|e| Failure::Usage(format!("{}: {e}", p.display())))?
        }
        None => RunConfig::default(),
    };
    match c.domain {
        Some(DomainArg::Disk) => {
            cfg.domain = DomainConfig::Disk {
                center: [0.0, 0.0],
                r: c.r.unwrap_or(1.0),
            }
        }
        Some(DomainArg::Ellipse) => {
            let (Some(a), Some(b)) = (c.a, c.b) else {
                return Err(Failure::Usage("--domain ellipse needs --a and --b".into()));
            };
            cfg.domain = DomainConfig::Ellipse { a, b };
        }
        Some(DomainArg::Smooth) => {
            if !matches!(cfg.domain, DomainConfig::Smooth { .. }) {
                cfg.domain = DomainConfig::default_smooth();
            }
        }
        None => {
            if let (DomainConfig::Disk { r, .. }, Some(new)) = (&mut cfg.domain, c.r) {
                *r = new;
            }
            if let DomainConfig::Ellipse { a, b } = &mut cfg.domain {
                *a = c.a.unwrap_or(*a);
                *b = c.b.unwrap_or(*b);
            }
        }
    }
    if let Some(v) = c.order {
        cfg.order = v;
    }
    if let Some(v) = c.k_int {
        cfg.k_int = v;
    }
    if let Some(v) = c.nodes {
        cfg.nodes = v;
    }
    if let Some(v) = &c.eps {
        cfg.eps = v.clone();
    }
    if let Some(v) = c.tol {
        cfg.tol = v;
    }
    if let Some(v) = c.seed {
        cfg.seed = v;
    }
    if let Some(v) = &c.out {
        cfg.out = v.clone();
    }
    cfg.validate()?;
    Ok(cfg)
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<PathBuf, Failure> {
    fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    let path = dir.join(name);
    fs::write(&path, contents).map_err(|e| io_failure(&path, e))?;
    Ok(path)
}

fn parse_point(s: &str) -> Result<Complex64, Failure> {
    s.trim()
        .parse::<Complex64>()
        .map_err(|_| Failure::Usage(format!("'{s}' is not a complex number")))
}

fn parse_list(s: &str, what: &str, lens: &[usize]) -> Result<Vec<f64>, Failure> {
    let v = s
        .split(',')
        .map(|t| t.trim().parse::<f64>())
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| Failure::Usage(format!("{what} '{s}': {e}")))?;
    if lens.contains(&v.len()) {
        Ok(v)
    } else {
        Err(Failure::Usage(format!("{what} '{s}' needs {lens:?} comma-separated numbers")))
    }
}

fn cmd_moments(c: &Common) -> Result<u8, Failure> {
    let cfg = build_config(c)?;
    let d = cfg.domain.build()?;
    let rows = verify::moment_table(&d, cfg.k_int, cfg.order)?;
    for (k, m, e) in &rows {
        println!("M_{k:<4} {:>22.15e} {:+22.15e}i   error {e:.1e}", m.re, m.im);
    }
    let path = write_out(&cfg.out, "moments.csv", &verify::moments_csv(&rows))?;
    println!("wrote {}", path.display());
    Ok(0)
}

fn cmd_verify(c: &Common, suite: Option<SuiteArg>) -> Result<u8, Failure> {
    let mut cfg = build_config(c)?;
    if let Some(s) = suite {
        cfg.suite = s.into();
    }
    let out = cfg.out.clone();
    let report = verify::run(cfg)?;
    let table = report.to_table();
    print!("{table}");
    write_out(&out, "report.json", &report.to_json())?;
    write_out(&out, "report.txt", &table)?;
    Ok(report.exit_code() as u8)
}

fn cmd_kernel(c: &Common, which: Which, z: &str, w: &str) -> Result<u8, Failure> {
    let cfg = build_config(c)?;
    let d = cfg.domain.build()?;
    let k = KernelEvaluator::new(&d)?;
    let (z, w) = (parse_point(z)?, parse_point(w)?);
    let v = match which {
        Which::E => k.e(z, w),
        Which::F => k.f(z, w),
        Which::G => k.g(z, w),
        Which::GStar => k.g_star(z, w),
        Which::H => k.h(z, w),
        Which::L => k.l(z, w),
    }?;
    let backend = format!("{:?}", k.backend()).to_lowercase();
    let err = if k.closed_shape().is_some() { 1e-15 * v.norm().max(1.0) } else { k.tolerance() };
    println!("{:?}({z}, {w}) = {:.16e} {:+.16e}i", which, v.re, v.im);
    println!("backend {backend}, error estimate {err:.1e}");
    Ok(0)
}

fn cmd_field(c: &Common, sources: &[String], densities: &[String], grid: &str) -> Result<u8, Failure> {
    let cfg = build_config(c)?;
    let d = cfg.domain.build()?;
    let spec = GridSpec::parse(grid)?;
    let mut masses = Vec::new();
    for s in sources {
        let v = parse_list(s, "source", &[2, 4])?;
        let a = Complex64::new(v[0], v[1]);
        if !d.contains(a) {
            return Err(Failure::Usage(format!("source {a} lies outside the domain")));
        }
        let weight = if v.len() == 4 { Complex64::new(v[2], v[3]) } else { Complex64::new(PI, 0.0) };
        masses.push((a, weight));
    }
    let mut terms = Vec::new();
    for s in densities {
        let v = parse_list(s, "density", &[4])?;
        if v[0] < 0.0 || v[1] < 0.0 || v[0].fract() != 0.0 || v[1].fract() != 0.0 {
            return Err(Failure::Usage(format!("density '{s}' needs nonnegative integer powers")));
        }
        terms.push(Monomial::new(v[0] as u32, v[1] as u32, Complex64::new(v[2], v[3])));
    }
    if masses.is_empty() && terms.is_empty() {
        return Err(Failure::Usage("give at least one --source or --density".into()));
    }
    let mu = HElement::point_masses(masses).plus(HElement::density(terms))?;
    let g = FieldGrid::new(&d, spec)?;
    let f = velocity_field(&mu, &d, &g)?;
    let dc = div_curl_check(&f);
    let path = write_out(&cfg.out, "field.csv", &f.to_csv())?;
    println!("wrote {} ({} points, {} masked)", path.display(), g.unmasked(), g.len() - g.unmasked());
    println!("{ORIENTATION}");
    println!(
        "div/curl: max |2 df/dzbar| {:.3e} (div {:.3e}, curl {:.3e}) over {} stencils, {} skipped",
        dc.max_residual, dc.max_divergence, dc.max_curl, dc.stencils, dc.skipped
    );
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Moments(c) => cmd_moments(c),
        Command::Verify { common, suite } => cmd_verify(common, *suite),
        Command::Kernel { which, z, w, common } => cmd_kernel(common, *which, z, w),
        Command::Field {
            common,
            sources,
            densities,
            grid,
        } => cmd_field(common, sources, densities, grid),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Usage(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Infrastructure(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
    }
}
