//! Command-line orchestration of the cuspvariance experiments.

pub mod cache;
pub mod config;
pub mod error;
pub mod render;

use std::ffi::OsString;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use cuspvariance::btheta::{b_theta_maass, parse_maass_file, partial_sums_csv};
use cuspvariance::kernels::TestWeight;
use cuspvariance::petersson::{petersson_rows, sym2_nmax, weight_data_from_basis, PeterssonReport};
use cuspvariance::variance::{
    b_theta_pair, first_moment, planck_failure_probe, qvthm_experiment, variance_experiment, weights_in_range,
    zeroth_moment, PlanckRow, PoincareObservable, VarianceReport, WeightSet, SYM2_TOL,
};
use rayon::prelude::*;

use cache::EigenCache;
use config::{floats_arg, parse_positive, parse_theta, parse_weight, parse_weights, weights_arg, Floats, Weights};
use error::{CliError, CliResult};
use render::Normalizer;

#[derive(Parser, Debug)]
#[command(name = "cuspcli", version, about = "Quantum-variance experiments for level-one Hecke eigenforms")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Output directory for CSV/PGM artifacts.
    #[arg(long, default_value = ".")]
    pub out: PathBuf,
    /// Eigenvalue cache (default: $CUSPVARIANCE_CACHE, else <out>/cuspvariance-cache.txt).
    #[arg(long)]
    pub cache: Option<PathBuf>,
    /// Worker threads (default: all cores).
    #[arg(long)]
    pub threads: Option<usize>,
    /// key = value file; command-line flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Compute and cache Hecke eigenbases.
    Forms {
        #[arg(long, conflicts_with = "weights")]
        weight: Option<u32>,
        #[arg(long, value_parser = weights_arg)]
        weights: Option<Weights>,
        #[arg(long, default_value_t = 100)]
        nmax: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Check the Petersson formula.
    Petersson {
        #[arg(long, value_parser = weights_arg, default_value = "12:40")]
        weights: Weights,
        #[arg(long, default_value_t = 5)]
        nmax: u64,
        #[arg(long, value_parser = parse_positive, default_value = "1e-6")]
        tol: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Shifted-convolution variance against its main term.
    Qvthm {
        #[arg(long, value_parser = parse_theta, default_value = "0.4")]
        theta: f64,
        #[arg(long = "K", value_parser = parse_positive, default_value = "64")]
        big_k: f64,
        #[arg(long, value_parser = parse_weight, default_value = "bump:1:2")]
        u: TestWeight,
        #[arg(long, value_parser = parse_weight, default_value = "bump:1:2")]
        w1: TestWeight,
        #[arg(long, value_parser = parse_weight, default_value = "bump:1:2")]
        w2: TestWeight,
        #[arg(long, default_value_t = 1)]
        h1: u64,
        #[arg(long, default_value_t = 1)]
        h2: u64,
        #[command(flatten)]
        exp: ExpArgs,
    },
    /// Variance of squeezed Poincaré masses against B_θ.
    Variance {
        #[arg(long, value_parser = parse_theta, default_value = "0.3")]
        theta: f64,
        #[arg(long = "K", value_parser = parse_positive, default_value = "64")]
        big_k: f64,
        #[arg(long, value_parser = parse_weight, default_value = "bump:1:2")]
        u: TestWeight,
        #[arg(long, value_parser = parse_weight, default_value = "bump:1:2")]
        v1: TestWeight,
        #[arg(long, value_parser = parse_weight, default_value = "bump:1:2")]
        v2: TestWeight,
        #[arg(long, default_value_t = 1)]
        h1: i64,
        #[arg(long, default_value_t = 1)]
        h2: i64,
        #[command(flatten)]
        exp: ExpArgs,
    },
    /// Zeroth and first moments.
    Moments {
        #[arg(long, value_parser = parse_theta, default_value = "0.3")]
        theta: f64,
        #[arg(long = "K", value_parser = parse_positive, default_value = "64")]
        big_k: f64,
        #[arg(long, value_parser = parse_weight, default_value = "bump:1:2")]
        u: TestWeight,
        #[arg(long, value_parser = parse_weight, default_value = "bump:1:2")]
        v: TestWeight,
        #[command(flatten)]
        exp: ExpArgs,
    },
    /// Limiting form B_θ for a Poincaré pair over several θ.
    Btheta {
        #[arg(long, value_parser = floats_arg, default_value = "0.1,0.3,0.49,0.5,0.51,0.9")]
        thetas: Floats,
        #[arg(long, value_parser = parse_weight, default_value = "bump:1:2")]
        v1: TestWeight,
        #[arg(long, value_parser = parse_weight, default_value = "bump:1:2")]
        v2: TestWeight,
        #[arg(long, default_value_t = 1)]
        h1: i64,
        #[arg(long, default_value_t = 1)]
        h2: i64,
        #[command(flatten)]
        common: Common,
    },
    /// Partial sums of the Maass-form series.
    Maass {
        #[arg(long)]
        phi1: PathBuf,
        /// Defaults to phi1.
        #[arg(long)]
        phi2: Option<PathBuf>,
        #[arg(long, value_parser = parse_theta, default_value = "0.3")]
        theta: f64,
        #[arg(long, default_value_t = 20)]
        n: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Heat map of y^k|f(z)|².
    Heatmap {
        #[arg(long, default_value_t = 40)]
        weight: u32,
        #[arg(long, default_value_t = 0)]
        form: usize,
        #[arg(long = "y-min", default_value_t = 0.5)]
        y_min: f64,
        /// Default: max(2, 1.5·(k−1)/(4π)).
        #[arg(long = "y-max")]
        y_max: Option<f64>,
        #[arg(long, default_value_t = 256)]
        nx: usize,
        #[arg(long, default_value_t = 128)]
        ny: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Line-localization residual at y_l = (k−1)/(4πl).
    GhoshSarnak {
        #[arg(long, value_parser = weights_arg, default_value = "50,100,200")]
        weights: Weights,
        #[arg(long, default_value_t = 2)]
        l: u64,
        #[command(flatten)]
        common: Common,
    },
    /// Squeezed masses below the Planck scale.
    PlanckFailure {
        #[arg(long, value_parser = weights_arg, default_value = "50,100,200")]
        weights: Weights,
        #[arg(long, value_parser = parse_theta, default_value = "1")]
        theta: f64,
        #[arg(long, value_parser = parse_weight, default_value = "bump:1:2")]
        v: TestWeight,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args, Debug, Clone)]
pub struct ExpArgs {
    /// Eigenvalue table length per weight (raised to what L(1, sym² f) needs).
    #[arg(long, default_value_t = 60)]
    pub nmax: usize,
    #[command(flatten)]
    pub common: Common,
}

impl Command {
    fn common(&self) -> &Common {
        match self {
            Command::Forms { common, .. }
            | Command::Petersson { common, .. }
            | Command::Btheta { common, .. }
            | Command::Maass { common, .. }
            | Command::Heatmap { common, .. }
            | Command::GhoshSarnak { common, .. }
            | Command::PlanckFailure { common, .. } => common,
            Command::Qvthm { exp, .. } | Command::Variance { exp, .. } | Command::Moments { exp, .. } => &exp.common,
        }
    }
}

/// What a subcommand produced: artifacts written, a summary for stdout, and
/// failed checks (which turn into exit status 1).
#[derive(Debug, Default)]
pub struct Outcome {
    pub artifacts: Vec<PathBuf>,
    pub summary: String,
    pub failures: Vec<String>,
}

struct Ctx {
    out: PathBuf,
    cache_path: PathBuf,
    cache: EigenCache,
    outcome: Outcome,
}

impl Ctx {
    fn write(&mut self, name: &str, text: &str) -> CliResult<()> {
        let p = self.out.join(name);
        std::fs::write(&p, text).map_err(|e| CliError::Io(format!("{}: {e}", p.display())))?;
        self.outcome.artifacts.push(p);
        Ok(())
    }

    fn say(&mut self, line: impl AsRef<str>) {
        self.outcome.summary.push_str(line.as_ref());
        self.outcome.summary.push('\n');
    }

    fn check(&mut self, ok: bool, what: impl Into<String>) {
        if !ok {
            self.outcome.failures.push(what.into());
        }
    }

    fn weight_set(&mut self, weights: &[u32], n_max: usize) -> CliResult<WeightSet> {
        self.cache.ensure(weights, |k| n_max.max(sym2_nmax(k)))?;
        let bases: Vec<_> = weights.iter().map(|&k| self.cache.get(k).cloned().expect("ensured")).collect();
        let data = bases
            .into_par_iter()
            .map(|b| weight_data_from_basis(b, SYM2_TOL))
            .collect::<cuspvariance::Result<Vec<_>>>()?;
        Ok(WeightSet::from_data(data))
    }
}

fn variance_outputs(ctx: &mut Ctx, stem: &str, reports: &[VarianceReport]) -> CliResult<()> {
    let mut csv = format!("{}\n", VarianceReport::CSV_HEADER);
    let mut per_k = String::new();
    for (i, r) in reports.iter().enumerate() {
        csv.push_str(&r.csv_row());
        csv.push('\n');
        let pk = r.per_k_csv();
        if i == 0 {
            per_k.push_str(&pk);
        } else {
            per_k.extend(pk.lines().skip(1).map(|l| format!("{l}\n")));
        }
        let ratio = r.ratio().map_or("NA".to_string(), |x| format!("{x:.6}"));
        ctx.say(format!(
            "{stem}: θ={} K={} {} × {}: empirical {:.6e}, predicted {:.6e}, ratio {ratio}",
            r.theta, r.big_k, r.obs1, r.obs2, r.empirical, r.predicted
        ));
    }
    ctx.write(&format!("{stem}.csv"), &csv)?;
    ctx.write(&format!("{stem}_per_k.csv"), &per_k)?;
    Ok(())
}

fn dispatch(cmd: &Command, ctx: &mut Ctx) -> CliResult<()> {
    match cmd {
        Command::Forms { weight, weights, nmax, .. } => {
            let ks = match (weight, weights) {
                (Some(k), _) => parse_weights(&k.to_string()).map_err(CliError::Config)?,
                (None, Some(ks)) => ks.0.clone(),
                (None, None) => return Err(CliError::Config("forms needs --weight or --weights".into())),
            };
            if *nmax < 2 {
                return Err(CliError::Config("--nmax must be ≥ 2".into()));
            }
            ctx.cache.ensure(&ks, |_| *nmax)?;
            let mut csv = String::from("k,form_index,n,lambda\n");
            for &k in &ks {
                let b = ctx.cache.get(k).expect("ensured").clone();
                let mut worst: f64 = 0.0;
                for f in &b.forms {
                    for n in 1..=*nmax {
                        let lam = f.lambda(n).expect("table covers nmax");
                        writeln!(csv, "{k},{},{n},{}", f.index(), lam.to_decimal(cache::DIGITS)).unwrap();
                        // Deligne: |λ(n)| ≤ d(n)
                        let d = cuspvariance::kernels::num_divisors(n as u64) as f64;
                        worst = worst.max(lam.to_f64().abs() / d);
                    }
                }
                ctx.check(worst <= 1.0 + 1e-12, format!("weight {k}: |λ(n)| exceeds d(n) (max ratio {worst})"));
                ctx.say(format!("weight {k}: {} forms, n ≤ {nmax}, max |λ(n)|/d(n) = {worst:.6}", b.dim()));
            }
            let name = if ks.len() == 1 { format!("forms_k{}.csv", ks[0]) } else { "forms.csv".into() };
            ctx.write(&name, &csv)?;
        }
        Command::Petersson { weights, nmax, tol, .. } => {
            let weights = &weights.0;
            if *nmax < 1 {
                return Err(CliError::Config("--nmax must be ≥ 1".into()));
            }
            let set = ctx.weight_set(weights, (*nmax as usize).max(2))?;
            let rows: Vec<_> = weights
                .par_iter()
                .map(|&k| petersson_rows(set.get(k)?, *nmax, *tol))
                .collect::<cuspvariance::Result<Vec<_>>>()?;
            let rep = PeterssonReport { rows: rows.into_iter().flatten().collect() };
            ctx.write("petersson.csv", &rep.to_csv())?;
            let worst = rep.rows.iter().map(|r| r.abs_diff).fold(0.0, f64::max);
            ctx.say(format!("petersson: {} rows, max |LHS − RHS| = {worst:.3e} (tol {tol:e})", rep.rows.len()));
            let fails = rep.failures().len();
            ctx.check(rep.passed(), format!("petersson: {fails} rows exceed tolerance {tol:e}"));
        }
        Command::Qvthm { theta, big_k, u, w1, w2, h1, h2, exp } => {
            let ks = weights_in_range(*big_k, u);
            let set = ctx.weight_set(&ks, exp.nmax)?;
            let r = qvthm_experiment(&set, *big_k, u, *theta, w1, *h1, w2, *h2)?;
            variance_outputs(ctx, "qvthm", &[r])?;
        }
        Command::Variance { theta, big_k, u, v1, v2, h1, h2, exp } => {
            let p1 = PoincareObservable::new(v1.clone(), *h1)?;
            let p2 = PoincareObservable::new(v2.clone(), *h2)?;
            let ks = weights_in_range(*big_k, u);
            let set = ctx.weight_set(&ks, exp.nmax)?;
            let r = variance_experiment(&set, *big_k, u, *theta, &p1, &p2)?;
            if p1 == p2 {
                ctx.check(r.empirical >= 0.0, format!("variance: diagonal sum {:e} is negative", r.empirical));
            }
            variance_outputs(ctx, "variance", &[r])?;
        }
        Command::Moments { theta, big_k, u, v, exp } => {
            let ks = weights_in_range(*big_k, u);
            let set = ctx.weight_set(&ks, exp.nmax)?;
            let r0 = zeroth_moment(&set, *big_k, u)?;
            let r1 = first_moment(&set, *big_k, u, *theta, v)?;
            ctx.check(r0.empirical > 0.0, "moments: zeroth moment is not positive");
            variance_outputs(ctx, "moments", &[r0, r1])?;
        }
        Command::Btheta { thetas, v1, v2, h1, h2, .. } => {
            let p1 = PoincareObservable::new(v1.clone(), *h1)?;
            let p2 = PoincareObservable::new(v2.clone(), *h2)?;
            let mut csv = String::from("theta,obs1,obs2,value\n");
            let mut low: Vec<f64> = Vec::new();
            for &t in &thetas.0 {
                if !(t > 0.0 && t < 1.0) {
                    return Err(CliError::Config(format!("θ = {t} outside (0, 1)")));
                }
                let b = b_theta_pair(&p1, &p2, t)?;
                writeln!(csv, "{t},{},{},{b:.17e}", p1.describe(), p2.describe()).unwrap();
                ctx.say(format!("B_θ({}, {}) at θ = {t}: {b:.12e}", p1.describe(), p2.describe()));
                if t < 0.5 || *h1 == 0 && *h2 == 0 {
                    low.push(b);
                } else if t > 0.5 {
                    ctx.check(b == 0.0, format!("btheta: value {b:e} at θ = {t} should vanish"));
                }
            }
            if let Some(&first) = low.first() {
                let spread = low.iter().map(|b| (b - first).abs()).fold(0.0, f64::max);
                ctx.check(spread <= 1e-10 * first.abs().max(1.0), format!("btheta: low-regime values spread by {spread:e}"));
            }
            ctx.write("btheta.csv", &csv)?;
        }
        Command::Maass { phi1, phi2, theta, n, .. } => {
            let a = parse_maass_file(phi1)?;
            let same = phi2.as_ref().map_or(true, |p| p == phi1);
            let b = if same { a.clone() } else { parse_maass_file(phi2.as_ref().unwrap())? };
            let regime = cuspvariance::btheta::ThetaRegime::new(*theta)?;
            let sums = b_theta_maass(&a, &b, &regime, *n)?;
            ctx.write("maass.csv", &partial_sums_csv(&sums))?;
            if let (Some(s1), Some(sn)) = (sums.first(), sums.last()) {
                ctx.say(format!("maass: S_1 = {s1:.6e}, S_{} = {sn:.6e}", sums.len()));
                if same {
                    ctx.check(*sn >= -1e-3 * s1.abs(), format!("maass: final partial sum {sn:e} is negative"));
                }
            }
        }
        Command::Heatmap { weight, form, y_min, y_max, nx, ny, seed, .. } => {
            let k = *weight;
            let y_max = y_max.unwrap_or_else(|| (1.5 * (k - 1) as f64 / (4.0 * std::f64::consts::PI)).max(2.0));
            let need = render::series_cutoff(k, y_min.max(render::Y_MIN));
            let basis = ctx.cache.basis(k, need.max(2))?;
            let f = basis
                .forms
                .get(*form)
                .ok_or_else(|| CliError::Config(format!("weight {k} has {} forms, no index {form}", basis.dim())))?;
            let grid = render::heatmap(f, *y_min, y_max, *nx, *ny)?;
            let worst = render::invariance_spot_check(f, 10, *seed, *y_min, y_max)?;
            ctx.check(worst <= 1e-8, format!("heatmap: mass differs at z and −1/z by {worst:e}"));
            ctx.write(&format!("heatmap_k{k}_f{form}.pgm"), &grid.to_pgm())?;
            ctx.write(&format!("heatmap_k{k}_f{form}.csv"), &grid.to_csv())?;
            ctx.say(format!("heatmap k={k} form={form}: {nx}×{ny}, invariance defect {worst:.2e}"));
        }
        Command::GhoshSarnak { weights, l, .. } => {
            let weights = &weights.0;
            let mut csv = String::new();
            csv.push_str("# N = (e/l)^((k-1)/2) in residual_half; the printed (e/l)^(k-1) reading in residual_full\n");
            csv.push_str("# the n = l term carries (l/e)^((k-1)/2) under f = sum lambda(n) n^((k-1)/2) e(nz)\n");
            csv.push_str("k,form_index,l,y_l,residual_half,residual_full\n");
            for &k in weights {
                let y = (k - 1) as f64 / (4.0 * std::f64::consts::PI * *l as f64);
                let basis = ctx.cache.basis(k, render::series_cutoff(k, y).max(*l as usize).max(2))?;
                let rows: Vec<(f64, f64)> = basis
                    .forms
                    .par_iter()
                    .map(|f| {
                        Ok((
                            render::ghosh_sarnak_residual(f, *l, Normalizer::HalfExponent)?,
                            render::ghosh_sarnak_residual(f, *l, Normalizer::FullExponent)?,
                        ))
                    })
                    .collect::<CliResult<_>>()?;
                for (f, (rh, rf)) in basis.forms.iter().zip(rows) {
                    writeln!(csv, "{k},{},{l},{y:.17e},{rh:.17e},{rf:.17e}", f.index()).unwrap();
                    ctx.say(format!("ghosh-sarnak k={k} form={} l={l}: residual {rh:.6e}", f.index()));
                }
            }
            ctx.write("ghosh_sarnak.csv", &csv)?;
        }
        Command::PlanckFailure { weights, theta, v, .. } => {
            let weights = &weights.0;
            let set = ctx.weight_set(weights, 60)?;
            let rows = planck_failure_probe(&set, weights, *theta, v)?;
            let mut csv = format!("{}\n", PlanckRow::CSV_HEADER);
            for r in &rows {
                csv.push_str(&r.csv_row());
                csv.push('\n');
            }
            for &k in weights {
                let worst = rows.iter().filter(|r| r.k == k).map(|r| r.log10_ratio).fold(f64::NEG_INFINITY, f64::max);
                ctx.say(format!("planck-failure θ={theta} k={k}: max log10(|μ|/ν) = {worst:.3}"));
            }
            ctx.write("planck_failure.csv", &csv)?;
        }
    }
    Ok(())
}

/// Parses `args` (including the program name), runs the subcommand and
/// returns what it produced. Check failures are reported in the outcome.
pub fn run_args(args: Vec<OsString>) -> CliResult<Outcome> {
    let args = config::expand_args(args)?;
    let cli = Cli::try_parse_from(args).map_err(|e| match e.kind() {
        clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => CliError::Config(String::new()),
        _ => CliError::Config(e.to_string().trim().to_string()),
    })?;
    run(&cli.command)
}

pub fn run(cmd: &Command) -> CliResult<Outcome> {
    let common = cmd.common().clone();
    std::fs::create_dir_all(&common.out).map_err(|e| CliError::Config(format!("output directory {}: {e}", common.out.display())))?;
    let cache_path = cache::resolve_path(common.cache.as_deref(), &common.out);
    let threads = match common.threads {
        Some(0) => return Err(CliError::Config("--threads must be ≥ 1".into())),
        Some(n) => n,
        None => 0,
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::Config(format!("thread pool: {e}")))?;
    let mut ctx = Ctx { out: common.out.clone(), cache: EigenCache::load(&cache_path)?, cache_path, outcome: Outcome::default() };
    pool.install(|| dispatch(cmd, &mut ctx))?;
    if ctx.cache.is_dirty() {
        ctx.cache.save(&ctx.cache_path)?;
    }
    Ok(ctx.outcome)
}

pub fn cache_path_for(out: &Path, flag: Option<&Path>) -> PathBuf {
    cache::resolve_path(flag, out)
}
