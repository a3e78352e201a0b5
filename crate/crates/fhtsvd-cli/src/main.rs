//! Command-line driver: computes period data, approximate and exact
//! spectra, comparison reports and singular-function samples.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use fhtsvd::abel::{build_abel_data, AbelData};
use fhtsvd::gfun::{build_jump_data, JumpData};
use fhtsvd::oracle::{sign_changes, DiscretizedOperator, ExactSpectrum};
use fhtsvd::spectrum::{
    asymptotic_singular_functions, find_eigenvalues, real_line_indicator, solve_divisor,
    SpectralContext,
};
use fhtsvd::surface::{build_period_data, IntervalSystem, PeriodData};
use fhtsvd::theta::ThetaContext;

const EXIT_VALIDATION: i32 = 2;
const EXIT_PARTIAL: i32 = 3;
const EXIT_MISSING_INPUT: i32 = 4;

#[derive(Parser)]
#[command(
    name = "fhtsvd",
    about = "Singular-value asymptotics of the finite Hilbert transform on several intervals",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the period matrix, jump constants and Abel-map data
    Periods(RunArgs),
    /// Locate approximate eigenvalues on the spectral line
    Eigs(RunArgs),
    /// Compute exact eigenvalues by discretizing the transform couple
    Oracle(RunArgs),
    /// Compare approximate and exact spectra
    Compare(RunArgs),
    /// Sample asymptotic and exact singular functions for one index
    Eigenfunctions(EigenfunctionArgs),
    /// Run the verification suites and determinism checks
    Selftest(RunArgs),
}

#[derive(Args, Clone)]
struct RunArgs {
    /// Comma-separated endpoints a_1,...,a_{2g+2}
    #[arg(long, value_delimiter = ',', num_args = 1.., allow_hyphen_values = true)]
    endpoints: Option<Vec<f64>>,
    /// Number of spectral indices to produce
    #[arg(long)]
    n_max: Option<usize>,
    /// Quadrature nodes per interval
    #[arg(long)]
    quad_order: Option<usize>,
    /// Absolute accuracy target for theta evaluations
    #[arg(long)]
    theta_eps: Option<f64>,
    #[arg(long)]
    kappa_min: Option<f64>,
    #[arg(long)]
    kappa_max: Option<f64>,
    /// Output directory
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sample count for eigenfunction grids
    #[arg(long)]
    samples: Option<usize>,
    /// Endpoint exclusion fraction for eigenfunction grids
    #[arg(long)]
    margin: Option<f64>,
    /// Structured configuration file; explicit flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
}

#[derive(Args, Clone)]
struct EigenfunctionArgs {
    #[command(flatten)]
    run: RunArgs,
    /// Spectral index (exact-spectrum numbering)
    #[arg(long)]
    n: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
struct FileConfig {
    endpoints: Option<Vec<f64>>,
    n_max: Option<usize>,
    quad_order: Option<usize>,
    theta_eps: Option<f64>,
    kappa_min: Option<f64>,
    kappa_max: Option<f64>,
    out: Option<PathBuf>,
    samples: Option<usize>,
    margin: Option<f64>,
}

/// Fully resolved run configuration.
#[derive(Debug, Clone)]
struct RunConfig {
    endpoints: Vec<f64>,
    n_max: usize,
    quad_order: usize,
    theta_eps: f64,
    kappa_min: f64,
    kappa_max: Option<f64>,
    out: PathBuf,
    samples: usize,
    margin: f64,
}

impl RunConfig {
    fn resolve(args: &RunArgs) -> anyhow::Result<Self> {
        let file: FileConfig = match &args.config {
            Some(path) => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("cannot read config {}", path.display()))?;
                serde_json::from_str(&text).context("config file is not valid JSON")?
            }
            None => FileConfig::default(),
        };
        let endpoints = args
            .endpoints
            .clone()
            .or(file.endpoints)
            .ok_or_else(|| anyhow!("endpoints are required (--endpoints a1,a2,...)"))?;
        let n_max = args.n_max.or(file.n_max).unwrap_or(16);
        if n_max < 1 {
            return Err(anyhow!("n-max must be at least 1"));
        }
        let theta_eps = args.theta_eps.or(file.theta_eps).unwrap_or(1e-12);
        if !(theta_eps > 1e-14 && theta_eps < 1e-4) {
            return Err(anyhow!("theta-eps must lie in (1e-14, 1e-4)"));
        }
        Ok(RunConfig {
            endpoints,
            n_max,
            quad_order: args.quad_order.or(file.quad_order).unwrap_or(256),
            theta_eps,
            kappa_min: args.kappa_min.or(file.kappa_min).unwrap_or(1.0),
            kappa_max: args.kappa_max.or(file.kappa_max),
            out: args
                .out
                .clone()
                .or(file.out)
                .unwrap_or_else(|| PathBuf::from(".")),
            samples: args.samples.or(file.samples).unwrap_or(2000),
            margin: args.margin.or(file.margin).unwrap_or(0.01),
        })
    }
}

fn main() {
    let cli = Cli::parse();
    let code = match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            let text = format!("{err:#}");
            if text.contains("missing") {
                EXIT_MISSING_INPUT
            } else {
                EXIT_VALIDATION
            }
        }
    };
    std::process::exit(code);
}

fn run(cli: Cli) -> anyhow::Result<i32> {
    match cli.command {
        Command::Periods(args) => cmd_periods(&RunConfig::resolve(&args)?),
        Command::Eigs(args) => cmd_eigs(&RunConfig::resolve(&args)?),
        Command::Oracle(args) => cmd_oracle(&RunConfig::resolve(&args)?),
        Command::Compare(args) => cmd_compare(&RunConfig::resolve(&args)?),
        Command::Eigenfunctions(args) => {
            cmd_eigenfunctions(&RunConfig::resolve(&args.run)?, args.n)
        }
        Command::Selftest(args) => cmd_selftest(&RunConfig::resolve(&args)?),
    }
}

/// Shared pipeline state for the spectral commands.
struct Pipeline {
    pd: PeriodData,
    ad: AbelData,
    jd: JumpData,
    theta: ThetaContext,
}

impl Pipeline {
    fn build(config: &RunConfig) -> anyhow::Result<Self> {
        let sys = IntervalSystem::new(config.endpoints.clone())?;
        let base = (config.quad_order.clamp(64, 2048)) / 2;
        let pd = build_period_data(&sys, base)?;
        let ad = build_abel_data(&pd)?;
        let theta = ThetaContext::new(pd.tau.clone(), config.theta_eps)?;
        let jd = build_jump_data(&pd, &ad, &theta)?;
        Ok(Pipeline { pd, ad, jd, theta })
    }

    fn ctx(&self) -> SpectralContext<'_> {
        SpectralContext::new(&self.pd, &self.ad, &self.jd, &self.theta)
    }
}

fn iso_timestamp() -> String {
    // civil-from-days conversion of the epoch clock, UTC
    let secs = std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0);
    let days = secs / 86_400;
    let rem = secs % 86_400;
    let (h, m, s) = (rem / 3600, (rem % 3600) / 60, rem % 60);
    let z = days as i64 + 719_468;
    let era = z / 146_097;
    let doe = z - era * 146_097;
    let yoe = (doe - doe / 1460 + doe / 36_524 - doe / 146_096) / 365;
    let y = yoe + era * 400;
    let doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
    let mp = (5 * doy + 2) / 153;
    let d = doy - (153 * mp + 2) / 5 + 1;
    let mth = if mp < 10 { mp + 3 } else { mp - 9 };
    let y = if mth <= 2 { y + 1 } else { y };
    format!("{y:04}-{mth:02}-{d:02}T{h:02}:{m:02}:{s:02}Z")
}

fn fmt17(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:.16e}")
    }
}

fn matrix_json(m: &nalgebra::DMatrix<f64>) -> serde_json::Value {
    serde_json::Value::Array(
        (0..m.nrows())
            .map(|i| {
                serde_json::Value::Array(
                    (0..m.ncols())
                        .map(|j| serde_json::json!(m[(i, j)]))
                        .collect(),
                )
            })
            .collect(),
    )
}

fn cmd_periods(config: &RunConfig) -> anyhow::Result<i32> {
    let p = Pipeline::build(config)?;
    let g = p.pd.genus();
    let tau_re = p.pd.tau.map(|c| c.re);
    let tau_im = p.pd.tau.map(|c| c.im);
    let doc = serde_json::json!({
        "endpoints": config.endpoints,
        "genus": g,
        "A": matrix_json(&p.pd.a_mat),
        "A_inv": matrix_json(&p.pd.a_inv),
        "P_coeffs": matrix_json(&p.pd.p_coeffs),
        "tau_re": matrix_json(&tau_re),
        "tau_im": matrix_json(&tau_im),
        "tau11": {"re": p.pd.tau11.re, "im": p.pd.tau11.im},
        "tau11_direct": {"re": p.pd.tau11_direct.re, "im": p.pd.tau11_direct.im},
        "Omega": p.jd.omega.as_slice(),
        "delta": p.jd.delta.as_slice(),
        "g_inf": p.jd.g_inf,
        "d_inf": {"re": p.jd.d_inf.re, "im": p.jd.d_inf.im},
        "C0": {"re": p.jd.c0.re, "im": p.jd.c0.im},
        "u_infinity": p.ad.u_infinity.as_slice(),
        "W0": {
            "re": p.ad.w0.iter().map(|c| c.re).collect::<Vec<_>>(),
            "im": p.ad.w0.iter().map(|c| c.im).collect::<Vec<_>>(),
        },
        "K_riemann": {
            "re": p.ad.riemann_constants.iter().map(|c| c.re).collect::<Vec<_>>(),
            "im": p.ad.riemann_constants.iter().map(|c| c.im).collect::<Vec<_>>(),
        },
        "metadata": {
            "quad_order": p.pd.order,
            "theta_eps": config.theta_eps,
            "version": env!("CARGO_PKG_VERSION"),
            "timestamp": iso_timestamp(),
        },
    });
    fs::create_dir_all(&config.out)?;
    let path = config.out.join("periods.json");
    fs::write(&path, serde_json::to_string_pretty(&doc)?)?;
    println!("wrote {}", path.display());
    Ok(0)
}

/// Roots of the line indicator covering `n_max` indices.
fn locate_roots(p: &Pipeline, config: &RunConfig) -> anyhow::Result<Vec<f64>> {
    let ctx = p.ctx();
    let period = std::f64::consts::PI / p.pd.tau[(0, 0)].im;
    let mut hi = config
        .kappa_max
        .unwrap_or(config.kappa_min + (config.n_max as f64 + 4.0) * period);
    loop {
        let roots = find_eigenvalues(&ctx, config.kappa_min, hi)?;
        if roots.len() >= config.n_max || config.kappa_max.is_some() {
            return Ok(roots);
        }
        hi += 4.0 * period;
        if hi > config.kappa_min + 1e4 {
            return Ok(roots);
        }
    }
}

fn cmd_eigs(config: &RunConfig) -> anyhow::Result<i32> {
    let p = Pipeline::build(config)?;
    let ctx = p.ctx();
    let roots = locate_roots(&p, config)?;
    if roots.len() < config.n_max {
        return Err(anyhow!(
            "found only {} roots below the kappa ceiling; raise --kappa-max",
            roots.len()
        ));
    }
    fs::create_dir_all(&config.out)?;
    let path = config.out.join("eigs.csv");
    let mut out = String::from("n,kappa_approx,lambda_approx,two_lambda,divisor_residual\n");
    let mut partial = false;
    for n in 1..=config.n_max {
        let kappa = roots[n - 1];
        let lambda = (-kappa).exp();
        let residual = match solve_divisor(&ctx, kappa, None) {
            Ok(sol) => sol.residual,
            Err(_) => {
                partial = true;
                f64::NAN
            }
        };
        out.push_str(&format!(
            "{n},{},{},{},{}\n",
            fmt17(kappa),
            fmt17(lambda),
            fmt17(2.0 * lambda),
            fmt17(residual)
        ));
    }
    fs::write(&path, out)?;
    println!("wrote {}", path.display());
    Ok(if partial { EXIT_PARTIAL } else { 0 })
}

fn build_oracle(config: &RunConfig) -> anyhow::Result<(DiscretizedOperator, ExactSpectrum)> {
    let sys = IntervalSystem::new(config.endpoints.clone())?;
    let order = config.quad_order.max(4 * (config.n_max + 2));
    let op = DiscretizedOperator::build(&sys, order)?;
    let spec = op.exact_spectrum(config.n_max + 2)?;
    Ok((op, spec))
}

fn cmd_oracle(config: &RunConfig) -> anyhow::Result<i32> {
    let (_, spec) = build_oracle(config)?;
    if spec.len() < config.n_max + 1 {
        return Err(anyhow!(
            "oracle resolved only {} values; raise --quad-order",
            spec.len()
        ));
    }
    fs::create_dir_all(&config.out)?;
    let path = config.out.join("oracle.csv");
    let mut out = String::from("n,kappa_exact,lambda_exact,gap_to_next\n");
    for n in 1..=config.n_max {
        let kappa = spec.kappa(n).unwrap();
        let gap = if n + 1 < spec.len() {
            spec.kappa(n + 1).unwrap() - kappa
        } else {
            f64::NAN
        };
        out.push_str(&format!(
            "{n},{},{},{}\n",
            fmt17(kappa),
            fmt17(spec.lambdas[n]),
            fmt17(gap)
        ));
    }
    fs::write(&path, out)?;
    println!("wrote {}", path.display());
    Ok(0)
}

fn read_csv_column(path: &Path, column: usize) -> anyhow::Result<Vec<f64>> {
    let text = fs::read_to_string(path)
        .map_err(|_| anyhow!("required input file {} is missing", path.display()))?;
    let mut out = Vec::new();
    for line in text.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() <= column {
            continue;
        }
        out.push(fields[column].parse::<f64>().unwrap_or(f64::NAN));
    }
    Ok(out)
}

/// Optimal integer shift aligning approximate roots to exact values.
fn optimal_shift(kex: &[f64], roots: &[f64]) -> (i64, f64) {
    let mut best = (0i64, f64::INFINITY);
    for shift in -3i64..=3 {
        let mut gaps = Vec::new();
        for (n, &ke) in kex.iter().enumerate() {
            let r = n as i64 + shift;
            if r < 0 || r as usize >= roots.len() {
                continue;
            }
            gaps.push((ke - roots[r as usize]).abs());
        }
        if gaps.len() < kex.len().min(roots.len()) / 2 {
            continue;
        }
        gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let med = gaps[gaps.len() / 2];
        if med < best.1 {
            best = (shift, med);
        }
    }
    best
}

fn cmd_compare(config: &RunConfig) -> anyhow::Result<i32> {
    let eigs_path = config.out.join("eigs.csv");
    let oracle_path = config.out.join("oracle.csv");
    if !oracle_path.exists() {
        eprintln!("oracle file missing");
        return Ok(EXIT_MISSING_INPUT);
    }
    if !eigs_path.exists() {
        eprintln!("eigs file missing");
        return Ok(EXIT_MISSING_INPUT);
    }
    let kappa_approx = read_csv_column(&eigs_path, 1)?;
    let kappa_exact = read_csv_column(&oracle_path, 1)?;
    if kappa_approx.len() != kappa_exact.len() {
        return Err(anyhow!(
            "mismatched n_max: eigs has {}, oracle has {}",
            kappa_approx.len(),
            kappa_exact.len()
        ));
    }
    let p = Pipeline::build(config)?;
    let predicted_slope = -std::f64::consts::PI / p.pd.tau[(0, 0)].im;
    // least squares of ln lambda_exact = -kappa_exact against the row index,
    // starting at row 5 where available
    let lo = if kappa_exact.len() > 7 { 4 } else { 0 };
    let xs: Vec<f64> = (lo..kappa_exact.len()).map(|n| (n + 1) as f64).collect();
    let ys: Vec<f64> = (lo..kappa_exact.len()).map(|n| -kappa_exact[n]).collect();
    let nn = xs.len() as f64;
    let sx: f64 = xs.iter().sum();
    let sy: f64 = ys.iter().sum();
    let sxx: f64 = xs.iter().map(|v| v * v).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(a, b)| a * b).sum();
    let slope = (nn * sxy - sx * sy) / (nn * sxx - sx * sx);
    let intercept = (sy - slope * sx) / nn;
    let (shift, _) = optimal_shift(&kappa_exact, &kappa_approx);
    let gaps: Vec<serde_json::Value> = kappa_exact
        .iter()
        .enumerate()
        .map(|(n, &ke)| {
            let r = n as i64 + shift;
            if r >= 0 && (r as usize) < kappa_approx.len() {
                serde_json::json!((ke - kappa_approx[r as usize]).abs())
            } else {
                serde_json::Value::Null
            }
        })
        .collect();
    let doc = serde_json::json!({
        "fitted_slope": slope,
        "fitted_intercept": intercept,
        "predicted_slope": predicted_slope,
        "relative_slope_error": ((slope - predicted_slope) / predicted_slope).abs(),
        "index_shift": shift,
        "abs_gap": gaps,
        "metadata": {
            "endpoints": config.endpoints,
            "tau11_im": p.pd.tau[(0, 0)].im,
            "quad_order": config.quad_order,
            "theta_eps": config.theta_eps,
            "version": env!("CARGO_PKG_VERSION"),
            "timestamp": iso_timestamp(),
        },
    });
    let path = config.out.join("report.json");
    fs::write(&path, serde_json::to_string_pretty(&doc)?)?;
    println!("wrote {}", path.display());
    Ok(0)
}

/// Local polynomial interpolation on the oracle's clustered nodes.
fn interp_local(nodes: &[f64], values: &[f64], x: f64) -> f64 {
    let m = nodes.len();
    if m == 0 {
        return f64::NAN;
    }
    let pos = nodes.partition_point(|&z| z < x);
    let width = 8usize.min(m);
    let lo = pos
        .saturating_sub(width / 2)
        .min(m - width);
    let ns = &nodes[lo..lo + width];
    let vs = &values[lo..lo + width];
    let mut wsum = 0.0;
    let mut vsum = 0.0;
    for i in 0..ns.len() {
        let mut w = 1.0;
        for j in 0..ns.len() {
            if i != j {
                w /= ns[i] - ns[j];
            }
        }
        let d = x - ns[i];
        if d == 0.0 {
            return vs[i];
        }
        let bw = w / d;
        wsum += bw;
        vsum += bw * vs[i];
    }
    vsum / wsum
}

fn cmd_eigenfunctions(config: &RunConfig, n: usize) -> anyhow::Result<i32> {
    if n < 1 {
        return Err(anyhow!("index n must be at least 1"));
    }
    let p = Pipeline::build(config)?;
    let ctx = p.ctx();
    let oracle_cfg = RunConfig {
        n_max: n.max(config.n_max),
        ..config.clone()
    };
    let (op, spec) = build_oracle(&oracle_cfg)?;
    let roots = locate_roots(
        &p,
        &RunConfig {
            n_max: n + 4,
            kappa_max: None,
            ..config.clone()
        },
    )?;
    let kex: Vec<f64> = (1..spec.len()).map(|i| spec.kappa(i).unwrap()).collect();
    let (shift, _) = optimal_shift(&kex, &roots);
    let r = (n as i64 - 1) + shift;
    if r < 0 || r as usize >= roots.len() {
        return Err(anyhow!("no approximate root aligned with index {n}"));
    }
    let kappa = roots[r as usize];

    // sample grids with the endpoint margin, node counts proportional to
    // interval length
    let inner = p.pd.sys.inner_arcs();
    let outer = p.pd.sys.exterior_arcs();
    let total_len: f64 = inner
        .iter()
        .chain(outer.iter())
        .map(|&(lo, hi)| hi - lo)
        .sum();
    let grid = |(lo, hi): (f64, f64)| -> Vec<f64> {
        let len = hi - lo;
        let count = ((config.samples as f64) * len / total_len).round().max(8.0) as usize;
        let m = config.margin * len;
        (0..count)
            .map(|i| lo + m + (len - 2.0 * m) * i as f64 / (count - 1) as f64)
            .collect()
    };
    let xs_i: Vec<f64> = inner.iter().flat_map(|&seg| grid(seg)).collect();
    let xs_e: Vec<f64> = outer.iter().flat_map(|&seg| grid(seg)).collect();
    let data = asymptotic_singular_functions(&ctx, kappa, &xs_i, &xs_e, 0.0)?;

    // oracle samples carried to the weighted-function scale of f_n
    let f_oracle = &spec.f_vectors[n];
    let w_scaled: Vec<f64> = f_oracle
        .iter()
        .enumerate()
        .map(|(i, v)| v * op.w_of_i[i].sqrt())
        .collect();

    fs::create_dir_all(&config.out)?;
    let path = config.out.join(format!("fn_{n}.csv"));
    let mut rows: Vec<(f64, f64, f64, f64)> = Vec::new();
    for &(x, v) in &data.f_samples {
        let fo = interp_local(&op.nodes_i, &w_scaled, x);
        rows.push((x, v, f64::NAN, fo));
    }
    for &(x, v) in &data.h_samples {
        rows.push((x, f64::NAN, v, f64::NAN));
    }
    rows.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    // orient the oracle column with the asymptotic one
    let dot: f64 = rows
        .iter()
        .filter(|r| r.1.is_finite() && r.3.is_finite())
        .map(|r| r.1 * r.3)
        .sum();
    let mut out = String::from("z,f_asym,h_asym,f_oracle_interp\n");
    for (z, f, h, fo) in rows {
        let fo = if dot < 0.0 { -fo } else { fo };
        out.push_str(&format!(
            "{},{},{},{}\n",
            fmt17(z),
            fmt17(f),
            fmt17(h),
            fmt17(fo)
        ));
    }
    fs::write(&path, out)?;
    println!("wrote {}", path.display());
    Ok(0)
}

fn strip_timestamps(text: &str) -> String {
    text.lines()
        .filter(|l| !l.contains("timestamp"))
        .collect::<Vec<_>>()
        .join("\n")
}

fn cmd_selftest(config: &RunConfig) -> anyhow::Result<i32> {
    let p = Pipeline::build(config)?;
    let ctx = p.ctx();
    let mut failures = 0usize;
    let mut check = |name: &str, ok: bool, detail: String| {
        println!("{}: {} - {}", name, if ok { "PASS" } else { "FAIL" }, detail);
        if !ok {
            failures += 1;
        }
    };

    // suite 3: root bracketing and spacing structure
    let period = std::f64::consts::PI / p.pd.tau[(0, 0)].im;
    let hi = config.kappa_min + 12.0 * period;
    let roots = find_eigenvalues(&ctx, config.kappa_min, hi)?;
    let mut clean = true;
    for pair in roots.windows(2) {
        let vals: Vec<f64> = (1..16)
            .map(|i| {
                let k = pair[0] + (pair[1] - pair[0]) * i as f64 / 16.0;
                real_line_indicator(&ctx, k).unwrap_or(f64::NAN)
            })
            .collect();
        if sign_changes(&vals) != 0 {
            clean = false;
        }
    }
    check(
        "suite 3 (brackets)",
        clean && !roots.is_empty(),
        format!("{} roots, clean brackets: {clean}", roots.len()),
    );

    // suite 4: period matrix structure
    let g = p.pd.genus();
    let mut sym = 0.0f64;
    let mut re = 0.0f64;
    for i in 0..g {
        for j in 0..g {
            sym = sym.max((p.pd.tau[(i, j)] - p.pd.tau[(j, i)]).norm());
            re = re.max(p.pd.tau[(i, j)].re.abs());
        }
    }
    let dual = (p.pd.tau11 - p.pd.tau11_direct).norm();
    check(
        "suite 4 (period matrix)",
        sym < 1e-9 && re < 1e-9 && dual < 1e-8,
        format!("symmetry {sym:.2e}, Re {re:.2e}, dual {dual:.2e}"),
    );

    // suite 5: theta parity and the half-period zero
    let mut parity = 0.0f64;
    for k in 0..40 {
        let z = nalgebra::DVector::from_fn(g, |i, _| {
            Complex64::new(
                (0.11 * (k as f64 + i as f64)) % 1.0,
                (0.07 * (k as f64 - i as f64)) % 0.5,
            )
        });
        let a = p.theta.theta(&z);
        let b = p.theta.theta(&(-z));
        parity = parity.max((a - b).norm() / (1.0 + a.norm()));
    }
    let w0_zero = p.theta.theta(&p.ad.w0).norm();
    check(
        "suite 5 (theta)",
        parity < 1e-10 && w0_zero < 100.0 * config.theta_eps,
        format!("parity {parity:.2e}, Theta(W0) {w0_zero:.2e}"),
    );

    // suite 6: scalar jump relations at arc midpoints
    let mut worst = 0.0f64;
    for j in 1..=g + 1 {
        let (lo, hi) = p.pd.sys.main_arc(j);
        let mid = 0.5 * (lo + hi);
        let gp = fhtsvd::gfun::g_plus(&p.pd, mid);
        let target = if j == 1 || j == g + 1 { 1.0 } else { -1.0 };
        worst = worst.max((2.0 * gp.re - target).abs());
        let dp = fhtsvd::gfun::d_plus(&p.pd, &p.jd.delta, mid);
        worst = worst.max((2.0 * dp.re + p.pd.sys.weight_w_real(mid).ln()).abs());
    }
    check("suite 6 (jumps)", worst < 1e-6, format!("residual {worst:.2e}"));

    // suite 7: oracle structure
    let (op, spec) = build_oracle(&RunConfig {
        n_max: 8,
        ..config.clone()
    })?;
    let signs_ok = (0..=6).all(|n| spec.sign_changes(n) == n);
    let positive = spec.lambdas.iter().take(8).all(|&l| l > 0.0);
    check(
        "suite 7 (oracle)",
        signs_ok && positive,
        format!("sign counts {signs_ok}, positive {positive}"),
    );

    // suite 8: one eigenfunction overlap
    let kex: Vec<f64> = (1..spec.len()).map(|i| spec.kappa(i).unwrap()).collect();
    let all_roots = find_eigenvalues(&ctx, config.kappa_min, kex[kex.len() - 1] + 2.0 * period)?;
    let (shift, _) = optimal_shift(&kex, &all_roots);
    let n_probe = 6usize.min(kex.len());
    let r = (n_probe as i64 - 1) + shift;
    let overlap = if r >= 0 && (r as usize) < all_roots.len() {
        let kappa = all_roots[r as usize];
        let data = asymptotic_singular_functions(&ctx, kappa, &op.nodes_i, &[], 0.0)?;
        let fo = &spec.f_vectors[n_probe];
        let fa: Vec<f64> = data
            .f_samples
            .iter()
            .enumerate()
            .map(|(i, &(_, v))| v / op.w_of_i[i].sqrt())
            .collect();
        let mut dot = 0.0;
        let mut na = 0.0;
        let mut no = 0.0;
        for i in 0..fa.len() {
            dot += op.weights_i[i] * fa[i] * fo[i];
            na += op.weights_i[i] * fa[i] * fa[i];
            no += op.weights_i[i] * fo[i] * fo[i];
        }
        dot.abs() / (na * no).sqrt()
    } else {
        0.0
    };
    check(
        "suite 8 (eigenfunctions)",
        overlap >= 0.9,
        format!("overlap {overlap:.4} at index {n_probe}"),
    );

    // determinism: report commands twice into scratch directories
    let tmp_base = std::env::temp_dir().join(format!("fhtsvd-selftest-{}", std::process::id()));
    let mut deterministic = true;
    let mut detail = String::new();
    let mut reports = Vec::new();
    for round in 0..2 {
        let dir = tmp_base.join(format!("round{round}"));
        fs::create_dir_all(&dir)?;
        let sub = RunConfig {
            out: dir.clone(),
            n_max: 6,
            ..config.clone()
        };
        cmd_eigs(&sub)?;
        cmd_oracle(&sub)?;
        cmd_compare(&sub)?;
        reports.push((
            fs::read_to_string(dir.join("eigs.csv"))?,
            fs::read_to_string(dir.join("oracle.csv"))?,
            fs::read_to_string(dir.join("report.json"))?,
        ));
    }
    if reports[0].0 != reports[1].0 {
        deterministic = false;
        detail.push_str("eigs.csv differs; ");
    }
    if reports[0].1 != reports[1].1 {
        deterministic = false;
        detail.push_str("oracle.csv differs; ");
    }
    if strip_timestamps(&reports[0].2) != strip_timestamps(&reports[1].2) {
        deterministic = false;
        detail.push_str("report.json differs; ");
    }
    let _ = fs::remove_dir_all(&tmp_base);
    check(
        "determinism",
        deterministic,
        if detail.is_empty() {
            "byte-identical outputs modulo timestamp".into()
        } else {
            detail
        },
    );

    if failures == 0 {
        println!("selftest: all suites passed");
        Ok(0)
    } else {
        println!("selftest: {failures} suite(s) failed");
        Ok(1)
    }
}
