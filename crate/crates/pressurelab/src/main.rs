//! Command-line front end: system checks, pressure curves, cylinder
//! tables, spectra, sampling, built-in demos, and SVG plots.
//!
//! Exit codes: 0 success, 1 usage or parse error, 2 failed mathematical
//! precondition (including a non-primitive transition matrix), 3 size
//! guard.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use pressurelab::config::SystemConfig;
use pressurelab::demos::{closed_form_curve, ex36_norm_ratio, Demo};
use pressurelab::numeric::fmt12;
use pressurelab::{gibbs, lift, multifractal, pressure, svg};
use pressurelab::{Error, EvalOptions, MatrixFamily, PressureEvaluator};

#[derive(Parser)]
#[command(
    name = "pressurelab",
    version,
    about = "Pressure functions and Gibbs diagnostics for products of non-negative matrices"
)]
struct Cli {
    /// Worker threads (overrides PRESSURELAB_THREADS; output is identical
    /// for any value)
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Validate a system: primitivity, bridging irreducibility, positivity,
    /// zero-product census
    Check {
        #[arg(long)]
        config: PathBuf,
    },
    /// Pressure curve over a q grid, written as CSV
    Pressure {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        qmin: f64,
        #[arg(long)]
        qmax: f64,
        #[arg(long)]
        qstep: f64,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        out: PathBuf,
    },
    /// Cylinder weight table (marginalized when N > n), written as CSV
    Gibbs {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long = "N")]
        source_level: usize,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Dimension spectrum over a q grid, written as CSV
    Spectrum {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        qmin: f64,
        #[arg(long)]
        qmax: f64,
        #[arg(long)]
        qstep: f64,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0.05)]
        h: f64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Seeded exact sampling from a level table
    Sample {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        n: usize,
        #[arg(long)]
        q: f64,
        #[arg(long)]
        count: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a built-in demo pipeline end to end
    Demo {
        /// One of: ex35, ex36, golden, scalar, goldenmean_sft
        name: String,
    },
    /// Render a pressure CSV as a standalone SVG
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let opts = EvalOptions::with_threads(resolve_threads(cli.threads));
    match run(cli.command, &opts) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn resolve_threads(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("PRESSURELAB_THREADS")
            .ok()
            .and_then(|s| s.parse::<usize>().ok())
    })
    .unwrap_or(1)
    .max(1)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::Input(_) | Error::Io(_) => 1,
        Error::SizeGuard(_) => 3,
        _ => 2,
    }
}

fn load_family(path: &Path) -> Result<MatrixFamily, Error> {
    let cfg = SystemConfig::load(path)?;
    let (_, family) = cfg.build()?;
    Ok(family)
}

fn make_grid(qmin: f64, qmax: f64, qstep: f64) -> Result<Vec<f64>, Error> {
    if !qstep.is_finite() || qstep <= 0.0 {
        return Err(Error::Input(format!("qstep {qstep} must be positive")));
    }
    if qmax < qmin {
        return Err(Error::Input(format!("qmax {qmax} below qmin {qmin}")));
    }
    let mut grid = Vec::new();
    let mut i = 0usize;
    loop {
        let q = qmin + i as f64 * qstep;
        if q > qmax + 1e-9 * qstep {
            break;
        }
        grid.push(q);
        i += 1;
    }
    Ok(grid)
}

fn write_text(path: &Path, text: &str) -> Result<(), Error> {
    std::fs::write(path, text)?;
    Ok(())
}

fn run(cmd: Command, opts: &EvalOptions) -> Result<u8, Error> {
    match cmd {
        Command::Check { config } => {
            let family = load_family(&config)?;
            run_check(&family, opts)
        }
        Command::Pressure {
            config,
            qmin,
            qmax,
            qstep,
            n,
            out,
        } => {
            let family = load_family(&config)?;
            let grid = make_grid(qmin, qmax, qstep)?;
            let csv = pressure_csv_with_oracle(&family, &grid, n, opts)?;
            write_text(&out, &csv)?;
            println!("wrote {} rows to {}", grid.len(), out.display());
            Ok(0)
        }
        Command::Gibbs {
            config,
            n,
            source_level,
            q,
            out,
        } => {
            let family = load_family(&config)?;
            let table = if source_level == n {
                gibbs::level_weights(&family, n, q, None, opts)?
            } else {
                gibbs::marginal_weights(&family, n, source_level, q, opts)?
            };
            write_text(&out, &gibbs::table_to_csv(&table))?;
            println!(
                "wrote {} cylinder weights to {}",
                table.len(),
                out.display()
            );
            Ok(0)
        }
        Command::Spectrum {
            config,
            qmin,
            qmax,
            qstep,
            n,
            h,
            out,
        } => {
            let family = load_family(&config)?;
            let mut grid = make_grid(qmin, qmax, qstep)?;
            if !family.positive_mode() {
                let before = grid.len();
                grid.retain(|&q| q > 0.0);
                if grid.len() < before {
                    eprintln!(
                        "note: clipped {} grid points to q > 0 (family is not entrywise positive)",
                        before - grid.len()
                    );
                }
            }
            let before = grid.len();
            grid.retain(|&q| q.abs() >= 1e-9);
            if grid.len() < before {
                eprintln!("note: dropped q = 0 (no derivative contract there)");
            }
            if grid.is_empty() {
                return Err(Error::Input("spectrum grid is empty after clipping".into()));
            }
            let eval = PressureEvaluator::new(&family, n, opts)?;
            let f = |q: f64| eval.estimate(q);
            let points = multifractal::dimension_spectrum(&f, &grid, h, family.spec().m())?;
            write_text(&out, &multifractal::spectrum_to_csv(&points))?;
            println!(
                "wrote {} spectrum points to {}",
                points.len(),
                out.display()
            );
            Ok(0)
        }
        Command::Sample {
            config,
            n,
            q,
            count,
            seed,
            out,
        } => {
            let family = load_family(&config)?;
            let words = gibbs::sample_words(&family, n, q, count, seed, opts)?;
            let mut text = String::from("word\n");
            for w in &words {
                text.push_str(&format!("{w}\n"));
            }
            write_text(&out, &text)?;
            println!("wrote {count} samples to {}", out.display());
            Ok(0)
        }
        Command::Demo { name } => {
            let demo = Demo::parse(&name)?;
            run_demo(demo, opts)
        }
        Command::Plot { csv, out } => {
            let text = std::fs::read_to_string(&csv)
                .map_err(|e| Error::Input(format!("cannot read {}: {e}", csv.display())))?;
            let rendered = svg::render_plot(&text)?;
            write_text(&out, &rendered)?;
            println!("wrote plot to {}", out.display());
            Ok(0)
        }
    }
}

fn run_check(family: &MatrixFamily, opts: &EvalOptions) -> Result<u8, Error> {
    let spec = family.spec();
    println!(
        "system: m={}, {}, d={}, depth={}, positive mode: {}",
        spec.m(),
        if spec.is_full_shift() {
            "full shift"
        } else {
            "subshift of finite type"
        },
        family.d(),
        family.depth(),
        if family.positive_mode() { "yes" } else { "no" }
    );
    let (primitive, p) = spec.is_primitive();
    match p {
        Some(p) => println!("primitive: yes (p={p})"),
        None => println!("primitive: NO (no power of the transition matrix is positive)"),
    }
    if family.depth() == 1 {
        let w = family.check_h2(family.default_h2_horizon())?;
        if w.satisfied {
            println!(
                "bridging (H2): satisfied at r={} with b={}",
                w.r,
                fmt12(w.b)
            );
        } else {
            println!("bridging (H2): NOT satisfied up to r={}", w.r);
        }
    } else {
        println!("bridging (H2): n/a for depth > 1");
    }
    println!("zero-product census:");
    for n in 1..=6usize {
        if spec.word_count(n)? > 1_000_000 {
            println!("  n={n}: skipped (too many words)");
            continue;
        }
        match pressure::build_norm_cache(family, n, opts) {
            Ok(cache) => {
                println!(
                    "  n={n}: {} of {} products vanish",
                    cache.zero_words, cache.total_words
                )
            }
            Err(Error::SizeGuard(_)) => println!("  n={n}: skipped (budget)"),
            Err(e) => return Err(e),
        }
    }
    Ok(if primitive { 0 } else { 2 })
}

/// Curve CSV with an extra `discrepancy` column: at positive integer grid
/// points that fit the lift guard, the absolute gap between the enumeration
/// estimate and the spectral oracle.
fn pressure_csv_with_oracle(
    family: &MatrixFamily,
    grid: &[f64],
    n: usize,
    opts: &EvalOptions,
) -> Result<String, Error> {
    let curve = pressure::pressure_curve(family, grid, n, opts)?;
    let mut s = String::from("q,n,estimate,lower,upper,method,discrepancy\n");
    for r in &curve {
        let mut discrepancy = String::new();
        let rounded = r.q.round();
        if (r.q - rounded).abs() < 1e-9 && rounded >= 1.0 && family.depth() == 1 {
            match lift::pressure_exact_integer(family, rounded as u32) {
                Ok(oracle) => discrepancy = fmt12((r.estimate - oracle.estimate).abs()),
                Err(Error::SizeGuard(_)) => {}
                Err(e) => return Err(e),
            }
        }
        s.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            fmt12(r.q),
            r.n_used,
            fmt12(r.estimate),
            r.lower.map(fmt12).unwrap_or_default(),
            r.upper.map(fmt12).unwrap_or_default(),
            r.method.as_str(),
            discrepancy
        ));
    }
    Ok(s)
}

fn run_demo(demo: Demo, opts: &EvalOptions) -> Result<u8, Error> {
    println!("== demo {} ==", demo.name());
    let family = demo.family();
    run_check(&family, opts)?;
    match demo {
        Demo::Ex35 => {
            let eval = PressureEvaluator::new(&family, 20, opts)?;
            println!("pressure estimates at n=20 against the closed form:");
            for q in [0.5, 1.0, 1.5, 2.0, 3.0] {
                let est = eval.estimate(q);
                let exact = pressurelab::demos::ex35_pressure(q);
                println!(
                    "  q={q}: estimate={} exact={} |err|={:.2e}",
                    fmt12(est),
                    fmt12(exact),
                    (est - exact).abs()
                );
            }
            for q in [1.0, 2.0] {
                let oracle = lift::pressure_exact_integer(&family, q as u32)?;
                println!("  integer oracle q={q}: {}", fmt12(oracle.estimate));
            }
            let grid = make_grid(0.5, 1.5, 0.05)?;
            let closed = closed_form_curve(pressurelab::demos::ex35_pressure, &grid);
            let kinks = pressure::detect_kink(&closed, 0.05)?;
            for k in &kinks {
                println!(
                    "closed-form kink at q={:.2}: slopes {:.4} -> {:.4} (jump {:.4})",
                    k.q,
                    k.left_slope,
                    k.right_slope,
                    k.jump()
                );
            }
            let enum_kinks =
                pressure::detect_kink(&pressure::pressure_curve(&family, &grid, 20, opts)?, 0.05)?;
            println!(
                "finite-level curve at n=20: {} kink(s) above threshold 0.05 (finite-level smoothing)",
                enum_kinks.len()
            );
        }
        Demo::Ex36 => {
            println!("norm decay law ‖M₁^(2n)‖ / ‖M₁ⁿ‖² (exact integers):");
            for n in 1..=12u32 {
                let (num, den) = ex36_norm_ratio(n);
                println!("  n={n}: {num}/{den} = {:.6}", num as f64 / den as f64);
            }
            let (upper, lower) = gibbs::quasi_bernoulli_diagnostics(&family, 2, 2, 10, 1.0, opts)?;
            println!(
                "quasi-Bernoulli extremes at (n=2, l=2, N=10, q=1): upper={:.4} lower={:.4}",
                upper.max_ratio, lower.min_ratio
            );
        }
        Demo::Golden => {
            let w = family.check_h2(family.default_h2_horizon())?;
            println!("witness: r={}, b={}", w.r, fmt12(w.b));
            let eval = PressureEvaluator::new(&family, 14, opts)?;
            for q in [0.5, 1.0, 2.0, 3.0] {
                let r = eval.result(q);
                println!(
                    "  q={q}: estimate={} bracket=[{}, {}]",
                    fmt12(r.estimate),
                    r.lower.map(fmt12).unwrap_or_default(),
                    r.upper.map(fmt12).unwrap_or_default()
                );
            }
            let grid = make_grid(0.5, 3.0, 0.05)?;
            let curve: Vec<_> = grid.iter().map(|&q| eval.result(q)).collect();
            let kinks = pressure::detect_kink(&curve, 0.05)?;
            println!("kinks above 0.05 on [0.5, 3]: {}", kinks.len());
            let p_hat = eval.estimate(1.0);
            let d4 = gibbs::gibbs_ratio_diagnostics(&family, 4, 12, 1.0, p_hat, opts)?;
            let d6 = gibbs::gibbs_ratio_diagnostics(&family, 6, 12, 1.0, p_hat, opts)?;
            println!(
                "gibbs ratio spread: n=4 -> {:.6}, n=6 -> {:.6}",
                d4.spread(),
                d6.spread()
            );
            let words = gibbs::sample_words(&family, 14, 1.0, 10_000, 27, opts)?;
            let st = gibbs::empirical_lyapunov(&family, &words)?;
            let f = |q: f64| eval.estimate(q);
            let dp = multifractal::pressure_derivative(&f, 1.0, 0.05);
            println!(
                "growth-rate concentration: sample mean={:.6} (sd {:.6}), P'(1)={:.6}",
                st.mean, st.stddev, dp
            );
        }
        Demo::Scalar => {
            for n in [6usize, 10] {
                let eval = PressureEvaluator::new(&family, n, opts)?;
                for q in [-1.0, 0.5, 2.0] {
                    println!(
                        "  n={n} q={q}: estimate={} (log 2 = {})",
                        fmt12(eval.estimate(q)),
                        fmt12(2.0f64.ln())
                    );
                }
            }
        }
        Demo::GoldenmeanSft => {
            let oracle = lift::pressure_exact_integer(&family, 1)?;
            let eval = PressureEvaluator::new(&family, 20, opts)?;
            let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
            println!(
                "golden-mean shift: oracle={} enumeration={} log φ={}",
                fmt12(oracle.estimate),
                fmt12(eval.estimate(1.0)),
                fmt12(phi.ln())
            );
        }
    }
    Ok(0)
}
