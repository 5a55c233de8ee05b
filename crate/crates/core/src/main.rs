use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use kobol_pricer::config::{fmt_sig, load_market, load_model, render_quote, OutputFormat};
use kobol_pricer::error::{PricerError, Result};
use kobol_pricer::kobol::FactorModel;
use kobol_pricer::lattice::{
    alias_budget, build_density_approximant, density_error_bound, density_truncation_bound,
    majorant_mt,
};
use kobol_pricer::oracle::{price_quadrature_1d, QuadCtrl};
use kobol_pricer::payoff::{payoff_l1_constant, DampingVector};
use kobol_pricer::pricer::{price_basket_call, MarketSpec, PriceCtrl, TermBudget};
use kobol_pricer::sparse::{
    build_ball, cardinality_estimate, effective_radius, enumerate, kappa_n, radius_for_budget,
    DEFAULT_CARDINALITY_CAP,
};
use kobol_pricer::{select_period, volume_aniso_unit_ball, KobolParams};

#[derive(Parser)]
#[command(
    name = "kobol-pricer",
    about = "Basket/spread option pricing under multivariate KoBoL Levy models",
    version
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,

    /// Worker threads for the summation kernels (default: machine parallelism)
    #[arg(long, global = true)]
    threads: Option<usize>,

    /// Output format: human | delimited | record
    #[arg(long, global = true, default_value = "human")]
    format: String,

    /// Write output to this file instead of stdout
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AccuracyArgs {
    /// Aliasing error target for period selection
    #[arg(long = "eps-alias", default_value_t = 1e-6)]
    eps_alias: f64,

    /// Term budget M (mutually exclusive with --radius)
    #[arg(long, conflicts_with = "radius")]
    terms: Option<f64>,

    /// Threshold radius R > 1 (mutually exclusive with --terms)
    #[arg(long)]
    radius: Option<f64>,
}

impl AccuracyArgs {
    fn budget(&self) -> Result<TermBudget> {
        match (self.terms, self.radius) {
            (Some(m), None) => Ok(TermBudget::Terms(m)),
            (None, Some(r)) => Ok(TermBudget::Radius(r)),
            (None, None) => Err(PricerError::Parse(
                "exactly one of --terms or --radius is required".into(),
            )),
            (Some(_), Some(_)) => unreachable!("clap conflicts_with"),
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Price a basket/spread call and print the quote with its error budget
    Price {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        market: PathBuf,
        #[command(flatten)]
        accuracy: AccuracyArgs,
        /// Damping override, comma-separated (e.g. "-2.3" or "-2.5,0.25")
        #[arg(long, allow_hyphen_values = true)]
        damping: Option<String>,
    },
    /// Tabulate the lattice density approximant on a grid
    Density {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        maturity: f64,
        /// Calibrate drifts to this risk-free rate before evaluating
        #[arg(long)]
        rate: Option<f64>,
        #[command(flatten)]
        accuracy: AccuracyArgs,
        /// Grid points along the first coordinate (other coordinates at 0)
        #[arg(long, default_value_t = 101)]
        grid: usize,
        /// Half-width of the tabulation interval (default min(5, P/2))
        #[arg(long)]
        span: Option<f64>,
        /// L_p norm for the aliasing bound in the header ("inf" or p >= 1)
        #[arg(long = "p-norm", default_value = "inf")]
        p_norm: String,
    },
    /// Print index-set diagnostics (cardinality, kappa_n, R <-> M)
    Indexset {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        maturity: f64,
        #[command(flatten)]
        accuracy: AccuracyArgs,
        /// Lattice period override (default: aliasing-driven selection)
        #[arg(long)]
        period: Option<u32>,
    },
    /// Compute the certified error budget for a pricing configuration
    Budget {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        market: PathBuf,
        #[command(flatten)]
        accuracy: AccuracyArgs,
        #[arg(long, allow_hyphen_values = true)]
        damping: Option<String>,
    },
    /// Run the built-in validation suite and print a pass/fail table
    Validate {
        /// Scope: quick (analytic checks) | all (adds an oracle comparison)
        #[arg(long, default_value = "all")]
        scope: String,
    },
}

fn parse_damping(text: &str) -> Result<Vec<f64>> {
    text.split(',')
        .map(|f| {
            f.trim()
                .parse::<f64>()
                .map_err(|e| PricerError::Parse(format!("bad damping component '{f}': {e}")))
        })
        .collect()
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| PricerError::Resource(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

/// Aliasing-driven period for undamped density work: symmetric contour at
/// the tube half-width in every coordinate.
fn density_period(model: &FactorModel, t: f64, eps_alias: f64) -> Result<(u32, f64, Vec<f64>)> {
    let tube = model.analytic_tube()?;
    let a = vec![tube.symmetric(); model.n];
    let ctrl = QuadCtrl::default();
    let m_t = majorant_mt(model, &tube, t, &ctrl)?;
    let budget = alias_budget(m_t, &a, eps_alias)?;
    Ok((budget.p, m_t, a))
}

fn cmd_price(
    model: &PathBuf,
    market: &PathBuf,
    accuracy: &AccuracyArgs,
    damping: &Option<String>,
    format: OutputFormat,
    out: &Option<PathBuf>,
) -> Result<()> {
    let model = load_model(model)?;
    let market = load_market(market)?;
    let mut ctrl = PriceCtrl::new(accuracy.eps_alias, accuracy.budget()?)?;
    if let Some(d) = damping {
        ctrl.damping = Some(parse_damping(d)?);
    }
    let quote = price_basket_call(&model, &market, &ctrl)?;
    emit(out, &render_quote(&quote, format)?)
}

#[allow(clippy::too_many_arguments)]
fn cmd_density(
    model: &PathBuf,
    maturity: f64,
    rate: Option<f64>,
    accuracy: &AccuracyArgs,
    grid: usize,
    span: Option<f64>,
    p_norm: &str,
    out: &Option<PathBuf>,
) -> Result<()> {
    let mut model = load_model(model)?;
    if let Some(r) = rate {
        model = model.calibrate_drift(r)?;
    }
    if !(maturity > 0.0) {
        return Err(PricerError::Parameter("maturity must be positive".into()));
    }
    if grid < 2 {
        return Err(PricerError::Parameter("grid needs at least 2 points".into()));
    }
    let p_norm: f64 = if p_norm == "inf" {
        f64::INFINITY
    } else {
        p_norm
            .parse()
            .map_err(|e| PricerError::Parse(format!("bad p-norm: {e}")))?
    };
    let t = maturity;
    let (p, m_t, _a) = density_period(&model, t, accuracy.eps_alias)?;
    let r = match accuracy.budget()? {
        TermBudget::Terms(m) => radius_for_budget(m, &model, t)?,
        TermBudget::Radius(r) => r,
    };
    let r_eff = effective_radius(&model, t, r)?;
    let ball = build_ball(&model, t, r_eff, p)?;
    let set = enumerate(&ball, DEFAULT_CARDINALITY_CAP)?;
    let approx = build_density_approximant(&model, t, p, &set)?;
    let budget = alias_budget(m_t, &vec![model.analytic_tube()?.symmetric(); model.n], accuracy.eps_alias)?;
    let alias_bound = density_error_bound(&budget, p_norm, model.n);
    let trunc_bound = density_truncation_bound(&model, t, p, &set)?;
    let half_span = span.unwrap_or((p as f64 / 2.0).min(5.0)).min(p as f64 / 2.0);

    let mut text = String::new();
    text.push_str(&format!(
        "# P={p} R={} terms={} eps_alias={} L_p_alias_bound={} truncation_bound={}\n",
        fmt_sig(r),
        set.len(),
        fmt_sig(accuracy.eps_alias),
        fmt_sig(alias_bound),
        fmt_sig(trunc_bound)
    ));
    text.push_str("x,density,imag_residual\n");
    let mut x = vec![0.0f64; model.n];
    for i in 0..grid {
        x[0] = -half_span + 2.0 * half_span * i as f64 / (grid - 1) as f64;
        let v = approx.eval(&x)?;
        text.push_str(&format!(
            "{},{},{}\n",
            fmt_sig(x[0]),
            fmt_sig(v.value),
            fmt_sig(v.imag_residual)
        ));
    }
    emit(out, &text)
}

fn cmd_indexset(
    model: &PathBuf,
    maturity: f64,
    accuracy: &AccuracyArgs,
    period: Option<u32>,
    out: &Option<PathBuf>,
) -> Result<()> {
    let model = load_model(model)?;
    let t = maturity;
    let p = match period {
        Some(p) => p,
        None => density_period(&model, t, accuracy.eps_alias)?.0,
    };
    let (r, m_requested) = match accuracy.budget()? {
        TermBudget::Terms(m) => (radius_for_budget(m, &model, t)?, m),
        TermBudget::Radius(r) => (r, cardinality_estimate(r, &model, t)?),
    };
    let r_eff = effective_radius(&model, t, r)?;
    let ball = build_ball(&model, t, r_eff, p)?;
    let set = enumerate(&ball, DEFAULT_CARDINALITY_CAP)?;
    let kappa = kappa_n(&model, t)?;
    let lattice_scale = (p as f64 / (2.0 * std::f64::consts::PI)).powi(model.n as i32);
    let predicted = cardinality_estimate(r_eff, &model, t)? * lattice_scale;
    let round_trip = radius_for_budget(m_requested, &model, t)?;

    let mut text = String::new();
    text.push_str(&format!(
        "# P={p} R={} R_eff={} kappa_n={} M_requested={} M_predicted_lattice={} M_actual={} R_roundtrip={}\n",
        fmt_sig(r),
        fmt_sig(r_eff),
        fmt_sig(kappa),
        fmt_sig(m_requested),
        fmt_sig(predicted),
        set.len(),
        fmt_sig(round_trip)
    ));
    text.push_str(&set.export());
    emit(out, &text)
}

fn cmd_budget(
    model: &PathBuf,
    market: &PathBuf,
    accuracy: &AccuracyArgs,
    damping: &Option<String>,
    format: OutputFormat,
    out: &Option<PathBuf>,
) -> Result<()> {
    // the budget is a by-product of the full pipeline: run it and report
    // only the certified decomposition plus diagnostics
    let model = load_model(model)?;
    let market = load_market(market)?;
    let mut ctrl = PriceCtrl::new(accuracy.eps_alias, accuracy.budget()?)?;
    if let Some(d) = damping {
        ctrl.damping = Some(parse_damping(d)?);
    }
    let quote = price_basket_call(&model, &market, &ctrl)?;
    let b = &quote.budget;
    let d = &quote.diagnostics;
    let text = match format {
        OutputFormat::Record => toml::to_string(b)
            .map_err(|e| PricerError::Parse(format!("serialization failed: {e}")))?,
        _ => format!(
            "alias,truncation,tail,l_eps,total,p,r,m_terms\n{},{},{},{},{},{},{},{}\n",
            fmt_sig(b.alias),
            fmt_sig(b.truncation),
            fmt_sig(b.tail),
            fmt_sig(b.l_eps),
            fmt_sig(b.total),
            d.p,
            fmt_sig(d.r),
            d.m_terms
        ),
    };
    emit(out, &text)
}

struct Check {
    name: &'static str,
    tolerance: f64,
    error: f64,
}

fn cmd_validate(scope: &str, out: &Option<PathBuf>) -> Result<()> {
    let mut checks: Vec<Check> = Vec::new();
    let pinned = KobolParams::new(0.5, 1.0, 1.0, 8.0, -4.0, 0.0)?;

    let psi = pinned.psi(Complex64::new(1.0, 0.0))?;
    let psi_ref = Complex64::new(0.07382969339963895532, -0.25404448596594977520);
    checks.push(Check {
        name: "kobol exponent at xi=1",
        tolerance: 1e-14,
        error: (psi - psi_ref).norm(),
    });

    let g = kobol_pricer::gamma::log_gamma(Complex64::new(0.0, 1.0))?.exp().norm();
    checks.push(Check {
        name: "|Gamma(i)|",
        tolerance: 1e-14,
        error: (g - 0.52156404686493984116).abs(),
    });

    let l2 = payoff_l1_constant(&DampingVector::new(vec![-2.0])?)?;
    let l3 = payoff_l1_constant(&DampingVector::new(vec![-3.0])?)?;
    let l35 = payoff_l1_constant(&DampingVector::new(vec![-3.5, 1.0])?)?;
    checks.push(Check {
        name: "payoff L1 constants",
        tolerance: 1e-10,
        error: (l2 - 0.5)
            .abs()
            .max((l3 - 1.0 / 6.0).abs())
            .max((l35 - 8.0 / 105.0).abs()),
    });

    let vol = volume_aniso_unit_ball(&[0.5, 0.5])?;
    checks.push(Check {
        name: "anisotropic ball volume nu=(1/2,1/2)",
        tolerance: 1e-12,
        error: (vol - 2.0 / 3.0).abs(),
    });

    let p_sel = select_period(1.0, &[2.0], 1e-8)?;
    checks.push(Check {
        name: "period selection example",
        tolerance: 0.0,
        error: (p_sel as f64 - 11.0).abs(),
    });

    let model = FactorModel::single(pinned, 0.9)?;
    let once = model.calibrate_drift(0.03)?;
    let twice = once.calibrate_drift(0.03)?;
    checks.push(Check {
        name: "drift calibration idempotence",
        tolerance: 1e-14,
        error: (once.idio[0].mu - twice.idio[0].mu).abs(),
    });

    if scope == "all" {
        let market = MarketSpec::new(vec![100.0], 100.0, 0.03, 0.5)?;
        let ctrl = PriceCtrl::new(1e-7, TermBudget::Radius(2.5e3))?;
        let quote = price_basket_call(&once, &market, &ctrl)?;
        let oracle = price_quadrature_1d(&once, &market, quote.diagnostics.eps[0], &QuadCtrl::default())?;
        checks.push(Check {
            name: "lattice vs quadrature, pinned 1D model",
            tolerance: 1e-5 * oracle.abs(),
            error: (quote.value - oracle).abs(),
        });
    } else if scope != "quick" {
        return Err(PricerError::Parse(format!(
            "unknown scope '{scope}' (expected quick | all)"
        )));
    }

    let mut text = String::from("check,tolerance,error,status\n");
    let mut failed = false;
    for c in &checks {
        let ok = c.error <= c.tolerance;
        failed |= !ok;
        text.push_str(&format!(
            "{},{},{},{}\n",
            c.name,
            fmt_sig(c.tolerance),
            fmt_sig(c.error),
            if ok { "pass" } else { "FAIL" }
        ));
    }
    emit(out, &text)?;
    if failed {
        return Err(PricerError::Accuracy("validation suite failed".into()));
    }
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| PricerError::Resource(format!("thread pool: {e}")))?;
    }
    let format: OutputFormat = cli.format.parse()?;
    match &cli.cmd {
        Cmd::Price {
            model,
            market,
            accuracy,
            damping,
        } => cmd_price(model, market, accuracy, damping, format, &cli.out),
        Cmd::Density {
            model,
            maturity,
            rate,
            accuracy,
            grid,
            span,
            p_norm,
        } => cmd_density(
            model, *maturity, *rate, accuracy, *grid, *span, p_norm, &cli.out,
        ),
        Cmd::Indexset {
            model,
            maturity,
            accuracy,
            period,
        } => cmd_indexset(model, *maturity, accuracy, *period, &cli.out),
        Cmd::Budget {
            model,
            market,
            accuracy,
            damping,
        } => cmd_budget(model, market, accuracy, damping, format, &cli.out),
        Cmd::Validate { scope } => cmd_validate(scope, &cli.out),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
