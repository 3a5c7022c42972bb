//! Command-line surface. All numerics live in the library; this layer maps
//! flags onto library calls and results onto rows, one row per sweep point,
//! serialized in input order regardless of worker count.
//!
//! Exit codes: 0 success, 2 usage or validation failure, 3 numerical
//! failure (a solver or property check that could not deliver).

mod output;

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use mimo_uplink::dof::{
    default_dof_grid, dof_slope_estimate, dof_total, geometric_grid, DofScheme, McConfig,
};
use mimo_uplink::mc::empirical_rate_with_trials;
use mimo_uplink::model::{effective_snr, rate_mrc, rate_zf};
use mimo_uplink::power::power_sweep;
use mimo_uplink::selftest::run_selftest;
use mimo_uplink::split::{optimal_split_closed_form, optimal_split_grid, GRID_RESOLUTION};
use mimo_uplink::{EnergySplit, Error, Receiver, Result, SystemParams};

use output::{power_in, power_out, power_out_opt, Emitter};

#[derive(Parser)]
#[command(
    name = "mimo-uplink",
    version,
    about = "Pilot-trained multiuser MIMO uplink: energy splits, rate bounds, \
             DoF slopes, power scaling, and the Monte Carlo checks behind them",
    after_help = "Powers are linear unless --db is given. Monte Carlo commands \
                  are bit-reproducible for a fixed --seed, independent of \
                  --threads. The exact power solver bisects P in [1e-12, 1e6] \
                  to a 1e-9 relative rate tolerance."
)]
struct Cli {
    #[command(flatten)]
    global: GlobalOpts,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct GlobalOpts {
    /// Write rows to FILE instead of stdout
    #[arg(long, global = true, value_name = "FILE")]
    out: Option<PathBuf>,
    /// Emit JSON-lines instead of CSV
    #[arg(long, global = true)]
    json: bool,
    /// Powers in dB on input and output (applies to P, P_d and solved P;
    /// energies, SNRs and rates stay linear)
    #[arg(long, global = true)]
    db: bool,
    /// Worker threads (default: MIMO_UPLINK_THREADS, else all cores)
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Optimal training/data energy split: closed form against the grid oracle
    Split {
        /// Per-user average transmit power
        #[arg(long, allow_hyphen_values = true)]
        p: f64,
        /// Coherence interval in symbols
        #[arg(long)]
        t: u32,
        /// Number of users
        #[arg(long)]
        k: u32,
        /// Grid-oracle step in alpha, at most 1e-4
        #[arg(long, default_value_t = GRID_RESOLUTION)]
        resolution: f64,
    },
    /// Sweep one parameter and tabulate rate bounds, optionally with
    /// Monte Carlo rates alongside
    Rates {
        /// Swept parameter
        #[arg(long, value_enum)]
        axis: Axis,
        /// Explicit sweep values, comma separated, strictly increasing
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        values: Option<Vec<f64>>,
        /// Geometric sweep START:STOP:POINTS
        #[arg(long, value_name = "START:STOP:POINTS", conflicts_with = "values")]
        geom: Option<String>,
        /// Antennas (fixed; required unless swept)
        #[arg(long)]
        m: Option<u32>,
        /// Users (fixed; required unless swept)
        #[arg(long)]
        k: Option<u32>,
        /// Coherence interval (fixed; required unless swept)
        #[arg(long)]
        t: Option<u32>,
        /// Per-user power (fixed; required unless swept)
        #[arg(long, allow_hyphen_values = true)]
        p: Option<f64>,
        /// Fixed training fraction in [0, 1]; default is the closed-form
        /// optimum at each point
        #[arg(long)]
        alpha: Option<f64>,
        /// Receiver for the empirical columns: mrc, zf or mmse
        #[arg(long, default_value = "mmse")]
        receiver: String,
        /// Add Monte Carlo rate and standard-error columns
        #[arg(long)]
        empirical: bool,
        /// Trials per point for --empirical
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        /// Master seed for --empirical
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Degrees of freedom: K*, the characterization value, and a measured
    /// high-SNR rate slope
    Dof {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        t: u32,
        /// Rate curve to regress: zf, mrc or mac
        #[arg(long, default_value = "zf")]
        scheme: String,
        /// Power grid START:STOP:POINTS (default 1024:2^30:21)
        #[arg(long, value_name = "START:STOP:POINTS")]
        grid: Option<String>,
        /// Trials per grid point (mac scheme only)
        #[arg(long, default_value_t = 10_000)]
        trials: u64,
        /// Master seed (mac scheme only)
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Power needed for a target per-user rate across antenna counts:
    /// asymptotic 1/sqrt(M) law against the exact bisection solve
    Power {
        /// Target per-user rate in bits/channel use
        #[arg(long, allow_hyphen_values = true)]
        r: f64,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        t: u32,
        /// mrc or zf
        #[arg(long, default_value = "mrc")]
        receiver: String,
        /// Antenna counts, comma separated, strictly increasing, all > K
        #[arg(long, value_delimiter = ',', value_name = "M1,M2,...")]
        m_values: Vec<u32>,
    },
    /// Monte Carlo ergodic rate for one configuration, with optional
    /// per-trial records
    Simulate {
        #[arg(long)]
        m: u32,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        t: u32,
        #[arg(long, allow_hyphen_values = true)]
        p: f64,
        /// Training fraction in [0, 1]; default: grid-oracle optimum
        #[arg(long)]
        alpha: Option<f64>,
        /// mrc, zf or mmse
        #[arg(long, default_value = "zf")]
        receiver: String,
        #[arg(long, default_value_t = 1000)]
        trials: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Also write one record per trial to FILE
        #[arg(long, value_name = "FILE")]
        per_trial_out: Option<PathBuf>,
    },
    /// Fast property suite (closed-form identities plus small Monte Carlo
    /// cross-checks) for CI smoke testing
    Selftest,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Axis {
    P,
    M,
    T,
    K,
    Alpha,
}

impl Axis {
    fn name(self) -> &'static str {
        match self {
            Axis::P => "p",
            Axis::M => "m",
            Axis::T => "t",
            Axis::K => "k",
            Axis::Alpha => "alpha",
        }
    }
}

pub fn run() -> i32 {
    let cli = Cli::parse();
    if let Err(err) = init_threads(cli.global.threads) {
        eprintln!("error: {err}");
        return 2;
    }
    match execute(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            match err {
                Error::Domain(_) => 2,
                Error::Numerical(_) => 3,
            }
        }
    }
}

fn init_threads(flag: Option<usize>) -> Result<()> {
    let n = match flag {
        Some(n) => Some(n),
        None => match std::env::var("MIMO_UPLINK_THREADS") {
            Ok(s) => Some(s.parse().map_err(|_| {
                Error::domain(format!(
                    "MIMO_UPLINK_THREADS must be a thread count (got {s:?})"
                ))
            })?),
            Err(_) => None,
        },
    };
    if let Some(n) = n {
        if n == 0 {
            return Err(Error::domain("thread count must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Error::domain(format!("thread pool setup failed: {e}")))?;
    }
    Ok(())
}

fn execute(cli: Cli) -> Result<i32> {
    let g = &cli.global;
    let mut emitter = Emitter::new(g.out.as_deref(), g.json)?;
    let code = match cli.command {
        Command::Split {
            p,
            t,
            k,
            resolution,
        } => cmd_split(&mut emitter, g.db, p, t, k, resolution)?,
        Command::Rates {
            axis,
            values,
            geom,
            m,
            k,
            t,
            p,
            alpha,
            receiver,
            empirical,
            trials,
            seed,
        } => {
            let spec = RatesSpec {
                axis,
                values,
                geom,
                m,
                k,
                t,
                p,
                alpha,
                receiver,
                empirical,
                trials,
                seed,
            };
            cmd_rates(&mut emitter, g.db, spec)?
        }
        Command::Dof {
            m,
            k,
            t,
            scheme,
            grid,
            trials,
            seed,
        } => cmd_dof(
            &mut emitter,
            g.db,
            m,
            k,
            t,
            &scheme,
            grid.as_deref(),
            trials,
            seed,
        )?,
        Command::Power {
            r,
            k,
            t,
            receiver,
            m_values,
        } => cmd_power(&mut emitter, g.db, r, k, t, &receiver, &m_values)?,
        Command::Simulate {
            m,
            k,
            t,
            p,
            alpha,
            receiver,
            trials,
            seed,
            per_trial_out,
        } => cmd_simulate(
            &mut emitter,
            g,
            m,
            k,
            t,
            p,
            alpha,
            &receiver,
            trials,
            seed,
            per_trial_out.as_deref(),
        )?,
        Command::Selftest => cmd_selftest(&mut emitter)?,
    };
    emitter.finish()?;
    Ok(code)
}

#[derive(Serialize)]
struct SplitRow {
    p: f64,
    t: u32,
    k: u32,
    alpha_train: f64,
    e: f64,
    p_d: Option<f64>,
    rho_star: f64,
    alpha_train_grid: f64,
    rho_star_grid: f64,
    rel_diff: f64,
}

fn cmd_split(
    emitter: &mut Emitter,
    db: bool,
    p: f64,
    t: u32,
    k: u32,
    resolution: f64,
) -> Result<i32> {
    let p_lin = power_in(p, db);
    let closed = optimal_split_closed_form(p_lin, t, k)?;
    let grid = optimal_split_grid(p_lin, t, k, resolution)?;
    emitter.emit(&SplitRow {
        p,
        t,
        k,
        alpha_train: closed.alpha_train,
        e: closed.e,
        p_d: power_out(closed.p_d, db),
        rho_star: closed.rho_star,
        alpha_train_grid: grid.alpha_train,
        rho_star_grid: grid.rho_star,
        rel_diff: (closed.rho_star - grid.rho_star).abs() / grid.rho_star,
    })?;
    Ok(0)
}

struct RatesSpec {
    axis: Axis,
    values: Option<Vec<f64>>,
    geom: Option<String>,
    m: Option<u32>,
    k: Option<u32>,
    t: Option<u32>,
    p: Option<f64>,
    alpha: Option<f64>,
    receiver: String,
    empirical: bool,
    trials: u64,
    seed: u64,
}

#[derive(Serialize)]
struct RatesRow {
    axis: &'static str,
    m: u32,
    k: u32,
    t: u32,
    p: f64,
    alpha_train: Option<f64>,
    e: Option<f64>,
    p_d: Option<f64>,
    rho: Option<f64>,
    rate_mrc: Option<f64>,
    rate_zf: Option<f64>,
    receiver: Receiver,
    emp_rate: Option<f64>,
    emp_std_error: Option<f64>,
    resamples: Option<u64>,
}

fn cmd_rates(emitter: &mut Emitter, db: bool, spec: RatesSpec) -> Result<i32> {
    let receiver = Receiver::from_str(&spec.receiver)?;
    if spec.empirical && spec.trials < 100 {
        return Err(Error::domain(format!(
            "at least 100 trials required for a meaningful standard error (trials={})",
            spec.trials
        )));
    }
    let sweep = sweep_values(&spec)?;

    let fixed = |opt: Option<u32>, name: &str| {
        opt.ok_or_else(|| Error::domain(format!("--{name} is required when it is not the axis")))
    };
    for raw in sweep {
        // Per-point coordinates; the swept one comes from the list.
        let m = if spec.axis == Axis::M {
            int_value(raw, "m")?
        } else {
            fixed(spec.m, "m")?
        };
        let k = if spec.axis == Axis::K {
            int_value(raw, "k")?
        } else {
            fixed(spec.k, "k")?
        };
        let t = if spec.axis == Axis::T {
            int_value(raw, "t")?
        } else {
            fixed(spec.t, "t")?
        };
        let (p_echo, alpha_req) = match spec.axis {
            Axis::P => (raw, spec.alpha),
            Axis::Alpha => (
                spec.p
                    .ok_or_else(|| Error::domain("--p is required when it is not the axis"))?,
                Some(raw),
            ),
            _ => (
                spec.p
                    .ok_or_else(|| Error::domain("--p is required when it is not the axis"))?,
                spec.alpha,
            ),
        };
        let p_lin = power_in(p_echo, db);

        // One fallible block per point: any constraint violation empties the
        // derived cells but keeps the row.
        let split = match alpha_req {
            Some(alpha) => EnergySplit::from_alpha(p_lin, t, k, alpha),
            None => optimal_split_closed_form(p_lin, t, k).map(|s| s.energy_split()),
        };
        let mut row = RatesRow {
            axis: spec.axis.name(),
            m,
            k,
            t,
            p: p_echo,
            alpha_train: None,
            e: None,
            p_d: None,
            rho: None,
            rate_mrc: None,
            rate_zf: None,
            receiver,
            emp_rate: None,
            emp_std_error: None,
            resamples: None,
        };
        if let Ok(split) = split {
            row.alpha_train = Some(split.alpha_train);
            row.e = Some(split.e);
            row.p_d = power_out_opt(Some(split.p_d), db);
            let rho = effective_snr(split.p_d, split.e, k).rho;
            row.rho = Some(rho);
            row.rate_mrc = rate_mrc(rho, m, k, t).ok().map(|r| r.per_user_rate);
            row.rate_zf = rate_zf(rho, m, k, t).ok().map(|r| r.per_user_rate);
            if spec.empirical {
                let emp = SystemParams::new(m, k, t, p_lin).and_then(|params| {
                    empirical_rate_with_trials(receiver, &params, &split, spec.trials, spec.seed)
                });
                if let Ok((rate, _)) = emp {
                    row.emp_rate = Some(rate.mean_per_user_rate);
                    row.emp_std_error = Some(rate.std_error);
                    row.resamples = Some(rate.resamples);
                }
            }
        }
        emitter.emit(&row)?;
    }
    Ok(0)
}

fn sweep_values(spec: &RatesSpec) -> Result<Vec<f64>> {
    let values = match (&spec.values, &spec.geom) {
        (Some(v), None) => v.clone(),
        (None, Some(g)) => {
            let (start, stop, points) = parse_geom(g)?;
            geometric_grid(start, stop, points)?
        }
        _ => {
            return Err(Error::domain(
                "exactly one of --values or --geom is required",
            ))
        }
    };
    if values.is_empty() {
        return Err(Error::domain("sweep needs at least one value"));
    }
    if !values.windows(2).all(|w| w[0] < w[1]) {
        return Err(Error::domain("sweep values must be strictly increasing"));
    }
    if spec.axis == Axis::Alpha {
        if spec.alpha.is_some() {
            return Err(Error::domain(
                "--alpha cannot be fixed while it is the axis",
            ));
        }
        if values.iter().any(|&a| !(0.0..=1.0).contains(&a)) {
            return Err(Error::domain("alpha sweep values must lie in [0, 1]"));
        }
    }
    let clash = match spec.axis {
        Axis::P => spec.p.is_some(),
        Axis::M => spec.m.is_some(),
        Axis::T => spec.t.is_some(),
        Axis::K => spec.k.is_some(),
        Axis::Alpha => false,
    };
    if clash {
        return Err(Error::domain(format!(
            "--{} is the axis; its values come from --values/--geom",
            spec.axis.name()
        )));
    }
    Ok(values)
}

fn int_value(x: f64, what: &str) -> Result<u32> {
    if x.fract() != 0.0 || !(1.0..=u32::MAX as f64).contains(&x) {
        return Err(Error::domain(format!(
            "{what} sweep values must be positive integers (got {x})"
        )));
    }
    Ok(x as u32)
}

fn parse_geom(s: &str) -> Result<(f64, f64, u32)> {
    let parts: Vec<&str> = s.split(':').collect();
    let bad = || Error::domain(format!("--geom wants START:STOP:POINTS (got {s:?})"));
    if parts.len() != 3 {
        return Err(bad());
    }
    Ok((
        parts[0].parse().map_err(|_| bad())?,
        parts[1].parse().map_err(|_| bad())?,
        parts[2].parse().map_err(|_| bad())?,
    ))
}

#[derive(Serialize)]
struct DofRow {
    scheme: String,
    m: u32,
    k: u32,
    t: u32,
    k_star: u32,
    dof_theorem: f64,
    slope: f64,
    abs_error: f64,
    grid_start: Option<f64>,
    grid_stop: Option<f64>,
    grid_points: usize,
    trials: Option<u64>,
    seed: Option<u64>,
}

#[allow(clippy::too_many_arguments)]
fn cmd_dof(
    emitter: &mut Emitter,
    db: bool,
    m: u32,
    k: u32,
    t: u32,
    scheme: &str,
    grid: Option<&str>,
    trials: u64,
    seed: u64,
) -> Result<i32> {
    let scheme = DofScheme::from_str(scheme)?;
    let p_grid = match grid {
        Some(s) => {
            let (start, stop, points) = parse_geom(s)?;
            geometric_grid(power_in(start, db), power_in(stop, db), points)?
        }
        None => default_dof_grid(),
    };
    let theorem = dof_total(m, k, t);
    let mc = matches!(scheme, DofScheme::CoherentMac).then_some(McConfig {
        trials,
        master_seed: seed,
    });
    let fit = dof_slope_estimate(scheme, m, k, t, &p_grid, mc)?;
    if matches!(scheme, DofScheme::MrcEqualPower) && theorem.k_star > 1 {
        eprintln!(
            "warning: MRC saturates against inter-user interference at high SNR; \
             its slope is an interference floor, not the DoF"
        );
    }
    emitter.emit(&DofRow {
        scheme: fit.scheme.to_string(),
        m,
        k,
        t,
        k_star: theorem.k_star,
        dof_theorem: theorem.dof_total,
        slope: fit.slope,
        abs_error: (fit.slope - theorem.dof_total).abs(),
        grid_start: power_out(p_grid[0], db),
        grid_stop: power_out(p_grid[p_grid.len() - 1], db),
        grid_points: p_grid.len(),
        trials: mc.map(|c| c.trials),
        seed: mc.map(|c| c.master_seed),
    })?;
    Ok(0)
}

#[derive(Serialize)]
struct PowerRow {
    receiver: Receiver,
    r: f64,
    k: u32,
    t: u32,
    m: u32,
    p_asymptotic: Option<f64>,
    p_exact: Option<f64>,
    achieved_rate: Option<f64>,
    ratio: Option<f64>,
    error: Option<String>,
}

fn cmd_power(
    emitter: &mut Emitter,
    db: bool,
    r: f64,
    k: u32,
    t: u32,
    receiver: &str,
    m_values: &[u32],
) -> Result<i32> {
    let receiver = Receiver::from_str(receiver)?;
    if !matches!(receiver, Receiver::Mrc | Receiver::Zf) {
        return Err(Error::domain(format!(
            "the power solver covers the closed-form bounds only (mrc or zf, got {receiver})"
        )));
    }
    let rows = power_sweep(r, k, t, receiver, m_values)?;
    let mut failures = false;
    for row in rows {
        let (exact, err) = match row.exact {
            Ok(e) => (Some(e), None),
            Err(e) => {
                failures = true;
                (None, Some(e.to_string()))
            }
        };
        emitter.emit(&PowerRow {
            receiver,
            r,
            k,
            t,
            m: row.m,
            p_asymptotic: power_out(row.p_asymptotic, db),
            p_exact: power_out_opt(exact.map(|e| e.p_exact), db),
            achieved_rate: exact.map(|e| e.achieved_rate),
            ratio: exact.map(|e| e.ratio),
            error: err,
        })?;
    }
    Ok(if failures { 3 } else { 0 })
}

#[derive(Serialize)]
struct SimulateRow {
    receiver: Receiver,
    m: u32,
    k: u32,
    t: u32,
    p: f64,
    alpha_train: f64,
    e: f64,
    p_d: Option<f64>,
    rho: f64,
    trials: u64,
    seed: u64,
    emp_rate: f64,
    emp_std_error: f64,
    resamples: u64,
    /// Closed-form bound at the same effective SNR; empty for MMSE, which
    /// has no closed form here.
    analytic_rate: Option<f64>,
}

#[derive(Serialize)]
struct TrialRow {
    trial: u64,
    per_user_rate: f64,
    resamples: u32,
}

#[allow(clippy::too_many_arguments)]
fn cmd_simulate(
    emitter: &mut Emitter,
    g: &GlobalOpts,
    m: u32,
    k: u32,
    t: u32,
    p: f64,
    alpha: Option<f64>,
    receiver: &str,
    trials: u64,
    seed: u64,
    per_trial_out: Option<&std::path::Path>,
) -> Result<i32> {
    let receiver = Receiver::from_str(receiver)?;
    let p_lin = power_in(p, g.db);
    let split = match alpha {
        Some(alpha) => EnergySplit::from_alpha(p_lin, t, k, alpha)?,
        None => optimal_split_grid(p_lin, t, k, GRID_RESOLUTION)?.energy_split(),
    };
    let params = SystemParams::new(m, k, t, p_lin)?;
    let (rate, outcomes) = empirical_rate_with_trials(receiver, &params, &split, trials, seed)?;
    let rho = effective_snr(split.p_d, split.e, k).rho;
    let analytic_rate = match receiver {
        Receiver::Mrc => Some(rate_mrc(rho, m, k, t)?.per_user_rate),
        Receiver::Zf => Some(rate_zf(rho, m, k, t)?.per_user_rate),
        _ => None,
    };
    emitter.emit(&SimulateRow {
        receiver,
        m,
        k,
        t,
        p,
        alpha_train: split.alpha_train,
        e: split.e,
        p_d: power_out(split.p_d, g.db),
        rho,
        trials,
        seed,
        emp_rate: rate.mean_per_user_rate,
        emp_std_error: rate.std_error,
        resamples: rate.resamples,
        analytic_rate,
    })?;
    if let Some(path) = per_trial_out {
        let mut per_trial = Emitter::new(Some(path), g.json)?;
        for o in &outcomes {
            per_trial.emit(&TrialRow {
                trial: o.trial,
                per_user_rate: o.per_user_rate,
                resamples: o.resamples,
            })?;
        }
        per_trial.finish()?;
    }
    Ok(0)
}

#[derive(Serialize)]
struct CheckRow {
    check: &'static str,
    passed: bool,
    detail: String,
}

fn cmd_selftest(emitter: &mut Emitter) -> Result<i32> {
    let outcomes = run_selftest();
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    for o in outcomes.iter() {
        emitter.emit(&CheckRow {
            check: o.name,
            passed: o.passed,
            detail: o.detail.clone(),
        })?;
    }
    if failed > 0 {
        eprintln!("selftest: {failed} of {} checks failed", outcomes.len());
        Ok(3)
    } else {
        eprintln!("selftest: all {} checks passed", outcomes.len());
        Ok(0)
    }
}
