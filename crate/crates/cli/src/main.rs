//! `mimo-pnc` command-line tool.

mod output;
mod problem;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mimo_pnc::decomp::DecompError;
use mimo_pnc::pnc::order_for_rate;
use mimo_pnc::rates::{
    cutset_rate, df_rate, pnc_rate, rate_report, subchannel_rates, upper_concave_envelope,
};
use mimo_pnc::sim::{run_loopback, run_mc};
use mimo_pnc::{jet, validate_jet, RateError, RateMode, SimConfig, SimError, TwoWayNetwork};
use serde::Serialize;

use problem::ProblemFile;

pub const SWEEP_HEADER: [&str; 6] = [
    "power_db",
    "r_cs",
    "r_pnc_zf",
    "r_pnc_wilson",
    "r_df",
    "r_ts",
];
pub const RATES_HEADER: [&str; 9] = [
    "power",
    "r_pnc_zf",
    "r_pnc_wilson",
    "r_cs",
    "r_df",
    "r_ts",
    "r_af",
    "high_snr_gap",
    "subchannel_rates",
];

/// Failure with the process exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    pub fn input(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    pub fn channel(message: impl Into<String>) -> Self {
        Self {
            code: 3,
            message: message.into(),
        }
    }

    pub fn internal(message: impl Into<String>) -> Self {
        Self {
            code: 1,
            message: message.into(),
        }
    }
}

impl From<DecompError> for Failure {
    fn from(e: DecompError) -> Self {
        match e {
            DecompError::UnequalSingularValueProducts { .. }
            | DecompError::RankDeficient { .. } => Failure::channel(e.to_string()),
            DecompError::Convergence { .. } => Failure::internal(e.to_string()),
            _ => Failure::input(e.to_string()),
        }
    }
}

impl From<RateError> for Failure {
    fn from(e: RateError) -> Self {
        match e {
            RateError::Decomp(d) => d.into(),
            other => Failure::input(other.to_string()),
        }
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Decomp(d) => d.into(),
            other => Failure::input(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ModeArg {
    Zf,
    Wilson,
}

impl From<ModeArg> for RateMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Zf => RateMode::ZfNaive,
            ModeArg::Wilson => RateMode::Wilson,
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    version,
    about = "Structured network coding for the MIMO two-way relay channel"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct Common {
    /// Problem file (JSON)
    problem: PathBuf,
    /// Write the result here instead of standard output
    #[arg(long)]
    out: Option<PathBuf>,
    /// Subchannel rate variant; overrides the problem file
    #[arg(long, value_enum)]
    mode: Option<ModeArg>,
}

#[derive(Debug, Args)]
struct SimArgs {
    #[command(flatten)]
    common: Common,
    /// RNG seed; overrides the problem file
    #[arg(long)]
    seed: Option<u64>,
    /// Number of blocks; overrides the problem file
    #[arg(long)]
    trials: Option<usize>,
    /// Symbols per block; overrides the problem file
    #[arg(long)]
    block: Option<usize>,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Joint triangularization of the two channels, with a validation report
    Decompose {
        #[command(flatten)]
        common: Common,
    },
    /// All analytic rates at the problem's power
    Rates {
        #[command(flatten)]
        common: Common,
        /// Emit a CSV header and row instead of JSON
        #[arg(long)]
        csv: bool,
    },
    /// Rates over a log-spaced power grid, as CSV
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Lowest power in dB
        #[arg(long, default_value_t = -6.0, allow_negative_numbers = true)]
        pmin_db: f64,
        /// Highest power in dB
        #[arg(long, default_value_t = 60.0, allow_negative_numbers = true)]
        pmax_db: f64,
        /// Number of grid points
        #[arg(long, default_value_t = 50)]
        points: usize,
    },
    /// Noiseless run of the full transmission chain
    Loopback(SimArgs),
    /// Monte Carlo run over the noisy MAC
    Simulate {
        #[command(flatten)]
        sim: SimArgs,
        /// Drop the receiver noise
        #[arg(long)]
        noiseless: bool,
    },
}

fn mode_of(common: &Common, problem: &ProblemFile) -> RateMode {
    common
        .mode
        .map(RateMode::from)
        .or(problem.mode)
        .unwrap_or_default()
}

#[derive(Serialize)]
struct Decomposition {
    factors: mimo_pnc::JetFactors,
    report: mimo_pnc::DecompReport,
}

fn decompose(problem: &ProblemFile) -> Result<String, Failure> {
    let net = problem.network()?;
    let factors = jet(net.h1(), net.h2())?;
    let report = validate_jet(&factors, net.h1(), net.h2())?;
    output::json_string(&Decomposition { factors, report })
}

fn rates(problem: &ProblemFile, mode: RateMode, csv: bool) -> Result<String, Failure> {
    let net = problem.network()?;
    let r = rate_report(&net, mode, problem.alpha)?;
    if !csv {
        return output::json_string(&r);
    }
    let sub = r
        .subchannel_rates
        .iter()
        .map(|&x| output::round12(x).to_string())
        .collect::<Vec<_>>()
        .join(";");
    let nums = [r.power, r.r_pnc_zf, r.r_pnc_wilson, r.r_cs, r.r_df, r.r_ts];
    let mut fields: Vec<String> = nums
        .iter()
        .map(|&x| output::round12(x).to_string())
        .collect();
    fields.push(
        r.r_af
            .map(|x| output::round12(x).to_string())
            .unwrap_or_default(),
    );
    fields.push(output::round12(r.high_snr_gap).to_string());
    fields.push(sub);
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_writer(Vec::new());
    let fail = |e: csv::Error| Failure::internal(e.to_string());
    w.write_record(RATES_HEADER).map_err(fail)?;
    w.write_record(&fields).map_err(fail)?;
    let bytes = w
        .into_inner()
        .map_err(|e| Failure::internal(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| Failure::internal(e.to_string()))
}

fn sweep(
    net: &TwoWayNetwork,
    mode: RateMode,
    pmin_db: f64,
    pmax_db: f64,
    points: usize,
) -> Result<String, Failure> {
    if points < 2 || pmax_db <= pmin_db || !pmin_db.is_finite() || !pmax_db.is_finite() {
        return Err(Failure::input(format!(
            "sweep needs at least 2 points and pmin-db < pmax-db, got {points} points over [{pmin_db}, {pmax_db}] dB"
        )));
    }
    let mut rows = Vec::with_capacity(points);
    let mut best = Vec::with_capacity(points);
    for i in 0..points {
        let db = pmin_db + (pmax_db - pmin_db) * i as f64 / (points - 1) as f64;
        let p = 10f64.powf(db / 10.0);
        let at = net.with_power(p)?;
        let zf = pnc_rate(&at, RateMode::ZfNaive)?;
        let wilson = pnc_rate(&at, RateMode::Wilson)?;
        let df = df_rate(&at);
        let pnc = if mode == RateMode::Wilson { wilson } else { zf };
        best.push((p, pnc.max(df)));
        rows.push(vec![db, cutset_rate(&at), zf, wilson, df, 0.0]);
    }
    for (row, (_, ts)) in rows.iter_mut().zip(upper_concave_envelope(&best)) {
        row[5] = ts;
    }
    output::csv_string(&SWEEP_HEADER, &rows)
}

fn sim_config(
    args: &SimArgs,
    problem: &ProblemFile,
    noiseless: bool,
) -> Result<SimConfig, Failure> {
    let net = problem.network()?;
    let orders = match &problem.orders {
        Some(o) => o.clone(),
        None => subchannel_rates(&net, mode_of(&args.common, problem))?
            .iter()
            .map(|&r| order_for_rate(r))
            .collect(),
    };
    let mut cfg = SimConfig::new(
        net,
        orders,
        args.block.or(problem.block_length).unwrap_or(64),
        args.trials.or(problem.trials).unwrap_or(100),
        args.seed.or(problem.seed).unwrap_or(0),
    );
    cfg.noiseless = noiseless;
    Ok(cfg)
}

fn run(cli: Cli) -> Result<(), Failure> {
    let (out, text) = match &cli.command {
        Command::Decompose { common } => {
            let problem = ProblemFile::load(&common.problem)?;
            (common.out.as_deref(), decompose(&problem)?)
        }
        Command::Rates { common, csv } => {
            let problem = ProblemFile::load(&common.problem)?;
            (
                common.out.as_deref(),
                rates(&problem, mode_of(common, &problem), *csv)?,
            )
        }
        Command::Sweep {
            common,
            pmin_db,
            pmax_db,
            points,
        } => {
            let problem = ProblemFile::load(&common.problem)?;
            let net = problem.network()?;
            // Surfaces channel precondition failures before the sweep.
            jet(net.h1(), net.h2())?;
            let text = sweep(&net, mode_of(common, &problem), *pmin_db, *pmax_db, *points)?;
            (common.out.as_deref(), text)
        }
        Command::Loopback(args) => {
            let problem = ProblemFile::load(&args.common.problem)?;
            let out = run_loopback(&sim_config(args, &problem, true)?)?;
            (args.common.out.as_deref(), output::json_string(&out)?)
        }
        Command::Simulate { sim, noiseless } => {
            let problem = ProblemFile::load(&sim.common.problem)?;
            let out = run_mc(&sim_config(sim, &problem, *noiseless)?)?;
            (sim.common.out.as_deref(), output::json_string(&out)?)
        }
    };
    output::emit(out.map(Path::new), text.as_bytes())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if e.use_stderr() => {
            let text = e.to_string();
            eprintln!("{}", text.lines().next().unwrap_or("invalid arguments"));
            return ExitCode::from(2);
        }
        Err(e) => e.exit(),
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message.replace('\n', " "));
            ExitCode::from(f.code)
        }
    }
}
