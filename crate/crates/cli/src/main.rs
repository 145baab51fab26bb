//! `mdimlab`: command-line front end. Every subcommand builds a harness
//! config and hands it to `run_experiment`.

mod minispec;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use mdimlab::harness::{exit_code_for, run_experiment, Config, Units};

#[derive(Parser, Debug)]
#[command(name = "mdimlab", version, about = "Finite-scale metric mean dimension laboratory")]
struct Cli {
    /// Units for entropies and rates.
    #[arg(long, global = true, value_enum)]
    units: Option<UnitsArg>,
    /// Write summary.json, tables/*.csv and report.txt here.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// JSON config. Without a subcommand it is run as is; with one, flags
    /// override its fields.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Option<Command>,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum UnitsArg {
    Nats,
    Bits,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Covering number #(X, rho_n, eps) of a finite system, exact or bracketed.
    Cover {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        eps: EpsArgs,
        #[command(flatten)]
        n: RangeArgs,
        /// Window of the enumerated shift.
        #[arg(long)]
        window: Option<usize>,
    },
    /// Growth rate S(X, rho, T, eps) of covering numbers in n.
    Growth {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        eps: EpsArgs,
        #[command(flatten)]
        n: RangeArgs,
    },
    /// Metric mean dimension: slope of S(eps) against log(1/eps).
    Mdim {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        eps: EpsArgs,
        #[command(flatten)]
        n: RangeArgs,
    },
    /// Dynamical entropy h_mu(T, P) of a partition.
    Entropy {
        #[command(flatten)]
        mu: MeasureArgs,
        /// points, single or grid:<m>.
        #[arg(long)]
        partition: Option<String>,
        /// Largest block length.
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Mean Renyi information dimension: inf of h_mu(P) over diam(P) <= eps, against log(1/eps).
    Mrid {
        #[command(flatten)]
        mu: MeasureArgs,
        #[command(flatten)]
        eps: EpsArgs,
        #[command(flatten)]
        fam: FamilyArgs,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// Information dimension rate: h_mu(P_m)/log m for grid partitions P_m.
    Idr {
        #[command(flatten)]
        mu: MeasureArgs,
        /// Grid sizes, comma separated.
        #[arg(long, value_delimiter = ',')]
        m_grid: Vec<usize>,
        #[arg(long)]
        n_max: Option<usize>,
    },
    /// L^p rate-distortion curve R(D) of n-blocks via Blahut-Arimoto.
    RdCurve {
        #[command(flatten)]
        mu: MeasureArgs,
        #[command(flatten)]
        rd: RdArgs,
    },
    /// Rate-distortion dimension: slope of R(eps) against log(1/eps).
    RdDim {
        #[command(flatten)]
        mu: MeasureArgs,
        #[command(flatten)]
        eps: EpsArgs,
        #[command(flatten)]
        rd: RdArgs,
    },
    /// Inverse consistency of R(D) and D(R); mixture decomposition and dominance.
    RdChecks {
        #[command(flatten)]
        mu: MeasureArgs,
        #[command(flatten)]
        rd: RdArgs,
        /// Rate grid for the decomposition check.
        #[arg(long, value_delimiter = ',')]
        rates: Vec<f64>,
        /// Distortion grid for the dominance check.
        #[arg(long, value_delimiter = ',')]
        distortions: Vec<f64>,
    },
    /// Brin-Katok local entropy h_mu^BK(eps) from Bowen-ball decay, with the
    /// comparison against the partition infimum.
    BrinKatok {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        mu: MeasureArgs,
        #[command(flatten)]
        eps: EpsArgs,
        #[command(flatten)]
        n: RangeArgs,
        #[command(flatten)]
        balls: BallArgs,
        #[command(flatten)]
        fam: FamilyArgs,
    },
    /// Lower bound on Bowen-ball measures, mu(B_n(x, eps)) >= eps^(n (mdim + delta)).
    BallBound {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        mu: MeasureArgs,
        #[command(flatten)]
        eps: EpsArgs,
        #[command(flatten)]
        n: RangeArgs,
        #[command(flatten)]
        balls: BallArgs,
        #[arg(long)]
        delta: Option<f64>,
        /// Metric mean dimension used in the exponent.
        #[arg(long)]
        mdim_est: Option<f64>,
    },
    /// Variational chains between partition entropies and S(eps/4), S(eps).
    VpCheck {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        mu: MeasureArgs,
        #[command(flatten)]
        eps: EpsArgs,
        #[command(flatten)]
        n: RangeArgs,
        #[command(flatten)]
        fam: FamilyArgs,
    },
    /// Brin-Katok mean dimension estimate against the covering growth.
    Mbke {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        mu: MeasureArgs,
        #[command(flatten)]
        eps: EpsArgs,
        #[command(flatten)]
        n: RangeArgs,
        #[command(flatten)]
        balls: BallArgs,
    },
    /// Tame growth diagnostic: eps^delta log #(X, rho, eps).
    Tame {
        #[command(flatten)]
        sys: SystemArgs,
        #[command(flatten)]
        eps: EpsArgs,
        #[arg(long, value_delimiter = ',')]
        deltas: Vec<f64>,
    },
}

#[derive(Args, Debug)]
struct SystemArgs {
    /// rotation:P,Q | full:M | unit | golden | sft:ROW;ROW (rows of 0/1),
    /// optionally followed by @W for a fixed window.
    #[arg(long)]
    system: Option<String>,
}

#[derive(Args, Debug)]
struct MeasureArgs {
    /// bernoulli:P,..., markov:ROW;ROW, parry:golden | parry:ROW;ROW,
    /// mixture:W*SPEC+W*SPEC. Repeatable.
    #[arg(long = "measure")]
    measures: Vec<String>,
}

#[derive(Args, Debug)]
struct EpsArgs {
    /// Scales, comma separated.
    #[arg(long, value_delimiter = ',')]
    eps: Vec<f64>,
}

#[derive(Args, Debug)]
struct RangeArgs {
    /// Range of n as LO,HI.
    #[arg(long, value_parser = parse_range)]
    n: Option<[usize; 2]>,
}

#[derive(Args, Debug)]
struct FamilyArgs {
    /// default | grids_only | strict.
    #[arg(long)]
    family: Option<String>,
}

#[derive(Args, Debug)]
struct RdArgs {
    /// Distortion exponent.
    #[arg(long)]
    p: Option<f64>,
    /// Block length.
    #[arg(long)]
    block_len: Option<usize>,
}

#[derive(Args, Debug)]
struct BallArgs {
    #[arg(long)]
    centers: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
}

fn parse_range(s: &str) -> Result<[usize; 2], String> {
    let v: Vec<usize> = s
        .split(',')
        .map(|x| x.trim().parse().map_err(|_| format!("not an integer: {x:?}")))
        .collect::<Result<_, _>>()?;
    match *v.as_slice() {
        [lo, hi] => Ok([lo, hi]),
        [n] => Ok([n, n]),
        _ => Err("expected LO,HI".into()),
    }
}

fn apply(cfg: &mut Config, cmd: Command) -> mdimlab::Result<()> {
    use Command::*;
    cfg.experiment = match &cmd {
        Cover { .. } => "cover",
        Growth { .. } => "growth",
        Mdim { .. } => "mdim",
        Entropy { .. } => "entropy",
        Mrid { .. } => "mrid",
        Idr { .. } => "idr",
        RdCurve { .. } => "rd_curve",
        RdDim { .. } => "rd_dim",
        RdChecks { .. } => "rd_checks",
        BrinKatok { .. } => "brin_katok",
        BallBound { .. } => "ball_bound",
        VpCheck { .. } => "vp_check",
        Mbke { .. } => "mbke",
        Tame { .. } => "tame",
    }
    .into();
    match cmd {
        Cover { sys, eps, n, window } => {
            set_sys(cfg, sys)?;
            set_eps(cfg, eps);
            set_n(cfg, n);
            cfg.params.window = window.or(cfg.params.window);
        }
        Growth { sys, eps, n } | Mdim { sys, eps, n } => {
            set_sys(cfg, sys)?;
            set_eps(cfg, eps);
            set_n(cfg, n);
        }
        Entropy { mu, partition, n_max } => {
            set_mu(cfg, mu)?;
            cfg.params.partition = partition.or(cfg.params.partition.take());
            cfg.params.n_max = n_max.or(cfg.params.n_max);
        }
        Mrid { mu, eps, fam, n_max } => {
            set_mu(cfg, mu)?;
            set_eps(cfg, eps);
            set_family(cfg, fam);
            cfg.params.n_max = n_max.or(cfg.params.n_max);
        }
        Idr { mu, m_grid, n_max } => {
            set_mu(cfg, mu)?;
            if !m_grid.is_empty() {
                cfg.params.m_grid = m_grid;
            }
            cfg.params.n_max = n_max.or(cfg.params.n_max);
        }
        RdCurve { mu, rd } => {
            set_mu(cfg, mu)?;
            set_rd(cfg, rd);
        }
        RdDim { mu, eps, rd } => {
            set_mu(cfg, mu)?;
            set_eps(cfg, eps);
            set_rd(cfg, rd);
        }
        RdChecks { mu, rd, rates, distortions } => {
            set_mu(cfg, mu)?;
            set_rd(cfg, rd);
            if !rates.is_empty() {
                cfg.params.rates = rates;
            }
            if !distortions.is_empty() {
                cfg.params.distortions = distortions;
            }
        }
        BrinKatok { sys, mu, eps, n, balls, fam } => {
            set_sys(cfg, sys)?;
            set_mu(cfg, mu)?;
            set_eps(cfg, eps);
            set_n(cfg, n);
            set_balls(cfg, balls);
            set_family(cfg, fam);
        }
        BallBound { sys, mu, eps, n, balls, delta, mdim_est } => {
            set_sys(cfg, sys)?;
            set_mu(cfg, mu)?;
            set_eps(cfg, eps);
            set_n(cfg, n);
            set_balls(cfg, balls);
            cfg.params.delta = delta.or(cfg.params.delta);
            cfg.params.mdim_est = mdim_est.or(cfg.params.mdim_est);
        }
        VpCheck { sys, mu, eps, n, fam } => {
            set_sys(cfg, sys)?;
            set_mu(cfg, mu)?;
            set_eps(cfg, eps);
            set_n(cfg, n);
            set_family(cfg, fam);
        }
        Mbke { sys, mu, eps, n, balls } => {
            set_sys(cfg, sys)?;
            set_mu(cfg, mu)?;
            set_eps(cfg, eps);
            set_n(cfg, n);
            set_balls(cfg, balls);
        }
        Tame { sys, eps, deltas } => {
            set_sys(cfg, sys)?;
            set_eps(cfg, eps);
            if !deltas.is_empty() {
                cfg.params.deltas = deltas;
            }
        }
    }
    Ok(())
}

fn set_sys(cfg: &mut Config, a: SystemArgs) -> mdimlab::Result<()> {
    if let Some(s) = a.system {
        cfg.system = Some(minispec::system(&s)?);
    }
    Ok(())
}

fn set_mu(cfg: &mut Config, a: MeasureArgs) -> mdimlab::Result<()> {
    if !a.measures.is_empty() {
        cfg.measures = a.measures.iter().map(|s| minispec::measure(s)).collect::<mdimlab::Result<_>>()?;
    }
    Ok(())
}

fn set_eps(cfg: &mut Config, a: EpsArgs) {
    if !a.eps.is_empty() {
        cfg.eps_grid = a.eps;
    }
}

fn set_n(cfg: &mut Config, a: RangeArgs) {
    if a.n.is_some() {
        cfg.n_range = a.n;
    }
}

fn set_family(cfg: &mut Config, a: FamilyArgs) {
    cfg.family = a.family.or(cfg.family.take());
}

fn set_rd(cfg: &mut Config, a: RdArgs) {
    if let Some(p) = a.p {
        cfg.p = p;
    }
    cfg.params.block_len = a.block_len.or(cfg.params.block_len);
}

fn set_balls(cfg: &mut Config, a: BallArgs) {
    cfg.params.centers = a.centers.or(cfg.params.centers);
    if let Some(s) = a.seed {
        cfg.seeds = vec![s];
    }
}

fn build(cli: Cli) -> mdimlab::Result<Config> {
    let mut cfg = match &cli.config {
        Some(path) => Config::load(path)?,
        None => Config::new(""),
    };
    match cli.command {
        Some(cmd) => apply(&mut cfg, cmd)?,
        None if cli.config.is_none() => {
            return Err(mdimlab::Error::Config("no subcommand or --config given; see --help".into()))
        }
        None => {}
    }
    if let Some(u) = cli.units {
        cfg.units = match u {
            UnitsArg::Nats => Units::Nats,
            UnitsArg::Bits => Units::Bits,
        };
    }
    if cli.out.is_some() {
        cfg.output_dir = cli.out;
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::try_parse().unwrap_or_else(|e| e.exit());
    let result = build(cli).and_then(|cfg| run_experiment(&cfg));
    match result {
        Ok(out) => {
            // A closed pipe (e.g. `| head`) is not an error worth reporting.
            let mut so = std::io::stdout().lock();
            for l in &out.lines {
                let _ = writeln!(so, "{l}");
            }
            for r in &out.reports {
                let _ = writeln!(so, "[{}] {}", r.verdict.as_str(), r.claim);
            }
            ExitCode::from(out.exit_code() as u8)
        }
        Err(e) => {
            eprintln!("mdimlab: {e}");
            ExitCode::from(exit_code_for(&e) as u8)
        }
    }
}
