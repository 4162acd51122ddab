//! Command-line front end producing figure-reproduction tables.

mod config;
mod grid;
mod table;

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use photonlink::capacity::{capacity, pie_asymptote, LinkParams, Scheme};
use photonlink::modes::{tradeoff_curve, transfer_profile, TimeGrid, DEFAULT_MODE_CUTOFF};
use photonlink::modulation::{format_equivalence_check, simulate_link, Format, LinkSimReport};
use photonlink::photodetection::DetectorKind;
use photonlink::ppm::{default_orders, optimize_order};
use photonlink::stream::RngStream;

use config::FileConfig;
use table::{Cell, Table};

/// Environment variable naming the default directory for relative
/// `--output` paths.
const OUTPUT_DIR_ENV: &str = "PHOTONLINK_OUTPUT_DIR";

/// Error categories with distinct exit codes.
#[derive(Debug)]
pub struct CliError {
    category: &'static str,
    code: i32,
    message: String,
}

impl CliError {
    pub fn invalid(message: String) -> Self {
        Self { category: "invalid-parameter", code: 3, message }
    }

    pub fn unsupported_order(message: String) -> Self {
        Self { category: "unsupported-order", code: 4, message }
    }

    pub fn io(message: String) -> Self {
        Self { category: "io", code: 5, message }
    }

    pub fn numerical(message: String) -> Self {
        Self { category: "numerical", code: 6, message }
    }
}

impl From<photonlink::Error> for CliError {
    fn from(e: photonlink::Error) -> Self {
        use photonlink::Error as E;
        match e {
            E::InvalidParameter(_) => Self::invalid(e.to_string()),
            E::UnsupportedOrder(_) => Self::unsupported_order(e.to_string()),
            _ => Self::numerical(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OutFormat {
    Csv,
    Json,
}

#[derive(Parser)]
#[command(
    name = "photonlink",
    version,
    about = "Capacity limits, PPM design, matched filtering, and link simulation \
             for photon-starved optical channels"
)]
struct Cli {
    /// Flat key=value config file; flags override file entries.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output file (stdout when omitted). Relative paths resolve against
    /// $PHOTONLINK_OUTPUT_DIR when that is set.
    #[arg(long, global = true)]
    output: Option<PathBuf>,
    /// Table format.
    #[arg(long, global = true, value_enum)]
    format: Option<OutFormat>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Capacity and photon information efficiency over an n_a × n_b sweep.
    Capacity {
        /// holevo, heterodyne, or homodyne; comma list or `all`.
        #[arg(long)]
        scheme: Option<String>,
        /// n_a grid: value or log-spaced start:stop:points.
        #[arg(long)]
        na: Option<String>,
        /// Comma list of background photon numbers.
        #[arg(long)]
        nb: Option<String>,
    },
    /// Optimize the PPM order against the relative-entropy PIE bound.
    PpmOptimize {
        /// n_a grid: value or log-spaced start:stop:points.
        #[arg(long = "na-grid")]
        na_grid: Option<String>,
        /// Comma list of background photon numbers.
        #[arg(long)]
        nb: Option<String>,
        /// pnr or geiger.
        #[arg(long)]
        detector: Option<String>,
        /// Comma list of candidate orders (default: powers of two to 2^24).
        #[arg(long)]
        orders: Option<String>,
    },
    /// Matched-filter power transfer θ_n(Δt) or the efficiency/selectivity
    /// trade-off.
    Filter {
        /// Detection-window grid: value or linear start:stop:points.
        #[arg(long)]
        windows: Option<String>,
        /// Number of modes tabulated (θ_0 .. θ_{modes−1}).
        #[arg(long)]
        modes: Option<usize>,
        /// Emit the mode-0 efficiency/selectivity trade-off instead.
        #[arg(long)]
        tradeoff: bool,
    },
    /// Monte-Carlo simulation of one modulated link.
    Simulate {
        /// ppm, fsk, or hadamard-bpsk.
        #[arg(long)]
        modulation: Option<String>,
        #[arg(long)]
        order: Option<u64>,
        #[arg(long)]
        na: Option<f64>,
        #[arg(long)]
        nb: Option<f64>,
        /// pnr or geiger.
        #[arg(long)]
        detector: Option<String>,
        #[arg(long)]
        frames: Option<u64>,
        /// Required for reproducible stochastic runs.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        stream: Option<u64>,
    },
    /// Cross-format consistency: PPM vs FSK vs Hadamard-BPSK.
    Equivalence {
        #[arg(long)]
        order: Option<u64>,
        #[arg(long)]
        na: Option<f64>,
        #[arg(long)]
        nb: Option<f64>,
        /// pnr or geiger.
        #[arg(long)]
        detector: Option<String>,
        #[arg(long)]
        frames: Option<u64>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        stream: Option<u64>,
    },
}

fn main() {
    let cli = Cli::parse();
    match run(cli) {
        Ok(summary) => {
            eprintln!("{summary}");
        }
        Err(e) => {
            eprintln!("error[{}]: {}", e.category, e.message);
            std::process::exit(e.code);
        }
    }
}

fn run(cli: Cli) -> Result<String, CliError> {
    let cfg = FileConfig::load(cli.config.as_deref())?;
    let out_format = cfg.resolve(
        cli.format,
        "format",
        |s| match s {
            "csv" => Ok(OutFormat::Csv),
            "json" => Ok(OutFormat::Json),
            other => Err(CliError::invalid(format!("unknown format '{other}'"))),
        },
        Some(OutFormat::Csv),
    )?;
    let output = cli.output.clone().or_else(|| {
        cfg.get("output").map(PathBuf::from)
    });

    let (table, summary) = match &cli.command {
        Command::Capacity { scheme, na, nb } => run_capacity(&cfg, scheme, na, nb)?,
        Command::PpmOptimize { na_grid, nb, detector, orders } => {
            run_ppm_optimize(&cfg, na_grid, nb, detector, orders)?
        }
        Command::Filter { windows, modes, tradeoff } => {
            run_filter(&cfg, windows, modes, *tradeoff)?
        }
        Command::Simulate { modulation, order, na, nb, detector, frames, seed, stream } => {
            run_simulate(&cfg, modulation, order, na, nb, detector, frames, seed, stream)?
        }
        Command::Equivalence { order, na, nb, detector, frames, seed, stream } => {
            run_equivalence(&cfg, order, na, nb, detector, frames, seed, stream)?
        }
    };

    let rendered = match out_format {
        OutFormat::Csv => table.to_csv(),
        OutFormat::Json => table.to_json(),
    };
    write_output(output.as_deref(), &rendered)?;
    Ok(summary)
}

fn write_output(path: Option<&Path>, text: &str) -> Result<(), CliError> {
    match path {
        None => {
            print!("{text}");
            Ok(())
        }
        Some(p) => {
            let resolved = if p.is_relative() {
                match std::env::var_os(OUTPUT_DIR_ENV) {
                    Some(dir) => PathBuf::from(dir).join(p),
                    None => p.to_path_buf(),
                }
            } else {
                p.to_path_buf()
            };
            std::fs::write(&resolved, text).map_err(|e| {
                CliError::io(format!("cannot write {}: {e}", resolved.display()))
            })
        }
    }
}

fn parse_schemes(spec: &str) -> Result<Vec<Scheme>, CliError> {
    if spec.eq_ignore_ascii_case("all") {
        return Ok(vec![Scheme::Holevo, Scheme::Heterodyne, Scheme::Homodyne]);
    }
    spec.split(',')
        .map(|s| s.trim().parse::<Scheme>().map_err(CliError::from))
        .collect()
}

fn parse_detector(spec: &str) -> Result<DetectorKind, CliError> {
    spec.parse::<DetectorKind>().map_err(CliError::from)
}

fn run_capacity(
    cfg: &FileConfig,
    scheme: &Option<String>,
    na: &Option<String>,
    nb: &Option<String>,
) -> Result<(Table, String), CliError> {
    let schemes = cfg.resolve(
        scheme.clone(),
        "scheme",
        |s| Ok(s.to_string()),
        Some("all".to_string()),
    )?;
    let schemes = parse_schemes(&schemes)?;
    let na = cfg.resolve(na.clone(), "na", |s| Ok(s.to_string()), None)?;
    let na_grid = grid::parse_log_grid(&na)?;
    let nb = cfg.resolve(nb.clone(), "nb", |s| Ok(s.to_string()), Some("0".into()))?;
    let nb_list = grid::parse_list(&nb)?;

    let mut table = Table::new(
        "capacity",
        vec!["scheme", "n_a", "n_b", "bits_per_slot", "pie"],
    );
    for &scheme in &schemes {
        for &n_b in &nb_list {
            for &n_a in &na_grid {
                let p = LinkParams::new(n_a, n_b)?;
                let r = capacity(scheme, p);
                table.push(vec![
                    Cell::Text(scheme.as_str().into()),
                    Cell::Num(n_a),
                    Cell::Num(n_b),
                    Cell::Num(r.bits_per_slot),
                    Cell::Num(r.pie),
                ]);
            }
        }
    }
    let summary = format!(
        "capacity: {} rows ({} schemes x {} n_b x {} n_a)",
        table.rows.len(),
        schemes.len(),
        nb_list.len(),
        na_grid.len()
    );
    Ok((table, summary))
}

fn run_ppm_optimize(
    cfg: &FileConfig,
    na_grid: &Option<String>,
    nb: &Option<String>,
    detector: &Option<String>,
    orders: &Option<String>,
) -> Result<(Table, String), CliError> {
    let na = cfg.resolve(na_grid.clone(), "na-grid", |s| Ok(s.to_string()), None)?;
    let na_grid = grid::parse_log_grid(&na)?;
    let nb = cfg.resolve(nb.clone(), "nb", |s| Ok(s.to_string()), None)?;
    let nb_list = grid::parse_list(&nb)?;
    let detector = cfg.resolve(
        detector.clone(),
        "detector",
        |s| Ok(s.to_string()),
        Some("pnr".into()),
    )?;
    let detector = parse_detector(&detector)?;
    let orders = match orders
        .clone()
        .or_else(|| cfg.get("orders").map(str::to_string))
    {
        Some(spec) => grid::parse_int_list(&spec)?,
        None => default_orders(),
    };

    let mut table = Table::new(
        "ppm-optimize",
        vec![
            "detector",
            "n_a",
            "n_b",
            "order",
            "pulse_energy",
            "pie_lower_bound",
            "holevo_pie",
            "gap_ratio",
            "mi_bits",
            "mi_std_err",
        ],
    );
    for &n_b in &nb_list {
        let holevo = pie_asymptote(Scheme::Holevo, n_b)?;
        for &n_a in &na_grid {
            let d = optimize_order(n_a, n_b, detector, &orders)?;
            let (mi_bits, mi_err) = match d.mi {
                Some(mi) => (Cell::Num(mi.bits), Cell::Num(mi.std_err)),
                None => (Cell::Empty, Cell::Empty),
            };
            table.push(vec![
                Cell::Text(detector.as_str().into()),
                Cell::Num(n_a),
                Cell::Num(n_b),
                Cell::Int(d.order),
                Cell::Num(d.pulse_energy),
                Cell::Num(d.pie_lower_bound),
                Cell::Num(holevo),
                Cell::Num(d.pie_lower_bound / holevo),
                mi_bits,
                mi_err,
            ]);
        }
    }
    let summary = format!(
        "ppm-optimize: {} rows ({} detection)",
        table.rows.len(),
        detector.as_str()
    );
    Ok((table, summary))
}

fn run_filter(
    cfg: &FileConfig,
    windows: &Option<String>,
    modes: &Option<usize>,
    tradeoff: bool,
) -> Result<(Table, String), CliError> {
    let windows = cfg.resolve(
        windows.clone(),
        "windows",
        |s| Ok(s.to_string()),
        Some("0:8:100".into()),
    )?;
    let windows = grid::parse_linear_grid(&windows)?;
    let modes = cfg.resolve(
        *modes,
        "modes",
        |s| {
            s.parse::<usize>()
                .map_err(|_| CliError::invalid(format!("malformed mode count '{s}'")))
        },
        Some(8),
    )?;
    let grid = TimeGrid::reference();

    if tradeoff {
        let points = tradeoff_curve(DEFAULT_MODE_CUTOFF, &windows, &grid)?;
        let mut table = Table::new(
            "filter-tradeoff",
            vec!["window", "efficiency", "selectivity"],
        );
        for p in &points {
            table.push(vec![
                Cell::Num(p.window),
                Cell::Num(p.efficiency),
                Cell::Num(p.selectivity),
            ]);
        }
        let summary = format!("filter: {} trade-off points", points.len());
        return Ok((table, summary));
    }

    let profile = transfer_profile(modes, &windows, &grid)?;
    let mut table = Table::new("filter", vec!["mode", "window", "theta"]);
    for (n, row) in profile.theta.iter().enumerate() {
        for (w, &theta) in profile.windows.iter().zip(row) {
            table.push(vec![Cell::Int(n as u64), Cell::Num(*w), Cell::Num(theta)]);
        }
    }
    let summary = format!(
        "filter: {} modes x {} windows",
        profile.theta.len(),
        profile.windows.len()
    );
    Ok((table, summary))
}

const SIM_COLUMNS: [&str; 13] = [
    "format",
    "order",
    "n_a",
    "n_b",
    "detector",
    "frames",
    "seed",
    "stream",
    "fer",
    "fer_wilson_low",
    "fer_wilson_high",
    "mi_bits",
    "mi_std_err",
];

fn sim_row(r: &LinkSimReport) -> Vec<Cell> {
    vec![
        Cell::Text(r.format.to_string()),
        Cell::Int(r.order),
        Cell::Num(r.n_a),
        Cell::Num(r.n_b),
        Cell::Text(r.detector.as_str().into()),
        Cell::Int(r.frames),
        Cell::Int(r.seed),
        Cell::Int(r.stream_id),
        Cell::Num(r.fer.rate),
        Cell::Num(r.fer.wilson_low),
        Cell::Num(r.fer.wilson_high),
        Cell::Num(r.mi.bits),
        Cell::Num(r.mi.std_err),
    ]
}

#[allow(clippy::too_many_arguments)]
fn run_simulate(
    cfg: &FileConfig,
    modulation: &Option<String>,
    order: &Option<u64>,
    na: &Option<f64>,
    nb: &Option<f64>,
    detector: &Option<String>,
    frames: &Option<u64>,
    seed: &Option<u64>,
    stream: &Option<u64>,
) -> Result<(Table, String), CliError> {
    let (order, n_a, n_b, detector, frames, stream) =
        sim_common(cfg, order, na, nb, detector, frames, seed, stream)?;
    let modulation = cfg.resolve(
        modulation.clone(),
        "modulation",
        |s| Ok(s.to_string()),
        Some("ppm".into()),
    )?;
    let format: Format = modulation.parse().map_err(CliError::from)?;

    let report = simulate_link(format, order, n_a, n_b, detector, frames, &stream)?;
    let mut table = Table::new("simulate", SIM_COLUMNS.to_vec());
    table.push(sim_row(&report));
    let summary = format!(
        "simulate: {format} M={order} fer={:.4} mi={:.4} bits (+/- {:.4})",
        report.fer.rate, report.mi.bits, report.mi.std_err
    );
    Ok((table, summary))
}

#[allow(clippy::too_many_arguments)]
fn run_equivalence(
    cfg: &FileConfig,
    order: &Option<u64>,
    na: &Option<f64>,
    nb: &Option<f64>,
    detector: &Option<String>,
    frames: &Option<u64>,
    seed: &Option<u64>,
    stream: &Option<u64>,
) -> Result<(Table, String), CliError> {
    let (order, n_a, n_b, detector, frames, stream) =
        sim_common(cfg, order, na, nb, detector, frames, seed, stream)?;
    let report = format_equivalence_check(order, n_a, n_b, detector, frames, &stream)?;
    let mut table = Table::new("equivalence", SIM_COLUMNS.to_vec());
    for r in &report.reports {
        table.push(sim_row(r));
    }
    let summary = format!(
        "equivalence: consistent={} max_mi_sigma={:.3} max_fer_sigma={:.3}",
        report.consistent, report.max_mi_sigma, report.max_fer_sigma
    );
    Ok((table, summary))
}

#[allow(clippy::too_many_arguments)]
fn sim_common(
    cfg: &FileConfig,
    order: &Option<u64>,
    na: &Option<f64>,
    nb: &Option<f64>,
    detector: &Option<String>,
    frames: &Option<u64>,
    seed: &Option<u64>,
    stream: &Option<u64>,
) -> Result<(u64, f64, f64, DetectorKind, u64, RngStream), CliError> {
    let parse_u64 = |s: &str| {
        s.parse::<u64>()
            .map_err(|_| CliError::invalid(format!("malformed integer '{s}'")))
    };
    let parse_f64 = |s: &str| {
        s.parse::<f64>()
            .map_err(|_| CliError::invalid(format!("malformed number '{s}'")))
    };
    let order = cfg.resolve(*order, "order", parse_u64, None)?;
    let n_a = cfg.resolve(*na, "na", parse_f64, None)?;
    let n_b = cfg.resolve(*nb, "nb", parse_f64, Some(0.0))?;
    let detector = cfg.resolve(
        detector.clone(),
        "detector",
        |s| Ok(s.to_string()),
        Some("pnr".into()),
    )?;
    let detector = parse_detector(&detector)?;
    let frames = cfg.resolve(*frames, "frames", parse_u64, Some(1_000_000))?;
    // Stochastic commands refuse to run without an explicit seed.
    let seed = cfg.resolve(*seed, "seed", parse_u64, None)?;
    let stream_id = cfg.resolve(*stream, "stream", parse_u64, Some(0))?;
    Ok((order, n_a, n_b, detector, frames, RngStream::new(seed, stream_id)))
}
