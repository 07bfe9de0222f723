//! `secrecy-lab`: compute and compare achievable rate-equivocation regions
//! for discrete memoryless wiretap channels with a helping interferer, and
//! simulate the random-coding schemes at small blocklength.
//!
//! Exit codes: 0 success, 2 input parse/validation errors, 3 enumeration
//! guard refusals.

mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use output::{dat_blocks, out_path, region_csv, triple_csv, RunManifest};
use secrecy_lab::error::Error as LabError;
use secrecy_lab::sim::{receiver_rate_cap, run_experiment, Decoder, Scheme, SimConfig};
use secrecy_lab::{
    bcc_helper_region, bcc_region, check_prop2, deaf_helper_region, lai_elgamal_region,
    mac_pentagon, parse_channel, prop2::brute_force_effective, region_c, region_ctilde,
    wiretap_ce_region, AuxChain, Channel, GridSpec, MacOutput, RateRegion,
};

#[derive(Parser)]
#[command(name = "secrecy-lab", version, about)]
struct Cli {
    /// Worker threads for region scans (SECRECY_LAB_THREADS overrides).
    #[arg(long, global = true)]
    workers: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute a region formula over a grid and write its hull as CSV.
    Region(RegionArgs),
    /// Compute two region formulas on the same grid and report containment.
    Compare(CompareArgs),
    /// Evaluate the cooperation-effectiveness conditions for one chain.
    Prop2(Prop2Args),
    /// Run a coding scheme at small blocklength and report error rate and
    /// exact equivocation.
    Simulate(SimulateArgs),
    /// Emit region hulls and the two multiple-access pentagons as plot data.
    Plotdata(PlotdataArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Formula {
    Wiretap,
    Le,
    C,
    Ctilde,
    Bcc,
    #[value(name = "bcc-helper")]
    BccHelper,
    Deaf,
}

impl Formula {
    fn name(self) -> &'static str {
        match self {
            Formula::Wiretap => "wiretap",
            Formula::Le => "le",
            Formula::C => "c",
            Formula::Ctilde => "ctilde",
            Formula::Bcc => "bcc",
            Formula::BccHelper => "bcc-helper",
            Formula::Deaf => "deaf",
        }
    }
}

#[derive(Args)]
struct GridArgs {
    /// Simplex grid step count (entries are multiples of 1/steps).
    #[arg(long, default_value_t = 4)]
    steps: usize,
    /// Common-layer auxiliary alphabet size (default: |X1|).
    #[arg(long)]
    q1: Option<usize>,
    /// Secret-layer auxiliary alphabet size (default: |X1|).
    #[arg(long)]
    u1: Option<usize>,
    /// Helper auxiliary alphabet size (default: |X2|).
    #[arg(long)]
    u2: Option<usize>,
    /// Restrict channel-input maps to deterministic maps.
    #[arg(long)]
    det_maps: bool,
    /// Cap on the number of enumerated chains.
    #[arg(long, default_value_t = secrecy_lab::auxsearch::DEFAULT_ENUM_CAP)]
    cap: u64,
}

impl GridArgs {
    fn spec(&self, ch: &Channel) -> GridSpec {
        let mut spec = GridSpec::for_channel(ch, self.steps);
        if let Some(q1) = self.q1 {
            spec.q1_size = q1;
        }
        if let Some(u1) = self.u1 {
            spec.u1_size = u1;
        }
        if let Some(u2) = self.u2 {
            spec.u2_size = u2;
        }
        spec.det_maps = self.det_maps;
        spec.cap = self.cap;
        spec
    }
}

#[derive(Args)]
struct RegionArgs {
    /// Channel JSON document.
    #[arg(long)]
    channel: PathBuf,
    #[arg(long, value_enum)]
    formula: Formula,
    #[command(flatten)]
    grid: GridArgs,
    /// Output directory for the CSV and its manifest.
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Args)]
struct CompareArgs {
    #[arg(long)]
    channel: PathBuf,
    /// First formula (candidate subset).
    #[arg(long, value_enum)]
    a: Formula,
    /// Second formula (candidate superset).
    #[arg(long, value_enum)]
    b: Formula,
    #[command(flatten)]
    grid: GridArgs,
    /// Containment tolerance on hull vertices.
    #[arg(long, default_value_t = 1e-9)]
    tol: f64,
    /// Optional file for the verdict JSON (also printed to stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Prop2Args {
    #[arg(long)]
    channel: PathBuf,
    /// Auxiliary chain JSON document.
    #[arg(long)]
    aux: PathBuf,
    /// Also run the brute-force region oracle.
    #[arg(long)]
    oracle: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum SchemeArg {
    Scheme1,
    Scheme2,
    #[value(name = "nf")]
    NoiseForwarding,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum DecoderArg {
    Ml,
    Typicality,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    channel: PathBuf,
    #[arg(long, value_enum, default_value_t = SchemeArg::Scheme1)]
    scheme: SchemeArg,
    /// Blocklength N.
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long, default_value_t = 1000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.0)]
    r10: f64,
    #[arg(long, default_value_t = 0.25)]
    r11: f64,
    #[arg(long, default_value_t = 0.0)]
    r2: f64,
    /// Secret-layer codebook rate; defaults to the receiver-side cap
    /// I(X1;Y|X2,Q1) at the configured input law (at least r11).
    #[arg(long)]
    r: Option<f64>,
    /// Input-law JSON: {"pmf_q1", "pmf_x1_given_q1", "pmf_x2"}; defaults to
    /// uniform inputs with a trivial common layer.
    #[arg(long)]
    inputs: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = DecoderArg::Ml)]
    decoder: DecoderArg,
    /// Typicality slack in bits per symbol.
    #[arg(long, default_value_t = 0.2)]
    epsilon: f64,
    /// Output directory (report.json + manifest); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PlotdataArgs {
    #[arg(long)]
    channel: PathBuf,
    /// Auxiliary chain JSON fixing the input law of the plotted regions.
    #[arg(long)]
    aux: PathBuf,
    /// Output file; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize)]
struct InputLaw {
    pmf_q1: Vec<f64>,
    pmf_x1_given_q1: Vec<Vec<f64>>,
    pmf_x2: Vec<f64>,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    init_threads(cli.workers);
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code_for(&err))
        }
    }
}

fn init_threads(flag: Option<usize>) {
    let workers = std::env::var("SECRECY_LAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .or(flag)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        });
    let _ = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build_global();
}

fn exit_code_for(err: &anyhow::Error) -> u8 {
    match err.downcast_ref::<LabError>() {
        Some(LabError::GridGuard { .. }) | Some(LabError::Guard(_)) => 3,
        Some(LabError::Internal(_)) => 1,
        Some(_) => 2,
        // missing files, malformed flags and JSON are input errors too
        None if err.is::<std::io::Error>() || err.is::<serde_json::Error>() => 2,
        None => 2,
    }
}

fn run(cmd: Command) -> anyhow::Result<()> {
    match cmd {
        Command::Region(args) => cmd_region(args),
        Command::Compare(args) => cmd_compare(args),
        Command::Prop2(args) => cmd_prop2(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Plotdata(args) => cmd_plotdata(args),
    }
}

fn load_channel(path: &Path) -> anyhow::Result<Channel> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read channel file {}: {e}", path.display()))?;
    Ok(parse_channel(&text)?)
}

fn load_aux(path: &Path) -> anyhow::Result<AuxChain> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| anyhow::anyhow!("cannot read aux file {}: {e}", path.display()))?;
    let aux: AuxChain = serde_json::from_str(&text)?;
    aux.validate()?;
    Ok(aux)
}

fn compute_region(formula: Formula, ch: &Channel, spec: &GridSpec) -> anyhow::Result<RateRegion> {
    Ok(match formula {
        Formula::Wiretap => wiretap_ce_region(ch, spec)?,
        Formula::Le => lai_elgamal_region(ch, spec)?,
        Formula::C => region_c(ch, spec)?,
        Formula::Ctilde => region_ctilde(ch, spec)?,
        Formula::Deaf => deaf_helper_region(ch, spec)?,
        Formula::Bcc | Formula::BccHelper => {
            anyhow::bail!("formula {} is three-dimensional; not comparable here", formula.name())
        }
    })
}

fn cmd_region(args: RegionArgs) -> anyhow::Result<()> {
    let started = Instant::now();
    let ch = load_channel(&args.channel)?;
    let spec = args.grid.spec(&ch);
    let mut manifest = RunManifest::new("region", &ch.digest());
    manifest.formula = Some(args.formula.name().to_string());
    manifest.grid = Some(spec.clone());

    std::fs::create_dir_all(&args.out)?;
    let csv_name = format!("region-{}.csv", args.formula.name());
    let csv_path = out_path(&args.out, &csv_name);
    let csv = match args.formula {
        Formula::Bcc => triple_csv(&bcc_region(&ch, &spec)?),
        Formula::BccHelper => triple_csv(&bcc_helper_region(&ch, &spec)?),
        _ => {
            let region = compute_region(args.formula, &ch, &spec)?;
            manifest.conjectured = region.meta.conjectured;
            region_csv(&region)
        }
    };
    std::fs::write(&csv_path, &csv)?;
    manifest.record_output(&csv_path, csv.as_bytes());
    manifest.duration_ms = started.elapsed().as_millis();
    manifest.write(&out_path(&args.out, &format!("region-{}.meta.json", args.formula.name())))?;
    eprintln!("wrote {}", csv_path.display());
    Ok(())
}

#[derive(Serialize)]
struct CompareVerdict {
    a: String,
    b: String,
    relation: String,
    a_in_b: bool,
    b_in_a: bool,
    max_violation_a_in_b: f64,
    max_violation_b_in_a: f64,
    tol: f64,
    channel_digest: String,
    grid: GridSpec,
}

fn cmd_compare(args: CompareArgs) -> anyhow::Result<()> {
    let ch = load_channel(&args.channel)?;
    let spec = args.grid.spec(&ch);
    let ra = compute_region(args.a, &ch, &spec)?;
    let rb = compute_region(args.b, &ch, &spec)?;
    let v_ab = ra.max_violation_in(&rb);
    let v_ba = rb.max_violation_in(&ra);
    let a_in_b = v_ab <= args.tol;
    let b_in_a = v_ba <= args.tol;
    let relation = match (a_in_b, b_in_a) {
        (true, true) => "equal",
        (true, false) => "subset",
        (false, true) => "superset",
        (false, false) => "incomparable",
    };
    let verdict = CompareVerdict {
        a: args.a.name().to_string(),
        b: args.b.name().to_string(),
        relation: relation.to_string(),
        a_in_b,
        b_in_a,
        max_violation_a_in_b: v_ab,
        max_violation_b_in_a: v_ba,
        tol: args.tol,
        channel_digest: ch.digest(),
        grid: spec,
    };
    let mut text = serde_json::to_string_pretty(&verdict)?;
    text.push('\n');
    if let Some(path) = &args.out {
        std::fs::write(path, &text)?;
    }
    print!("{text}");
    Ok(())
}

fn cmd_prop2(args: Prop2Args) -> anyhow::Result<()> {
    let ch = load_channel(&args.channel)?;
    let aux = load_aux(&args.aux)?;
    let mut verdict = check_prop2(&aux, &ch)?;
    if args.oracle {
        verdict.oracle_effective = Some(brute_force_effective(&aux, &ch)?);
    }
    let mut text = serde_json::to_string_pretty(&verdict)?;
    text.push('\n');
    if let Some(path) = &args.out {
        std::fs::write(path, &text)?;
    }
    print!("{text}");
    Ok(())
}

fn cmd_simulate(args: SimulateArgs) -> anyhow::Result<()> {
    let started = Instant::now();
    let ch = load_channel(&args.channel)?;
    let scheme = match args.scheme {
        SchemeArg::Scheme1 => Scheme::Scheme1,
        SchemeArg::Scheme2 => Scheme::Scheme2,
        SchemeArg::NoiseForwarding => Scheme::NoiseForwarding,
    };
    let mut cfg = SimConfig::uniform(ch, scheme);
    if let Some(path) = &args.inputs {
        let text = std::fs::read_to_string(path)?;
        let law: InputLaw = serde_json::from_str(&text)?;
        cfg.pmf_q1 = law.pmf_q1;
        cfg.pmf_x1_given_q1 = law.pmf_x1_given_q1;
        cfg.pmf_x2 = law.pmf_x2;
    }
    cfg.blocklength = args.n;
    cfg.trials = args.trials;
    cfg.seed = args.seed;
    cfg.r10 = args.r10;
    cfg.r11 = args.r11;
    cfg.r2 = args.r2;
    cfg.decoder = match args.decoder {
        DecoderArg::Ml => Decoder::MaxLikelihood,
        DecoderArg::Typicality => Decoder::JointTypicality {
            epsilon: args.epsilon,
        },
    };
    cfg.r = match args.r {
        Some(r) => r,
        None => receiver_rate_cap(&cfg)?.max(args.r11),
    };

    let report = run_experiment(&cfg)?;
    let mut text = serde_json::to_string_pretty(&report)?;
    text.push('\n');
    match &args.out {
        Some(dir) => {
            std::fs::create_dir_all(dir)?;
            let report_path = out_path(dir, "report.json");
            std::fs::write(&report_path, &text)?;
            let mut manifest = RunManifest::new("simulate", &cfg.channel.digest());
            manifest.seed = Some(cfg.seed);
            manifest.record_output(&report_path, text.as_bytes());
            manifest.duration_ms = started.elapsed().as_millis();
            manifest.write(&out_path(dir, "simulate.meta.json"))?;
            eprintln!("wrote {}", report_path.display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn cmd_plotdata(args: PlotdataArgs) -> anyhow::Result<()> {
    let ch = load_channel(&args.channel)?;
    let aux = load_aux(&args.aux)?;

    // marginal input laws induced by the chain (X1 independent of X2)
    let mut p_x1 = vec![0.0; ch.x1_size()];
    for (q1, &pq) in aux.pmf_q1.iter().enumerate() {
        for (u1, row) in aux.pmf_x1_given_u1.iter().enumerate() {
            let pu = pq * aux.pmf_u1_given_q1[q1][u1];
            for (x1, &px) in row.iter().enumerate() {
                p_x1[x1] += pu * px;
            }
        }
    }
    let mut p_x2 = vec![0.0; ch.x2_size()];
    for (u2, row) in aux.pmf_x2_given_u2.iter().enumerate() {
        for (x2, &px) in row.iter().enumerate() {
            p_x2[x2] += aux.pmf_u2[u2] * px;
        }
    }

    let pent_y = mac_pentagon(&ch, &p_x1, &p_x2, MacOutput::Receiver)?;
    let pent_z = mac_pentagon(&ch, &p_x1, &p_x2, MacOutput::Eavesdropper)?;
    let ca = secrecy_lab::region::region_ca(&aux, &ch)?;
    let cb = secrecy_lab::region::region_cb(&aux, &ch)?;

    let as_rows = |r: &RateRegion| r.hull.iter().map(|p| (p.r1, p.re)).collect::<Vec<_>>();
    let text = dat_blocks(&[
        ("mac-pentagon-y", as_rows(&pent_y)),
        ("mac-pentagon-z", as_rows(&pent_z)),
        ("region-ca", as_rows(&ca)),
        ("region-cb", as_rows(&cb)),
    ]);
    match &args.out {
        Some(path) => std::fs::write(path, &text)?,
        None => print!("{text}"),
    }
    Ok(())
}
