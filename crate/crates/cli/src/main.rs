use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use qcpart::classes::factors;
use qcpart::clique::{verify_clique_equivalence, DEFAULT_VERTEX_GUARD};
use qcpart::decoder::{DecoderConfig, LayeredDecoder};
use qcpart::partition::{
    distance_upper_bound, evaluate, find_min_layers, min_layers_for_distance, omega_lower_bound,
    solve_enumerative, solve_greedy, solve_with_distance, Budget, Method, PartitionScheme,
    SchemeFile,
};
use qcpart::qcpeg::{
    construct, construction_header, verify_construction, ConstructionSpec, Strategy, VerifyTarget,
};
use qcpart::sim::{run_monte_carlo, ChannelConfig};
use qcpart::{expand_checked, BaseMatrix, Error, SparsePcm};

const USAGE: u8 = 1;
const INVALID: u8 = 2;
const FAILED: u8 = 3;
const BUDGET: u8 = 4;

/// Process failure carrying its exit code.
#[derive(Debug)]
struct Failure {
    code: u8,
    msg: String,
}

impl Failure {
    fn new(code: u8, msg: impl Into<String>) -> Self {
        Self {
            code,
            msg: msg.into(),
        }
    }
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.msg)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::NoCandidate { .. } => FAILED,
            Error::BudgetExhausted => BUDGET,
            _ => INVALID,
        };
        Self::new(code, e.to_string())
    }
}

type CmdResult = Result<u8, Failure>;

#[derive(Parser, Debug)]
#[command(name = "qcpart", version, about = "Layer partitioning and QC-PEG tools for QC-LDPC codes")]
struct Cli {
    /// Worker threads (default: all cores).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// More log output (repeatable).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    #[command(subcommand)]
    cmd: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print dimensions, bounds and layer-count tables of a matrix.
    Analyze {
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Search a partition scheme.
    Partition(PartitionArgs),
    /// Build a base matrix by QC-PEG.
    Construct(ConstructArgs),
    /// Check a base matrix against the canonical layering.
    Verify {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        layers: usize,
        /// Check layer distance K instead of the omega lower bound.
        #[arg(long, value_name = "K")]
        distance: Option<usize>,
    },
    /// Monte-Carlo FER simulation, results as CSV.
    Simulate(SimulateArgs),
    /// Decode one LLR frame (little-endian f64 file).
    Decode {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long, conflicts_with = "layers")]
        scheme: Option<PathBuf>,
        /// Use the canonical scheme with this many layers.
        #[arg(long)]
        layers: Option<usize>,
        #[arg(long)]
        llr: PathBuf,
        #[arg(long, default_value_t = 10)]
        max_iterations: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cross-check the class graph against direct evaluation.
    Clique {
        #[arg(long)]
        matrix: PathBuf,
        #[arg(long)]
        layers: usize,
        #[arg(long, default_value_t = 1)]
        shift: usize,
        #[arg(long, default_value_t = DEFAULT_VERTEX_GUARD)]
        max_vertices: usize,
    },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Enum,
    Greedy,
}

impl From<MethodArg> for Method {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Enum => Method::Enumerative,
            MethodArg::Greedy => Method::Greedy,
        }
    }
}

#[derive(Args, Debug)]
struct PartitionArgs {
    #[arg(long)]
    matrix: PathBuf,
    /// Layer count; with --distance and no --layers the smallest admissible
    /// count is searched.
    #[arg(long)]
    layers: Option<usize>,
    #[arg(long, value_enum, default_value_t = MethodArg::Greedy)]
    method: MethodArg,
    #[arg(long, value_name = "K")]
    distance: Option<usize>,
    #[arg(long, default_value_t = 60.0)]
    budget_secs: f64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ConstructArgs {
    /// Take M, N, Z and the degree multiset (ascending) from this matrix.
    #[arg(long, conflicts_with_all = ["rows", "cols", "lift", "degrees"])]
    like: Option<PathBuf>,
    #[arg(long)]
    rows: Option<usize>,
    #[arg(long)]
    cols: Option<usize>,
    #[arg(long)]
    lift: Option<usize>,
    /// Comma-separated block-column degrees in processing order.
    #[arg(long, value_delimiter = ',')]
    degrees: Option<Vec<usize>>,
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=3))]
    strategy: u8,
    #[arg(long, default_value_t = 1)]
    layers: usize,
    /// Layer distance for strategy 3.
    #[arg(long, value_name = "K")]
    distance: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    allow_multi_edge: bool,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long)]
    matrix: PathBuf,
    #[arg(long, conflicts_with = "layers")]
    scheme: Option<PathBuf>,
    /// Use the canonical scheme with this many layers.
    #[arg(long)]
    layers: Option<usize>,
    /// `a:b:step`, a comma list, or one value (Eb/N0 in dB).
    #[arg(long)]
    snr: String,
    #[arg(long, default_value_t = 100)]
    min_frame_errors: u64,
    #[arg(long, default_value_t = 1_000_000)]
    max_frames: u64,
    #[arg(long, default_value_t = 10)]
    max_iterations: usize,
    /// Code rate for the noise variance (default (N - M) / N).
    #[arg(long)]
    rate: Option<f64>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn read_text(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path)
        .map_err(|e| Failure::new(INVALID, format!("{}: {e}", path.display())))
}

fn write_or_print(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(p) => fs::write(p, text)
            .map_err(|e| Failure::new(INVALID, format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn load_matrix(path: &Path) -> Result<BaseMatrix, Failure> {
    let text = read_text(path)?;
    BaseMatrix::parse(&text)
        .map(|(b, _)| b)
        .map_err(|e| Failure::new(INVALID, format!("{}: {e}", path.display())))
}

fn load_pcm(path: &Path) -> Result<(BaseMatrix, SparsePcm), Failure> {
    let b = load_matrix(path)?;
    let h = expand_checked(&b)?;
    Ok((b, h))
}

fn load_scheme(
    h: &SparsePcm,
    scheme: Option<&Path>,
    layers: Option<usize>,
) -> Result<PartitionScheme, Failure> {
    match (scheme, layers) {
        (Some(p), _) => Ok(SchemeFile::parse(&read_text(p)?, h)?.scheme),
        (None, Some(l)) => Ok(PartitionScheme::canonical(h.block_rows(), h.lift(), l)?),
        (None, None) => Err(Failure::new(USAGE, "give --scheme or --layers")),
    }
}

fn cmd_analyze(matrix: &Path) -> CmdResult {
    let (b, h) = load_pcm(matrix)?;
    let omega = h.max_column_weight();
    let z = b.lift();
    println!("M={} N={} Z={} omega={}", b.rows(), b.cols(), z, omega);
    let fs = factors(z);
    let list: Vec<String> = fs.iter().map(|f| f.to_string()).collect();
    println!("factors {}", list.join(" "));
    println!("L omega_lb d_ub");
    for &l in &fs {
        println!(
            "{l} {} {}",
            omega_lower_bound(omega, l),
            distance_upper_bound(omega, l)
        );
    }
    let d_max = distance_upper_bound(omega, z);
    println!("d_ub={d_max}");
    println!("k L_lb");
    for k in 1..=d_max {
        match min_layers_for_distance(omega, z, k) {
            Some(l) => println!("{k} {l}"),
            None => println!("{k} -"),
        }
    }
    Ok(0)
}

fn summary(h: &SparsePcm, scheme: &PartitionScheme, proven: bool) -> Result<String, Failure> {
    let ev = evaluate(h, scheme)?;
    Ok(format!(
        "omega={} S={} distance={} proven_optimal={}",
        ev.omega,
        scheme.shift(),
        ev.layer_distance,
        proven || ev.omega == ev.omega_lb
    ))
}

fn cmd_partition(a: &PartitionArgs) -> CmdResult {
    let (_, h) = load_pcm(&a.matrix)?;
    let budget = Budget::seconds(a.budget_secs);
    let method: Method = a.method.into();
    let (scheme, proven, code) = match (a.layers, a.distance) {
        (None, None) => return Err(Failure::new(USAGE, "give --layers and/or --distance")),
        (Some(l), None) => {
            let out = match method {
                Method::Enumerative => solve_enumerative(&h, l, budget)?,
                Method::Greedy => solve_greedy(&h, l)?,
            };
            let code = if out.budget_exhausted && !out.proven_optimal {
                BUDGET
            } else {
                0
            };
            (out.scheme, out.proven_optimal, code)
        }
        (Some(l), Some(k)) => {
            let out = solve_with_distance(&h, l, k, method, budget)?;
            let code = match (&out.scheme, out.budget_exhausted) {
                (Some(_), _) => 0,
                (None, true) => BUDGET,
                (None, false) => FAILED,
            };
            (out.best, false, code)
        }
        (None, Some(k)) => {
            let out = find_min_layers(&h, k, method, budget)?;
            for (l, w) in &out.tried {
                log::info!("L={l}: best shifted-sum omega {w}");
            }
            match out.found {
                Some((l, s)) => {
                    println!("layers={l}");
                    (s, false, 0)
                }
                None => {
                    let code = if out.budget_exhausted { BUDGET } else { FAILED };
                    return Err(Failure::new(
                        code,
                        format!("no layer count admits distance {k}"),
                    ));
                }
            }
        }
    };
    let file = SchemeFile::new(&h, scheme.clone())?;
    write_or_print(a.out.as_deref(), &file.to_text())?;
    println!("{}", summary(&h, &scheme, proven)?);
    Ok(code)
}

fn cmd_construct(a: &ConstructArgs) -> CmdResult {
    let (m, n, z, degrees) = match &a.like {
        Some(p) => {
            let b = load_matrix(p)?;
            let mut d = b.column_degrees();
            d.sort_unstable();
            (b.rows(), b.cols(), b.lift(), d)
        }
        None => match (a.rows, a.cols, a.lift, &a.degrees) {
            (Some(m), Some(n), Some(z), Some(d)) => (m, n, z, d.clone()),
            _ => {
                return Err(Failure::new(
                    USAGE,
                    "give --like or all of --rows, --cols, --lift, --degrees",
                ))
            }
        },
    };
    let strategy = match (a.strategy, a.distance) {
        (1, None) => Strategy::Girth,
        (2, None) => Strategy::OmegaBound,
        (3, Some(k)) => Strategy::Distance(k),
        (3, None) => return Err(Failure::new(USAGE, "strategy 3 needs --distance")),
        _ => return Err(Failure::new(USAGE, "--distance only applies to strategy 3")),
    };
    let seed = a.seed.unwrap_or_else(rand::random);
    eprintln!("seed={seed}");
    let spec = ConstructionSpec {
        block_rows: m,
        block_cols: n,
        lift: z,
        layers: a.layers,
        degrees,
        strategy,
        seed,
        allow_multi_edge: a.allow_multi_edge,
    };
    let b = construct(&spec)?;
    let report = match strategy {
        Strategy::Girth => None,
        Strategy::OmegaBound => Some(verify_construction(&b, a.layers, VerifyTarget::OmegaBound)?),
        Strategy::Distance(k) => Some(verify_construction(&b, a.layers, VerifyTarget::Distance(k))?),
    };
    let text = format!("{}{}", construction_header(&spec, report.as_ref()), b.to_text());
    write_or_print(a.out.as_deref(), &text)?;
    match report {
        Some(r) if !r.passed() => Ok(FAILED),
        _ => Ok(0),
    }
}

fn cmd_verify(matrix: &Path, layers: usize, distance: Option<usize>) -> CmdResult {
    let b = load_matrix(matrix)?;
    let target = distance.map_or(VerifyTarget::OmegaBound, VerifyTarget::Distance);
    let r = verify_construction(&b, layers, target)?;
    println!("{}", r.summary());
    Ok(if r.passed() { 0 } else { FAILED })
}

fn parse_snr(s: &str) -> Result<Vec<f64>, Failure> {
    let bad = || Failure::new(USAGE, format!("bad --snr `{s}`"));
    let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
    if s.contains(':') {
        let parts: Vec<f64> = s.split(':').map(num).collect::<Result<_, _>>()?;
        let [a, b, step] = parts[..] else {
            return Err(bad());
        };
        if step <= 0.0 || b < a {
            return Err(bad());
        }
        let count = ((b - a) / step + 1e-9).floor() as usize + 1;
        Ok((0..count).map(|i| a + i as f64 * step).collect())
    } else {
        s.split(',').map(num).collect()
    }
}

fn cmd_simulate(a: &SimulateArgs) -> CmdResult {
    let (_, h) = load_pcm(&a.matrix)?;
    let scheme = load_scheme(&h, a.scheme.as_deref(), a.layers)?;
    let seed = a.seed.unwrap_or_else(rand::random);
    eprintln!("seed={seed}");
    let mut cfg = ChannelConfig::new(&h, parse_snr(&a.snr)?, seed);
    cfg.min_frame_errors = a.min_frame_errors;
    cfg.max_frames = a.max_frames;
    cfg.decoder.max_iterations = a.max_iterations;
    if let Some(r) = a.rate {
        cfg.rate = r;
    }
    let res = run_monte_carlo(&h, &scheme, &cfg)?;
    write_or_print(a.out.as_deref(), &res.to_csv())?;
    Ok(0)
}

fn cmd_decode(
    matrix: &Path,
    scheme: Option<&Path>,
    layers: Option<usize>,
    llr: &Path,
    max_iterations: usize,
    out: Option<&Path>,
) -> CmdResult {
    let (_, h) = load_pcm(matrix)?;
    let scheme = load_scheme(&h, scheme, layers)?;
    let bytes = fs::read(llr).map_err(|e| Failure::new(INVALID, format!("{}: {e}", llr.display())))?;
    if bytes.len() % 8 != 0 {
        return Err(Failure::new(INVALID, "LLR file length is not a multiple of 8"));
    }
    let r: Vec<f64> = bytes
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let cfg = DecoderConfig {
        max_iterations,
        ..DecoderConfig::default()
    };
    let res = LayeredDecoder::new(&h, &scheme)?.decode(&r, &cfg)?;
    let bits: String = res.bits.iter().map(|b| char::from(b'0' + b)).collect();
    write_or_print(out, &format!("{bits}\n"))?;
    println!("converged={} iterations={}", res.converged, res.iterations);
    Ok(if res.converged { 0 } else { FAILED })
}

fn cmd_clique(matrix: &Path, layers: usize, shift: usize, max_vertices: usize) -> CmdResult {
    let (_, h) = load_pcm(matrix)?;
    let r = verify_clique_equivalence(&h, layers, shift, max_vertices)?;
    print!("{r}");
    Ok(if r.consistent() { 0 } else { FAILED })
}

fn run(cli: Cli) -> CmdResult {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build_global()
            .map_err(|e| Failure::new(USAGE, e.to_string()))?;
    }
    match &cli.cmd {
        Command::Analyze { matrix } => cmd_analyze(matrix),
        Command::Partition(a) => cmd_partition(a),
        Command::Construct(a) => cmd_construct(a),
        Command::Verify {
            matrix,
            layers,
            distance,
        } => cmd_verify(matrix, *layers, *distance),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Decode {
            matrix,
            scheme,
            layers,
            llr,
            max_iterations,
            out,
        } => cmd_decode(
            matrix,
            scheme.as_deref(),
            *layers,
            llr,
            *max_iterations,
            out.as_deref(),
        ),
        Command::Clique {
            matrix,
            layers,
            shift,
            max_vertices,
        } => cmd_clique(matrix, *layers, *shift, *max_vertices),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { USAGE } else { 0 });
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        2 => "debug",
        _ => "trace",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(f) => {
            eprintln!("error: {f}");
            ExitCode::from(f.code)
        }
    }
}
