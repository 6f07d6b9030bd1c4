//! `bandsel` command-line tool.
//!
//! Exit status: 0 success, 2 unreadable or malformed input, 3 invalid
//! configuration.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use bandsel::classify::{self, LabelImage};
use bandsel::cube_io::{self, GROUND_TRUTH_EXT};
use bandsel::exec::Execution;
use bandsel::experiment::{self, SweepConfig};
use bandsel::infotheory::{self, DEFAULT_EPS};
use bandsel::selectors::{self, parse_band_list};
use bandsel::synth::{self, SceneSpec};
use bandsel::{BandTable, Error, GroundTruthMap, HyperCube, Method, QuantizerConfig, SelectorConfig};
use clap::{Args, Parser, Subcommand};

#[derive(Parser)]
#[command(
    name = "bandsel",
    version,
    about = "Information-theoretic band selection for hyperspectral cubes"
)]
struct Cli {
    /// Score candidates and classify pixels on one thread.
    #[arg(long, global = true)]
    sequential: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rank bands with one selection method and write a band-list CSV.
    Select(SelectArgs),
    /// Classify with a band list and write a metrics JSON report.
    Classify(ClassifyArgs),
    /// Accuracy-versus-k curves for several methods.
    Sweep(SweepArgs),
    /// Generate a synthetic scene with planted band roles.
    Synth(SynthArgs),
    /// Print one information measure for the given bands.
    Info(InfoArgs),
}

#[derive(Args)]
struct SceneArgs {
    /// Cube header, payload or their common stem.
    #[arg(long)]
    cube: PathBuf,
    /// Ground-truth map; defaults to `<stem>.gt` next to the cube.
    #[arg(long)]
    gt: Option<PathBuf>,
    /// Quantization bins for probability estimation.
    #[arg(long, default_value_t = 64)]
    bins: u32,
}

#[derive(Args)]
struct SelectorArgs {
    #[arg(long, default_value_t = 1.0)]
    beta: f64,
    /// MIBF cutoff on pairwise band MI, in bits.
    #[arg(long, default_value_t = 0.5)]
    threshold: f64,
}

#[derive(Args)]
struct SelectArgs {
    #[command(flatten)]
    scene: SceneArgs,
    #[command(flatten)]
    selector: SelectorArgs,
    #[arg(long)]
    method: String,
    #[arg(long)]
    k: usize,
    /// Accepted for symmetry with the other commands; selection is deterministic.
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Band-list CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ClassifyArgs {
    #[command(flatten)]
    scene: SceneArgs,
    /// Band-list CSV with a `band_index` column.
    #[arg(long)]
    band_list: PathBuf,
    #[arg(long, default_value_t = 0.5)]
    train_frac: f64,
    #[arg(long, default_value_t = 3)]
    neighbors: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Metrics JSON; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Full-scene classification map (plain PPM).
    #[arg(long)]
    map: Option<PathBuf>,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    scene: SceneArgs,
    #[command(flatten)]
    selector: SelectorArgs,
    /// Comma-separated method names.
    #[arg(long, value_delimiter = ',', required = true)]
    methods: Vec<String>,
    #[arg(long)]
    k_max: usize,
    #[arg(long, default_value_t = 1)]
    step: usize,
    /// First grid point; defaults to the step.
    #[arg(long)]
    k_min: Option<usize>,
    /// Comma-separated training fractions.
    #[arg(long, value_delimiter = ',', default_value = "0.5")]
    train_frac: Vec<f64>,
    #[arg(long, default_value_t = 3)]
    neighbors: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Curve CSV; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Scene spec JSON; omitted fields take their defaults.
    #[arg(long)]
    spec: Option<PathBuf>,
    /// Overrides the spec's seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output stem for `.hsch`, `.hscd`, `.gt` and `.truth.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct InfoArgs {
    #[command(flatten)]
    scene: SceneArgs,
    /// entropy, mi, jmi, ii or nms.
    #[arg(long)]
    op: String,
    /// Comma-separated band indices; the class is implied where needed.
    #[arg(long, value_delimiter = ',', required = true)]
    bands: Vec<usize>,
}

#[derive(Debug)]
enum Failure {
    Input(String),
    Config(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Input(_) => 2,
            Failure::Config(_) => 3,
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        if e.is_config() {
            Failure::Config(e.to_string())
        } else {
            Failure::Input(e.to_string())
        }
    }
}

type CliResult<T> = Result<T, Failure>;

fn config(msg: impl Into<String>) -> Failure {
    Failure::Config(msg.into())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let exec = if cli.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let outcome = match cli.command {
        Command::Select(a) => cmd_select(a, exec),
        Command::Classify(a) => cmd_classify(a, exec),
        Command::Sweep(a) => cmd_sweep(a, exec),
        Command::Synth(a) => cmd_synth(a),
        Command::Info(a) => cmd_info(a, exec),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            let (Failure::Input(msg) | Failure::Config(msg)) = &f;
            eprintln!("bandsel: {msg}");
            ExitCode::from(f.code())
        }
    }
}

/// Writes through a temporary file in the target directory, then renames.
fn write_atomic(path: &Path, bytes: &[u8]) -> CliResult<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let fail = |e: std::io::Error| Failure::Input(format!("{}: {e}", path.display()));
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(fail)?;
    tmp.write_all(bytes).map_err(fail)?;
    tmp.persist(path).map_err(|e| fail(e.error))?;
    Ok(())
}

fn emit(out: Option<&Path>, text: &str) -> CliResult<()> {
    match out {
        Some(p) => write_atomic(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn with_suffix(stem: &Path, suffix: &str) -> PathBuf {
    let mut s: OsString = stem.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn parse_method(name: &str) -> CliResult<Method> {
    Ok(name.parse::<Method>()?)
}

fn load_scene(args: &SceneArgs) -> CliResult<(HyperCube, GroundTruthMap)> {
    let cube = cube_io::load_cube(&args.cube)?;
    let gt_path = match &args.gt {
        Some(p) => p.clone(),
        None => cube_io::cube_paths(&args.cube).0.with_extension(GROUND_TRUTH_EXT),
    };
    let gt = cube_io::load_ground_truth(&gt_path, cube.rows(), cube.cols())?;
    Ok((cube, gt))
}

fn band_table(args: &SceneArgs, exec: Execution) -> CliResult<(BandTable, GroundTruthMap)> {
    let quantizer = QuantizerConfig::new(args.bins)?;
    let (cube, gt) = load_scene(args)?;
    let table = BandTable::from_scene(&cube, &gt, quantizer, exec)?;
    Ok((table, gt))
}

fn selector_config(k: usize, args: &SelectorArgs) -> SelectorConfig {
    SelectorConfig {
        beta: args.beta,
        threshold: args.threshold,
        ..SelectorConfig::new(k)
    }
}

fn cmd_select(a: SelectArgs, exec: Execution) -> CliResult<()> {
    let method = parse_method(&a.method)?;
    let cfg = selector_config(a.k, &a.selector);
    if a.k == 0 {
        return Err(config("k must be at least 1"));
    }
    let (table, _) = band_table(&a.scene, exec)?;
    let start = Instant::now();
    let result = selectors::select_with(method, &table, &cfg, exec)?;
    let elapsed = start.elapsed().as_secs_f64();
    emit(a.out.as_deref(), &result.to_csv())?;
    if a.out.is_some() {
        println!(
            "method={method} k={} selected={} exhausted={} elapsed={elapsed:.3}s",
            cfg.k,
            result.ranked_bands.len(),
            result.exhausted
        );
    }
    Ok(())
}

fn cmd_classify(a: ClassifyArgs, exec: Execution) -> CliResult<()> {
    if !(a.train_frac > 0.0 && a.train_frac < 1.0) {
        return Err(config(format!(
            "train fraction must lie in (0, 1), got {}",
            a.train_frac
        )));
    }
    let text =
        fs::read_to_string(&a.band_list).map_err(|e| Failure::Input(format!("{}: {e}", a.band_list.display())))?;
    let bands = parse_band_list(&text)?;
    let (table, gt) = band_table(&a.scene, exec)?;
    let split = classify::stratified_split(&gt, a.train_frac, a.seed)?;
    let eval = classify::evaluate_bands(&table, &bands, &split, a.neighbors, exec)?;

    let json = eval.metrics.to_json(&eval.confusion);
    emit(a.out.as_deref(), &json)?;
    if let Some(map_path) = &a.map {
        let image: LabelImage = classify::full_scene_map(&gt, &split, &eval.predictions)?;
        let mut buf = Vec::new();
        image.write_ppm(&mut buf).map_err(|e| Failure::Input(e.to_string()))?;
        write_atomic(map_path, &buf)?;
    }
    if a.out.is_some() {
        let m = &eval.metrics;
        println!(
            "bands={} oa={:.6} aa={:.6} kappa={:.6}",
            bands.len(),
            m.overall_accuracy,
            m.average_accuracy,
            m.kappa
        );
    }
    Ok(())
}

fn cmd_sweep(a: SweepArgs, exec: Execution) -> CliResult<()> {
    let methods = a
        .methods
        .iter()
        .map(|m| parse_method(m))
        .collect::<CliResult<Vec<_>>>()?;
    for &f in &a.train_frac {
        if !(f > 0.0 && f < 1.0) {
            return Err(config(format!("train fraction must lie in (0, 1), got {f}")));
        }
    }
    let k_grid = experiment::k_grid(a.k_min.unwrap_or(a.step), a.k_max, a.step)?;
    let (table, _) = band_table(&a.scene, exec)?;
    let cfg = SweepConfig {
        methods,
        k_grid,
        fractions: a.train_frac,
        seed: a.seed,
        neighbors: a.neighbors,
        selector: selector_config(a.k_max, &a.selector),
    };
    let curve = experiment::sweep(&table, &cfg, exec)?;
    emit(a.out.as_deref(), &curve.to_csv())?;
    if a.out.is_some() {
        println!("rows={}", curve.rows.len());
    }
    Ok(())
}

fn cmd_synth(a: SynthArgs) -> CliResult<()> {
    let mut spec = match &a.spec {
        Some(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?;
            serde_json::from_str::<SceneSpec>(&text).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))?
        }
        None => SceneSpec::default(),
    };
    if let Some(seed) = a.seed {
        spec.seed = seed;
    }
    let scene = synth::generate_scene(&spec)?;

    // Stage all four files next to the target, then move them into place.
    let dir = match a.out.parent() {
        Some(d) if !d.as_os_str().is_empty() => d.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let name = a
        .out
        .file_name()
        .ok_or_else(|| config(format!("{} is not a file stem", a.out.display())))?;
    let staging = tempfile::tempdir_in(&dir).map_err(|e| Failure::Input(format!("{}: {e}", dir.display())))?;
    let staged = staging.path().join(name);
    synth::write_scene(&staged, &scene)?;
    for suffix in [".hsch", ".hscd", ".gt", ".truth.json"] {
        let from = with_suffix(&staged, suffix);
        let to = with_suffix(&a.out, suffix);
        fs::rename(&from, &to).map_err(|e| Failure::Input(format!("{}: {e}", to.display())))?;
    }
    println!(
        "bands={} rows={} cols={} classes={}",
        scene.cube.bands(),
        scene.cube.rows(),
        scene.cube.cols(),
        spec.class_count
    );
    Ok(())
}

fn cmd_info(a: InfoArgs, exec: Execution) -> CliResult<()> {
    let arity = match a.op.as_str() {
        "entropy" => 1,
        "mi" | "jmi" | "ii" | "nms" => 2,
        other => return Err(config(format!("unknown measure {other:?}"))),
    };
    if a.bands.len() != arity {
        return Err(config(format!("{} takes {arity} band(s), got {}", a.op, a.bands.len())));
    }
    let (table, _) = band_table(&a.scene, exec)?;
    if let Some(&b) = a.bands.iter().find(|&&b| b >= table.band_count()) {
        return Err(config(format!(
            "band {b} out of range for {} bands",
            table.band_count()
        )));
    }
    let v = |i: usize| table.band(a.bands[i]);
    let c = table.class_var();
    let value = match a.op.as_str() {
        "entropy" => infotheory::entropy(v(0))?,
        "mi" => infotheory::mutual_info(v(0), v(1))?,
        "jmi" => infotheory::joint_mutual_info(v(0), v(1), c)?,
        "ii" => infotheory::interaction_info(v(0), v(1), c)?,
        _ => infotheory::normalized_synergy(v(0), v(1), c, DEFAULT_EPS)?,
    };
    println!("{value:.6}");
    Ok(())
}
