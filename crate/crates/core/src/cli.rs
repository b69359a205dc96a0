//! Command-line front end: argument parsing, artifact writing, run
//! manifests, the ball cache and replay.
//!
//! Artifacts (CSV and JSON) depend only on the recorded configuration, so
//! repeated runs produce identical bytes. Timestamps and timings live in
//! `manifest.json` only.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::automaton::{growth_rate, GeodesicAutomaton};
use crate::ball::{enumerate_ball, BallIndex};
use crate::contraction::{
    classify_element, empirical_contraction_constant, is_D_contracting_segment, Classification, ContractionParams,
    Witness, DEFAULT_CAP, DEFAULT_GRID,
};
use crate::error::{Error, Result};
use crate::excursion::{
    excursion_of_element, excursion_samples, strong_independence_probe, summarize_loglaw, SpecialSubgroup,
};
use crate::genericity::{genericity_experiment_with_ball, Mode, DEFAULT_MAX_BALL};
use crate::group::{Element, Raag};
use crate::lemmas::{lemma_check, InstanceGen, LemmaId};
use crate::metric::{canonical_geodesic, enumerate_geodesics, spread_geodesics, PathSegment};

pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INPUT: i32 = 3;
pub const EXIT_RESOURCE: i32 = 4;
pub const EXIT_INTERNAL: i32 = 5;

pub const CACHE_ENV: &str = "RAAGKIT_CACHE_DIR";
const MANIFEST: &str = "manifest.json";

#[derive(Parser, Debug, Clone)]
#[command(name = "raagkit", version, about = "Word-metric experiments in right-angled Artin groups")]
pub struct Cli {
    /// Group definition file (`vertices: ...` / `edge: u v` lines).
    #[arg(long, global = true, conflicts_with = "builtin")]
    pub group: Option<PathBuf>,
    /// Built-in group: f2, z2, z3, z2-free-z, free:N or abelian:N.
    #[arg(long, global = true)]
    pub builtin: Option<String>,
    /// Directory for artifacts and the manifest.
    #[arg(long, global = true, default_value = "raagkit-out")]
    pub out: PathBuf,
    /// Worker threads (default: available cores). Never changes output.
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Largest ball enumerated exhaustively.
    #[arg(long, global = true, default_value_t = DEFAULT_MAX_BALL)]
    pub max_ball: usize,
    /// Wall-time budget; checked between radii, partial artifacts are kept.
    #[arg(long, global = true)]
    pub max_seconds: Option<u64>,
    /// Ball cache directory.
    #[arg(long, global = true, env = CACHE_ENV, default_value = ".raagkit-cache")]
    pub cache_dir: PathBuf,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ModeArg {
    Exhaustive,
    Sampled,
    Auto,
}

#[derive(Subcommand, Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "command")]
pub enum Command {
    /// Generators, edges, digest and automaton size.
    GroupInfo,
    /// Exact sphere and ball sizes.
    Growth {
        #[arg(long = "max-n")]
        max_n: usize,
    },
    /// Geodesics between two elements in lexicographic order.
    Geodesics {
        #[arg(long, default_value = "1")]
        from: String,
        #[arg(long)]
        to: String,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
        /// Also list this many geodesics spread through the full list.
        #[arg(long)]
        spread: Option<usize>,
    },
    /// Contraction test of the geodesic from `start` to `start * word`.
    ContractTest {
        #[arg(long, default_value = "1")]
        start: String,
        #[arg(long)]
        word: String,
        #[arg(long = "R")]
        r: usize,
        /// Single test at this D, reported with its witness.
        #[arg(long = "D")]
        d: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
        #[arg(long, default_value_t = DEFAULT_CAP)]
        cap: usize,
    },
    /// Classify one element or every element of a ball.
    Classify {
        #[arg(long, conflicts_with = "ball", required_unless_present = "ball")]
        element: Option<String>,
        #[arg(long)]
        ball: Option<usize>,
        #[arg(long = "D")]
        d: usize,
        #[arg(long = "R")]
        r: Option<usize>,
        #[arg(long, default_value_t = 4)]
        m: usize,
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
    },
    /// Fraction of elements of `B(n)` contracting at scale.
    Genericity {
        #[arg(long = "D")]
        d: usize,
        #[arg(long = "R")]
        r: Option<usize>,
        #[arg(long, default_value_t = 2)]
        m: usize,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, value_delimiter = ',')]
        grid: Option<Vec<usize>>,
        #[arg(long, value_enum, default_value_t = ModeArg::Exhaustive)]
        mode: ModeArg,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
        /// Load the ball from the cache, building it on a miss.
        #[arg(long)]
        use_cache: bool,
    },
    /// Empirical check of one projection or alignment inequality.
    LemmaCheck {
        /// contracting-nbd, projection-lipschitz, nearby, concat,
        /// concat-converse, hereditary or bigon.
        #[arg(long)]
        lemma: String,
        #[arg(long = "D")]
        d: usize,
        #[arg(long = "R")]
        r: Option<usize>,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 4)]
        segment_min: usize,
        #[arg(long, default_value_t = 8)]
        segment_max: usize,
        #[arg(long, default_value_t = 3)]
        point_radius: usize,
        #[arg(long, default_value_t = 25)]
        points_per_segment: usize,
        #[arg(long, default_value_t = 10)]
        cap: usize,
    },
    /// Coset excursions of sampled elements, or of one element.
    Excursion {
        /// Vertex names spanning the special subgroup.
        #[arg(long, value_delimiter = ',', required = true)]
        lambda: Vec<String>,
        #[arg(long = "K", default_value_t = 0)]
        k: usize,
        #[arg(long, value_delimiter = ',', required_unless_present = "element")]
        n: Vec<usize>,
        #[arg(long, default_value_t = 200)]
        samples: usize,
        #[arg(long, required_unless_present = "element")]
        seed: Option<u64>,
        #[arg(long, default_value_t = 200)]
        cap: usize,
        #[arg(long, conflicts_with_all = ["n", "seed"])]
        element: Option<String>,
        /// Fixed band for `E / ln n`; fitted from the largest `n` otherwise.
        #[arg(long, requires = "c2")]
        c1: Option<f64>,
        #[arg(long, requires = "c1")]
        c2: Option<f64>,
    },
    /// Largest projection of a coset slice onto the axis of `f`.
    ProbeIndependence {
        #[arg(long)]
        f: String,
        #[arg(long, value_delimiter = ',', required = true)]
        lambda: Vec<String>,
        #[arg(long, value_delimiter = ',', required = true)]
        r: Vec<usize>,
        #[arg(long, default_value_t = 5)]
        m: usize,
    },
    /// Build, validate or evict the ball cache of the group.
    Cache {
        #[command(subcommand)]
        action: CacheAction,
    },
    /// Re-run the configuration recorded in a manifest and compare outputs.
    Replay {
        manifest: PathBuf,
    },
}

#[derive(Subcommand, Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "action")]
pub enum CacheAction {
    Build {
        #[arg(long)]
        radius: usize,
    },
    Validate {
        #[arg(long)]
        radius: usize,
    },
    Evict,
}

/// Everything an artifact depends on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub group_source: String,
    pub group_definition: String,
    pub max_ball: usize,
    pub command: Command,
}

impl RunConfig {
    pub fn digest(&self) -> String {
        sha256_hex(&json_bytes(&serde_json::to_value(self).expect("config serializes")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub config_digest: String,
    pub group_digest: String,
    pub started: String,
    pub finished: String,
    pub elapsed_ms: u64,
    /// `complete`, `partial` (a resource limit stopped the run after some
    /// artifacts were written) or `failed`.
    pub status: String,
    pub message: Option<String>,
    /// Artifact file name to SHA-256.
    pub outputs: BTreeMap<String, String>,
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::input(format!("cannot read manifest {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| Error::input(format!("malformed manifest: {e}")))
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Usage(_) => EXIT_USAGE,
        Error::Input(_) | Error::Cache(_) | Error::Io(_) => EXIT_INPUT,
        Error::Resource { .. } => EXIT_RESOURCE,
        Error::Json(_) => EXIT_INTERNAL,
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}

pub fn run(cli: &Cli) -> Result<i32> {
    match cli.threads {
        Some(0) => Err(Error::usage("--threads must be positive")),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::usage(format!("cannot start thread pool: {e}")))?
            .install(|| dispatch(cli)),
        None => dispatch(cli),
    }
}

fn dispatch(cli: &Cli) -> Result<i32> {
    let ctx = Ctx {
        out: cli.out.clone(),
        cache_dir: cli.cache_dir.clone(),
        deadline: cli.max_seconds.map(|s| Instant::now() + Duration::from_secs(s)),
    };
    if let Command::Replay { manifest } = &cli.command {
        return replay(manifest, &ctx);
    }
    let (g, source) = load_group(cli)?;
    let config = RunConfig {
        group_source: source,
        group_definition: g.to_definition(),
        max_ball: cli.max_ball,
        command: cli.command.clone(),
    };
    let (manifest, code) = execute(&config, &g, &ctx)?;
    for (name, digest) in &manifest.outputs {
        println!("wrote {} (sha256 {})", ctx.out.join(name).display(), &digest[..12]);
    }
    if let Some(m) = &manifest.message {
        eprintln!("{}: {m}", manifest.status);
    }
    Ok(code)
}

fn load_group(cli: &Cli) -> Result<(Raag, String)> {
    match (&cli.group, &cli.builtin) {
        (Some(p), None) => Ok((Raag::load(p)?, format!("file:{}", p.display()))),
        (None, Some(b)) => Ok((builtin(b)?, format!("builtin:{b}"))),
        _ => Err(Error::usage("give exactly one of --group or --builtin")),
    }
}

pub fn builtin(name: &str) -> Result<Raag> {
    let count = |s: &str| -> Result<usize> {
        s.parse::<usize>()
            .ok()
            .filter(|&n| (1..=26).contains(&n))
            .ok_or_else(|| Error::usage(format!("bad rank in {name:?}")))
    };
    match name {
        "f2" => Ok(Raag::free(2)),
        "z2" => Ok(Raag::free_abelian(2)),
        "z3" => Ok(Raag::free_abelian(3)),
        "z2-free-z" => Ok(Raag::z2_free_z()),
        _ => match name.split_once(':') {
            Some(("free", n)) => Ok(Raag::free(count(n)?)),
            Some(("abelian", n)) => Ok(Raag::free_abelian(count(n)?)),
            _ => Err(Error::usage(format!("unknown builtin group {name:?}"))),
        },
    }
}

struct Ctx {
    out: PathBuf,
    cache_dir: PathBuf,
    deadline: Option<Instant>,
}

impl Ctx {
    fn expired(&self) -> bool {
        self.deadline.is_some_and(|d| Instant::now() >= d)
    }
}

/// Artifacts of one command. `stopped` names the limit that cut it short.
#[derive(Default)]
struct Outcome {
    files: Vec<(String, Vec<u8>)>,
    stopped: Option<String>,
}

impl Outcome {
    fn json(mut self, name: &str, v: &Value) -> Self {
        self.files.push((name.to_string(), json_bytes(v)));
        self
    }

    fn csv(mut self, name: &str, header: &[&str], rows: &[Vec<String>]) -> Result<Self> {
        self.files.push((name.to_string(), csv_bytes(header, rows)?));
        Ok(self)
    }
}

/// Run `config`, write its artifacts and manifest, and return the manifest
/// and exit code. Errors after the output directory exists still produce a
/// manifest with status `failed`.
fn execute(config: &RunConfig, g: &Raag, ctx: &Ctx) -> Result<(RunManifest, i32)> {
    std::fs::create_dir_all(&ctx.out)?;
    let started = chrono::Utc::now();
    let clock = Instant::now();
    let result = command(&config.command, g, config.max_ball, ctx);
    let mut outputs = BTreeMap::new();
    let (status, message, code, err) = match result {
        Ok(outcome) => {
            for (name, bytes) in &outcome.files {
                write_atomic(&ctx.out.join(name), bytes)?;
                outputs.insert(name.clone(), sha256_hex(bytes));
            }
            match outcome.stopped {
                None => ("complete", None, 0, None),
                Some(m) => ("partial", Some(m), EXIT_RESOURCE, None),
            }
        }
        Err(e) => ("failed", Some(e.to_string()), exit_code(&e), Some(e)),
    };
    let manifest = RunManifest {
        tool: "raagkit".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        config_digest: config.digest(),
        config: config.clone(),
        group_digest: g.digest().to_string(),
        started: started.to_rfc3339(),
        finished: chrono::Utc::now().to_rfc3339(),
        elapsed_ms: clock.elapsed().as_millis() as u64,
        status: status.into(),
        message,
        outputs,
    };
    write_atomic(&ctx.out.join(MANIFEST), &json_bytes(&serde_json::to_value(&manifest)?))?;
    match err {
        Some(e) => Err(e),
        None => Ok((manifest, code)),
    }
}

fn replay(path: &Path, ctx: &Ctx) -> Result<i32> {
    let old = read_manifest(path)?;
    if matches!(old.config.command, Command::Replay { .. }) {
        return Err(Error::usage("cannot replay a replay"));
    }
    let g = Raag::parse(&old.config.group_definition)?;
    if g.digest() != old.group_digest {
        return Err(Error::input("group definition does not match the recorded digest"));
    }
    let (new, code) = execute(&old.config, &g, ctx)?;
    let mut same = new.outputs.len() == old.outputs.len();
    for (name, digest) in &old.outputs {
        let ok = new.outputs.get(name) == Some(digest);
        same &= ok;
        println!("{} {name}", if ok { "match" } else { "MISMATCH" });
    }
    if code != 0 {
        return Ok(code);
    }
    Ok(if same { 0 } else { EXIT_INTERNAL })
}

fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = path.with_extension("partial");
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(tmp, path)?;
    Ok(())
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

/// Pretty JSON with sorted keys and a trailing newline.
pub fn json_bytes(v: &Value) -> Vec<u8> {
    let mut s = serde_json::to_string_pretty(v).expect("JSON values serialize");
    s.push('\n');
    s.into_bytes()
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| Error::Io(std::io::Error::other(e));
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| Error::Io(e.into_error()))
}

fn big(n: &BigUint) -> Value {
    Value::String(n.to_string())
}

fn grid_or_default(grid: &Option<Vec<usize>>, r: usize) -> Vec<usize> {
    grid.clone().unwrap_or_else(|| DEFAULT_GRID.iter().copied().filter(|&d| d < r).collect())
}

fn path_json(g: &Raag, p: &PathSegment) -> Value {
    json!({
        "start": g.format(p.first()),
        "end": g.format(p.last()),
        "labels": g.format_word(&p.labels(g)),
    })
}

fn witness_json(g: &Raag, d: usize, w: &Witness) -> Value {
    json!({
        "D": d,
        "kappa": path_json(g, &w.kappa),
        "distance": w.distance,
        "projection_diameter": w.projection_diameter,
    })
}

fn subgroup(g: &Raag, lambda: &[String]) -> Result<SpecialSubgroup> {
    let names: Vec<&str> = lambda.iter().map(String::as_str).collect();
    SpecialSubgroup::from_names(g, &names)
}

fn cache_path(dir: &Path, g: &Raag, radius: usize) -> PathBuf {
    dir.join(g.digest()).join(format!("ball-r{radius}.txt"))
}

/// Load the cached ball of `radius`, rebuilding and rewriting it when it is
/// missing or fails validation.
fn cached_ball(ctx: &Ctx, g: &Raag, aut: &GeodesicAutomaton, radius: usize, max_ball: usize) -> Result<BallIndex> {
    let path = cache_path(&ctx.cache_dir, g, radius);
    if path.exists() {
        match BallIndex::read_cache(g, aut, &path) {
            Ok(b) => return Ok(b),
            Err(e) => eprintln!("rebuilding {}: {e}", path.display()),
        }
    }
    let ball = enumerate_ball(g, aut, radius, Some(max_ball))?;
    ball.write_cache(g, &path)?;
    Ok(ball)
}

fn command(cmd: &Command, g: &Raag, max_ball: usize, ctx: &Ctx) -> Result<Outcome> {
    let aut = GeodesicAutomaton::build(g);
    match cmd {
        Command::GroupInfo => {
            let mut edges = Vec::new();
            for u in 0..g.rank() {
                for v in u + 1..g.rank() {
                    if g.commutes(u, v) {
                        edges.push(json!([g.name(u), g.name(v)]));
                    }
                }
            }
            let spheres: Vec<Value> = aut.sphere_counts(5).iter().map(big).collect();
            Ok(Outcome::default().json(
                "group-info.json",
                &json!({
                    "vertices": g.names(),
                    "edges": edges,
                    "digest": g.digest(),
                    "rank": g.rank(),
                    "abelian": g.is_abelian(),
                    "automaton_states": aut.state_count(),
                    "sphere_sizes": spheres,
                }),
            ))
        }
        Command::Growth { max_n } => {
            let counts = aut.sphere_counts(*max_n);
            let mut ball = BigUint::default();
            let mut rows = Vec::new();
            for (n, s) in counts.iter().enumerate() {
                ball += s;
                rows.push(vec![n.to_string(), s.to_string(), ball.to_string()]);
            }
            let mut out = Outcome::default().csv("growth.csv", &["n", "sphere", "ball"], &rows)?;
            if *max_n >= 4 {
                let rep = growth_rate(g, &aut, *max_n)?;
                out = out.json(
                    "growth.json",
                    &json!({
                        "n_max": rep.n_max,
                        "sphere_sizes": rep.sphere_sizes.iter().map(big).collect::<Vec<_>>(),
                        "ball_sizes": rep.ball_sizes.iter().map(big).collect::<Vec<_>>(),
                        "sphere_ratios": rep.sphere_ratios,
                        "lambda_hat": rep.lambda_hat,
                        "polynomial": rep.polynomial,
                    }),
                );
            }
            Ok(out)
        }
        Command::Geodesics { from, to, cap, spread } => {
            let (x, y) = (g.element(from)?, g.element(to)?);
            let en = enumerate_geodesics(g, &x, &y, *cap)?;
            let words: Vec<String> = en.paths.iter().map(|p| g.format_word(&p.labels(g))).collect();
            let rows: Vec<Vec<String>> =
                words.iter().enumerate().map(|(i, w)| vec![i.to_string(), w.clone()]).collect();
            let mut doc = json!({
                "from": g.format(&x),
                "to": g.format(&y),
                "count": big(&en.count),
                "truncated": en.truncated,
                "geodesics": words,
            });
            if let Some(k) = spread {
                let s = spread_geodesics(g, &x, &y, *k)?;
                doc["spread"] = s.iter().map(|p| Value::String(g.format_word(&p.labels(g)))).collect();
            }
            Ok(Outcome::default().csv("geodesics.csv", &["index", "word"], &rows)?.json("geodesics.json", &doc))
        }
        Command::ContractTest { start, word, r, d, grid, cap } => {
            let s = g.element(start)?;
            let w = g.element(word)?;
            let gamma = canonical_geodesic(g, &s, &g.multiply(&s, &w)?)?;
            let grid = grid_or_default(grid, *r);
            let rep = empirical_contraction_constant(g, &gamma, *r, &grid, *cap)?;
            let mut doc = json!({
                "segment_endpoints": [g.format(gamma.first()), g.format(gamma.last())],
                "segment_length": gamma.len() - 1,
                "D_grid": rep.d_grid,
                "R": rep.r,
                "caps": { "geodesic_cap": rep.geodesic_cap },
                "D_star": rep.d_star,
                "witnesses": rep.witnesses.iter().map(|(d, w)| witness_json(g, *d, w)).collect::<Vec<_>>(),
            });
            if let Some(d) = d {
                let p = ContractionParams { geodesic_cap: *cap, ..ContractionParams::new(*d, *r, vec![*d])? };
                let t = is_D_contracting_segment(g, &gamma, &p)?;
                doc["test"] = json!({
                    "D": d,
                    "passed": t.passed,
                    "witness": t.witness.as_ref().map(|w| witness_json(g, *d, w)),
                });
            }
            Ok(Outcome::default().json("contract-test.json", &doc))
        }
        Command::Classify { element, ball, d, r, m, grid } => {
            let r = r.unwrap_or(2 * d);
            let p = ContractionParams::new(*d, r, grid_or_default(grid, r))?;
            let xs: Vec<Element> = match (element, ball) {
                (Some(e), _) => vec![g.element(e)?],
                (None, Some(n)) => enumerate_ball(g, &aut, *n, Some(max_ball))?.iter().cloned().collect(),
                (None, None) => return Err(Error::usage("give --element or --ball")),
            };
            use rayon::prelude::*;
            let classes: Vec<Classification> =
                xs.par_iter().map(|x| classify_element(g, x, &p, *m)).collect::<Result<_>>()?;
            let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
            let mut rows = Vec::new();
            for (x, c) in xs.iter().zip(&classes) {
                *counts.entry(c.label()).or_default() += 1;
                let d_star = match c {
                    Classification::Contracting { d_star } => d_star.to_string(),
                    _ => String::new(),
                };
                rows.push(vec![g.format(x), x.len().to_string(), c.label().to_string(), d_star]);
            }
            let doc = json!({ "D": d, "R": r, "m": m, "D_grid": p.d_grid, "total": xs.len(), "counts": counts });
            Ok(Outcome::default()
                .csv("classify.csv", &["element", "length", "class", "d_star"], &rows)?
                .json("classify.json", &doc))
        }
        Command::Genericity { d, r, m, n, grid, mode, samples, seed, use_cache } => {
            let r = r.unwrap_or(d + 1);
            let p = ContractionParams::new(*d, r, grid_or_default(grid, r))?;
            let mode = match (mode, seed) {
                (ModeArg::Exhaustive, _) => Mode::Exhaustive,
                (ModeArg::Sampled, Some(seed)) => Mode::Sampled { count: *samples, seed: *seed },
                (ModeArg::Auto, Some(seed)) => Mode::Auto { count: *samples, seed: *seed },
                (_, None) => return Err(Error::usage("sampled modes need --seed")),
            };
            let counts = aut.sphere_counts(n.iter().copied().max().unwrap_or(0));
            let fits = |k: usize| counts[..=k].iter().sum::<BigUint>() <= BigUint::from(max_ball);
            let top = match mode {
                Mode::Sampled { .. } => None,
                _ => n.iter().copied().filter(|&k| fits(k)).max(),
            };
            let ball = match top {
                Some(t) if *use_cache => Some(cached_ball(ctx, g, &aut, t, max_ball)?),
                Some(t) => Some(enumerate_ball(g, &aut, t, Some(max_ball))?),
                None => None,
            };
            let mut rows = Vec::new();
            let mut stopped = None;
            for &k in n {
                match genericity_experiment_with_ball(g, &aut, &[k], &p, *m, mode, max_ball, ball.as_ref()) {
                    Ok(mut r) => rows.append(&mut r),
                    Err(e @ Error::Resource { .. }) if !rows.is_empty() => {
                        stopped = Some(format!("n = {k}: {e}"));
                        break;
                    }
                    Err(e) => return Err(e),
                }
                if ctx.expired() && k != *n.last().unwrap() {
                    stopped = Some(format!("wall-time limit reached after n = {k}"));
                    break;
                }
            }
            let csv_rows: Vec<Vec<String>> = rows
                .iter()
                .map(|row| {
                    vec![
                        row.n.to_string(),
                        row.ball_size.to_string(),
                        row.sampled.to_string(),
                        row.contracting.to_string(),
                        format!("{}/{}", row.fraction.numer(), row.fraction.denom()),
                        format!("{:.6}", row.fraction_f64()),
                        row.d.to_string(),
                        row.r.to_string(),
                        row.m.to_string(),
                        row.cap.to_string(),
                        row.seed.map(|s| s.to_string()).unwrap_or_default(),
                        row.exhaustive.to_string(),
                    ]
                })
                .collect();
            let header = [
                "n", "ball_size", "sampled", "contracting", "fraction", "fraction_decimal", "D", "R", "m", "cap",
                "seed", "exhaustive",
            ];
            let doc = json!({
                "rows": rows.iter().map(|row| json!({
                    "n": row.n,
                    "ball_size": big(&row.ball_size),
                    "sampled": row.sampled,
                    "contracting": row.contracting,
                    "fraction": format!("{}/{}", row.fraction.numer(), row.fraction.denom()),
                    "D": row.d,
                    "R": row.r,
                    "m": row.m,
                    "cap": row.cap,
                    "seed": row.seed,
                    "exhaustive": row.exhaustive,
                })).collect::<Vec<_>>(),
                "D_grid": p.d_grid,
                "complete": stopped.is_none(),
            });
            let mut out = Outcome::default().csv("genericity.csv", &header, &csv_rows)?.json("genericity.json", &doc);
            out.stopped = stopped;
            Ok(out)
        }
        Command::LemmaCheck {
            lemma,
            d,
            r,
            trials,
            seed,
            segment_min,
            segment_max,
            point_radius,
            points_per_segment,
            cap,
        } => {
            let id: LemmaId = lemma.parse()?;
            let gen = InstanceGen {
                r: r.unwrap_or(d + 2),
                segment_len: (*segment_min, *segment_max),
                point_radius: *point_radius,
                points_per_segment: *points_per_segment,
                cap: *cap,
                ..InstanceGen::new(*d)
            };
            let rep = lemma_check(g, id, &gen, *trials, *seed)?;
            Ok(Outcome::default().json("lemma-check.json", &serde_json::to_value(&rep)?))
        }
        Command::Excursion { lambda, k, n, samples, seed, cap, element, c1, c2 } => {
            let h = subgroup(g, lambda)?;
            if let Some(e) = element {
                let rep = excursion_of_element(g, &g.element(e)?, &h, *k, *cap)?;
                let (z, i, j, word) = &rep.witness;
                let doc = json!({
                    "element": g.format(&rep.g),
                    "lambda": lambda,
                    "K": k,
                    "excursion": rep.excursion,
                    "witness": {
                        "coset_rep": g.format(z),
                        "i": i,
                        "j": j,
                        "geodesic": g.format_word(word),
                    },
                    "geodesics_examined": rep.geodesics_examined,
                    "truncated": rep.truncated,
                });
                return Ok(Outcome::default().json("excursion.json", &doc));
            }
            let seed = seed.ok_or_else(|| Error::usage("--seed is required"))?;
            if n.is_empty() || *samples == 0 {
                return Err(Error::usage("need --n and a positive --samples"));
            }
            let band = c1.zip(*c2);
            let mut all = Vec::new();
            let mut stopped = None;
            for (idx, &radius) in n.iter().enumerate() {
                all.extend(excursion_samples(g, &aut, radius, *samples, &h, *k, seed, *cap)?);
                if ctx.expired() && idx + 1 < n.len() {
                    stopped = Some(format!("wall-time limit reached after n = {radius}"));
                    break;
                }
            }
            let rep = summarize_loglaw(all, band, seed, *cap, *k)?;
            let rows: Vec<Vec<String>> = rep
                .samples
                .iter()
                .map(|s| {
                    vec![
                        s.n.to_string(),
                        s.sample_index.to_string(),
                        g.format(&s.g),
                        s.k.to_string(),
                        s.excursion.to_string(),
                        s.truncated.to_string(),
                    ]
                })
                .collect();
            let doc = json!({
                "lambda": lambda,
                "K": k,
                "seed": seed,
                "cap": cap,
                "samples_per_n": samples,
                "c1": rep.c1,
                "c2": rep.c2,
                "fitted": rep.fitted,
                "rows": serde_json::to_value(&rep.rows)?,
                "complete": stopped.is_none(),
            });
            let mut out = Outcome::default()
                .csv("excursion.csv", &["n", "sample_index", "g_normal_form", "K", "excursion", "truncated"], &rows)?
                .json("excursion.json", &doc);
            out.stopped = stopped;
            Ok(out)
        }
        Command::ProbeIndependence { f, lambda, r, m } => {
            let h = subgroup(g, lambda)?;
            let fx = g.element(f)?;
            let mut rows = Vec::new();
            let mut vals = Vec::new();
            for &radius in r {
                let p = strong_independence_probe(g, &fx, &h, radius, *m)?;
                rows.push(vec![radius.to_string(), p.value.to_string(), g.format(&p.coset_rep)]);
                vals.push(json!({ "r": radius, "value": p.value, "coset_rep": g.format(&p.coset_rep) }));
            }
            let doc = json!({ "f": g.format(&fx), "lambda": lambda, "m": m, "rows": vals });
            Ok(Outcome::default()
                .csv("probe.csv", &["r", "value", "coset_rep"], &rows)?
                .json("probe.json", &doc))
        }
        Command::Cache { action } => cache(action, g, &aut, max_ball, ctx),
        Command::Replay { .. } => Err(Error::usage("replay cannot be nested")),
    }
}

fn cache(action: &CacheAction, g: &Raag, aut: &GeodesicAutomaton, max_ball: usize, ctx: &Ctx) -> Result<Outcome> {
    let dir = ctx.cache_dir.join(g.digest());
    // paths in the artifact are relative to the cache directory, which is not part of the config
    let rel = |p: &Path| p.strip_prefix(&ctx.cache_dir).unwrap_or(p).display().to_string();
    let doc = match action {
        CacheAction::Build { radius } => {
            let path = cache_path(&ctx.cache_dir, g, *radius);
            // cache state before the run stays out of the artifact
            let mut cached = None;
            if path.exists() {
                match BallIndex::read_cache(g, aut, &path) {
                    Ok(ball) => {
                        eprintln!("cache hit {}", path.display());
                        cached = Some(ball.len());
                    }
                    Err(e) => eprintln!("rebuilding {}: {e}", path.display()),
                }
            }
            let elements = match cached {
                Some(n) => n,
                None => match enumerate_ball(g, aut, *radius, Some(max_ball)) {
                    Ok(ball) => {
                        ball.write_cache(g, &path)?;
                        ball.len()
                    }
                    Err(Error::Resource { message, completed_radius: Some(done) }) => {
                        let ball = enumerate_ball(g, aut, done, None)?;
                        let partial = cache_path(&ctx.cache_dir, g, done);
                        ball.write_cache(g, &partial)?;
                        let mut out = Outcome::default().json(
                            "cache.json",
                            &json!({ "action": "build", "radius": done, "requested": radius,
                                     "path": rel(&partial), "elements": ball.len() }),
                        );
                        out.stopped = Some(format!("{message}; cached radius {done}"));
                        return Ok(out);
                    }
                    Err(e) => return Err(e),
                },
            };
            json!({ "action": "build", "radius": radius, "path": rel(&path), "elements": elements })
        }
        CacheAction::Validate { radius } => {
            let path = cache_path(&ctx.cache_dir, g, *radius);
            let ball = BallIndex::read_cache(g, aut, &path)?;
            json!({ "action": "validate", "radius": radius, "elements": ball.len(), "valid": true })
        }
        CacheAction::Evict => {
            if dir.exists() {
                std::fs::remove_dir_all(&dir)?;
            } else {
                eprintln!("nothing cached at {}", dir.display());
            }
            json!({ "action": "evict", "path": rel(&dir) })
        }
    };
    Ok(Outcome::default().json("cache.json", &doc))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_uses_lf_and_quotes() {
        let b = csv_bytes(&["a", "b"], &[vec!["1".into(), "x,y".into()]]).unwrap();
        assert_eq!(String::from_utf8(b).unwrap(), "a,b\n1,\"x,y\"\n");
    }

    #[test]
    fn json_keys_are_sorted() {
        let s = String::from_utf8(json_bytes(&json!({"b": 1, "a": {"d": 2, "c": 3}}))).unwrap();
        assert!(s.find("\"a\"").unwrap() < s.find("\"b\"").unwrap());
        assert!(s.find("\"c\"").unwrap() < s.find("\"d\"").unwrap());
        assert!(s.ends_with("}\n"));
    }

    #[test]
    fn builtins() {
        assert_eq!(builtin("z2-free-z").unwrap().digest(), Raag::z2_free_z().digest());
        assert_eq!(builtin("free:3").unwrap().rank(), 3);
        assert!(builtin("free:0").is_err());
        assert!(builtin("torus").is_err());
    }

    #[test]
    fn config_round_trips_through_json() {
        let cli = Cli::try_parse_from(["raagkit", "--builtin", "f2", "excursion", "--lambda", "a", "--n", "4,8", "--seed", "3"])
            .unwrap();
        let cfg = RunConfig {
            group_source: "builtin:f2".into(),
            group_definition: Raag::free(2).to_definition(),
            max_ball: cli.max_ball,
            command: cli.command,
        };
        let back: RunConfig = serde_json::from_slice(&json_bytes(&serde_json::to_value(&cfg).unwrap())).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.digest(), cfg.digest());
    }
}
