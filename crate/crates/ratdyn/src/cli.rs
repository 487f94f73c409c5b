//! The `ratdyn` command line. Exit codes: 0 on success, 1 on usage errors,
//! 2 when a computation fails.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{json, Value};

use ratdyn_core::conformal::{leading_pair, EigenConfig, SphereGrid, SymbolicTransfer, TransferModel};
use ratdyn_core::dimension::{dvl_check, RadiusGrid, WeightedCloud};
use ratdyn_core::induced::{abramov_entropy, build_first_return, folklore_acip, integrability, AcipConfig, InducedConfig};
use ratdyn_core::models::{Interval, SymbolicModel};
use ratdyn_core::orbits::{BackwardSampler, SphericalSampler, SymbolicSampler};
use ratdyn_core::partitions::{build_cylinder_tree, code_entropy, distribute, refine_and_code};
use ratdyn_core::{rng, ConstPotential, RationalMap};

use crate::drivers;
use crate::formats::{self, num};
use crate::model::{MapSpec, Model, ModelKind};
use crate::registry;
use crate::verify::{verify, VerifyConfig};

#[derive(Debug, Parser)]
#[command(name = "ratdyn", version, about = "Conformal measures, pressure and induced maps for rational maps")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pressure curve P(t) = log λ(t) as CSV.
    Pressure(PressureArgs),
    /// Leading eigenvalue and eigenmeasure at one (t, φ) as JSON.
    Conformal(ConformalArgs),
    /// Lyapunov exponent from Birkhoff averages.
    Lyapunov(LyapunovArgs),
    /// First-return Markov map on a base interval, with its acip.
    Induce(InduceArgs),
    /// Finite partition from the cylinder tree of an induced map.
    Partition(PartitionArgs),
    /// Local dimension scan of the conformal measure as CSV.
    Dimension(DimensionArgs),
    /// Equivalence checks on a registered benchmark case.
    Verify(VerifyArgs),
    /// Registered benchmark cases.
    List,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    /// Map file (JSON with `num` and `den` coefficient lists) or a registered case name.
    #[arg(long)]
    pub map: String,
    /// Model the map is studied through; detected from the map if absent.
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    /// Output file; standard output if absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EigenArgs {
    /// Cells of the transfer matrix (symbolic models) or grid resolution (sphere).
    #[arg(long)]
    pub grid: Option<usize>,
    /// Power-iteration sweep limit.
    #[arg(long, default_value_t = 10_000)]
    pub iters: usize,
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl EigenArgs {
    fn config(&self) -> EigenConfig {
        EigenConfig { tol: self.tol, max_sweeps: self.iters }
    }
}

#[derive(Debug, Args)]
pub struct PressureArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub eigen: EigenArgs,
    /// Inclusive grid `start:stop:step`.
    #[arg(long, default_value = "0:2:0.25", value_parser = parse_grid)]
    pub t_grid: TGrid,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi_const: f64,
}

#[derive(Debug, Args)]
pub struct ConformalArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub eigen: EigenArgs,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    pub t: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub phi_const: f64,
}

#[derive(Debug, Args)]
pub struct LyapunovArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, default_value_t = 100)]
    pub samples: usize,
    #[arg(long, default_value_t = 10_000)]
    pub steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Start sphere orbits at spherical-Lebesgue points instead of backward-walk endpoints.
    #[arg(long)]
    pub lebesgue: bool,
}

#[derive(Debug, Args)]
pub struct InduceArgs {
    #[command(flatten)]
    pub map: MapArgs,
    /// Base interval `lo:hi` in the symbolic coordinate, as fractions.
    #[arg(long, value_parser = parse_base)]
    pub base: Option<Interval>,
    /// Deepest return time explored.
    #[arg(long, default_value_t = 40)]
    pub iters: usize,
    /// Cells of the acip on the base.
    #[arg(long, default_value_t = 1024)]
    pub grid: usize,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
}

#[derive(Debug, Args)]
pub struct PartitionArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, value_parser = parse_base)]
    pub base: Option<Interval>,
    /// Depth of the cylinder tree.
    #[arg(long, default_value_t = 10)]
    pub depth: usize,
    /// Also estimate the code entropy from this many orbit samples.
    #[arg(long, default_value_t = 0)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Symbolic coordinate whose code is printed.
    #[arg(long)]
    pub point: Option<f64>,
    #[arg(long, default_value_t = 24)]
    pub length: usize,
}

#[derive(Debug, Args)]
pub struct DimensionArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[command(flatten)]
    pub eigen: EigenArgs,
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phi_const: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub centers: usize,
    /// Largest scan radius.
    #[arg(long)]
    pub r0: Option<f64>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Registered case name.
    #[arg(long)]
    pub case: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Cells of the conformal measure.
    #[arg(long)]
    pub grid: Option<usize>,
    /// Replaces the case's t.
    #[arg(long, allow_negative_numbers = true)]
    pub t: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    pub phi_const: Option<f64>,
    /// Pesin residual tolerance.
    #[arg(long, default_value_t = 3e-2)]
    pub tol: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TGrid(pub Vec<f64>);

fn parse_grid(s: &str) -> Result<TGrid, String> {
    let parts: Vec<f64> = s
        .split(':')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("{p:?}: {e}")))
        .collect::<Result<_, _>>()?;
    let [a, b, h] = parts[..] else {
        return Err("expected start:stop:step".into());
    };
    if !(h > 0.0) || !(b >= a) || !a.is_finite() || !b.is_finite() {
        return Err("need start <= stop and a positive step".into());
    }
    let n = ((b - a) / h + 1e-9).floor() as usize;
    Ok(TGrid((0..=n).map(|k| a + k as f64 * h).collect()))
}

fn parse_base(s: &str) -> Result<Interval, String> {
    formats::parse_interval(s).ok_or_else(|| format!("{s:?} is not an interval lo:hi of fractions with lo < hi"))
}

pub enum Failure {
    Usage(String),
    Compute(anyhow::Error),
}

impl From<ratdyn_core::Error> for Failure {
    fn from(e: ratdyn_core::Error) -> Self {
        Failure::Compute(e.into())
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Compute(e)
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Compute(e.into())
    }
}

type Outcome = Result<(), Failure>;

/// Parses `args` (program name first), runs the command and returns the exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            1
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error: {e:#}");
            2
        }
    }
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Pressure(a) => pressure(a),
        Command::Conformal(a) => conformal(a),
        Command::Lyapunov(a) => lyapunov(a),
        Command::Induce(a) => induce(a),
        Command::Partition(a) => partition(a),
        Command::Dimension(a) => dimension(a),
        Command::Verify(a) => verify_case(a),
        Command::List => list(),
    }
}

/// The map behind `--map`: a file if one exists at that path, otherwise a
/// registered case.
struct Loaded {
    model: Model,
    case: Option<registry::BenchmarkCase>,
}

fn load(args: &MapArgs) -> Result<Loaded, Failure> {
    let path = Path::new(&args.map);
    if path.exists() {
        let spec = MapSpec::load(path).map_err(|e| Failure::Usage(format!("--map {}: {e:#}", args.map)))?;
        let model = match args.model {
            Some(kind) => Model::new(&spec, Some(kind)),
            None => Model::detect(&spec),
        }
        .map_err(|e| Failure::Usage(format!("--model: {e:#}")))?;
        return Ok(Loaded { model, case: None });
    }
    let Some(case) = registry::find(&args.map) else {
        return Err(Failure::Usage(format!("--map {}: no such file or registered case", args.map)));
    };
    let kind = args.model.or(case.model);
    let model = Model::new(&case.spec, kind).map_err(|e| Failure::Usage(format!("--model: {e:#}")))?;
    Ok(Loaded { model, case: Some(case) })
}

fn output(out: &Option<PathBuf>) -> Result<Box<dyn Write>, Failure> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Failure::Usage(format!("--out {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn write_json(out: &Option<PathBuf>, v: &Value) -> Outcome {
    let mut w = output(out)?;
    serde_json::to_writer_pretty(&mut w, v).map_err(anyhow::Error::from)?;
    writeln!(w)?;
    w.flush()?;
    Ok(())
}

const SPHERE_GRID: usize = 64;
const JULIA_POINTS: usize = 2000;
const SAMPLES_PER_CELL: usize = 4;

fn symbolic_resolution<M: SymbolicModel>(m: &M, grid: Option<usize>) -> usize {
    grid.unwrap_or(2048 * m.symbolic().branches())
}

fn sphere_transfer(f: &RationalMap, grid: Option<usize>, seed: u64) -> Result<ratdyn_core::conformal::SphereTransfer, Failure> {
    let cloud = drivers::julia_support(f, JULIA_POINTS, seed)?;
    Ok(drivers::sphere_transfer(f, SphereGrid::new(grid.unwrap_or(SPHERE_GRID))?, &cloud, SAMPLES_PER_CELL)?)
}

fn pressure(a: PressureArgs) -> Outcome {
    let loaded = load(&a.map)?;
    let cfg = a.eigen.config();
    let curve = with_model!(&loaded.model,
        m => drivers::pressure_curve(&SymbolicTransfer::new(m, symbolic_resolution(m, a.eigen.grid))?, &a.t_grid.0, a.phi_const, &cfg)?,
        f => drivers::pressure_curve(&sphere_transfer(f, a.eigen.grid, a.eigen.seed)?, &a.t_grid.0, a.phi_const, &cfg)?
    );
    let w = output(&a.map.out)?;
    formats::write_pressure_csv(w, &curve)?;
    Ok(())
}

fn conformal(a: ConformalArgs) -> Outcome {
    let loaded = load(&a.map)?;
    let cfg = a.eigen.config();
    let phi = ConstPotential(a.phi_const);
    let pair = with_model!(&loaded.model,
        m => leading_pair(&SymbolicTransfer::new(m, symbolic_resolution(m, a.eigen.grid))?.assemble(a.t, &phi)?, &cfg)?,
        f => leading_pair(&sphere_transfer(f, a.eigen.grid, a.eigen.seed)?.assemble(a.t, &phi)?, &cfg)?
    );
    let v = json!({
        "map": a.map.map,
        "t": num(a.t),
        "phi_const": num(a.phi_const),
        "eigenvalue": num(pair.eigenvalue),
        "pressure": num(pair.eigenvalue.ln()),
        "residual": num(pair.residual),
        "sweeps": pair.sweeps,
        "exceptional_support": pair.exceptional_support,
        "seed": a.eigen.seed,
        "measure": formats::cell_measure_json(&pair.measure),
    });
    write_json(&a.map.out, &v)
}

fn lyapunov(a: LyapunovArgs) -> Outcome {
    if a.samples == 0 || a.steps == 0 {
        return Err(Failure::Usage("--samples and --steps must be positive".into()));
    }
    let loaded = load(&a.map)?;
    let (est, sampler) = with_model!(&loaded.model,
        m => (drivers::lyapunov(m.dynamics(), &SymbolicSampler { model: m }, a.steps, a.samples, a.seed)?, "symbolic"),
        f => if a.lebesgue {
            (drivers::lyapunov(f, &SphericalSampler, a.steps, a.samples, a.seed)?, "spherical-lebesgue")
        } else {
            (drivers::lyapunov(f, &BackwardSampler::from_fixed_point(f)?, a.steps, a.samples, a.seed)?, "backward-walk")
        }
    );
    let v = json!({
        "map": a.map.map,
        "chi": num(est.mean),
        "stderr": num(est.stderr),
        "samples": est.n_samples,
        "steps": est.n_steps,
        "seed": a.seed,
        "sampler": sampler,
    });
    write_json(&a.map.out, &v)
}

fn base_for(loaded: &Loaded, base: &Option<Interval>) -> Result<Interval, Failure> {
    base.clone()
        .or_else(|| loaded.case.as_ref().and_then(|c| c.base.clone()))
        .ok_or_else(|| Failure::Usage("--base is required for this map".into()))
}

fn symbolic_only(what: &str) -> Failure {
    Failure::Usage(format!("{what} needs --model circle, tent or disk"))
}

fn induce(a: InduceArgs) -> Outcome {
    let loaded = load(&a.map)?;
    let base = base_for(&loaded, &a.base)?;
    let config = InducedConfig { n_max: a.iters, ..InducedConfig::default() };
    let v = with_model!(&loaded.model,
        m => {
            let imap = build_first_return(m, &base, &config)?;
            let acip = folklore_acip(m, &imap, &AcipConfig { resolution: a.grid, tv_tol: a.tol, ..AcipConfig::default() })?;
            let integ = integrability(&imap);
            let mut v = formats::induced_json(&imap);
            v["map"] = json!(a.map.map);
            v["base"] = formats::interval(&base);
            v["return_time_sum"] = num(integ.sum);
            v["return_time_tail_bound"] = num(integ.tail_bound);
            v["integrable"] = json!(integ.complete);
            v["nested_or_disjoint"] = json!(imap.nested_or_disjoint());
            v["markov_onto"] = json!(imap.markov_onto());
            v["entropy"] = num(abramov_entropy(&imap, &acip));
            v["acip"] = json!({
                "density": formats::num_array(&acip.density),
                "lower": num(acip.lower),
                "upper": num(acip.upper),
            });
            v
        },
        _f => return Err(symbolic_only("induce"))
    );
    write_json(&a.map.out, &v)
}

fn partition(a: PartitionArgs) -> Outcome {
    let loaded = load(&a.map)?;
    let base = base_for(&loaded, &a.base)?;
    let v = with_model!(&loaded.model,
        m => {
            let imap = build_first_return(m, &base, &InducedConfig::default())?;
            let tree = build_cylinder_tree(&imap, a.depth);
            let degree = m.symbolic().branches();
            let p = distribute(&tree, degree)?;
            let check = p.verify(&tree);
            let mut v = json!({
                "map": a.map.map,
                "base": formats::interval(&base),
                "depth": a.depth,
                "cylinders": tree.nodes.len(),
                "tree_valid": tree.verify(),
                "checks": {
                    "at_most_d_plus_one": check.at_most_d_plus_one,
                    "base_alone": check.base_alone,
                    "injective": check.injective,
                    "last_avoids_base_image": check.last_avoids_base_image,
                    "each_cylinder_once": check.each_cylinder_once,
                },
                "partition": formats::partition_json(&p, &tree),
            });
            if a.samples > 0 {
                let coding_tree = build_cylinder_tree(&imap, a.depth.max(30));
                let coding = distribute(&coding_tree, degree)?;
                let h = code_entropy(m, &coding_tree, &coding, 8, a.samples, a.seed)?;
                v["code_entropy"] = num(h);
                v["seed"] = json!(a.seed);
            }
            if let Some(theta) = a.point {
                v["code"] = json!(formats::code_text(&refine_and_code(&tree, &p, theta, a.length)?));
            }
            v
        },
        _f => return Err(symbolic_only("partition"))
    );
    write_json(&a.map.out, &v)
}

fn dimension(a: DimensionArgs) -> Outcome {
    let loaded = load(&a.map)?;
    let known = loaded.case.as_ref().map(|c| c.known.clone()).unwrap_or_default();
    let (ref_t, ref_phi) = with_model!(&loaded.model, m => m.reference_pair(), _f => (2.0, 0.0));
    let t = a.t.or(known.t.map(|q| q.value)).unwrap_or(ref_t);
    let phi = a.phi_const.or(known.phi_const.map(|q| q.value)).unwrap_or(ref_phi);
    let r0 = a.r0.or(loaded.case.as_ref().map(|c| c.scan_r0)).unwrap_or(0.2);
    let cfg = a.eigen.config();
    let seed = a.eigen.seed;
    let mut w = output(&a.map.out)?;
    let report = with_model!(&loaded.model,
        m => {
            let pair = leading_pair(&SymbolicTransfer::new(m, symbolic_resolution(m, a.eigen.grid))?.assemble(t, &ConstPotential(phi))?, &cfg)?;
            let cloud = WeightedCloud::from_symbolic_cells(m, &pair.measure, 8)?;
            let chi = drivers::lyapunov(m.dynamics(), &SymbolicSampler { model: m }, 10_000, 100, rng::derive_seed(seed, 1))?;
            let centers = drivers::sample_points(&SymbolicSampler { model: m }, a.centers, rng::derive_seed(seed, 3))?;
            let scan = drivers::local_dimension(&cloud, &centers, &RadiusGrid::new(r0), rng::derive_seed(seed, 4))?;
            formats::write_scan_csv(&mut w, m.dynamics(), &scan)?;
            dvl_check(&scan, t * chi.mean + phi, chi.mean, 0.05)?
        },
        f => {
            let tm = sphere_transfer(f, a.eigen.grid, seed)?;
            let pair = leading_pair(&tm.assemble(t, &ConstPotential(phi))?, &cfg)?;
            let cloud = WeightedCloud::from_sphere_cells(f, &pair.measure)?;
            let sampler = BackwardSampler::from_fixed_point(f)?;
            let chi = drivers::lyapunov(f, &sampler, 10_000, 100, rng::derive_seed(seed, 1))?;
            let centers = drivers::sample_points(&sampler, a.centers, rng::derive_seed(seed, 3))?;
            let scan = drivers::local_dimension(&cloud, &centers, &RadiusGrid::new(r0), rng::derive_seed(seed, 4))?;
            formats::write_scan_csv(&mut w, f, &scan)?;
            dvl_check(&scan, t * chi.mean + phi, chi.mean, 0.05)?
        }
    );
    w.flush()?;
    eprintln!("{}", formats::dimension_report_json(&report));
    Ok(())
}

fn verify_case(a: VerifyArgs) -> Outcome {
    let case = registry::find(&a.case).ok_or_else(|| Failure::Usage(format!("--case {}: not a registered case", a.case)))?;
    let config = VerifyConfig { seed: a.seed, resolution: a.grid, t: a.t, phi_const: a.phi_const, pesin_tol: a.tol, ..VerifyConfig::default() };
    let report = verify(&case, &config)?;
    write_json(&a.out, &report.to_json())
}

fn list() -> Outcome {
    let mut out = io::stdout().lock();
    for c in registry::cases() {
        let model = c.model.map_or("sphere".to_string(), |k| format!("{k:?}").to_lowercase());
        writeln!(out, "{:<10} {:<7} {}", c.name, model, c.provenance)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn t_grid_is_inclusive() {
        assert_eq!(parse_grid("0:2:0.25").unwrap().0.len(), 9);
        assert_eq!(parse_grid("-1:1:1").unwrap().0, [-1.0, 0.0, 1.0]);
        assert!(parse_grid("1:0:0.5").is_err());
        assert!(parse_grid("0:1").is_err());
    }

    #[test]
    fn usage_errors_exit_one() {
        assert_eq!(run(["ratdyn", "pressure"]), 1);
        assert_eq!(run(["ratdyn", "pressure", "--map", "/nonexistent/map.json"]), 1);
        assert_eq!(run(["ratdyn", "verify", "--case", "nope"]), 1);
    }
}
