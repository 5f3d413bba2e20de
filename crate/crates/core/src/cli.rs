//! Command-line front end. Commands read and write plain text; output
//! vertex labels are original input indices.

use std::fs::File;
use std::io::{self, BufRead, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::collapse::{check_collapse, repeated_collapse, CollapseReport};
use crate::error::{Error, Result};
use crate::generate::{generate, GenSpec, Shape};
use crate::greedy::{fmt_real, greedy_permutation, GreedyPermutation};
use crate::metric::{MetricKind, PointCloud};
use crate::neighbor_graph::construct_edges;
use crate::sampling::{check_cone_convexity, check_covering};
use crate::persistence::{
    barcode_approx_check, compute_barcode, full_cech_filtration_l2, full_rips_filtration,
};
use crate::simplex_enum::{build_filtration_with, BuildOptions, FilteredComplex, Flavor};
use crate::sparse_balls::{BirthMode, SparseParams};

/// Exit status for a failed verification (`compare`, `collapse-check`).
pub const EXIT_VERIFY_FAILED: u8 = 1;
/// Exit status for bad input or arguments.
pub const EXIT_USAGE: u8 = 2;

#[derive(Debug, Parser)]
#[command(name = "sparse-nerve", version, about = "Sparse filtrations and their persistence barcodes")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a sample point cloud.
    Gen(GenArgs),
    /// Greedy permutation: `index lambda predecessor` per line.
    Greedy(GreedyArgs),
    /// Sparse edges: `u v birth` per line, sorted by birth.
    Edges(SparseArgs),
    /// Sparse filtration: `birth dim v0 .. vk` per line.
    Build(BuildArgs),
    /// Barcode of a filtration file (or of a point cloud with --from-points).
    Persist(PersistArgs),
    /// Compare the sparse barcode with the full one.
    Compare(CompareArgs),
    /// Sample the covering inclusions and cone convexity; print pass/fail counts.
    CheckCovering(CoveringArgs),
    /// Contract the last greedy point onto its covering neighbor and check
    /// the link condition.
    CollapseCheck(CollapseArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ShapeArg {
    Box,
    Circle,
    Sphere,
    Clusters,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum MetricArg {
    L2,
    L1,
    Linf,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum FlavorArg {
    Rips,
    Cech,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
pub enum ModeArg {
    Strict,
    Paper,
}

#[derive(Debug, Args)]
pub struct OutputArg {
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    pub output: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[arg(value_enum)]
    pub shape: ShapeArg,
    #[arg(long, short, default_value_t = 100)]
    pub n: usize,
    /// Ambient dimension for box and clusters.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    #[arg(long, default_value_t = 4)]
    pub clusters: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArg,
}

#[derive(Debug, Args)]
pub struct CloudArgs {
    /// Point file, one point per line (`-` for stdin).
    pub input: PathBuf,
    #[arg(long, value_enum, default_value = "l2")]
    pub metric: MetricArg,
    /// Input index of the first point of the greedy permutation.
    #[arg(long, default_value_t = 0)]
    pub start_point: usize,
}

#[derive(Debug, Args)]
pub struct GreedyArgs {
    #[command(flatten)]
    pub cloud: CloudArgs,
    #[command(flatten)]
    pub out: OutputArg,
}

#[derive(Debug, Args)]
pub struct SparseOpts {
    #[arg(long, default_value_t = 0.5)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value = "strict")]
    pub mode: ModeArg,
    /// Accept epsilon >= 1.
    #[arg(long)]
    pub allow_large_epsilon: bool,
}

#[derive(Debug, Args)]
pub struct SparseArgs {
    #[command(flatten)]
    pub cloud: CloudArgs,
    #[command(flatten)]
    pub sparse: SparseOpts,
    #[command(flatten)]
    pub out: OutputArg,
}

#[derive(Debug, Args)]
pub struct FiltrationOpts {
    #[arg(long, default_value_t = 2)]
    pub max_dim: usize,
    #[arg(long, value_enum, default_value = "rips")]
    pub flavor: FlavorArg,
}

#[derive(Debug, Args)]
pub struct BuildArgs {
    #[command(flatten)]
    pub cloud: CloudArgs,
    #[command(flatten)]
    pub sparse: SparseOpts,
    #[command(flatten)]
    pub filtration: FiltrationOpts,
    #[command(flatten)]
    pub out: OutputArg,
}

#[derive(Debug, Args)]
pub struct PersistArgs {
    /// Treat the input as a point cloud and build the sparse filtration first.
    #[arg(long)]
    pub from_points: bool,
    #[command(flatten)]
    pub cloud: CloudArgs,
    #[command(flatten)]
    pub sparse: SparseOpts,
    #[command(flatten)]
    pub filtration: FiltrationOpts,
    #[command(flatten)]
    pub out: OutputArg,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub cloud: CloudArgs,
    #[command(flatten)]
    pub sparse: SparseOpts,
    #[command(flatten)]
    pub filtration: FiltrationOpts,
    /// Largest scale of the full filtration (default: the cloud diameter).
    #[arg(long)]
    pub alpha_max: Option<f64>,
    #[command(flatten)]
    pub out: OutputArg,
}

#[derive(Debug, Args)]
pub struct CoveringArgs {
    #[command(flatten)]
    pub cloud: CloudArgs,
    #[command(flatten)]
    pub sparse: SparseOpts,
    /// Samples per property.
    #[arg(long, default_value_t = 10_000)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutputArg,
}

#[derive(Debug, Args)]
pub struct CollapseArgs {
    #[command(flatten)]
    pub cloud: CloudArgs,
    #[command(flatten)]
    pub sparse: SparseOpts,
    #[arg(long, value_enum, default_value = "rips")]
    pub flavor: FlavorArg,
    /// Repeat for every greedy prefix, removing points from the end.
    #[arg(long)]
    pub repeat: bool,
    #[command(flatten)]
    pub out: OutputArg,
}

impl From<MetricArg> for MetricKind {
    fn from(m: MetricArg) -> Self {
        match m {
            MetricArg::L2 => MetricKind::L2,
            MetricArg::L1 => MetricKind::L1,
            MetricArg::Linf => MetricKind::Linf,
        }
    }
}

impl From<FlavorArg> for Flavor {
    fn from(f: FlavorArg) -> Self {
        match f {
            FlavorArg::Rips => Flavor::Rips,
            FlavorArg::Cech => Flavor::Cech,
        }
    }
}

impl From<ShapeArg> for Shape {
    fn from(s: ShapeArg) -> Self {
        match s {
            ShapeArg::Box => Shape::Box,
            ShapeArg::Circle => Shape::Circle,
            ShapeArg::Sphere => Shape::Sphere,
            ShapeArg::Clusters => Shape::Clusters,
        }
    }
}

fn open_input(path: &Path) -> Result<Box<dyn BufRead>> {
    if path.as_os_str() == "-" {
        return Ok(Box::new(BufReader::new(io::stdin())));
    }
    let f = File::open(path).map_err(|e| Error::usage(format!("cannot open {}: {e}", path.display())))?;
    Ok(Box::new(BufReader::new(f)))
}

fn open_output(out: &OutputArg) -> Result<Box<dyn Write>> {
    Ok(match &out.output {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| Error::usage(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn load_cloud(args: &CloudArgs) -> Result<PointCloud> {
    PointCloud::read(open_input(&args.input)?, args.metric.into())
}

fn sparse_params(cloud: &PointCloud, gp: &GreedyPermutation, opts: &SparseOpts) -> Result<SparseParams> {
    if opts.epsilon >= 1.0 && !opts.allow_large_epsilon {
        return Err(Error::usage(format!(
            "epsilon must be below 1 (got {}); pass --allow-large-epsilon to override",
            opts.epsilon
        )));
    }
    let mode = match opts.mode {
        ModeArg::Strict => BirthMode::Strict,
        ModeArg::Paper => BirthMode::PaperLiteral,
    };
    SparseParams::with_options(cloud, gp, opts.epsilon, mode)
}

struct Pipeline {
    cloud: PointCloud,
    params: SparseParams,
}

fn pipeline(cloud_args: &CloudArgs, opts: &SparseOpts) -> Result<Pipeline> {
    let cloud = load_cloud(cloud_args)?;
    let gp = greedy_permutation(&cloud, cloud_args.start_point)?;
    let params = sparse_params(&cloud, &gp, opts)?;
    Ok(Pipeline { cloud, params })
}

/// Sparse filtration labelled by original indices.
fn sparse_filtration(p: &Pipeline, f: &FiltrationOpts) -> Result<FilteredComplex> {
    let opts = BuildOptions { alpha_cap: None, parallel: true };
    Ok(build_filtration_with(&p.params, f.max_dim, f.flavor.into(), opts)?.relabel(p.params.order()))
}

/// Runs a parsed command and returns the process exit status.
pub fn run(cli: Cli) -> Result<u8> {
    match cli.command {
        Command::Gen(a) => {
            let spec = GenSpec {
                shape: a.shape.into(),
                n: a.n,
                dim: a.dim,
                noise: a.noise,
                clusters: a.clusters,
                seed: a.seed,
            };
            let cloud = PointCloud::new(generate(&spec)?, MetricKind::L2)?;
            let mut w = open_output(&a.out)?;
            cloud.write(&mut w)?;
            w.flush()?;
        }
        Command::Greedy(a) => {
            let cloud = load_cloud(&a.cloud)?;
            let gp = greedy_permutation(&cloud, a.cloud.start_point)?;
            let mut w = open_output(&a.out)?;
            gp.write(&mut w)?;
            w.flush()?;
        }
        Command::Edges(a) => {
            let p = pipeline(&a.cloud, &a.sparse)?;
            let graph = construct_edges(&p.params);
            let mut w = open_output(&a.out)?;
            for e in graph.sorted_edges() {
                let (u, v) = (p.params.original_index(e.src), p.params.original_index(e.dst));
                writeln!(w, "{} {} {}", u.min(v), u.max(v), fmt_real(e.birth))?;
            }
            w.flush()?;
        }
        Command::Build(a) => {
            let p = pipeline(&a.cloud, &a.sparse)?;
            let fc = sparse_filtration(&p, &a.filtration)?;
            let mut w = open_output(&a.out)?;
            fc.write(&mut w)?;
            w.flush()?;
        }
        Command::Persist(a) => {
            let fc = if a.from_points {
                sparse_filtration(&pipeline(&a.cloud, &a.sparse)?, &a.filtration)?
            } else {
                FilteredComplex::read(open_input(&a.cloud.input)?)?
            };
            if fc.is_empty() {
                return Err(Error::usage("the filtration is empty"));
            }
            let bc = compute_barcode(&fc)?;
            let mut w = open_output(&a.out)?;
            bc.write(&mut w)?;
            w.flush()?;
        }
        Command::Compare(a) => return compare(&a),
        Command::CheckCovering(a) => return check_covering_cmd(&a),
        Command::CollapseCheck(a) => return collapse_check(&a),
    }
    Ok(0)
}

fn full_filtration(cloud: &PointCloud, flavor: Flavor, max_dim: usize, alpha_max: Option<f64>) -> Result<FilteredComplex> {
    match (flavor, cloud.metric()) {
        (Flavor::Cech, MetricKind::L2) => full_cech_filtration_l2(cloud, max_dim, alpha_max),
        // boxes meet iff they meet pairwise, so l-infinity Čech is Rips
        (Flavor::Cech, MetricKind::Linf) | (Flavor::Rips, _) => full_rips_filtration(cloud, max_dim, alpha_max),
        (Flavor::Cech, MetricKind::L1) => Err(Error::usage("Čech filtrations are not available for l1; use rips")),
    }
}

fn compare(a: &CompareArgs) -> Result<u8> {
    let p = pipeline(&a.cloud, &a.sparse)?;
    let flavor: Flavor = a.filtration.flavor.into();
    let max_dim = a.filtration.max_dim;
    let sparse = sparse_filtration(&p, &a.filtration)?;
    let full = full_filtration(&p.cloud, flavor, max_dim, a.alpha_max)?;
    // the top dimension lacks the simplices that would kill its classes
    let sparse_bc = compute_barcode(&sparse)?.below_dim(max_dim);
    let full_bc = compute_barcode(&full)?.below_dim(max_dim);
    let eps = p.params.epsilon();
    let c = 1.0 + eps;
    let result = barcode_approx_check(&sparse_bc, &full_bc, c * (1.0 + 1e-6));

    let mut w = open_output(&a.out)?;
    writeln!(
        w,
        "n {}  metric {}  flavor {}  epsilon {}",
        p.cloud.len(),
        p.cloud.metric(),
        if flavor == Flavor::Rips { "rips" } else { "cech" },
        eps
    )?;
    writeln!(w, "dim  sparse  full")?;
    let (sc, fc) = (sparse.counts_by_dim(), full.counts_by_dim());
    for d in 0..=max_dim {
        writeln!(w, "{d:<4} {:<7} {}", sc.get(d).unwrap_or(&0), fc.get(d).unwrap_or(&0))?;
    }
    writeln!(w, "total {:<6} {}", sparse.len(), full.len())?;
    for d in 0..max_dim {
        writeln!(w, "bars dim {d}: sparse {} full {}", sparse_bc.in_dim(d).count(), full_bc.in_dim(d).count())?;
    }
    writeln!(w, "matched {}  unmatched short {}", result.matched.len(), result.unmatched_ok.len())?;
    writeln!(w, "worst_ratio {}", result.worst_ratio)?;
    if result.ok {
        writeln!(w, "ok at c = {c}")?;
    } else {
        writeln!(w, "FAILED at c = {c}")?;
    }
    w.flush()?;
    Ok(if result.ok { 0 } else { EXIT_VERIFY_FAILED })
}

fn check_covering_cmd(a: &CoveringArgs) -> Result<u8> {
    let p = pipeline(&a.cloud, &a.sparse)?;
    let cov = check_covering(&p.params, a.samples, a.seed);
    let cone = check_cone_convexity(&p.params, a.samples, a.seed.wrapping_add(1));
    let mut w = open_output(&a.out)?;
    for (name, s) in [
        ("clause1", cov.clause1),
        ("clause2", cov.clause2),
        ("sandwich_lower", cov.sandwich_lower),
        ("sandwich_upper", cov.sandwich_upper),
        ("cone_convexity", cone),
    ] {
        writeln!(
            w,
            "{name:<15} checked {}  violations {}  rounding {}  {}",
            s.checked,
            s.violations,
            s.rounding,
            if s.violations == 0 { "pass" } else { "FAIL" }
        )?;
    }
    w.flush()?;
    Ok(if cov.violations() + cone.violations == 0 { 0 } else { EXIT_VERIFY_FAILED })
}

fn write_collapse(w: &mut dyn Write, params: &SparseParams, r: &CollapseReport) -> Result<()> {
    writeln!(
        w,
        "last {}  partner {}  alpha {}  edge {}  link_condition {}  betti {:?} -> {:?}  {}",
        params.original_index(r.last),
        params.original_index(r.partner),
        r.alpha,
        r.edge_present,
        r.link_condition,
        r.betti_before,
        r.betti_after,
        if r.passed() { "ok" } else { "FAILED" }
    )?;
    Ok(())
}

fn collapse_check(a: &CollapseArgs) -> Result<u8> {
    let cloud = load_cloud(&a.cloud)?;
    let gp = greedy_permutation(&cloud, a.cloud.start_point)?;
    let params = sparse_params(&cloud, &gp, &a.sparse)?;
    let mut w = open_output(&a.out)?;
    let reports = if a.repeat {
        repeated_collapse(&cloud, &gp, &params, a.flavor.into())?
    } else {
        vec![check_collapse(&params, a.flavor.into())?]
    };
    for r in &reports {
        // prefixes keep greedy ranks, so labels come from the full permutation
        write_collapse(&mut w, &params, r)?;
    }
    let failed = reports.iter().filter(|r| !r.passed()).count();
    if a.repeat {
        writeln!(w, "{} of {} contractions passed", reports.len() - failed, reports.len())?;
    }
    w.flush()?;
    Ok(if failed == 0 { 0 } else { EXIT_VERIFY_FAILED })
}

/// Exit status for an error returned by [`run`].
pub fn exit_code_for(err: &Error) -> u8 {
    match err {
        Error::Usage(_) | Error::Parse { .. } | Error::Io(_) => EXIT_USAGE,
        Error::Internal(_) => EXIT_VERIFY_FAILED,
    }
}

/// Applies `SPARSE_NERVE_THREADS` to the global rayon pool.
pub fn configure_threads() -> Result<()> {
    if let Ok(v) = std::env::var("SPARSE_NERVE_THREADS") {
        let threads: usize = v
            .trim()
            .parse()
            .map_err(|_| Error::usage(format!("SPARSE_NERVE_THREADS must be a positive integer (got `{v}`)")))?;
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build_global()
            .map_err(|e| Error::internal(e.to_string()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn arguments_parse() {
        Cli::command().debug_assert();
        let cli = Cli::try_parse_from(["sparse-nerve", "build", "pts.txt", "--epsilon", "0.3", "--flavor", "cech", "--max-dim", "3"]).unwrap();
        match cli.command {
            Command::Build(b) => {
                assert_eq!(b.sparse.epsilon, 0.3);
                assert_eq!(b.filtration.max_dim, 3);
                assert!(matches!(b.filtration.flavor, FlavorArg::Cech));
            }
            other => panic!("{other:?}"),
        }
        assert!(Cli::try_parse_from(["sparse-nerve", "build", "x", "--metric", "l7"]).is_err());
    }

    #[test]
    fn large_epsilon_needs_override() {
        let cloud = PointCloud::new(vec![vec![0.0], vec![1.0]], MetricKind::L2).unwrap();
        let gp = greedy_permutation(&cloud, 0).unwrap();
        let mut opts = SparseOpts { epsilon: 1.0, mode: ModeArg::Strict, allow_large_epsilon: false };
        assert!(matches!(sparse_params(&cloud, &gp, &opts), Err(Error::Usage(_))));
        opts.allow_large_epsilon = true;
        assert!(sparse_params(&cloud, &gp, &opts).is_ok());
    }
}
