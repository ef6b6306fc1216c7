mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{Duration, Instant};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use perphylo::{
    count_conflicts, generate_instance, oracle_solve_capped, parse_trace, parse_tree, replay,
    serialize, solve, verify_ppp, BinaryMatrix, CandidateOrder, ExtendedMatrix, GeneratorParams,
    LoadOptions, MemoMode, OracleError, SearchOptions, Status, TreeFormat,
};

use report::RunReport;

const EXIT_OK: u8 = 0;
const EXIT_FAIL: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_ERROR: u8 = 3;
const EXIT_MISMATCH: u8 = 4;

#[derive(Parser)]
#[command(
    name = "perphylo",
    version,
    about = "Persistent perfect phylogeny solver"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide a matrix and write its tree, trace and report.
    Solve(SolveArgs),
    /// Verify a tree or a reduction trace against a matrix.
    Check(CheckArgs),
    /// Generate a random instance with a known persistent phylogeny.
    Gen(GenArgs),
    /// Decide a matrix by exhaustive completion.
    Oracle(OracleArgs),
    /// Solve every `.matrix` file of a directory and aggregate.
    Bench(BenchArgs),
}

#[derive(Args, Clone)]
struct Load {
    /// Remove all-zero columns instead of rejecting the matrix.
    #[arg(long)]
    drop_zero_columns: bool,
}

impl Load {
    fn read(&self, path: &Path) -> Result<BinaryMatrix> {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        BinaryMatrix::parse(
            &text,
            LoadOptions {
                drop_zero_columns: self.drop_zero_columns,
            },
        )
        .with_context(|| format!("parsing {}", path.display()))
    }
}

#[derive(Args, Clone)]
struct Search {
    /// Candidate order: lex or component-degree.
    #[arg(long, default_value = "lex")]
    order: CandidateOrder,
    /// Wall-clock budget in seconds.
    #[arg(long)]
    max_time: Option<f64>,
    /// Budget on expanded decision-tree nodes.
    #[arg(long)]
    max_nodes: Option<u64>,
    /// Failed-set memoization: off or unsafe (may report false UNSAT).
    #[arg(long, default_value = "off")]
    memo: MemoMode,
    /// Worker threads for the top level of the search.
    #[arg(long, default_value_t = 1)]
    parallel: usize,
    /// Disable Σ-path pruning.
    #[arg(long)]
    no_prune: bool,
    /// Count nodes where the Σ test and the forbidden-submatrix test disagree.
    #[arg(long)]
    cross_check: bool,
}

impl Search {
    fn options(&self) -> Result<SearchOptions> {
        let max_time = match self.max_time {
            Some(s) if !s.is_finite() || s < 0.0 => bail!("invalid --max-time {s}"),
            Some(s) => Some(Duration::from_secs_f64(s)),
            None => None,
        };
        Ok(SearchOptions {
            order: self.order,
            max_time,
            max_nodes: self.max_nodes,
            memo: self.memo,
            prune: !self.no_prune,
            cross_check: self.cross_check,
            threads: self.parallel,
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    matrix: PathBuf,
    /// Write the tree in Newick form.
    #[arg(long)]
    newick: Option<PathBuf>,
    /// Write the tree as an edge list.
    #[arg(long)]
    edgelist: Option<PathBuf>,
    /// Write the realization trace of the reduction found.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    search: Search,
    #[command(flatten)]
    load: Load,
}

#[derive(Args)]
struct CheckArgs {
    matrix: PathBuf,
    /// Tree file, Newick or edge list.
    #[arg(long, conflicts_with = "trace", required_unless_present = "trace")]
    tree: Option<PathBuf>,
    /// Realization trace.
    #[arg(long)]
    trace: Option<PathBuf>,
    #[command(flatten)]
    load: Load,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    species: usize,
    #[arg(long)]
    chars: usize,
    #[arg(long, default_value_t = 0.3)]
    loss_prob: f64,
    #[arg(long, env = "PERPHYLO_SEED", default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1000)]
    max_retries: usize,
    /// Keep leaves with equal vectors as one species instead of retrying.
    #[arg(long)]
    allow_duplicates: bool,
    /// Matrix output file.
    #[arg(long)]
    out: PathBuf,
    /// Tree output file; `.nwk` selects Newick, anything else an edge list.
    #[arg(long)]
    with_tree: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    matrix: PathBuf,
    /// Largest number of unknown pairs to enumerate.
    #[arg(long, default_value_t = perphylo::oracle::DEFAULT_CAP)]
    cap: usize,
    /// Also run the search and fail on disagreement.
    #[arg(long)]
    compare: bool,
    #[command(flatten)]
    load: Load,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(required_unless_present = "from_reports")]
    dir: Option<PathBuf>,
    /// Aggregate saved report lines instead of solving.
    #[arg(long, num_args = 1.., conflicts_with = "dir")]
    from_reports: Vec<PathBuf>,
    /// Per-instance time budget in seconds.
    #[arg(long, default_value_t = 300.0)]
    budget: f64,
    /// Instances solved concurrently.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Write the report here instead of standard output.
    #[arg(long)]
    report: Option<PathBuf>,
    #[command(flatten)]
    search: Search,
    #[command(flatten)]
    load: Load,
}

fn instance_name(path: &Path) -> String {
    path.file_stem().map_or_else(
        || path.display().to_string(),
        |s| s.to_string_lossy().into_owned(),
    )
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn tree_format(path: &Path) -> TreeFormat {
    match path.extension().and_then(|e| e.to_str()) {
        Some("nwk" | "newick") => TreeFormat::Newick,
        _ => TreeFormat::EdgeList,
    }
}

fn run_one(
    matrix: &BinaryMatrix,
    name: &str,
    opts: &SearchOptions,
) -> (RunReport, perphylo::Solution) {
    let start = Instant::now();
    let sol = solve(matrix, opts);
    let wall_ms = start.elapsed().as_secs_f64() * 1000.0;
    let reduction = sol
        .outcome
        .reduction
        .as_ref()
        .map(|r| {
            r.characters()
                .iter()
                .map(|&c| matrix.character_label(c).to_string())
                .collect()
        })
        .unwrap_or_default();
    let report = RunReport {
        instance: name.to_string(),
        n: matrix.n_rows(),
        m: matrix.n_characters(),
        conflicts: count_conflicts(matrix),
        status: sol.outcome.status.into(),
        nodes: sol.outcome.stats.nodes,
        prunes: sol.outcome.stats.prunes,
        wall_ms,
        reduction,
        outputs: Vec::new(),
    };
    (report, sol)
}

fn cmd_solve(a: &SolveArgs) -> Result<u8> {
    let matrix = a.load.read(&a.matrix)?;
    let opts = a.search.options()?;
    let (mut report, sol) = run_one(&matrix, &instance_name(&a.matrix), &opts);
    if let Some(t) = &sol.tree {
        let check = verify_ppp(t, &matrix);
        if let Some(v) = check.first_violation() {
            bail!("internal error: built tree fails verification: {v}");
        }
        for (path, format) in [
            (&a.newick, TreeFormat::Newick),
            (&a.edgelist, TreeFormat::EdgeList),
        ] {
            if let Some(path) = path {
                write(path, &serialize(t, &matrix, format))?;
                report.outputs.push(path.display().to_string());
            }
        }
        if let (Some(path), Some(log)) = (&a.trace, &sol.outcome.log) {
            write(path, &log.to_trace(&matrix))?;
            report.outputs.push(path.display().to_string());
        }
    }
    if opts.cross_check && sol.outcome.stats.cross_check_mismatches > 0 {
        eprintln!(
            "cross-check: {} disagreements",
            sol.outcome.stats.cross_check_mismatches
        );
    }
    println!("{}", report::HEADER);
    println!("{report}");
    Ok(match sol.outcome.status {
        Status::Sat => EXIT_OK,
        Status::Unsat => EXIT_FAIL,
        Status::Timeout => EXIT_BUDGET,
    })
}

fn cmd_check(a: &CheckArgs) -> Result<u8> {
    let matrix = a.load.read(&a.matrix)?;
    if let Some(path) = &a.tree {
        let text =
            fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let tree =
            parse_tree(&text, &matrix).with_context(|| format!("parsing {}", path.display()))?;
        let report = verify_ppp(&tree, &matrix);
        for note in &report.notes {
            eprintln!("note: {note}");
        }
        return Ok(match report.first_violation() {
            None => EXIT_OK,
            Some(v) => {
                eprintln!("{v}");
                EXIT_FAIL
            }
        });
    }
    let path = a.trace.as_ref().expect("clap requires --tree or --trace");
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let trace =
        parse_trace(&text, &matrix).with_context(|| format!("parsing {}", path.display()))?;
    let me = ExtendedMatrix::build(&matrix);
    let r = replay(&me, &trace.realized)?;
    if trace.realized.len() != matrix.n_characters() {
        eprintln!(
            "trace realizes {} of {} characters",
            trace.realized.len(),
            matrix.n_characters()
        );
        return Ok(EXIT_FAIL);
    }
    if trace.has_bookkeeping() && trace.events != r.log.trace_events() {
        eprintln!("trace events differ from the replay");
        return Ok(EXIT_FAIL);
    }
    if !r.is_successful() {
        match r.graph.find_sigma() {
            Some(w) => eprintln!(
                "reduction leaves a red Σ-path on characters {} and {}",
                matrix.character_label(w.characters.0),
                matrix.character_label(w.characters.1)
            ),
            None => eprintln!("reduction leaves {} edges", r.graph.edge_count()),
        }
        return Ok(EXIT_FAIL);
    }
    let completion = r.completion().expect("successful replay is complete");
    if let Some(w) = completion.forbidden_submatrix() {
        eprintln!(
            "completion has a forbidden submatrix on columns {:?}",
            w.columns
        );
        return Ok(EXIT_FAIL);
    }
    Ok(EXIT_OK)
}

fn cmd_gen(a: &GenArgs) -> Result<u8> {
    let params = GeneratorParams {
        n_species: a.species,
        n_characters: a.chars,
        loss_probability: a.loss_prob,
        seed: a.seed,
        max_retries: a.max_retries,
        allow_duplicates: a.allow_duplicates,
    };
    let (matrix, tree) = generate_instance(&params)?;
    write(&a.out, &matrix.to_text())?;
    println!("{}", a.out.display());
    if let Some(path) = &a.with_tree {
        write(path, &serialize(&tree, &matrix, tree_format(path)))?;
        println!("{}", path.display());
    }
    Ok(EXIT_OK)
}

fn cmd_oracle(a: &OracleArgs) -> Result<u8> {
    let matrix = a.load.read(&a.matrix)?;
    let me = ExtendedMatrix::build(&matrix);
    let completion = match oracle_solve_capped(&me, a.cap) {
        Ok(c) => c,
        Err(e @ OracleError::Budget { .. }) => {
            eprintln!("{e}");
            return Ok(EXIT_BUDGET);
        }
    };
    if let Some(c) = &completion {
        for s in 0..c.n_species() {
            let row: Vec<String> = c.row_values(s).iter().map(u8::to_string).collect();
            println!("{}", row.join(" "));
        }
    }
    if a.compare {
        let status = perphylo::decide_pp(&me, &SearchOptions::default()).status;
        if (status == Status::Sat) != completion.is_some() {
            eprintln!("search reports {status}, oracle disagrees");
            return Ok(EXIT_MISMATCH);
        }
    }
    Ok(if completion.is_some() {
        EXIT_OK
    } else {
        EXIT_FAIL
    })
}

fn bench_one(path: &Path, load: &Load, opts: &SearchOptions) -> RunReport {
    let name = instance_name(path);
    match load.read(path) {
        Ok(matrix) => run_one(&matrix, &name, opts).0,
        Err(e) => {
            eprintln!("{}: {e:#}", path.display());
            RunReport::error(&name)
        }
    }
}

#[cfg(feature = "parallel")]
fn bench_all(
    files: &[PathBuf],
    jobs: usize,
    load: &Load,
    opts: &SearchOptions,
) -> Result<Vec<RunReport>> {
    use rayon::prelude::*;
    if jobs <= 1 {
        return Ok(files.iter().map(|f| bench_one(f, load, opts)).collect());
    }
    let pool = rayon::ThreadPoolBuilder::new().num_threads(jobs).build()?;
    Ok(pool.install(|| files.par_iter().map(|f| bench_one(f, load, opts)).collect()))
}

#[cfg(not(feature = "parallel"))]
fn bench_all(
    files: &[PathBuf],
    _jobs: usize,
    load: &Load,
    opts: &SearchOptions,
) -> Result<Vec<RunReport>> {
    Ok(files.iter().map(|f| bench_one(f, load, opts)).collect())
}

fn cmd_bench(a: &BenchArgs) -> Result<u8> {
    let mut opts = a.search.options()?;
    if !a.budget.is_finite() || a.budget <= 0.0 {
        bail!("invalid --budget {}", a.budget);
    }
    opts.max_time = Some(Duration::from_secs_f64(a.budget));
    let mut reports = match &a.dir {
        Some(dir) => {
            let mut files: Vec<PathBuf> = fs::read_dir(dir)
                .with_context(|| format!("reading {}", dir.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.extension().is_some_and(|e| e == "matrix"))
                .collect();
            files.sort();
            bench_all(&files, a.jobs, &a.load, &opts)?
        }
        None => {
            let mut all = Vec::new();
            for path in &a.from_reports {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                all.extend(
                    report::parse_reports(&text)
                        .with_context(|| format!("parsing {}", path.display()))?,
                );
            }
            all
        }
    };
    reports.sort_by(|x, y| x.instance.cmp(&y.instance));

    let mut out = String::new();
    if !reports.is_empty() {
        out.push_str(report::HEADER);
        out.push('\n');
        for r in &reports {
            out.push_str(&format!("{r}\n"));
        }
        out.push_str(report::AGGREGATE_HEADER);
        out.push('\n');
        for g in report::aggregate(&reports) {
            out.push_str(&format!("{g}\n"));
        }
    }
    match &a.report {
        Some(path) => {
            write(path, &out)?;
            println!("{}", path.display());
        }
        None => print!("{out}"),
    }
    Ok(EXIT_OK)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Check(a) => cmd_check(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Oracle(a) => cmd_oracle(a),
        Command::Bench(a) => cmd_bench(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_ERROR)
        }
    }
}
