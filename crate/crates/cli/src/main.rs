mod formats;
mod verify;

use std::fs;
use std::io::{self, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use aifv_mcmc::aifv::{
    aifv_problem, decode, default_max_nodes, encode, pack_bits, unpack_bits, AifvProblem,
};
use aifv_mcmc::iterative::solve_iterative;
use aifv_mcmc::oracle::{brute_force_min, optimal_point, DEFAULT_CHAIN_BUDGET};
use aifv_mcmc::rational::{approx_decimal, format_rational, parse_rational};
use aifv_mcmc::slice::{boundary_sign_check, solve_slice_search, PrecisionConfig};
use aifv_mcmc::{
    eval_envelope, eval_h, ChainSelection, ErrorKind, LiftedPoint, ProblemSpec, Rational,
};
use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;

use formats::{to_json, CodeFile, ProblemFile, SourceFile};
use verify::Outcome;

#[derive(Parser)]
#[command(
    name = "aifv",
    version,
    about = "Exact minimum-cost Markov chains and AIFV-m codes"
)]
struct Cli {
    /// Worker threads for parallel enumeration and oracles (0 = all cores).
    #[arg(long, global = true, env = "AIFV_THREADS", default_value_t = 0)]
    threads: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum McmcAlgo {
    Iterative,
    Brute,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum AifvAlgo {
    Iterative,
    Slice,
    Brute,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Suite {
    Lemma4,
    Cones,
    Boundary,
    Roundtrip,
    All,
}

#[derive(Subcommand)]
enum Command {
    /// Solve a minimum-cost Markov chain problem.
    SolveMcmc {
        #[arg(long)]
        problem: PathBuf,
        #[arg(long, value_enum, default_value = "iterative")]
        algo: McmcAlgo,
        /// Starting chain as comma-separated state indices, one per type.
        #[arg(long)]
        start: Option<String>,
        /// Write the iteration trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
    },
    /// Build an optimal AIFV-m code for a source.
    SolveAifv {
        #[arg(long)]
        source: PathBuf,
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long, value_enum, default_value = "iterative")]
        algo: AifvAlgo,
        /// Node cap per tree (default 3n + m).
        #[arg(long)]
        max_nodes: Option<usize>,
        /// Write the optimal code as JSON.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write the solver trace as CSV.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Override b' for the slice search.
        #[arg(long)]
        b_prime: Option<u32>,
        /// Also write the Markov chain problem built from the trees.
        #[arg(long)]
        problem_out: Option<PathBuf>,
    },
    /// Encode whitespace-separated symbols.
    Encode {
        #[arg(long)]
        code: PathBuf,
        #[arg(long = "in", conflicts_with = "input_file")]
        input: Option<String>,
        #[arg(long)]
        input_file: Option<PathBuf>,
        /// Emit the binary container instead of a 0/1 string.
        #[arg(long)]
        binary: bool,
        /// Output file (stdout by default).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Decode a 0/1 string or a binary container.
    Decode {
        #[arg(long)]
        code: PathBuf,
        #[arg(long = "in", conflicts_with = "input_file")]
        input: Option<String>,
        #[arg(long)]
        input_file: Option<PathBuf>,
        /// Number of symbols to decode (read from the container with --binary).
        #[arg(long)]
        count: Option<usize>,
        #[arg(long)]
        binary: bool,
    },
    /// Tabulate the lower envelopes and h over a grid.
    Envelope {
        #[arg(long)]
        problem: PathBuf,
        /// Grid steps per axis; each axis gets steps + 1 points.
        #[arg(long, default_value_t = 10)]
        grid: usize,
        /// lo1,hi1[,lo2,hi2] as fractions.
        #[arg(long = "box", default_value = "0,1,0,1")]
        bounds: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run property suites.
    Verify {
        #[arg(long, conflicts_with = "source")]
        problem: Option<PathBuf>,
        #[arg(long)]
        source: Option<PathBuf>,
        #[arg(long, default_value_t = 3)]
        m: usize,
        #[arg(long)]
        max_nodes: Option<usize>,
        /// Code for the round-trip suite; with --source the optimal code is used otherwise.
        #[arg(long)]
        code: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "all")]
        suite: Suite,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Random cases for lemma4 and cones.
        #[arg(long, default_value_t = 10_000)]
        cases: usize,
        /// Boundary samples per edge.
        #[arg(long, default_value_t = 20)]
        samples: usize,
        /// Longest message for the round-trip suite.
        #[arg(long, default_value_t = 4)]
        max_len: usize,
    },
}

/// A failed verification run; reported with exit code 2.
#[derive(Debug)]
struct VerificationFailed;

impl std::fmt::Display for VerificationFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("verification failed")
    }
}

impl std::error::Error for VerificationFailed {}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if cli.threads > 0 {
        // Only fails if a pool already exists, which cannot happen this early.
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cli.threads)
            .build_global();
    }
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<VerificationFailed>().is_some() {
        return 2;
    }
    match err
        .chain()
        .find_map(|e| e.downcast_ref::<aifv_mcmc::Error>())
    {
        Some(e) if e.kind() == ErrorKind::Internal => 2,
        _ => 1,
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> anyhow::Result<T> {
    let text =
        fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("malformed JSON in {}", path.display()))
}

fn load_problem(path: &Path) -> anyhow::Result<ProblemSpec> {
    let file: ProblemFile = read_json(path)?;
    file.to_problem()
        .with_context(|| format!("invalid problem in {}", path.display()))
}

fn load_code(path: &Path) -> anyhow::Result<aifv_mcmc::aifv::AifvCode> {
    let file: CodeFile = read_json(path)?;
    file.to_code()
        .with_context(|| format!("invalid code in {}", path.display()))
}

fn write_out(path: Option<&Path>, bytes: &[u8]) -> anyhow::Result<()> {
    match path {
        Some(p) => fs::write(p, bytes).with_context(|| format!("cannot write {}", p.display())),
        None => io::stdout()
            .write_all(bytes)
            .context("cannot write to stdout"),
    }
}

fn report_line(chain: &ChainSelection, point: &LiftedPoint) -> String {
    format!(
        "chain={chain} x={} cost={}",
        point.x,
        format_rational(&point.y)
    )
}

fn parse_start(text: &str, m: usize) -> anyhow::Result<ChainSelection> {
    let idx = text
        .split(',')
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|_| anyhow!("bad start index {s:?}"))
        })
        .collect::<anyhow::Result<Vec<_>>>()?;
    if idx.len() != m {
        bail!("start needs {m} indices, got {}", idx.len());
    }
    Ok(ChainSelection(idx))
}

fn run(command: Command) -> anyhow::Result<()> {
    match command {
        Command::SolveMcmc {
            problem,
            algo,
            start,
            trace,
        } => {
            let problem = load_problem(&problem)?;
            match algo {
                McmcAlgo::Iterative => {
                    let start = match start {
                        Some(s) => parse_start(&s, problem.m())?,
                        None => problem.first_chain(),
                    };
                    let result = solve_iterative(&problem, &start)?;
                    if let Some(path) = trace {
                        write_out(Some(&path), result.trace.to_csv().as_bytes())?;
                    }
                    println!("{}", report_line(&result.chain, &result.point));
                }
                McmcAlgo::Brute => {
                    let report = brute_force_min(&problem, DEFAULT_CHAIN_BUDGET)?;
                    let (chain, point) = optimal_point(&problem, &report)?;
                    println!("{}", report_line(&chain, &point));
                }
            }
            Ok(())
        }
        Command::SolveAifv {
            source,
            m,
            algo,
            max_nodes,
            out,
            trace,
            b_prime,
            problem_out,
        } => {
            let file: SourceFile = read_json(&source)?;
            let src = file
                .to_source()
                .with_context(|| format!("invalid source in {}", source.display()))?;
            if algo == AifvAlgo::Slice && m != 3 {
                bail!(aifv_mcmc::Error::Precondition(format!(
                    "slice requires m=3, got m={m}"
                )));
            }
            let cap = max_nodes.unwrap_or_else(|| default_max_nodes(src.len(), m));
            let built = aifv_problem(&src, m, cap)?;
            if let Some(path) = problem_out {
                write_out(
                    Some(&path),
                    to_json(&ProblemFile::from_problem(&built.problem)).as_bytes(),
                )?;
            }
            let (chain, point) = match algo {
                AifvAlgo::Iterative => {
                    let r = solve_iterative(&built.problem, &built.problem.first_chain())?;
                    if let Some(path) = &trace {
                        write_out(Some(path), r.trace.to_csv().as_bytes())?;
                    }
                    (r.chain, r.point)
                }
                AifvAlgo::Brute => {
                    let r = brute_force_min(&built.problem, DEFAULT_CHAIN_BUDGET)?;
                    optimal_point(&built.problem, &r)?
                }
                AifvAlgo::Slice => {
                    check_slice_precondition(&built)?;
                    let cfg = match b_prime {
                        Some(bp) => PrecisionConfig::with_b_prime(src.bits().max(1), bp)?,
                        None => PrecisionConfig::new(src.bits().max(1))?,
                    };
                    let r = solve_slice_search(&built.problem, &cfg)?;
                    if let Some(path) = &trace {
                        write_out(Some(path), r.trace_csv().as_bytes())?;
                    }
                    (r.chain, r.point)
                }
            };
            let code = built.code_for(&chain)?;
            if let Some(path) = out {
                write_out(Some(&path), to_json(&CodeFile::from_code(&code)).as_bytes())?;
            }
            println!("{}", report_line(&chain, &point));
            Ok(())
        }
        Command::Encode {
            code,
            input,
            input_file,
            binary,
            out,
        } => {
            let code = load_code(&code)?;
            let text = read_input(input, input_file.as_deref())?;
            let text = String::from_utf8(text).context("input is not UTF-8")?;
            let symbols = text
                .split_whitespace()
                .map(|s| code.symbol_index(s))
                .collect::<Result<Vec<_>, _>>()?;
            let bits = encode(&code, &symbols)?;
            if binary {
                write_out(out.as_deref(), &pack_bits(&bits, symbols.len() as u64))
            } else {
                let mut s: String = bits.iter().map(|&b| if b { '1' } else { '0' }).collect();
                s.push('\n');
                write_out(out.as_deref(), s.as_bytes())
            }
        }
        Command::Decode {
            code,
            input,
            input_file,
            count,
            binary,
        } => {
            let code = load_code(&code)?;
            let data = read_input(input, input_file.as_deref())?;
            let (bits, count) = if binary {
                let (bits, stored) = unpack_bits(&data)?;
                let stored = usize::try_from(stored).context("symbol count overflows")?;
                if let Some(c) = count {
                    if c != stored {
                        bail!(aifv_mcmc::Error::Decode(format!(
                            "--count {c} but the container holds {stored} symbols"
                        )));
                    }
                }
                (bits, stored)
            } else {
                let count = count.ok_or_else(|| anyhow!("--count is required for text input"))?;
                let text = String::from_utf8(data).context("input is not UTF-8")?;
                let mut bits = Vec::new();
                for c in text.chars().filter(|c| !c.is_whitespace()) {
                    match c {
                        '0' => bits.push(false),
                        '1' => bits.push(true),
                        other => bail!(aifv_mcmc::Error::Decode(format!(
                            "unexpected character {other:?}"
                        ))),
                    }
                }
                (bits, count)
            };
            let symbols = decode(&code, &bits, count)?;
            let labels: Vec<&str> = symbols
                .iter()
                .map(|&s| code.symbols()[s].as_str())
                .collect();
            println!("{}", labels.join(" "));
            Ok(())
        }
        Command::Envelope {
            problem,
            grid,
            bounds,
            out,
        } => {
            let problem = load_problem(&problem)?;
            let csv = envelope_csv(&problem, grid, &bounds)?;
            write_out(out.as_deref(), csv.as_bytes())
        }
        Command::Verify {
            problem,
            source,
            m,
            max_nodes,
            code,
            suite,
            seed,
            cases,
            samples,
            max_len,
        } => run_verify(
            problem, source, m, max_nodes, code, suite, seed, cases, samples, max_len,
        ),
    }
}

fn read_input(inline: Option<String>, file: Option<&Path>) -> anyhow::Result<Vec<u8>> {
    match (inline, file) {
        (Some(s), _) => Ok(s.into_bytes()),
        (None, Some(p)) => fs::read(p).with_context(|| format!("cannot read {}", p.display())),
        (None, None) => {
            let mut buf = Vec::new();
            io::stdin()
                .read_to_end(&mut buf)
                .context("cannot read stdin")?;
            Ok(buf)
        }
    }
}

fn check_slice_precondition(built: &AifvProblem) -> anyhow::Result<()> {
    let n = built.source.len();
    if n < 7 {
        eprintln!("warning: boundary signs are only guaranteed for n >= 7 symbols, got {n}; checking them directly");
    }
    let report = boundary_sign_check(&built.problem, 20)?;
    if let Some(v) = report.violations.first() {
        bail!(aifv_mcmc::Error::Precondition(format!(
            "boundary sign fails at x={} (k={}, x_k={}): excess {}",
            v.x,
            v.k,
            v.edge,
            format_rational(&v.excess)
        )));
    }
    Ok(())
}

fn envelope_csv(problem: &ProblemSpec, steps: usize, bounds: &str) -> anyhow::Result<String> {
    let m = problem.m();
    if m > 3 {
        bail!(aifv_mcmc::Error::Precondition(format!(
            "tabular envelope limited to m ≤ 3, got m={m}"
        )));
    }
    let dim = m - 1;
    let values = bounds
        .split(',')
        .map(|s| parse_rational(s.trim()))
        .collect::<Result<Vec<Rational>, _>>()?;
    if values.len() < 2 * dim {
        bail!(aifv_mcmc::Error::Precondition(format!(
            "box needs {} bounds, got {}",
            2 * dim,
            values.len()
        )));
    }
    let (lo, hi): (Vec<Rational>, Vec<Rational>) = (0..dim)
        .map(|j| (values[2 * j].clone(), values[2 * j + 1].clone()))
        .unzip();
    if let Some(j) = (0..dim).find(|&j| lo[j] > hi[j]) {
        bail!(aifv_mcmc::Error::Precondition(format!(
            "box axis {} has lo > hi",
            j + 1
        )));
    }
    let mut names: Vec<String> = (1..=dim).map(|j| format!("x{j}")).collect();
    names.extend((0..m).map(|k| format!("g{k}")));
    names.push("h".into());
    let mut header = names.clone();
    header.extend(names.iter().map(|n| format!("{n}_approx")));
    let mut out = header.join(",");
    out.push('\n');
    for x in aifv_mcmc::oracle::grid(&lo, &hi, steps) {
        let mut row: Vec<Rational> = x.0.clone();
        for k in 0..m {
            row.push(eval_envelope(k, &x, problem)?.value);
        }
        row.push(eval_h(&x, problem)?);
        let mut cells: Vec<String> = row.iter().map(format_rational).collect();
        cells.extend(row.iter().map(|v| format!("≈{}", approx_decimal(v, 6))));
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn run_verify(
    problem: Option<PathBuf>,
    source: Option<PathBuf>,
    m: usize,
    max_nodes: Option<usize>,
    code: Option<PathBuf>,
    suite: Suite,
    seed: u64,
    cases: usize,
    samples: usize,
    max_len: usize,
) -> anyhow::Result<()> {
    let mut symbols = None;
    let mut optimal_code = None;
    let spec = match (problem, source) {
        (Some(p), _) => Some(load_problem(&p)?),
        (None, Some(s)) => {
            let file: SourceFile = read_json(&s)?;
            let src = file
                .to_source()
                .with_context(|| format!("invalid source in {}", s.display()))?;
            symbols = Some(src.len());
            let built = aifv_problem(
                &src,
                m,
                max_nodes.unwrap_or_else(|| default_max_nodes(src.len(), m)),
            )?;
            if code.is_none() && matches!(suite, Suite::Roundtrip | Suite::All) {
                let r = solve_iterative(&built.problem, &built.problem.first_chain())?;
                optimal_code = Some(built.code_for(&r.chain)?);
            }
            Some(built.problem)
        }
        (None, None) => None,
    };
    let code = match code {
        Some(path) => {
            let file: CodeFile = read_json(&path)?;
            let code = file.to_code_unchecked()?;
            if let Err(e) = file.to_code() {
                eprintln!("warning: {} is not a valid code: {e}", path.display());
            }
            Some(code)
        }
        None => optimal_code,
    };
    let mut rng = rand::rngs::StdRng::seed_from_u64(seed);
    let wanted = |s: Suite| suite == Suite::All || suite == s;
    let mut outcomes: Vec<(&str, Outcome)> = Vec::new();
    if wanted(Suite::Lemma4) {
        let o = match &spec {
            Some(p) => verify::lemma4(p, &mut rng, cases),
            None => Outcome::Skipped("needs --problem or --source".into()),
        };
        outcomes.push(("lemma4", o));
    }
    if wanted(Suite::Cones) {
        let dim = spec.as_ref().map_or(m, ProblemSpec::m) - 1;
        outcomes.push(("cones", verify::cones(dim, &mut rng, cases)));
    }
    if wanted(Suite::Boundary) {
        let o = match &spec {
            Some(p) => verify::boundary(p, symbols, samples),
            None => Outcome::Skipped("needs --problem or --source".into()),
        };
        outcomes.push(("boundary", o));
    }
    if wanted(Suite::Roundtrip) {
        outcomes.push(("roundtrip", verify::roundtrip(code.as_ref(), max_len)));
    }
    let mut failed = false;
    for (name, o) in &outcomes {
        println!("{}", o.line(name));
        failed |= o.failed();
    }
    if failed {
        return Err(VerificationFailed.into());
    }
    Ok(())
}
