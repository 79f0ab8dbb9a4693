use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use facpoly::arrangement::{enumerate_cells_with_witnesses, DEFAULT_CELL_LIMIT};
use facpoly::instances::compute_m;
use facpoly::io::{bits_doc, Arrangement, Document, SolutionRecord};
use facpoly::numeric::format_rational;
use facpoly::oracle::{brute_force, gen_random, RandomSpec, DEFAULT_BRUTE_CAP};
use facpoly::reductions::{
    affine_to_linear, bmf_rank1, explicit_to_factorized, factor_dense_tensor, factored_tensor_to_uniform,
    quadratic_to_factorized, solve_btf, QuadraticInstance, DEFAULT_EXPANSION_LIMIT,
};
use facpoly::solver::{check_budget, relabel, solve_with_stats, DEFAULT_LEAF_BUDGET};
use facpoly::{
    AffineFactorizedInstance, BlockOrder, DenseTensor, Error, ExplicitInstance, FactoredTensor, FactorizedInstance,
    RationalMatrix, SolveOptions,
};
use serde_json::{json, Value};

const EXIT_VALIDATION: u8 = 1;
const EXIT_BUDGET: u8 = 2;
const EXIT_IO: u8 = 3;
const EXIT_USAGE: u8 = 64;

#[derive(Parser)]
#[command(name = "facpoly", version, about = "Exact factorized binary polynomial optimization")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Maximize a factorized (or affine) instance exactly.
    Solve {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = InstanceKind::Factorized)]
        kind: InstanceKind,
        #[arg(long, value_enum, default_value_t = OrderArg::Auto)]
        order: OrderArg,
        /// Predicted-leaf limit; defaults to $FACPOLY_BUDGET or 10^7.
        #[arg(long)]
        budget: Option<u128>,
        /// Write the solution document here.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        json: bool,
    },
    /// Enumerate every assignment.
    Brute {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_BRUTE_CAP)]
        cap: usize,
        #[arg(long)]
        json: bool,
    },
    /// Convert another problem form into a factorized instance.
    Reduce {
        #[arg(long, value_enum)]
        from: SourceKind,
        #[arg(long, value_enum, default_value_t = TargetKind::Factorized)]
        to: TargetKind,
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Best binary-rank-t approximation of a tensor (factored or dense).
    Btf {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = 1)]
        t: usize,
        #[arg(long)]
        json: bool,
    },
    /// Best x yᵀ approximation of a matrix.
    Bmf {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        json: bool,
    },
    /// Cells of a hyperplane arrangement.
    Cells {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, default_value_t = DEFAULT_CELL_LIMIT)]
        limit: u128,
        #[arg(long)]
        json: bool,
    },
    /// Seeded random factorized instance.
    Gen {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 3)]
        s: usize,
        #[arg(long, default_value_t = 4)]
        nmax: usize,
        #[arg(long, default_value_t = 3)]
        terms: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Check a document without solving it.
    Validate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long, value_enum, default_value_t = DocumentKind::Factorized)]
        kind: DocumentKind,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum InstanceKind {
    Factorized,
    Affine,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Auto,
    Identity,
}

#[derive(Clone, Copy, ValueEnum)]
enum SourceKind {
    Explicit,
    Affine,
    Quadratic,
    Tensor,
}

#[derive(Clone, Copy, ValueEnum)]
enum TargetKind {
    Factorized,
}

#[derive(Clone, Copy, ValueEnum)]
enum DocumentKind {
    Factorized,
    Affine,
    Explicit,
    Dense,
    Factored,
    Matrix,
    Quadratic,
    Arrangement,
}

enum Failure {
    Core(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Core(Error::Budget { .. }) => EXIT_BUDGET,
            Failure::Core(_) => EXIT_VALIDATION,
            Failure::Io(_) => EXIT_IO,
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Core(e) => e.to_string(),
            Failure::Io(m) => m.clone(),
        }
    }
}

type Outcome = Result<(), Failure>;

fn read(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))
}

fn load<T: Document>(path: &Path) -> Result<T, Failure> {
    Ok(T::from_json(&read(path)?)?)
}

fn write(path: &Path, text: &str) -> Outcome {
    std::fs::write(path, format!("{text}\n")).map_err(|e| Failure::Io(format!("cannot write {}: {e}", path.display())))
}

fn emit(out: Option<&Path>, text: &str) -> Outcome {
    match out {
        Some(path) => write(path, text),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn leaf_budget(flag: Option<u128>) -> Result<u128, Failure> {
    if let Some(b) = flag {
        return Ok(b);
    }
    match std::env::var("FACPOLY_BUDGET") {
        Ok(text) => text
            .trim()
            .parse()
            .map_err(|_| Failure::Core(Error::Parse(format!("FACPOLY_BUDGET={text:?} is not a number")))),
        Err(_) => Ok(DEFAULT_LEAF_BUDGET),
    }
}

fn bits(b: &[bool]) -> String {
    b.iter().map(|&v| if v { '1' } else { '0' }).collect()
}

fn summary(inst: &FactorizedInstance) -> Value {
    json!({
        "s": inst.block_count(),
        "n": inst.sizes,
        "terms": inst.terms.len(),
        "m": compute_m(inst),
    })
}

fn report(command: &str, instance: Value, budget: Value, started: Instant, result: Value) -> String {
    let doc = json!({
        "command": command,
        "instance": instance,
        "budget": budget,
        "wall_time_ms": started.elapsed().as_secs_f64() * 1000.0,
        "result": result,
    });
    serde_json::to_string_pretty(&doc).expect("report serializes")
}

fn solve_cmd(
    input: &Path,
    kind: InstanceKind,
    order: OrderArg,
    budget: Option<u128>,
    out: Option<&Path>,
    json_out: bool,
) -> Outcome {
    let started = Instant::now();
    let inst = match kind {
        InstanceKind::Factorized => load::<FactorizedInstance>(input)?,
        InstanceKind::Affine => affine_to_linear(&load::<AffineFactorizedInstance>(input)?, DEFAULT_EXPANSION_LIMIT)?,
    };
    let options = SolveOptions {
        order: match order {
            OrderArg::Auto => BlockOrder::Auto,
            OrderArg::Identity => BlockOrder::Identity,
        },
        leaf_budget: leaf_budget(budget)?,
    };
    let (sol, stats) = solve_with_stats(&inst, &options)?;
    let record = SolutionRecord {
        value: sol.value.clone(),
        assignment: sol.assignment.clone(),
        leaves_explored: Some(stats.leaves_explored),
    };
    if let Some(path) = out {
        write(path, &record.to_json())?;
    }
    if json_out {
        let budget = json!({
            "per_level": stats.budget.per_level.iter().map(u128::to_string).collect::<Vec<_>>(),
            "total": stats.budget.total.to_string(),
            "limit": options.leaf_budget.to_string(),
            "order": stats.order.iter().map(|j| j + 1).collect::<Vec<_>>(),
        });
        let result = json!({
            "value": format_rational(&sol.value),
            "assignment": bits_doc(&sol.assignment.blocks),
            "leaves_explored": stats.leaves_explored,
        });
        println!("{}", report("solve", summary(&inst), budget, started, result));
    } else {
        println!("value: {}", format_rational(&sol.value));
        for (j, b) in sol.assignment.blocks.iter().enumerate() {
            println!("block {}: {}", j + 1, bits(b));
        }
        println!("leaves explored: {} (predicted at most {})", stats.leaves_explored, stats.budget.total);
    }
    Ok(())
}

fn brute_cmd(input: &Path, cap: usize, json_out: bool) -> Outcome {
    let started = Instant::now();
    let inst = load::<FactorizedInstance>(input)?;
    let sol = brute_force(&inst, cap)?;
    if json_out {
        let result = json!({
            "value": format_rational(&sol.value),
            "assignment": bits_doc(&sol.assignment.blocks),
        });
        println!("{}", report("brute", summary(&inst), Value::Null, started, result));
    } else {
        println!("value: {}", format_rational(&sol.value));
        for (j, b) in sol.assignment.blocks.iter().enumerate() {
            println!("block {}: {}", j + 1, bits(b));
        }
    }
    Ok(())
}

/// Factored tensor document, or a dense one factored on the fly.
fn load_tensor(path: &Path) -> Result<FactoredTensor, Failure> {
    let text = read(path)?;
    match FactoredTensor::from_json(&text) {
        Ok(t) => Ok(t),
        Err(factored_err) => match DenseTensor::from_json(&text) {
            Ok(dense) => Ok(factor_dense_tensor(&dense)),
            Err(_) => Err(factored_err.into()),
        },
    }
}

fn reduce_cmd(from: SourceKind, input: &Path, out: Option<&Path>) -> Outcome {
    let inst = match from {
        SourceKind::Explicit => explicit_to_factorized(&load::<ExplicitInstance>(input)?)?.0,
        SourceKind::Affine => affine_to_linear(&load::<AffineFactorizedInstance>(input)?, DEFAULT_EXPANSION_LIMIT)?,
        SourceKind::Quadratic => quadratic_to_factorized(&load::<QuadraticInstance>(input)?)?.0,
        SourceKind::Tensor => factored_tensor_to_uniform(&load_tensor(input)?)?,
    };
    emit(out, &inst.to_json())
}

fn factors_doc(factors: &[Vec<Vec<bool>>]) -> Value {
    factors.iter().map(|f| bits_doc(f)).collect::<Vec<_>>().into()
}

fn btf_cmd(input: &Path, t: usize, json_out: bool) -> Outcome {
    let started = Instant::now();
    let tensor = load_tensor(input)?;
    let sol = solve_btf(&tensor, t, &SolveOptions { leaf_budget: leaf_budget(None)?, ..SolveOptions::default() })?;
    if json_out {
        let instance = json!({ "dims": tensor.dims, "factors": tensor.factors.len(), "t": t });
        let result = json!({ "error": format_rational(&sol.error), "factors": factors_doc(&sol.factors) });
        println!("{}", report("btf", instance, Value::Null, started, result));
    } else {
        println!("error: {}", format_rational(&sol.error));
        for (i, factor) in sol.factors.iter().enumerate() {
            let modes: Vec<String> = factor.iter().map(|b| bits(b)).collect();
            println!("factor {}: {}", i + 1, modes.join(" "));
        }
    }
    Ok(())
}

fn bmf_cmd(input: &Path, json_out: bool) -> Outcome {
    let started = Instant::now();
    let a = load::<RationalMatrix>(input)?;
    let sol = bmf_rank1(&a, &SolveOptions { leaf_budget: leaf_budget(None)?, ..SolveOptions::default() })?;
    if json_out {
        let instance = json!({ "rows": a.rows(), "cols": a.cols(), "rank": a.rank() });
        let result = json!({
            "error": format_rational(&sol.error),
            "x": bits_doc(std::slice::from_ref(&sol.x))[0],
            "y": bits_doc(std::slice::from_ref(&sol.y))[0],
        });
        println!("{}", report("bmf", instance, Value::Null, started, result));
    } else {
        println!("error: {}", format_rational(&sol.error));
        println!("x: {}", bits(&sol.x));
        println!("y: {}", bits(&sol.y));
    }
    Ok(())
}

fn cells_cmd(input: &Path, limit: u128, json_out: bool) -> Outcome {
    let started = Instant::now();
    let arr = load::<Arrangement>(input)?;
    let cells = enumerate_cells_with_witnesses(arr.dim, &arr.functionals, limit)?;
    if json_out {
        let instance = json!({ "dim": arr.dim, "functionals": arr.functionals.len() });
        let result: Vec<Value> = cells
            .iter()
            .map(|c| {
                json!({
                    "signs": c.signs.to_string(),
                    "witness": c.witness.iter().map(format_rational).collect::<Vec<_>>(),
                })
            })
            .collect();
        println!("{}", report("cells", instance, Value::Null, started, json!({ "cells": result })));
    } else {
        println!("{} cells", cells.len());
        for c in &cells {
            let w: Vec<String> = c.witness.iter().map(format_rational).collect();
            println!("{}  at ({})", c.signs, w.join(", "));
        }
    }
    Ok(())
}

fn gen_cmd(seed: u64, s: usize, nmax: usize, terms: usize, out: Option<&Path>) -> Outcome {
    let spec = RandomSpec {
        seed,
        blocks: (s, s),
        block_size: (1, nmax),
        terms: (1, terms.max(1)),
        ..RandomSpec::default()
    };
    emit(out, &gen_random(&spec)?.to_json())
}

fn validate_cmd(input: &Path, kind: DocumentKind) -> Outcome {
    let text = read(input)?;
    let what = match kind {
        DocumentKind::Factorized => {
            let inst = FactorizedInstance::from_json(&text)?;
            let working = relabel(&inst, &facpoly::solver::choose_order(&inst));
            format!(
                "factorized instance: s = {}, {} terms, predicted leaves {}",
                inst.block_count(),
                inst.terms.len(),
                check_budget(&working).total
            )
        }
        DocumentKind::Affine => {
            let inst = AffineFactorizedInstance::from_json(&text)?;
            format!("affine instance: s = {}, {} terms", inst.block_count(), inst.terms.len())
        }
        DocumentKind::Explicit => {
            let inst = ExplicitInstance::from_json(&text)?;
            format!("explicit instance: {} nodes, {} edges", inst.node_count(), inst.edges.len())
        }
        DocumentKind::Dense => format!("dense tensor of shape {:?}", DenseTensor::from_json(&text)?.dims),
        DocumentKind::Factored => {
            let t = FactoredTensor::from_json(&text)?;
            format!("factored tensor of shape {:?} with {} factors", t.dims, t.factors.len())
        }
        DocumentKind::Matrix => {
            let m = RationalMatrix::from_json(&text)?;
            format!("{}x{} matrix of rank {}", m.rows(), m.cols(), m.rank())
        }
        DocumentKind::Quadratic => {
            let q = QuadraticInstance::from_json(&text)?;
            format!("quadratic instance: s = {}, {} matrices", q.sizes.len(), q.q.len())
        }
        DocumentKind::Arrangement => {
            let a = Arrangement::from_json(&text)?;
            format!("arrangement of {} functionals in dimension {}", a.functionals.len(), a.dim)
        }
    };
    println!("ok: {what}");
    Ok(())
}

fn run(cli: Cli) -> Outcome {
    match cli.command {
        Command::Solve { input, kind, order, budget, out, json } => {
            solve_cmd(&input, kind, order, budget, out.as_deref(), json)
        }
        Command::Brute { input, cap, json } => brute_cmd(&input, cap, json),
        Command::Reduce { from, to: TargetKind::Factorized, input, out } => reduce_cmd(from, &input, out.as_deref()),
        Command::Btf { input, t, json } => btf_cmd(&input, t, json),
        Command::Bmf { input, json } => bmf_cmd(&input, json),
        Command::Cells { input, limit, json } => cells_cmd(&input, limit, json),
        Command::Gen { seed, s, nmax, terms, out } => gen_cmd(seed, s, nmax, terms, out.as_deref()),
        Command::Validate { input, kind } => validate_cmd(&input, kind),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
