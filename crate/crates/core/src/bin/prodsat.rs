use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use prodsat::experiments::{fig3, thresholds_csv_row, Fig3Config, THRESHOLDS_CSV_HEADER};
use prodsat::graph::{
    clauses_for_density, count_dimer_coverings, hall_violator, leaf_removal, max_matching, sample_graph,
    estimate_thresholds,
};
use prodsat::groebner::{exact_reduced_basis, parse_system, GroebnerOptions, MonomialOrder, OrderKind, Polynomial};
use prodsat::field::GaussianRational;
use prodsat::homotopy::{prodsat_solve, ProdsatOutcome};
use prodsat::instance::{kernel_dimension, sample_exact_instance, sample_instance, Instance, Mode, DEFAULT_KERNEL_TOL};
use prodsat::io::{read_instance, write_instance, instance_to_json};
use prodsat::patterns::{verify_pattern, PatternKind, PatternReport};
use prodsat::polysystem::build_equations_exact;
use prodsat::polytope::{bkk_bound_polys, DEFAULT_MV_DIM_CAP};
use prodsat::{QsatError, Result};

/// Product-state satisfiability tools for random k-QSAT.
#[derive(Parser)]
#[command(name = "prodsat", version)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Sample a random instance.
    Gen(GenArgs),
    /// Leaf removal down to the 2-core.
    Peel(InstanceArgs),
    /// Dimer covering of the core, or a Hall violator.
    Dimer(DimerArgs),
    /// Find a satisfying product state.
    Solve(SolveArgs),
    /// Reduced Groebner basis of a polynomial system or of an instance.
    Groebner(GroebnerArgs),
    /// Dimension of the ground space of H.
    Kernel(KernelArgs),
    /// Mixed volume of a square polynomial system.
    Mv(SystemArgs),
    /// Check the pattern families against their recurrences.
    Patterns(PatternsArgs),
    /// Empty-core and covering frequencies across a density grid.
    Thresholds(ThresholdsArgs),
    /// Kernel dimension vs mixed volume vs product span on square instances.
    Fig3(Fig3Args),
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Float,
    Exact,
}

#[derive(Args, Clone)]
struct InstanceArgs {
    /// Read the instance from a JSON file instead of sampling one.
    #[arg(long, short)]
    input: Option<PathBuf>,
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 20)]
    n: usize,
    /// Number of clauses.
    #[arg(long, conflicts_with = "alpha")]
    m: Option<usize>,
    /// Clause density M/N.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "float")]
    mode: ModeArg,
    /// Denominator bound for exact amplitudes.
    #[arg(long, default_value_t = 16)]
    denom_bound: i64,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl InstanceArgs {
    fn load(&self) -> Result<Instance> {
        if let Some(p) = &self.input {
            return read_instance(p);
        }
        let m = match (self.m, self.alpha) {
            (Some(m), _) => m,
            (None, Some(a)) => clauses_for_density(self.n, a),
            (None, None) => return Err(QsatError::InvalidParameters("give --m or --alpha".into())),
        };
        let g = sample_graph(self.n, m, self.k, self.seed)?;
        match self.mode {
            ModeArg::Float => Ok(sample_instance(&g, self.seed)),
            ModeArg::Exact => sample_exact_instance(&g, self.denom_bound, self.seed),
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    inst: InstanceArgs,
}

#[derive(Args)]
struct DimerArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    /// Also count all coverings of the core (exponential).
    #[arg(long)]
    count: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
}

#[derive(Args)]
struct SystemArgs {
    /// Polynomial system, one polynomial per line in x1, x2, ...
    #[arg(long, conflicts_with = "input")]
    system: Option<PathBuf>,
    #[command(flatten)]
    inst: InstanceArgs,
}

impl SystemArgs {
    fn polys(&self) -> Result<Vec<Polynomial<GaussianRational>>> {
        if let Some(p) = &self.system {
            return Ok(parse_system(&std::fs::read_to_string(p)?, None)?.1);
        }
        let mut inst = self.inst.clone();
        inst.mode = ModeArg::Exact;
        let inst = inst.load()?;
        Ok(build_equations_exact(&inst)?.polys)
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    Lex,
    Grlex,
    Grevlex,
}

#[derive(Args)]
struct GroebnerArgs {
    #[command(flatten)]
    sys: SystemArgs,
    #[arg(long, value_enum, default_value = "grevlex")]
    order: OrderArg,
    /// Plain Buchberger without pair criteria.
    #[arg(long)]
    strict: bool,
    /// Check the modular result exactly.
    #[arg(long)]
    verify: bool,
    #[arg(long)]
    budget_sec: Option<f64>,
}

#[derive(Args)]
struct KernelArgs {
    #[command(flatten)]
    inst: InstanceArgs,
    #[arg(long, default_value_t = DEFAULT_KERNEL_TOL)]
    tol: f64,
}

#[derive(Args)]
struct PatternsArgs {
    /// Pattern family; all families when omitted.
    #[arg(long)]
    kind: Option<PatternKind>,
    /// Single size; the family's verified range when omitted.
    #[arg(long)]
    m: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 2)]
    trials: usize,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ThresholdsArgs {
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, default_value_t = 10_000)]
    n: usize,
    /// Comma-separated densities.
    #[arg(long, value_delimiter = ',', default_value = "0.7,0.75,0.8,0.85,0.9,0.95,1.0")]
    alpha: Vec<f64>,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Fig3Args {
    #[arg(long, default_value_t = 5)]
    n: usize,
    /// Number of sampled graphs, or "all".
    #[arg(long, default_value = "all")]
    trials: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = prodsat::experiments::FIG3_DEFAULT_DENOM_BOUND)]
    denom_bound: i64,
    /// Per-instance time budget; slower instances are reported as skipped.
    #[arg(long)]
    budget_sec: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn pretty(v: &serde_json::Value) -> String {
    serde_json::to_string_pretty(v).expect("json values serialize") + "\n"
}

/// Single-record output: pretty JSON, or a header and one row.
fn record(format: Format, v: serde_json::Value) -> String {
    match format {
        Format::Json => pretty(&v),
        Format::Csv => {
            let obj = v.as_object().expect("records are objects");
            let keys: Vec<&str> = obj.keys().map(String::as_str).collect();
            let vals: Vec<String> = obj.values().map(|x| x.to_string().replace(',', ";")).collect();
            format!("{}\n{}\n", keys.join(","), vals.join(","))
        }
    }
}

fn budget(sec: Option<f64>) -> Result<Option<Duration>> {
    sec.map(|s| Duration::try_from_secs_f64(s).map_err(|e| QsatError::InvalidParameters(format!("budget: {e}"))))
        .transpose()
}

fn cmd_gen(a: &GenArgs) -> Result<ExitCode> {
    let inst = a.inst.load()?;
    match &a.inst.out {
        Some(p) => write_instance(p, &inst)?,
        None => println!("{}", instance_to_json(&inst)?),
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_peel(a: &InstanceArgs) -> Result<ExitCode> {
    let inst = a.load()?;
    let r = leaf_removal(&inst.graph);
    let v = json!({
        "n_vars": inst.n_vars(),
        "n_clauses": inst.graph.n_clauses(),
        "core_vars": r.core.n_vars,
        "core_clauses": r.core.n_clauses(),
        "core_fraction": r.core_fraction(inst.n_vars()),
        "removed": r.removal_list.len(),
    });
    emit(a.out.as_deref(), &record(a.format, v))?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_dimer(a: &DimerArgs) -> Result<ExitCode> {
    let inst = a.inst.load()?;
    let r = leaf_removal(&inst.graph);
    let mm = max_matching(&r.core);
    let mut v = json!({ "core_vars": r.core.n_vars, "core_clauses": r.core.n_clauses() });
    let code = match mm.covering() {
        Some(c) => {
            let pairs: Vec<[usize; 2]> =
                c.assignment.iter().enumerate().map(|(m, &x)| [r.clause_map[m], r.var_map[x]]).collect();
            v["covering"] = json!(pairs);
            if a.count {
                v["count"] = json!(count_dimer_coverings(&r.core)?);
            }
            ExitCode::SUCCESS
        }
        None => {
            let h = hall_violator(&r.core).ok_or_else(|| QsatError::Invariant("no covering and no violator".into()))?;
            v["violator"] = json!({
                "clauses": h.clauses.iter().map(|&c| r.clause_map[c]).collect::<Vec<_>>(),
                "neighborhood": h.neighborhood.iter().map(|&x| r.var_map[x]).collect::<Vec<_>>(),
            });
            ExitCode::from(2)
        }
    };
    emit(a.inst.out.as_deref(), &pretty(&v))?;
    Ok(code)
}

fn cmd_solve(a: &SolveArgs) -> Result<ExitCode> {
    let inst = a.inst.load()?;
    let start = Instant::now();
    match prodsat_solve(&inst, a.inst.seed, a.tol)? {
        ProdsatOutcome::Solution(s) => {
            let mut report = json!({
                "outcome": "solution",
                "max_residual": s.max_residual,
                "core_vars": s.core_vars,
                "core_clauses": s.core_clauses,
                "attempts": s.attempts,
            });
            match &a.inst.out {
                Some(p) => {
                    std::fs::write(p, serde_json::to_string_pretty(&s.state)? + "\n")?;
                    report["state_file"] = json!(p);
                }
                None => report["state"] = serde_json::to_value(&s.state)?,
            }
            eprintln!("max residual {:.3e} in {:.3}s", s.max_residual, start.elapsed().as_secs_f64());
            print!("{}", pretty(&report));
            Ok(ExitCode::SUCCESS)
        }
        ProdsatOutcome::NoCovering(h) => {
            let report = json!({
                "outcome": "no_covering",
                "clauses": h.clauses,
                "neighborhood": h.neighborhood,
                "root": h.root,
            });
            emit(a.inst.out.as_deref(), &pretty(&report))?;
            Ok(ExitCode::from(2))
        }
    }
}

fn cmd_groebner(a: &GroebnerArgs) -> Result<ExitCode> {
    let polys = a.sys.polys()?;
    let n = polys.first().map_or(0, Polynomial::nvars);
    let kind = match a.order {
        OrderArg::Lex => OrderKind::Lex,
        OrderArg::Grlex => OrderKind::Grlex,
        OrderArg::Grevlex => OrderKind::Grevlex,
    };
    let order = Arc::new(MonomialOrder::new(kind, n));
    let polys: Vec<_> = polys.iter().map(|p| p.with_order(&order)).collect();
    let opts = GroebnerOptions {
        strict: a.strict,
        verify: a.verify,
        deadline: budget(a.budget_sec)?.map(|b| Instant::now() + b),
        ..GroebnerOptions::default()
    };
    let gb = exact_reduced_basis(&polys, &order, &opts)?;
    let mut text = String::new();
    for g in &gb.generators {
        text.push_str(&g.to_string());
        text.push('\n');
    }
    emit(a.sys.inst.out.as_deref(), &text)?;
    Ok(if gb.is_one() { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn cmd_kernel(a: &KernelArgs) -> Result<ExitCode> {
    let inst = a.inst.load()?;
    let d = kernel_dimension(&inst, a.tol)?;
    let v = json!({
        "n_vars": inst.n_vars(),
        "n_clauses": inst.graph.n_clauses(),
        "mode": if inst.mode == Mode::Exact { "exact" } else { "float" },
        "kernel_dim": d,
    });
    emit(a.inst.out.as_deref(), &record(a.inst.format, v))?;
    Ok(if d == 0 { ExitCode::from(2) } else { ExitCode::SUCCESS })
}

fn cmd_mv(a: &SystemArgs) -> Result<ExitCode> {
    let polys = a.polys()?;
    let mv = bkk_bound_polys(&polys, DEFAULT_MV_DIM_CAP.max(polys.len()))?;
    emit(a.inst.out.as_deref(), &format!("{mv}\n"))?;
    Ok(ExitCode::SUCCESS)
}

fn pattern_range(kind: PatternKind) -> std::ops::RangeInclusive<usize> {
    match kind {
        PatternKind::Sunflower => 1..=3,
        PatternKind::LooseChain | PatternKind::StrongChain => 1..=4,
        PatternKind::LooseCycle => 2..=4,
        PatternKind::StrongCycle => 4..=6,
    }
}

fn cmd_patterns(a: &PatternsArgs) -> Result<ExitCode> {
    let kinds: Vec<PatternKind> = a.kind.map_or_else(|| PatternKind::ALL.to_vec(), |k| vec![k]);
    let seeds: Vec<u64> = (0..a.trials.max(1) as u64).map(|t| prodsat::rng::derive_seed(a.seed, t)).collect();
    let mut reports = Vec::new();
    for kind in kinds {
        let ms: Vec<usize> = a.m.map_or_else(|| pattern_range(kind).collect(), |m| vec![m]);
        for m in ms {
            reports.push(verify_pattern(kind, m, &seeds)?);
        }
    }
    let text = match a.format {
        Format::Csv => {
            let mut s = format!("{}\n", PatternReport::CSV_HEADER);
            for r in &reports {
                s.push_str(&r.csv_row());
                s.push('\n');
            }
            s
        }
        Format::Json => pretty(&serde_json::to_value(&reports)?),
    };
    emit(a.out.as_deref(), &text)?;
    Ok(if reports.iter().all(PatternReport::ok) { ExitCode::SUCCESS } else { ExitCode::FAILURE })
}

fn cmd_thresholds(a: &ThresholdsArgs) -> Result<ExitCode> {
    let rows = estimate_thresholds(a.k, a.n, &a.alpha, a.trials, a.seed)?;
    let text = match a.format {
        Format::Csv => {
            let mut s = format!("{THRESHOLDS_CSV_HEADER}\n");
            for r in &rows {
                s.push_str(&thresholds_csv_row(r));
                s.push('\n');
            }
            s
        }
        Format::Json => pretty(&serde_json::to_value(&rows)?),
    };
    emit(a.out.as_deref(), &text)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_fig3(a: &Fig3Args) -> Result<ExitCode> {
    let trials = match a.trials.as_str() {
        "all" => None,
        t => Some(t.parse::<usize>().map_err(|_| QsatError::InvalidParameters(format!("--trials: {t:?}")))?),
    };
    let cfg = Fig3Config {
        denom_bound: a.denom_bound,
        budget: budget(a.budget_sec)?,
        ..Fig3Config::new(a.n, trials, a.seed)
    };
    let report = fig3(&cfg)?;
    let text = match a.format {
        Format::Csv => report.to_csv(),
        Format::Json => pretty(&serde_json::to_value(&report)?),
    };
    emit(a.out.as_deref(), &text)?;
    eprint!("{}", report.summary());
    Ok(ExitCode::SUCCESS)
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.cmd {
        Cmd::Gen(a) => cmd_gen(a),
        Cmd::Peel(a) => cmd_peel(a),
        Cmd::Dimer(a) => cmd_dimer(a),
        Cmd::Solve(a) => cmd_solve(a),
        Cmd::Groebner(a) => cmd_groebner(a),
        Cmd::Kernel(a) => cmd_kernel(a),
        Cmd::Mv(a) => cmd_mv(a),
        Cmd::Patterns(a) => cmd_patterns(a),
        Cmd::Thresholds(a) => cmd_thresholds(a),
        Cmd::Fig3(a) => cmd_fig3(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { ExitCode::FAILURE } else { ExitCode::SUCCESS };
            let _ = e.print();
            return code;
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
