use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::json;

use derand_core::bench::{run_bench, write_bench_csv, BenchInstance};
use derand_core::counting::Skew;
use derand_core::params::{compute_parameters, cost_model, verify_proposition, CostConstants, Mode, Overrides};
use derand_core::planted::{generate, PlantError, PlantSpec, Sidecar};
use derand_core::rational::{self, Rational};
use derand_core::search::{FillKind, Outcome, StagewiseConfig};
use derand_core::solve::{solve, CounterChoice, Driver, SolveOptions};
use derand_core::stars::StarFamily;
use derand_core::trace::{summary_json, write_csv};
use derand_core::verify::{faulty_trim, run_suite, Suite, VerifyOptions};
use derand_core::CnfFormula;

const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(name = "derand", version, about = "Deterministic search for satisfying assignments of dense CNFs")]
struct Cli {
    /// Largest variable count handled by exhaustive enumeration.
    #[arg(long, global = true, env = "DERAND_MAX_EXHAUSTIVE", default_value_t = 24)]
    max_exhaustive: u32,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Search for a satisfying assignment of a DIMACS formula.
    Solve(SolveArgs),
    /// Run the invariant suites.
    Verify(VerifyArgs),
    /// Generate a planted instance with an exact bias sidecar.
    Gen(GenArgs),
    /// Run every driver on every instance and emit a CSV matrix.
    Bench(BenchArgs),
    /// Print the derived parameter set, inequality margins and cost model.
    Params(ParamsArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum DriverArg {
    Stagewise,
    Naive,
    PrgEnum,
    Smallbias,
    Auto,
}

impl From<DriverArg> for Driver {
    fn from(d: DriverArg) -> Self {
        match d {
            DriverArg::Stagewise => Driver::Stagewise,
            DriverArg::Naive => Driver::Naive,
            DriverArg::PrgEnum => Driver::PrgEnum,
            DriverArg::Smallbias => Driver::SmallBias,
            DriverArg::Auto => Driver::Auto,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Paper,
    Practical,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Paper => Mode::Paper,
            ModeArg::Practical => Mode::Practical,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum CounterArg {
    Exact,
    Up,
    Down,
    Seeded,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Exhaustive,
    Kwise,
    Blockwise,
}

#[derive(Clone, Copy, ValueEnum)]
enum FillArg {
    Uniform,
    Kwise,
    Smallbias,
}

#[derive(Clone, Copy, ValueEnum)]
enum SuiteArg {
    Core,
    Prg,
    Restrictions,
    Framework,
    Params,
    All,
}

fn parse_rational(s: &str) -> Result<Rational, String> {
    rational::parse(s).ok_or_else(|| format!("not a rational: {s:?}"))
}

#[derive(Args, Clone)]
struct SearchOpts {
    #[arg(long, value_enum, default_value = "auto")]
    driver: DriverArg,
    /// Asserted bias lower bound. Omit to halve from 1/2 down to `--eps-floor`.
    #[arg(long, value_parser = parse_rational)]
    eps: Option<Rational>,
    #[arg(long, value_parser = parse_rational, default_value = "1/1024")]
    eps_floor: Rational,
    #[arg(long, value_enum, default_value = "practical")]
    mode: ModeArg,
    #[arg(long = "const-C", default_value_t = 1.0)]
    const_c: f64,
    /// Star probability in practical mode; must be a power of 1/2.
    #[arg(long, value_parser = parse_rational)]
    p: Option<Rational>,
    #[arg(long, value_enum, default_value = "exact")]
    counter: CounterArg,
    /// Seed for the seeded adversarial counter.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "exhaustive")]
    family: FamilyArg,
    /// Independence of the k-wise star family or fill.
    #[arg(long, default_value_t = 3)]
    k: usize,
    #[arg(long, value_enum, default_value = "uniform")]
    fill: FillArg,
    #[arg(long, value_parser = parse_rational, default_value = "1/8")]
    fill_delta: Rational,
}

impl SearchOpts {
    fn options(&self, limit: u32) -> Result<SolveOptions> {
        if let Some(e) = &self.eps {
            if *e <= rational::int(0) || *e > rational::int(1) {
                bail!("--eps must lie in (0, 1]");
            }
        }
        if limit == 0 {
            bail!("--max-exhaustive must be positive");
        }
        let counter = match self.counter {
            CounterArg::Exact => CounterChoice::Exact,
            CounterArg::Up => CounterChoice::Adversarial(Skew::Up),
            CounterArg::Down => CounterChoice::Adversarial(Skew::Down),
            CounterArg::Seeded => CounterChoice::Adversarial(Skew::Seeded(self.seed)),
        };
        let family = match self.family {
            FamilyArg::Exhaustive => StarFamily::Exhaustive,
            FamilyArg::Kwise => StarFamily::KwiseSelect { k: self.k },
            FamilyArg::Blockwise => StarFamily::Blockwise,
        };
        let fill = match self.fill {
            FillArg::Uniform => FillKind::Uniform,
            FillArg::Kwise => FillKind::Kwise { k: self.k },
            FillArg::Smallbias => FillKind::SmallBias {
                delta: self.fill_delta.clone(),
            },
        };
        Ok(SolveOptions {
            driver: self.driver.into(),
            eps: self.eps.clone(),
            eps_floor: self.eps_floor.clone(),
            mode: self.mode.into(),
            c: self.const_c,
            overrides: Overrides {
                p: self.p.clone(),
                ..Overrides::default()
            },
            stagewise: StagewiseConfig {
                family,
                fill,
                ..StagewiseConfig::default()
            },
            counter,
            limit,
        })
    }
}

#[derive(Args)]
struct SolveArgs {
    input: PathBuf,
    #[command(flatten)]
    search: SearchOpts,
    #[arg(long)]
    trace_out: Option<PathBuf>,
    #[arg(long)]
    summary_out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long, value_enum, default_value = "all")]
    suite: SuiteArg,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Replace trimming with a version that trims one width too far.
    #[arg(long, hide = true)]
    inject_trim_bug: bool,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long = "M")]
    m: usize,
    #[arg(long)]
    k: usize,
    #[arg(long, value_parser = parse_rational)]
    eps: Rational,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output prefix; writes `<out>.cnf` and `<out>.json`.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// DIMACS files. A `.json` sidecar next to each supplies its ε.
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "stagewise,naive,prg-enum")]
    drivers: Vec<DriverArg>,
    #[command(flatten)]
    search: SearchOpts,
    /// CSV destination; stdout if omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ParamsArgs {
    #[arg(long = "M")]
    m: usize,
    #[arg(long)]
    n: usize,
    #[arg(long, value_parser = parse_rational)]
    eps: Rational,
    #[arg(long, value_enum, default_value = "paper")]
    mode: ModeArg,
    #[arg(long = "const-C", default_value_t = 1.0)]
    const_c: f64,
}

fn read_formula(path: &Path) -> Result<CnfFormula> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    CnfFormula::parse_dimacs(&text).with_context(|| format!("parsing {}", path.display()))
}

fn write_file(path: &Path, contents: &[u8]) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn cmd_solve(args: &SolveArgs, limit: u32) -> Result<u8> {
    let f = read_formula(&args.input)?;
    let opts = args.search.options(limit)?;
    let trace = solve(&f, &opts);
    if let Some(p) = &args.trace_out {
        let mut buf = Vec::new();
        write_csv(&trace, &mut buf)?;
        write_file(p, &buf)?;
    }
    if let Some(p) = &args.summary_out {
        write_file(p, serde_json::to_string_pretty(&summary_json(&trace))?.as_bytes())?;
    }
    match &trace.outcome {
        Outcome::Found(x) => println!("{x}"),
        Outcome::Failed(e) => eprintln!("{e}"),
    }
    Ok(trace.outcome.exit_code() as u8)
}

fn cmd_verify(args: &VerifyArgs) -> Result<u8> {
    let opts = VerifyOptions {
        seed: args.seed,
        trim: if args.inject_trim_bug {
            faulty_trim
        } else {
            VerifyOptions::default().trim
        },
    };
    let suites: Vec<Suite> = match args.suite {
        SuiteArg::Core => vec![Suite::Core],
        SuiteArg::Prg => vec![Suite::Prg],
        SuiteArg::Restrictions => vec![Suite::Restrictions],
        SuiteArg::Framework => vec![Suite::Framework],
        SuiteArg::Params => vec![Suite::Params],
        SuiteArg::All => Suite::ALL.to_vec(),
    };
    let mut ok = true;
    for s in suites {
        for r in run_suite(s, &opts) {
            ok &= r.passed;
            println!("{}", serde_json::to_string(&r)?);
        }
    }
    Ok(if ok { 0 } else { 1 })
}

fn cmd_gen(args: &GenArgs, limit: u32) -> Result<u8> {
    let spec = PlantSpec {
        n: args.n,
        m: args.m,
        k: args.k,
        seed: args.seed,
    };
    let (inst, attempts) = match generate(spec, &args.eps, limit) {
        Ok(r) => r,
        Err(e @ PlantError::BudgetExhausted { .. }) => {
            eprintln!("error: {e}");
            return Ok(1);
        }
        Err(e) => bail!(e),
    };
    let sidecar = inst.sidecar(spec, &args.eps, attempts);
    write_file(&args.out.with_extension("cnf"), inst.formula.to_dimacs().as_bytes())?;
    write_file(
        &args.out.with_extension("json"),
        serde_json::to_string_pretty(&sidecar)?.as_bytes(),
    )?;
    println!("{}", serde_json::to_string(&sidecar)?);
    Ok(0)
}

fn cmd_bench(args: &BenchArgs, limit: u32) -> Result<u8> {
    let base = args.search.options(limit)?;
    let mut instances = Vec::new();
    for path in &args.inputs {
        let formula = read_formula(path)?;
        let sidecar = path.with_extension("json");
        let eps = if sidecar.exists() {
            let s: Sidecar = serde_json::from_str(&fs::read_to_string(&sidecar)?)
                .with_context(|| format!("parsing {}", sidecar.display()))?;
            Some(s.target_eps)
        } else {
            None
        };
        instances.push(BenchInstance {
            name: path.display().to_string(),
            formula,
            eps,
        });
    }
    let drivers: Vec<Driver> = args.drivers.iter().map(|&d| d.into()).collect();
    let rows = run_bench(&instances, &drivers, &base);
    let mut buf = Vec::new();
    write_bench_csv(&rows, &mut buf)?;
    match &args.out {
        Some(p) => write_file(p, &buf)?,
        None => print!("{}", String::from_utf8(buf)?),
    }
    Ok(0)
}

fn cmd_params(args: &ParamsArgs) -> Result<u8> {
    let ps = compute_parameters(args.m, args.n, &args.eps, args.const_c, args.mode.into(), &Overrides::default())?;
    let out = json!({
        "parameters": serde_json::to_value(&ps)?,
        "proposition": serde_json::to_value(verify_proposition(&ps))?,
        "cost": serde_json::to_value(cost_model(&ps, &CostConstants::default()))?,
    });
    println!("{}", serde_json::to_string_pretty(&out)?);
    Ok(0)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let limit = cli.max_exhaustive;
    let res = match &cli.command {
        Command::Solve(a) => cmd_solve(a, limit),
        Command::Verify(a) => cmd_verify(a),
        Command::Gen(a) => cmd_gen(a, limit),
        Command::Bench(a) => cmd_bench(a, limit),
        Command::Params(a) => cmd_params(a),
    };
    match res {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_CONFIG)
        }
    }
}
