use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{bail, Context, Result};
use backjump_core::generators::{gen_irrelevant_pattern, gen_pigeonhole, random_pb};
use backjump_core::harness::{
    compare_pairwise, emit_stats, run_benchmark, FamilySpec, RowVerdict, StatsFormat, StatsRow,
};
use backjump_core::{
    parse_opb, write_opb, AnalysisConfig, Formula, Fraction, Heuristic, Limits, Literal, Mode, Solver, StopCriterion,
    Verdict, WeakeningStrategy,
};
use clap::{Args, Parser, Subcommand};

/// Pseudo-Boolean CDCL solver with extended conflict analysis.
#[derive(Parser, Debug)]
#[command(name = "backjump", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Solve an OPB file. Exits 10 on SAT, 20 on UNSAT, 0 otherwise.
    Solve(SolveArgs),
    /// Write a generated instance in OPB format.
    Gen {
        #[command(subcommand)]
        family: GenFamily,
    },
    /// Run configurations over instance families and write per-run stats.
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
struct SolveArgs {
    file: PathBuf,
    /// Defaults to extended when --weaken or --stop is given.
    #[arg(long)]
    mode: Option<Mode>,
    /// never, any or ordered.
    #[arg(long)]
    weaken: Option<WeakeningStrategy>,
    /// bjlevel, toplevel or highlevel.
    #[arg(long)]
    stop: Option<StopCriterion>,
    /// Fraction for `--stop highlevel`, as `0.1` or `1/10`.
    #[arg(long, value_name = "R")]
    high_fraction: Option<Fraction>,
    /// Literals to decide first (`x3`, `~x3` or `-x3`), then fixed order.
    #[arg(long, value_name = "FILE")]
    decisions: Option<PathBuf>,
    /// Write this run's stats as a JSON object.
    #[arg(long, value_name = "FILE")]
    stats: Option<PathBuf>,
    #[command(flatten)]
    limits: LimitArgs,
}

#[derive(Args, Debug, Clone, Copy)]
struct LimitArgs {
    #[arg(long)]
    max_conflicts: Option<u64>,
    /// Seconds.
    #[arg(long, value_name = "SECS")]
    time_limit: Option<f64>,
}

impl LimitArgs {
    fn limits(self, default: Limits) -> Result<Limits> {
        let time_limit = match self.time_limit {
            Some(s) if !(s.is_finite() && s >= 0.0) => bail!("time limit must be a non-negative number"),
            Some(s) => Some(Duration::from_secs_f64(s)),
            None => default.time_limit,
        };
        Ok(Limits { max_conflicts: self.max_conflicts.or(default.max_conflicts), time_limit })
    }
}

#[derive(Subcommand, Debug)]
enum GenFamily {
    /// n pigeons, n - 1 holes.
    Pigeonhole {
        n: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// The irrelevant-literal pattern; the decision script goes to
    /// `--script`.
    Irrelevant {
        n: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[arg(long)]
        script: Option<PathBuf>,
    },
    Random {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        vars: u32,
        #[arg(long, default_value_t = 12)]
        constraints: u32,
        #[arg(long, default_value_t = 8)]
        max_coef: u32,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args, Debug)]
struct BenchArgs {
    /// Comma-separated: `pigeonhole:4-8`, `irrelevant:10`,
    /// `random:SEED:VARS:CONSTRAINTS:MAXCOEF[:COUNT]`.
    #[arg(long, value_delimiter = ',', required = true)]
    families: Vec<FamilySpec>,
    /// Comma-separated configuration names, or `all`.
    #[arg(long, value_delimiter = ',', default_value = "regular,extended/weaken-any/until-bjlevel")]
    configs: Vec<String>,
    /// Stats file; `.json` selects JSON, anything else CSV.
    #[arg(long)]
    out: PathBuf,
    /// Worker threads; 0 uses every core.
    #[arg(long, default_value_t = 0)]
    jobs: usize,
    /// Print instances solved by both configurations.
    #[arg(long, num_args = 2, value_names = ["A", "B"])]
    compare: Option<Vec<AnalysisConfig>>,
    #[command(flatten)]
    limits: LimitArgs,
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Solve(args) => solve(args),
        Command::Gen { family } => generate(family).map(|()| 0),
        Command::Bench(args) => bench(args).map(|()| 0),
    };
    match outcome {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn analysis_config(args: &SolveArgs) -> Result<AnalysisConfig> {
    let mode =
        args.mode.unwrap_or(if args.weaken.is_some() || args.stop.is_some() { Mode::Extended } else { Mode::Regular });
    let mut stop = args.stop.unwrap_or_default();
    if let Some(r) = args.high_fraction {
        match stop {
            StopCriterion::UntilHighLevel(_) => stop = StopCriterion::UntilHighLevel(r),
            _ => bail!("--high-fraction only applies to --stop highlevel"),
        }
    }
    if mode == Mode::Regular && (args.weaken.is_some() || args.stop.is_some()) {
        bail!("--weaken and --stop need --mode extended");
    }
    Ok(AnalysisConfig { mode, weakening: args.weaken.unwrap_or_default(), stop })
}

fn read_decisions(path: &Path, num_vars: u32) -> Result<Vec<Literal>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("");
        for token in line.split_whitespace() {
            let lit: Literal =
                token.parse().with_context(|| format!("{}:{}: bad literal `{token}`", path.display(), i + 1))?;
            if lit.var().index() > num_vars {
                bail!("{}:{}: {} is not a variable of the instance", path.display(), i + 1, lit.var());
            }
            out.push(lit);
        }
    }
    Ok(out)
}

fn solve(args: SolveArgs) -> Result<u8> {
    let config = analysis_config(&args)?;
    let text = fs::read_to_string(&args.file).with_context(|| format!("reading {}", args.file.display()))?;
    let instance = parse_opb(&text).with_context(|| format!("parsing {}", args.file.display()))?;
    for w in &instance.warnings {
        log::warn!("{w}");
    }
    let formula = Formula::from_raw(instance.variable_count, &instance.constraints);
    let heuristic = match &args.decisions {
        Some(path) => Heuristic::script_then_fixed(read_decisions(path, formula.num_vars())?),
        None => Heuristic::FixedOrder,
    };
    let limits = args.limits.limits(Limits::default())?;
    let mut solver = Solver::new(&formula, config).with_heuristic(heuristic).with_limits(limits);
    let result = solver.solve()?;
    let st = &result.stats;

    let stdout = io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "c config {config}")?;
    writeln!(
        out,
        "c conflicts {} cancellations {} decisions {} improved backjumps {}/{} time {:.3} ms",
        st.conflicts,
        st.cancellations,
        st.decisions,
        st.improved_backjumps,
        st.total_backjumps,
        st.wall_time.as_secs_f64() * 1000.0
    )?;
    let code = match &result.verdict {
        Verdict::Satisfiable(model) => {
            writeln!(out, "s SATISFIABLE")?;
            let values: Vec<String> = model
                .literals()
                .map(|l| if l.polarity() { l.var().to_string() } else { format!("-{}", l.var()) })
                .collect();
            writeln!(out, "v {}", values.join(" "))?;
            10
        }
        Verdict::Unsatisfiable => {
            writeln!(out, "s UNSATISFIABLE")?;
            20
        }
        Verdict::Unknown => {
            writeln!(out, "s UNKNOWN")?;
            0
        }
    };
    if let Some(path) = &args.stats {
        let name = args.file.file_name().map(|n| n.to_string_lossy().into_owned()).unwrap_or_default();
        let row = StatsRow::new(&name, "file", None, config, RowVerdict::of(&result.verdict), st);
        let json = serde_json::to_string_pretty(&row)?;
        fs::write(path, json + "\n").with_context(|| format!("writing {}", path.display()))?;
    }
    Ok(code)
}

fn write_text(output: Option<&Path>, text: &str) -> Result<()> {
    match output {
        Some(path) => fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => Ok(io::stdout().write_all(text.as_bytes())?),
    }
}

fn generate(family: GenFamily) -> Result<()> {
    match family {
        GenFamily::Pigeonhole { n, output } => {
            if n < 2 {
                bail!("pigeonhole needs n >= 2");
            }
            write_text(output.as_deref(), &write_opb(&gen_pigeonhole(n)))
        }
        GenFamily::Irrelevant { n, output, script } => {
            if n < 3 {
                bail!("the irrelevant pattern needs n >= 3");
            }
            let scenario = gen_irrelevant_pattern(n);
            write_text(output.as_deref(), &write_opb(&scenario.instance))?;
            if let Some(path) = script {
                let lits: Vec<String> = scenario.script.iter().map(ToString::to_string).collect();
                fs::write(&path, lits.join(" ") + "\n").with_context(|| format!("writing {}", path.display()))?;
            }
            Ok(())
        }
        GenFamily::Random { seed, vars, constraints, max_coef, output } => {
            if vars == 0 || max_coef == 0 {
                bail!("--vars and --max-coef must be positive");
            }
            write_text(output.as_deref(), &write_opb(&random_pb(seed, vars, constraints, max_coef)))
        }
    }
}

fn bench(args: BenchArgs) -> Result<()> {
    let mut configs = Vec::new();
    for name in &args.configs {
        if name == "all" {
            configs.extend(AnalysisConfig::all());
        } else {
            configs.push(name.parse::<AnalysisConfig>()?);
        }
    }
    let limits = args.limits.limits(backjump_core::harness::default_limits())?;
    let rows = run_benchmark(&args.families, &configs, limits, args.jobs)?;
    let format = match args.out.extension().and_then(|e| e.to_str()) {
        Some(ext) if ext.eq_ignore_ascii_case("json") => StatsFormat::Json,
        _ => StatsFormat::Csv,
    };
    let file = fs::File::create(&args.out).with_context(|| format!("creating {}", args.out.display()))?;
    emit_stats(&rows, format, io::BufWriter::new(file))?;
    eprintln!("{} rows written to {}", rows.len(), args.out.display());

    if let Some(pair) = args.compare {
        let (a, b) = (pair[0], pair[1]);
        println!("instance\tconflicts {a}\tconflicts {b}\tcancellations {a}\tcancellations {b}");
        for p in compare_pairwise(&rows, a, b) {
            println!(
                "{}\t{}\t{}\t{}\t{}",
                p.instance, p.a.conflicts, p.b.conflicts, p.a.cancellations, p.b.cancellations
            );
        }
    }
    Ok(())
}
