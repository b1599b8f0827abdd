mod report;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand, ValueEnum};
use pce_core::bench::{run_sweep, write_csv, SweepConfig};
use pce_core::coherence::{decide_pure_coherence, CoherenceOptions, Verdict};
use pce_core::extension::{extension_binary_search_pooled, extension_exact, parse_epsilon, EquilibriumPool};
use pce_core::mixed::{decide_mixed_coherence, enumerate_mixed_equilibria_2p};
use pce_core::pure::{enumerate_pure_equilibria, DEFAULT_PROFILE_CAP};
use pce_core::sat::{encode_game, export_dimacs};
use pce_core::{
    parse_constraints, parse_formula, parse_game, CoherencePath, Direction, ExtensionQuery, Game, Mode, Observable,
    Rational,
};

use report::{any_witness, mixed_witness, probes, pure_witness, Number, RunReport};

#[derive(Parser, Debug)]
#[command(
    name = "pce",
    version,
    about = "Coherence and extension of probabilistic constraints on Nash equilibria"
)]
struct Cli {
    /// Cap on the number of action profiles scanned by pure enumeration.
    /// Defaults to $PCE_PROFILE_CAP, then 10000000.
    #[arg(long, global = true)]
    profile_cap: Option<u128>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the equilibria of a game.
    Enumerate {
        game: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Pure)]
        mode: ModeArg,
    },
    /// Decide whether a constraint set is coherent.
    Coherence {
        game: PathBuf,
        constraints: PathBuf,
        #[arg(long, value_enum, default_value_t = ModeArg::Pure)]
        mode: ModeArg,
        #[arg(long, value_enum, default_value_t = PathArg::Direct)]
        path: PathArg,
    },
    /// Bound the probability of a target formula.
    Extension {
        game: PathBuf,
        constraints: PathBuf,
        #[arg(long)]
        target: String,
        #[arg(long, value_enum, default_value_t = DirectionArg::Max)]
        direction: DirectionArg,
        /// Precision of the binary search, written 2^-k.
        #[arg(long, default_value = "2^-10")]
        eps: String,
        #[arg(long, value_enum, default_value_t = MethodArg::Exact)]
        method: MethodArg,
        #[arg(long, value_enum, default_value_t = ModeArg::Pure)]
        mode: ModeArg,
    },
    /// Write the CNF whose models are the pure equilibria, in DIMACS format.
    Encode {
        game: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Run a random-instance sweep.
    Bench {
        config: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ModeArg {
    Pure,
    Mixed,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Pure => Mode::Pure,
            ModeArg::Mixed => Mode::Mixed,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum PathArg {
    Direct,
    Psat,
    Cg,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum DirectionArg {
    Max,
    Min,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Exact,
    Binsearch,
}

fn mode_name(mode: Mode) -> &'static str {
    match mode {
        Mode::Pure => "pure",
        Mode::Mixed => "mixed",
    }
}

fn read(path: &Path) -> anyhow::Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_game(path: &Path) -> anyhow::Result<Game> {
    parse_game(&read(path)?).with_context(|| format!("in {}", path.display()))
}

fn load_observable(game: &Path, constraints: &Path, mode: Mode) -> anyhow::Result<Observable> {
    let g = load_game(game)?;
    let c = parse_constraints(&read(constraints)?).with_context(|| format!("in {}", constraints.display()))?;
    Ok(Observable::new(g, c, mode)?)
}

fn profile_cap(flag: Option<u128>) -> anyhow::Result<u128> {
    if let Some(cap) = flag {
        return Ok(cap);
    }
    match std::env::var("PCE_PROFILE_CAP") {
        Ok(v) => v
            .trim()
            .parse()
            .with_context(|| format!("invalid PCE_PROFILE_CAP `{v}`")),
        Err(_) => Ok(DEFAULT_PROFILE_CAP),
    }
}

fn options(cap: u128) -> CoherenceOptions {
    CoherenceOptions {
        profile_cap: cap,
        ..CoherenceOptions::default()
    }
}

/// Runs a command, returning the report and whether its answer was a
/// rejection.
fn run(cli: Cli, report: &mut RunReport) -> anyhow::Result<bool> {
    let cap = profile_cap(cli.profile_cap)?;
    match cli.command {
        Command::Enumerate { game, mode } => {
            report.command = Some("enumerate");
            let g = load_game(&game)?;
            let mode = Mode::from(mode);
            report.mode = Some(mode_name(mode));
            let listed: Vec<String> = match mode {
                Mode::Pure => {
                    let set = enumerate_pure_equilibria(&g, cap)?;
                    set.profiles.iter().map(|p| p.display(&g)).collect()
                }
                Mode::Mixed => {
                    let m = enumerate_mixed_equilibria_2p(&g)?;
                    report.degenerate = Some(m.degenerate);
                    m.profiles.iter().map(|p| p.display(&g)).collect()
                }
            };
            if listed.is_empty() {
                report.note = Some(format!("the game has no {} equilibrium", mode_name(mode)));
            }
            report.stats.equilibria = Some(listed.len());
            report.equilibria = Some(listed);
            Ok(false)
        }
        Command::Coherence {
            game,
            constraints,
            mode,
            path,
        } => {
            report.command = Some("coherence");
            let mode = Mode::from(mode);
            report.mode = Some(mode_name(mode));
            let obs = load_observable(&game, &constraints, mode)?;
            let path = match path {
                PathArg::Direct => CoherencePath::Direct,
                PathArg::Psat => CoherencePath::Psat,
                PathArg::Cg => CoherencePath::Cg,
            };
            let (name, coherent) = match mode {
                Mode::Pure => {
                    let r = decide_pure_coherence(&obs, path, &options(cap))?;
                    report.stats.absorb(&r.stats);
                    if let Verdict::Coherent(w) = &r.verdict {
                        report.witness = Some(pure_witness(&obs.game, w));
                    }
                    (r.verdict.name(), r.verdict.is_coherent())
                }
                Mode::Mixed => {
                    let r = decide_mixed_coherence(&obs, path)?;
                    report.stats.absorb(&r.stats);
                    report.degenerate = Some(r.degenerate);
                    if let Verdict::Coherent(w) = &r.verdict {
                        report.witness = Some(mixed_witness(&obs.game, w));
                    }
                    (r.verdict.name(), r.verdict.is_coherent())
                }
            };
            report.verdict = Some(name);
            Ok(!coherent)
        }
        Command::Extension {
            game,
            constraints,
            target,
            direction,
            eps,
            method,
            mode,
        } => {
            report.command = Some("extension");
            let mode = Mode::from(mode);
            report.mode = Some(mode_name(mode));
            let obs = load_observable(&game, &constraints, mode)?;
            let formula = parse_formula(&target).context("in --target")?;
            if let Some(a) = formula.atoms().into_iter().find(|a| obs.game.action_owner(a).is_none()) {
                bail!("--target mentions unknown action `{a}`");
            }
            let direction = match direction {
                DirectionArg::Max => Direction::Max,
                DirectionArg::Min => Direction::Min,
            };
            let query = ExtensionQuery::new(formula, direction, parse_epsilon(&eps)?)?;
            let pool = EquilibriumPool::<Rational>::compute(&obs, &options(cap))?;
            report.stats.equilibria = Some(pool.len());
            if let EquilibriumPool::Mixed(m) = &pool {
                report.degenerate = Some(m.degenerate);
            }
            let outcome = match method {
                MethodArg::Exact => extension_exact(&obs, &query, &pool).map(|r| {
                    report.stats.lp_pivots = r.lp_pivots;
                    (r.value, r.witness)
                }),
                MethodArg::Binsearch => extension_binary_search_pooled(&obs, &query, &pool).map(|r| {
                    report.stats.oracle_calls = r.oracle_calls;
                    report.probes = Some(probes(&query.target.to_string(), &r.probes));
                    report.bracket = Some([Number::from(&r.lower), Number::from(&r.upper)]);
                    (r.value, r.witness)
                }),
            };
            match outcome {
                Ok((value, witness)) => {
                    report.verdict = Some("value");
                    report.value = Some(Number::from(&value));
                    report.witness = Some(any_witness(&obs.game, &witness));
                    Ok(false)
                }
                Err(pce_core::Error::IncoherentBase) => {
                    report.verdict = Some(if pool.is_empty() {
                        "no-equilibrium"
                    } else {
                        "incoherent"
                    });
                    report.note = Some("the constraint set is not coherent, so no extension exists".into());
                    Ok(true)
                }
                Err(e) => Err(e.into()),
            }
        }
        Command::Encode { game, output } => {
            report.command = Some("encode");
            let g = load_game(&game)?;
            let encoding = encode_game(&g);
            let dimacs = export_dimacs(&encoding);
            let header = dimacs
                .lines()
                .find(|l| l.starts_with("p cnf"))
                .unwrap_or_default()
                .to_string();
            let mut out = serde_json::json!({
                "variables": encoding.num_vars(),
                "clauses": encoding.clauses().len(),
                "header": header,
            });
            match output {
                Some(path) => {
                    fs::write(&path, &dimacs).with_context(|| format!("cannot write {}", path.display()))?;
                    out["file"] = path.display().to_string().into();
                }
                None => out["dimacs"] = dimacs.into(),
            }
            report.output = Some(out);
            Ok(false)
        }
        Command::Bench { config, output } => {
            report.command = Some("bench");
            let config = SweepConfig::parse(&read(&config)?).with_context(|| format!("in {}", config.display()))?;
            report.mode = Some(mode_name(config.mode));
            let cells = run_sweep::<Rational>(&config)?;
            let rows: Vec<_> = cells.into_iter().map(|c| c.row).collect();
            let mut csv = Vec::new();
            write_csv(&rows, &mut csv)?;
            let mut out = serde_json::json!({ "rows": rows });
            match output {
                Some(path) => {
                    fs::write(&path, &csv).with_context(|| format!("cannot write {}", path.display()))?;
                    out["file"] = path.display().to_string().into();
                }
                None => out["csv"] = String::from_utf8_lossy(&csv).into_owned().into(),
            }
            report.output = Some(out);
            Ok(false)
        }
    }
}

fn emit(report: &RunReport) {
    eprint!("{}", report.human());
    match serde_json::to_string_pretty(report) {
        Ok(json) => println!("{json}"),
        Err(e) => println!("{{\"command\":null,\"stats\":{{}},\"error\":\"{e}\"}}"),
    }
}

fn main() -> ExitCode {
    let mut report = RunReport::default();
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let informational = matches!(
                e.kind(),
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
            );
            eprint!("{e}");
            if informational {
                report.note = Some("help or version requested".into());
                println!("{}", serde_json::to_string_pretty(&report).unwrap_or_default());
                return ExitCode::SUCCESS;
            }
            report.error = Some(format!("usage: {}", e.kind()));
            println!("{}", serde_json::to_string_pretty(&report).unwrap_or_default());
            return ExitCode::from(2);
        }
    };
    let start = Instant::now();
    let result = run(cli, &mut report);
    report.stats.wall_ms = start.elapsed().as_secs_f64() * 1e3;
    let code = match result {
        Ok(false) => ExitCode::SUCCESS,
        Ok(true) => ExitCode::from(1),
        Err(e) => {
            report.error = Some(format!("{e:#}"));
            ExitCode::from(2)
        }
    };
    emit(&report);
    code
}
