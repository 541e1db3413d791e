//! The `cstn` command line: load networks and strategies, run a check, print a report.
//!
//! Exit codes: 0 when the property holds or the input is valid, 3 when it fails, 2 for
//! usage and input errors, 4 when the network is not well-defined, 5 when the two π-DC
//! procedures disagree, 1 for internal errors.

pub mod files;
pub mod report;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::anyhow;
use clap::{Parser, Subcommand, ValueEnum};
use cstn_core::corpus::{random_cstn, random_stn, RandomParams};
use cstn_core::network::ScenarioNode;
use cstn_core::pidc::check_pi_dc_with_params;
use cstn_core::pstree::DEFAULT_MAX_LETTERS;
use cstn_core::strategy::{ExecStrategy, Mode, PiExecStrategy, Time};
use cstn_core::{
    check_dc, check_eps_dc, check_pi_dc_exhaustive, eps_hat, solve_hytn, stn_consistency,
    validate_es, validate_pi_es, wd_check, Cstn, DcError, DcOutcome, ExhaustiveOutcome,
    HytnOutcome, PiDcError, PiDcOutcome, PsTreeError,
};

use files::{
    es_file, load_network, load_strategy, pi_es_file, read_json, to_pretty_json, HytnFile,
    NetworkFile, StnFile, TimeValue,
};
use report::{Payload, Report, Verdict};

pub const EXIT_YES: i32 = 0;
pub const EXIT_INTERNAL: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_NO: i32 = 3;
pub const EXIT_NOT_WD: i32 = 4;
pub const EXIT_DISAGREE: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "cstn",
    version,
    about = "Consistency checks for conditional simple temporal networks"
)]
pub struct Cli {
    /// Output style of the report.
    #[arg(long, value_enum, global = true, default_value_t = Format::Structured)]
    pub format: Format,
    /// Also write the strategy of a positive answer to this file.
    #[arg(long, global = true, value_name = "PATH")]
    pub strategy_out: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Structured,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Viability,
    Dynamic,
    Eps,
    Pi,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Parse a network and check that it is well-defined.
    Parse { network: PathBuf },
    /// Consistency of a plain STN file.
    CheckStn { stn: PathBuf },
    /// Consistency of a HyTN file.
    CheckHytn { hytn: PathBuf },
    /// ε-dynamic consistency for a given reaction time.
    CheckEpsDc {
        #[arg(long, value_parser = parse_time, value_name = "N/D", allow_hyphen_values = true)]
        epsilon: Time,
        network: PathBuf,
    },
    /// Dynamic consistency.
    CheckDc { network: PathBuf },
    /// Dynamic consistency with instantaneous reaction.
    CheckPiDc {
        /// Also run the exhaustive tree search and compare verdicts.
        #[arg(long)]
        oracle: bool,
        /// Letter cap for the tree search.
        #[arg(long, default_value_t = DEFAULT_MAX_LETTERS)]
        max_letters: usize,
        network: PathBuf,
    },
    /// Check a strategy file against a network.
    ValidateStrategy {
        #[arg(long, value_enum)]
        mode: ModeArg,
        /// Reaction time for `--mode eps`.
        #[arg(long, value_parser = parse_time, value_name = "N/D", allow_hyphen_values = true)]
        epsilon: Option<Time>,
        network: PathBuf,
        strategy: PathBuf,
    },
    /// Print a seeded random well-defined network (or STN) as JSON.
    Generate {
        #[arg(long)]
        seed: u64,
        /// Emit an STN file instead of a network.
        #[arg(long)]
        stn: bool,
        #[arg(long)]
        max_letters: Option<usize>,
        #[arg(long)]
        max_nodes: Option<usize>,
        #[arg(long)]
        max_weight: Option<i64>,
        #[arg(long)]
        max_constraints: Option<usize>,
    },
}

fn parse_time(s: &str) -> Result<Time, String> {
    s.trim()
        .parse::<Time>()
        .map_err(|e| format!("expected N/D: {e}"))
}

/// Error classes, each with its own exit code.
#[derive(Debug)]
enum Failure {
    Input(anyhow::Error),
    NotWellDefined(Vec<String>),
    Disagreement(Vec<String>),
    Internal(anyhow::Error),
}

impl Failure {
    fn code(&self) -> i32 {
        match self {
            Failure::Input(_) => EXIT_USAGE,
            Failure::NotWellDefined(_) => EXIT_NOT_WD,
            Failure::Disagreement(_) => EXIT_DISAGREE,
            Failure::Internal(_) => EXIT_INTERNAL,
        }
    }

    fn witnesses(self) -> Vec<String> {
        match self {
            Failure::Input(e) | Failure::Internal(e) => vec![format!("{e:#}")],
            Failure::NotWellDefined(w) | Failure::Disagreement(w) => w,
        }
    }
}

impl From<DcError> for Failure {
    fn from(e: DcError) -> Self {
        match e {
            DcError::NotWellDefined(_) => Failure::NotWellDefined(vec![e.to_string()]),
            DcError::NegativeEpsilon => Failure::Input(e.into()),
            e => Failure::Internal(e.into()),
        }
    }
}

impl From<PiDcError> for Failure {
    fn from(e: PiDcError) -> Self {
        match e {
            PiDcError::Dc(e) => e.into(),
            e => Failure::Internal(e.into()),
        }
    }
}

impl From<PsTreeError> for Failure {
    fn from(e: PsTreeError) -> Self {
        match e {
            PsTreeError::Dc(e) => e.into(),
            PsTreeError::CapExceeded { .. } => Failure::Input(e.into()),
            e => Failure::Internal(e.into()),
        }
    }
}

/// Parses `args` (program name first), runs the command, writes the report to `out`
/// and returns the exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_YES };
            if e.use_stderr() {
                let _ = write!(std::io::stderr(), "{}", e.render());
            } else {
                let _ = write!(out, "{}", e.render());
            }
            return code;
        }
    };

    if let Command::Generate { .. } = cli.command {
        return match generate(&cli.command) {
            Ok(text) => {
                let _ = writeln!(out, "{text}");
                EXIT_YES
            }
            Err(e) => {
                let _ = writeln!(std::io::stderr(), "error: {e:#}");
                EXIT_USAGE
            }
        };
    }

    let start = Instant::now();
    let mut report = Report::new(property(&cli.command));
    let outcome = execute(&cli.command, &mut report);
    let code = match outcome {
        Ok(holds) => {
            report.verdict = if holds { Verdict::Yes } else { Verdict::No };
            if holds {
                if let (Some(path), Some(payload)) = (&cli.strategy_out, &report.strategy) {
                    if let Err(e) = fs::write(path, to_pretty_json(payload)) {
                        report.verdict = Verdict::Invalid;
                        report
                            .witnesses
                            .push(format!("writing {}: {e}", path.display()));
                        return finish(&cli, report, start, out, EXIT_USAGE);
                    }
                }
                EXIT_YES
            } else {
                EXIT_NO
            }
        }
        Err(f) => {
            let code = f.code();
            report.verdict = Verdict::Invalid;
            report.strategy = None;
            report.witnesses = f.witnesses();
            code
        }
    };
    finish(&cli, report, start, out, code)
}

fn finish(cli: &Cli, mut report: Report, start: Instant, out: &mut dyn Write, code: i32) -> i32 {
    report.elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
    let text = match cli.format {
        Format::Structured => report.to_json() + "\n",
        Format::Text => report.to_text(),
    };
    let _ = out.write_all(text.as_bytes());
    code
}

fn property(cmd: &Command) -> &'static str {
    match cmd {
        Command::Parse { .. } => "parse",
        Command::CheckStn { .. } => "stn",
        Command::CheckHytn { .. } => "hytn",
        Command::CheckEpsDc { .. } => "eps-dc",
        Command::CheckDc { .. } => "dc",
        Command::CheckPiDc { oracle: false, .. } => "pi-dc",
        Command::CheckPiDc { oracle: true, .. } => "pi-dc-oracle",
        Command::ValidateStrategy { .. } | Command::Generate { .. } => "validate",
    }
}

fn input<T>(r: anyhow::Result<T>) -> Result<T, Failure> {
    r.map_err(Failure::Input)
}

fn network(path: &Path) -> Result<Cstn, Failure> {
    input(load_network(path))
}

fn require_wd(g: &Cstn) -> Result<(), Failure> {
    let wd = wd_check(g);
    if wd.is_ok() {
        Ok(())
    } else {
        Err(Failure::NotWellDefined(
            wd.violations.iter().map(|v| v.describe(g)).collect(),
        ))
    }
}

fn certificate(g: &Cstn, nodes: &[ScenarioNode]) -> Vec<String> {
    nodes
        .iter()
        .map(|n| format!("{}@[{}]", g.node_name(n.node), g.scenario_label(n.scenario)))
        .collect()
}

fn schedule(names: &[String], times: &[i128]) -> Payload {
    Payload::Schedule(
        names
            .iter()
            .zip(times)
            .map(|(n, &t)| (n.clone(), TimeValue::from_time(Time::from_integer(t))))
            .collect(),
    )
}

/// Re-runs the brute-force validators on a strategy about to be reported.
fn confirm_es(g: &Cstn, sigma: &ExecStrategy, modes: &[Mode]) -> Result<(), Failure> {
    let mut problems = Vec::new();
    for mode in modes {
        let r = validate_es(g, sigma, mode).map_err(|e| Failure::Internal(e.into()))?;
        problems.extend(r.violations.iter().map(|v| v.describe(g)));
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(Failure::Internal(anyhow!(
            "reported strategy fails validation: {}",
            problems.join("; ")
        )))
    }
}

fn confirm_pi_es(g: &Cstn, sigma: &PiExecStrategy) -> Result<(), Failure> {
    let r = validate_pi_es(g, sigma).map_err(|e| Failure::Internal(e.into()))?;
    if r.is_ok() {
        Ok(())
    } else {
        let problems: Vec<String> = r.violations.iter().map(|v| v.describe(g)).collect();
        Err(Failure::Internal(anyhow!(
            "reported strategy fails validation: {}",
            problems.join("; ")
        )))
    }
}

/// Runs the command, filling in the report; `Ok(true)` when the property holds.
fn execute(cmd: &Command, report: &mut Report) -> Result<bool, Failure> {
    match cmd {
        Command::Parse { network: path } => {
            let g = network(path)?;
            report.param("letters", g.letters().len());
            report.param("nodes", g.node_count());
            report.param("constraints", g.constraints().len());
            require_wd(&g)?;
            Ok(true)
        }
        Command::CheckStn { stn } => {
            let g = input(read_json::<StnFile>(stn).and_then(|f| f.to_stn()))?;
            match stn_consistency(&g).map_err(|e| Failure::Internal(e.into()))? {
                HytnOutcome::Feasible(s) => {
                    report.strategy = Some(schedule(&g.nodes, &s.times));
                    Ok(true)
                }
                HytnOutcome::Inconsistent { certificate } => {
                    report.witnesses = certificate.iter().map(|&v| g.nodes[v].clone()).collect();
                    Ok(false)
                }
            }
        }
        Command::CheckHytn { hytn } => {
            let h = input(read_json::<HytnFile>(hytn).and_then(|f| f.to_hytn()))?;
            report.param("size", h.size());
            match solve_hytn(&h).map_err(|e| Failure::Internal(e.into()))? {
                HytnOutcome::Feasible(s) => {
                    report.strategy = Some(schedule(h.nodes(), &s.times));
                    Ok(true)
                }
                HytnOutcome::Inconsistent { certificate } => {
                    report.witnesses = certificate.iter().map(|&v| h.nodes()[v].clone()).collect();
                    Ok(false)
                }
            }
        }
        Command::CheckEpsDc {
            epsilon,
            network: path,
        } => {
            let g = network(path)?;
            require_wd(&g)?;
            report.param("epsilon", epsilon);
            report.param("scale", epsilon.denom());
            match check_eps_dc(&g, *epsilon)? {
                DcOutcome::Yes(sigma) => {
                    confirm_es(&g, &sigma, &[Mode::Viability, Mode::Epsilon(*epsilon)])?;
                    report.strategy = Some(Payload::Strategy(es_file(&g, &sigma)));
                    Ok(true)
                }
                DcOutcome::No { certificate: c } => {
                    report.witnesses = certificate(&g, &c);
                    Ok(false)
                }
            }
        }
        Command::CheckDc { network: path } => {
            let g = network(path)?;
            require_wd(&g)?;
            if let Some(e) = eps_hat(&g) {
                report.param("eps_hat", e);
                report.param("scale", e.denom());
            }
            match check_dc(&g)? {
                DcOutcome::Yes(sigma) => {
                    confirm_es(&g, &sigma, &[Mode::Viability, Mode::Dynamic])?;
                    report.strategy = Some(Payload::Strategy(es_file(&g, &sigma)));
                    Ok(true)
                }
                DcOutcome::No { certificate: c } => {
                    report.witnesses = certificate(&g, &c);
                    Ok(false)
                }
            }
        }
        Command::CheckPiDc {
            oracle,
            max_letters,
            network: path,
        } => {
            let g = network(path)?;
            require_wd(&g)?;
            let (out, params) = check_pi_dc_with_params(&g)?;
            report.param("gamma", params.gamma);
            report.param("scale", params.scale);
            if let Some(e) = params.eps_hat {
                report.param("eps_hat", e);
            }
            if let Some(eta) = params.eta {
                report.param("eta", eta);
            }
            let holds = match &out {
                PiDcOutcome::Yes(sigma) => {
                    confirm_pi_es(&g, sigma)?;
                    report.strategy = Some(Payload::Strategy(pi_es_file(&g, sigma)));
                    true
                }
                PiDcOutcome::No { certificate: c } => {
                    report.witnesses = certificate(&g, c);
                    false
                }
            };
            if !oracle {
                return Ok(holds);
            }
            let exhaustive = check_pi_dc_exhaustive(&g, *max_letters)?;
            match &exhaustive {
                ExhaustiveOutcome::Yes { strategy, tree } => {
                    confirm_pi_es(&g, strategy)?;
                    report.param("tree", tree);
                }
                ExhaustiveOutcome::No { trees } => {
                    report.param("trees_refuted", trees);
                }
            }
            if exhaustive.is_yes() != holds {
                return Err(Failure::Disagreement(vec![format!(
                    "reduction says {}, tree search says {}",
                    if holds { "yes" } else { "no" },
                    if holds { "no" } else { "yes" }
                )]));
            }
            Ok(holds)
        }
        Command::ValidateStrategy {
            mode,
            epsilon,
            network: path,
            strategy,
        } => {
            let g = network(path)?;
            let (sigma, positions) = input(load_strategy(&g, strategy))?;
            let bad_strategy = |e: cstn_core::strategy::StrategyError| {
                Failure::Input(anyhow::Error::new(e).context(format!("{}", strategy.display())))
            };
            let violations = match mode {
                ModeArg::Pi => {
                    let positions = positions.ok_or_else(|| {
                        Failure::Input(anyhow!("π mode needs positions in the strategy file"))
                    })?;
                    let sigma = PiExecStrategy {
                        times: sigma.times,
                        positions,
                    };
                    report.param("mode", "pi");
                    let r = validate_pi_es(&g, &sigma).map_err(bad_strategy)?;
                    r.violations
                        .iter()
                        .map(|v| v.describe(&g))
                        .collect::<Vec<_>>()
                }
                _ => {
                    let extra = match mode {
                        ModeArg::Viability => None,
                        ModeArg::Dynamic => Some(Mode::Dynamic),
                        _ => {
                            let eps = epsilon.ok_or_else(|| {
                                Failure::Input(anyhow!("--mode eps needs --epsilon N/D"))
                            })?;
                            report.param("epsilon", eps);
                            Some(Mode::Epsilon(eps))
                        }
                    };
                    report.param("mode", format!("{mode:?}").to_lowercase());
                    let mut v = Vec::new();
                    for m in std::iter::once(Mode::Viability).chain(extra) {
                        let r = validate_es(&g, &sigma, &m).map_err(bad_strategy)?;
                        v.extend(r.violations.iter().map(|x| x.describe(&g)));
                    }
                    v
                }
            };
            report.witnesses = violations;
            Ok(report.witnesses.is_empty())
        }
        Command::Generate { .. } => unreachable!("handled before dispatch"),
    }
}

fn generate(cmd: &Command) -> anyhow::Result<String> {
    let Command::Generate {
        seed,
        stn,
        max_letters,
        max_nodes,
        max_weight,
        max_constraints,
    } = cmd
    else {
        unreachable!()
    };
    let d = RandomParams::default();
    if *stn {
        let g = random_stn(*seed, max_nodes.unwrap_or(50), max_weight.unwrap_or(20));
        return Ok(to_pretty_json(&StnFile::from_stn(&g)));
    }
    let params = RandomParams {
        max_letters: max_letters.unwrap_or(d.max_letters),
        max_nodes: max_nodes.unwrap_or(d.max_nodes),
        max_weight: max_weight.unwrap_or(d.max_weight),
        max_constraints: max_constraints.unwrap_or(d.max_constraints),
    };
    let g = random_cstn(*seed, params);
    Ok(to_pretty_json(&NetworkFile::from_cstn(&g)))
}
