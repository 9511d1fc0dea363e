//! Command-line front end for the `ordmatch` library.
//!
//! Four subcommands tie profiles, mechanisms, protocols, strategies, and
//! property checkers together:
//!
//! ```text
//! ordmatch mechanism ps examples/ex-ps.prof
//! ordmatch mechanism sd --ranking 1,2,3,4 examples/ex-ps.prof
//! ordmatch protocol ops --mode exact --player 1 examples/ex-onlineps.prof
//! ordmatch protocol pp --mode sample --seed 7 examples/ex-ps.prof
//! ordmatch verify uniform examples/ex-onlineps.prof --protocol ops --player 1
//! ordmatch verify truthful examples/ex-truthful.prof --player 2 --report 2,1,3,4
//! ordmatch reproduce ex-truthful
//! ```
//!
//! Every invocation prints exactly one JSON document to stdout (repeat a
//! command and the bytes repeat). Probabilities appear as exact `"num/den"`
//! strings, with six-place decimal approximations alongside where a human
//! will want them; the decimals are advisory only.
//!
//! Exit codes: `0` the command succeeded and the checked property (if any)
//! holds; `1` a verified property is violated or a reproduction mismatched;
//! `2` usage or parse error; `3` the enumeration node budget was exceeded.
//! The default budget can be overridden with `--budget` or the
//! `ORDMATCH_BUDGET` environment variable.

use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ordmatch::adversary::AdversaryStrategy;
use ordmatch::analysis::{
    byzantine_uniform_secure, check_equal_treatment, check_maximin, check_truthfulness_gain,
    check_uniform_dominance, exact_distribution, exact_row, failstop_worst_secure,
    is_ordinally_efficient, is_stable, top_prefix, SweepFailure, TreatmentStrength, TruthTarget,
    DEFAULT_BUDGET,
};
use ordmatch::mechanisms::{
    decompose, ps_matrix, recompose, rp_matrix, serial_dictatorship, MechanismKind,
};
use ordmatch::model::{
    Assignment, DominanceViolation, ItemId, PlayerId, PreferenceProfile, ProbabilityMatrix,
};
use ordmatch::protocols::{run, EventJson, ProtocolKind, RunMode, RunOutput};
use ordmatch::rational::{self, Rational};
use ordmatch::{Error, Result};

#[derive(Parser)]
#[command(
    name = "ordmatch",
    version,
    about = "Exact analysis of randomized assignment mechanisms and the protocols that implement them"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Exact outcome of a centralized mechanism on a profile file.
    Mechanism(MechanismArgs),
    /// One protocol run: sample a trajectory or enumerate the exact law.
    Protocol(ProtocolArgs),
    /// Check a property; exits 0 when it holds, 1 when violated.
    Verify(VerifyArgs),
    /// Re-derive a bundled worked example and compare it against the
    /// values recorded for it.
    Reproduce(ReproduceArgs),
}

#[derive(Args)]
struct MechanismArgs {
    /// One of `rp`, `ps`, `sd`.
    #[arg(value_parser = MechanismKind::parse)]
    which: MechanismKind,
    /// Profile file: line 1 is `n`, then one whitespace-separated
    /// preference row per player (one-based items, favorite first).
    profile: PathBuf,
    /// Priority order for `sd`, e.g. `1,2,3,4` (one-based players).
    #[arg(long)]
    ranking: Option<String>,
    /// Also write the JSON document to this file.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ProtocolArgs {
    /// One of `pp`, `naivepp`, `opsvar`, `ops`.
    #[arg(value_parser = ProtocolKind::parse)]
    which: ProtocolKind,
    profile: PathBuf,
    /// `exact` enumerates the full outcome law; `sample` draws one
    /// trajectory and prints its event log.
    #[arg(long, default_value = "exact")]
    mode: String,
    /// RNG seed for sample mode (defaults to 0; equal seeds replay the
    /// identical run).
    #[arg(long)]
    seed: Option<u64>,
    /// Adversary strategy file (JSON). Omitted: everyone is honest.
    #[arg(long)]
    adversary: Option<PathBuf>,
    /// Exact mode only: compute just this player's item distribution with
    /// the memoized row walk (the only feasible route on large instances).
    #[arg(long)]
    player: Option<usize>,
    /// Node budget for exact enumeration (default 20000000, or the
    /// ORDMATCH_BUDGET environment variable).
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// One of `maximin`, `uniform`, `stable`, `ordeff`, `equal`,
    /// `truthful`.
    property: String,
    profile: PathBuf,
    /// Protocol whose runs are checked, where one applies (defaults:
    /// maximin/stable `pp`, uniform/truthful `opsvar`).
    #[arg(long)]
    protocol: Option<String>,
    /// Mechanism whose matrix is checked instead of a protocol (`ps` or
    /// `rp`; default for ordeff/equal is `ps`).
    #[arg(long)]
    mechanism: Option<String>,
    /// One-based focus player (default: every honest player).
    #[arg(long)]
    player: Option<usize>,
    /// Misreported preference order for `truthful`, e.g. `2,1,3,4`.
    #[arg(long)]
    report: Option<String>,
    /// A fixed assignment for `stable`, e.g. `1,4,2,3` (item per player);
    /// without it every outcome in the protocol's support is checked.
    #[arg(long)]
    assignment: Option<String>,
    /// `strong` (default) or `weak` equal treatment.
    #[arg(long)]
    strength: Option<String>,
    /// Quantify over every adversary of the model instead of reading one
    /// strategy file: all fail-stop behaviors for `maximin`, all declared
    /// orders and duel choices for `uniform`.
    #[arg(long)]
    exhaustive: bool,
    /// Adversary strategy file (JSON).
    #[arg(long)]
    adversary: Option<PathBuf>,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReproduceArgs {
    /// One of `ex-ps`, `ex-onlineps`, `ex-naivepp`, `ex-14player`,
    /// `ex-truthful`.
    target: String,
    #[arg(long)]
    budget: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    match dispatch(cli) {
        Ok(code) => std::process::exit(code),
        Err(err) => {
            eprintln!("error: {err}");
            let code = match err {
                Error::Budget { .. } => 3,
                _ => 2,
            };
            std::process::exit(code);
        }
    }
}

fn dispatch(cli: Cli) -> Result<i32> {
    match cli.command {
        Command::Mechanism(args) => cmd_mechanism(args),
        Command::Protocol(args) => cmd_protocol(args),
        Command::Verify(args) => cmd_verify(args),
        Command::Reproduce(args) => cmd_reproduce(args),
    }
}

// ---------------------------------------------------------------------------
// Shared plumbing
// ---------------------------------------------------------------------------

/// A probability in both renderings. The decimal is advisory.
#[derive(Serialize)]
struct ProbJson {
    exact: String,
    decimal: String,
}

fn prob(value: &Rational) -> ProbJson {
    ProbJson {
        exact: rational::format_exact(value),
        decimal: rational::format_decimal(value),
    }
}

fn probs(values: &[Rational]) -> Vec<ProbJson> {
    values.iter().map(prob).collect()
}

/// Row values reordered along a preference order, most-preferred first.
fn along_order(row: &[Rational], order: &[ItemId]) -> Vec<Rational> {
    order.iter().map(|j| row[j.0].clone()).collect()
}

fn prefix_probs(row: &[Rational], order: &[ItemId]) -> Vec<ProbJson> {
    probs(&rational::prefix_sums(&along_order(row, order)))
}

fn one_based_order(order: &[ItemId]) -> Vec<usize> {
    order.iter().map(|j| j.0 + 1).collect()
}

fn decimal_grid(matrix: &ProbabilityMatrix) -> Vec<Vec<String>> {
    (0..matrix.n())
        .map(|p| {
            matrix
                .row(PlayerId(p))
                .iter()
                .map(rational::format_decimal)
                .collect()
        })
        .collect()
}

fn load_profile(path: &Path) -> Result<PreferenceProfile> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::InvalidInput(format!("cannot read profile {}: {e}", path.display())))?;
    PreferenceProfile::parse_text(&text)
}

fn load_strategy(path: Option<&Path>, n: usize) -> Result<AdversaryStrategy> {
    let Some(path) = path else {
        return Ok(AdversaryStrategy::honest());
    };
    let text = std::fs::read_to_string(path).map_err(|e| {
        Error::InvalidInput(format!("cannot read strategy {}: {e}", path.display()))
    })?;
    let strategy = AdversaryStrategy::from_json_str(&text)?;
    strategy.validate(n)?;
    Ok(strategy)
}

/// `--budget` flag, else `ORDMATCH_BUDGET`, else the library default.
fn resolve_budget(flag: Option<u64>) -> Result<u64> {
    if let Some(value) = flag {
        return Ok(value);
    }
    match std::env::var("ORDMATCH_BUDGET") {
        Ok(text) => text
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::InvalidInput(format!("ORDMATCH_BUDGET is not a node count: {text:?}"))),
        Err(std::env::VarError::NotPresent) => Ok(DEFAULT_BUDGET),
        Err(e) => Err(Error::InvalidInput(format!("ORDMATCH_BUDGET unreadable: {e}"))),
    }
}

fn parse_index_list(text: &str, n: usize, what: &str) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for part in text.split(',') {
        let raw: usize = part
            .trim()
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad {what} list entry {part:?}")))?;
        if raw == 0 || raw > n {
            return Err(Error::InvalidInput(format!(
                "{what} index {raw} outside 1..={n}"
            )));
        }
        out.push(raw);
    }
    Ok(out)
}

fn parse_player(raw: usize, n: usize) -> Result<PlayerId> {
    if raw == 0 || raw > n {
        return Err(Error::InvalidInput(format!("player {raw} outside 1..={n}")));
    }
    Ok(PlayerId(raw - 1))
}

fn render<T: Serialize>(payload: &T, out: Option<&Path>) -> Result<()> {
    use std::io::Write;
    let doc = serde_json::to_string_pretty(payload)?;
    if let Some(path) = out {
        std::fs::write(path, format!("{doc}\n"))?;
    }
    // A closed pipe (`ordmatch ... | head`) is not an error worth a panic.
    match writeln!(std::io::stdout(), "{doc}") {
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        other => Ok(other?),
    }
}

fn parse_protocol(flag: Option<&str>, default: ProtocolKind) -> Result<ProtocolKind> {
    flag.map_or(Ok(default), ProtocolKind::parse)
}

// ---------------------------------------------------------------------------
// mechanism
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SdJson {
    mechanism: &'static str,
    ranking: Vec<usize>,
    /// One-based item per player, player 1 first.
    assignment: Vec<usize>,
}

#[derive(Serialize)]
struct MatrixDocJson {
    mechanism: &'static str,
    n: usize,
    matrix: ordmatch::model::MatrixJson,
    approx: Vec<Vec<String>>,
}

fn cmd_mechanism(args: MechanismArgs) -> Result<i32> {
    let profile = load_profile(&args.profile)?;
    match args.which {
        MechanismKind::SerialDictatorship => {
            let ranking = args.ranking.as_deref().ok_or_else(|| {
                Error::InvalidInput("sd needs --ranking, e.g. --ranking 1,2,3,4".into())
            })?;
            let raw = parse_index_list(ranking, profile.n(), "player")?;
            if raw.len() != profile.n() || {
                let mut sorted = raw.clone();
                sorted.sort_unstable();
                sorted.dedup();
                sorted.len() != profile.n()
            } {
                return Err(Error::InvalidInput(format!(
                    "--ranking must list each of the {} players exactly once",
                    profile.n()
                )));
            }
            let ranking: Vec<PlayerId> = raw.iter().map(|&p| PlayerId(p - 1)).collect();
            let assignment = serial_dictatorship(&profile, &ranking)?;
            render(
                &SdJson {
                    mechanism: "sd",
                    ranking: raw,
                    assignment: assignment.to_one_based(),
                },
                args.out.as_deref(),
            )?;
        }
        kind => {
            if args.ranking.is_some() {
                return Err(Error::InvalidInput("--ranking only applies to sd".into()));
            }
            let (name, matrix) = match kind {
                MechanismKind::RandomPriority => ("rp", rp_matrix(&profile)?),
                _ => ("ps", ps_matrix(&profile)?),
            };
            render(
                &MatrixDocJson {
                    mechanism: name,
                    n: profile.n(),
                    approx: decimal_grid(&matrix),
                    matrix: matrix.to_json(),
                },
                args.out.as_deref(),
            )?;
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// protocol
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct SampleJson {
    protocol: &'static str,
    mode: &'static str,
    seed: u64,
    adversary: AdversarySummary,
    assignment: Vec<usize>,
    events: Vec<EventJson>,
}

#[derive(Serialize)]
struct RowJson {
    protocol: &'static str,
    mode: &'static str,
    player: usize,
    adversary: AdversarySummary,
    /// The player's preference order, one-based, favorite first.
    order: Vec<usize>,
    /// P[player gets item j], indexed like the items (m1 first).
    row: Vec<ProbJson>,
    /// P[player gets one of its top l items], l = 1..n.
    prefix: Vec<ProbJson>,
    nodes: u64,
    memo_entries: u64,
}

#[derive(Serialize)]
struct ExactJson {
    protocol: &'static str,
    mode: &'static str,
    adversary: AdversarySummary,
    nodes: u64,
    support: usize,
    outcomes: Vec<OutcomeJson>,
    matrix: ordmatch::model::MatrixJson,
    approx: Vec<Vec<String>>,
    prefixes: Vec<PrefixJson>,
}

#[derive(Serialize)]
struct OutcomeJson {
    assignment: Vec<usize>,
    probability: ProbJson,
}

#[derive(Serialize)]
struct PrefixJson {
    player: usize,
    order: Vec<usize>,
    prefix: Vec<ProbJson>,
}

#[derive(Serialize)]
struct AdversarySummary {
    model: String,
    corrupted: Vec<usize>,
}

fn adversary_summary(strategy: &AdversaryStrategy) -> AdversarySummary {
    AdversarySummary {
        model: strategy.context.model.as_str().to_owned(),
        corrupted: strategy.context.corrupted.iter().map(|p| p.0 + 1).collect(),
    }
}

fn cmd_protocol(args: ProtocolArgs) -> Result<i32> {
    let profile = load_profile(&args.profile)?;
    let strategy = load_strategy(args.adversary.as_deref(), profile.n())?;
    match args.mode.as_str() {
        "sample" => {
            if args.player.is_some() {
                return Err(Error::InvalidInput("--player applies to exact mode".into()));
            }
            if args.budget.is_some() {
                return Err(Error::InvalidInput("--budget applies to exact mode".into()));
            }
            let seed = args.seed.unwrap_or(0);
            let RunOutput::Sampled { assignment, events } =
                run(args.which, &profile, &strategy, RunMode::Sample { seed })?
            else {
                unreachable!("sample mode returns a sampled run");
            };
            render(
                &SampleJson {
                    protocol: args.which.as_str(),
                    mode: "sample",
                    seed,
                    adversary: adversary_summary(&strategy),
                    assignment: assignment.to_one_based(),
                    events: events.iter().map(|e| e.to_json()).collect(),
                },
                args.out.as_deref(),
            )?;
        }
        "exact" => {
            if args.seed.is_some() {
                return Err(Error::InvalidInput("--seed applies to sample mode".into()));
            }
            let budget = resolve_budget(args.budget)?;
            if let Some(raw) = args.player {
                let focus = parse_player(raw, profile.n())?;
                let (row, stats) = exact_row(args.which, &profile, &strategy, focus, budget)?;
                render(
                    &RowJson {
                        protocol: args.which.as_str(),
                        mode: "exact",
                        player: raw,
                        adversary: adversary_summary(&strategy),
                        order: one_based_order(profile.order(focus)),
                        row: probs(&row),
                        prefix: prefix_probs(&row, profile.order(focus)),
                        nodes: stats.nodes,
                        memo_entries: stats.memo_entries,
                    },
                    args.out.as_deref(),
                )?;
            } else {
                let dist = exact_distribution(args.which, &profile, &strategy, budget)?;
                let matrix = dist.matrix()?;
                let outcomes = dist
                    .outcomes()
                    .map(|(a, q)| OutcomeJson {
                        assignment: a.to_one_based(),
                        probability: prob(q),
                    })
                    .collect();
                let prefixes = profile
                    .players()
                    .map(|p| PrefixJson {
                        player: p.0 + 1,
                        order: one_based_order(profile.order(p)),
                        prefix: prefix_probs(&dist.row(p), profile.order(p)),
                    })
                    .collect();
                render(
                    &ExactJson {
                        protocol: args.which.as_str(),
                        mode: "exact",
                        adversary: adversary_summary(&strategy),
                        nodes: dist.nodes,
                        support: dist.support_size(),
                        outcomes,
                        approx: decimal_grid(&matrix),
                        matrix: matrix.to_json(),
                        prefixes,
                    },
                    args.out.as_deref(),
                )?;
            }
        }
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown mode {other:?} (use sample or exact)"
            )))
        }
    }
    Ok(0)
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

#[derive(Serialize)]
struct PrefixViolationJson {
    /// One-based prefix length where the comparison first fails.
    prefix: usize,
    got: ProbJson,
    bound: ProbJson,
}

fn prefix_violation(v: &DominanceViolation) -> PrefixViolationJson {
    PrefixViolationJson {
        prefix: v.prefix_len,
        got: prob(&v.left_prefix),
        bound: prob(&v.right_prefix),
    }
}

#[derive(Serialize)]
struct SweepFailureJson {
    focus: usize,
    prefix: usize,
    worst: ProbJson,
    bound: ProbJson,
    profile: Vec<Vec<usize>>,
}

fn sweep_failure(f: &SweepFailure) -> SweepFailureJson {
    SweepFailureJson {
        focus: f.focus.0 + 1,
        prefix: f.prefix_len,
        worst: prob(&f.worst),
        bound: prob(&f.bound),
        profile: f
            .profile
            .players()
            .map(|p| one_based_order(f.profile.order(p)))
            .collect(),
    }
}

#[derive(Serialize)]
struct ExhaustiveJson {
    property: &'static str,
    protocol: &'static str,
    model: &'static str,
    exhaustive: bool,
    holds: bool,
    failure: Option<SweepFailureJson>,
}

#[derive(Serialize)]
struct MaximinJson {
    property: &'static str,
    protocol: &'static str,
    adversary: AdversarySummary,
    players: Vec<MaximinPlayerJson>,
    holds: bool,
}

#[derive(Serialize)]
struct MaximinPlayerJson {
    player: usize,
    secure: bool,
    honest_prefix: Vec<ProbJson>,
    adversarial_prefix: Vec<ProbJson>,
    violation: Option<PrefixViolationJson>,
}

#[derive(Serialize)]
struct UniformJson {
    property: &'static str,
    protocol: &'static str,
    adversary: AdversarySummary,
    players: Vec<UniformPlayerJson>,
    holds: bool,
}

#[derive(Serialize)]
struct UniformPlayerJson {
    player: usize,
    dominant: bool,
    prefix: Vec<ProbJson>,
    violation: Option<PrefixViolationJson>,
}

#[derive(Serialize)]
struct StableJson {
    property: &'static str,
    source: String,
    outcomes_checked: usize,
    holds: bool,
    violation: Option<StableViolationJson>,
}

#[derive(Serialize)]
struct StableViolationJson {
    assignment: Vec<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    probability: Option<ProbJson>,
    blocking_cycle: Vec<usize>,
}

#[derive(Serialize)]
struct OrdeffJson {
    property: &'static str,
    source: String,
    holds: bool,
    item_cycle: Option<Vec<usize>>,
    dominating: Option<ordmatch::model::MatrixJson>,
}

#[derive(Serialize)]
struct EqualJson {
    property: &'static str,
    source: String,
    strength: &'static str,
    holds: bool,
    violation: Option<EqualViolationJson>,
}

#[derive(Serialize)]
struct EqualViolationJson {
    pair: [usize; 2],
    position: usize,
    left: ProbJson,
    right: ProbJson,
}

#[derive(Serialize)]
struct TruthfulJson {
    property: &'static str,
    target: String,
    player: usize,
    reported: Vec<usize>,
    truthful_prefix: Vec<ProbJson>,
    reported_prefix: Vec<ProbJson>,
    strict_gain: bool,
    gain: Option<PrefixViolationJson>,
    loss: Option<PrefixViolationJson>,
    holds: bool,
}

fn cmd_verify(args: VerifyArgs) -> Result<i32> {
    match args.property.as_str() {
        "maximin" => verify_maximin(args),
        "uniform" => verify_uniform(args),
        "stable" => verify_stable(args),
        "ordeff" => verify_ordeff(args),
        "equal" => verify_equal(args),
        "truthful" => verify_truthful(args),
        other => Err(Error::InvalidInput(format!(
            "unknown property {other:?} (use maximin, uniform, stable, ordeff, equal, or truthful)"
        ))),
    }
}

/// Which honest players to check, one-based raw index included.
fn honest_foci(
    flag: Option<usize>,
    profile: &PreferenceProfile,
    strategy: &AdversaryStrategy,
) -> Result<Vec<PlayerId>> {
    match flag {
        Some(raw) => {
            let focus = parse_player(raw, profile.n())?;
            if strategy.context.is_corrupted(focus) {
                return Err(Error::InvalidInput(format!(
                    "player {raw} is corrupted; pick an honest focus"
                )));
            }
            Ok(vec![focus])
        }
        None => Ok(profile
            .players()
            .filter(|p| !strategy.context.is_corrupted(*p))
            .collect()),
    }
}

fn verify_maximin(args: VerifyArgs) -> Result<i32> {
    let profile = load_profile(&args.profile)?;
    let budget = resolve_budget(args.budget)?;
    let kind = parse_protocol(args.protocol.as_deref(), ProtocolKind::PreferencePriority)?;
    if args.exhaustive {
        if args.adversary.is_some() || args.player.is_some() {
            return Err(Error::InvalidInput(
                "--exhaustive quantifies over all adversaries and foci; drop --adversary/--player".into(),
            ));
        }
        let failure = failstop_worst_secure(kind, &profile, budget)?;
        let holds = failure.is_none();
        render(
            &ExhaustiveJson {
                property: "maximin",
                protocol: kind.as_str(),
                model: "fail-stop",
                exhaustive: true,
                holds,
                failure: failure.as_ref().map(sweep_failure),
            },
            args.out.as_deref(),
        )?;
        return Ok(i32::from(!holds));
    }
    let strategy = load_strategy(args.adversary.as_deref(), profile.n())?;
    if args.adversary.is_none() {
        return Err(Error::InvalidInput(
            "maximin needs an adversary: pass --adversary <file> or --exhaustive".into(),
        ));
    }
    let mut players = Vec::new();
    let mut holds = true;
    for focus in honest_foci(args.player, &profile, &strategy)? {
        let report = check_maximin(kind, &profile, focus, &strategy, budget)?;
        holds &= report.secure;
        let order = profile.order(focus);
        players.push(MaximinPlayerJson {
            player: focus.0 + 1,
            secure: report.secure,
            honest_prefix: prefix_probs(&report.honest_row, order),
            adversarial_prefix: prefix_probs(&report.adversarial_row, order),
            violation: report.violation.as_ref().map(prefix_violation),
        });
    }
    render(
        &MaximinJson {
            property: "maximin",
            protocol: kind.as_str(),
            adversary: adversary_summary(&strategy),
            players,
            holds,
        },
        args.out.as_deref(),
    )?;
    Ok(i32::from(!holds))
}

fn verify_uniform(args: VerifyArgs) -> Result<i32> {
    let profile = load_profile(&args.profile)?;
    let budget = resolve_budget(args.budget)?;
    let kind = parse_protocol(args.protocol.as_deref(), ProtocolKind::OnlinePsVar)?;
    if args.exhaustive {
        if args.adversary.is_some() || args.player.is_some() {
            return Err(Error::InvalidInput(
                "--exhaustive quantifies over all adversaries and foci; drop --adversary/--player".into(),
            ));
        }
        let failure = byzantine_uniform_secure(kind, &profile, budget)?;
        let holds = failure.is_none();
        render(
            &ExhaustiveJson {
                property: "uniform",
                protocol: kind.as_str(),
                model: "byzantine",
                exhaustive: true,
                holds,
                failure: failure.as_ref().map(sweep_failure),
            },
            args.out.as_deref(),
        )?;
        return Ok(i32::from(!holds));
    }
    let strategy = load_strategy(args.adversary.as_deref(), profile.n())?;
    let mut players = Vec::new();
    let mut holds = true;
    for focus in honest_foci(args.player, &profile, &strategy)? {
        let (row, _) = exact_row(kind, &profile, &strategy, focus, budget)?;
        let report = check_uniform_dominance(&row, profile.order(focus));
        holds &= report.dominant;
        players.push(UniformPlayerJson {
            player: focus.0 + 1,
            dominant: report.dominant,
            prefix: prefix_probs(&row, profile.order(focus)),
            violation: report.violation.as_ref().map(prefix_violation),
        });
    }
    render(
        &UniformJson {
            property: "uniform",
            protocol: kind.as_str(),
            adversary: adversary_summary(&strategy),
            players,
            holds,
        },
        args.out.as_deref(),
    )?;
    Ok(i32::from(!holds))
}

fn verify_stable(args: VerifyArgs) -> Result<i32> {
    let profile = load_profile(&args.profile)?;
    if let Some(text) = args.assignment.as_deref() {
        if args.protocol.is_some() || args.adversary.is_some() {
            return Err(Error::InvalidInput(
                "--assignment checks one fixed outcome; drop --protocol/--adversary".into(),
            ));
        }
        let items = parse_index_list(text, profile.n(), "item")?;
        let assignment = Assignment::from_one_based(&items)?;
        let report = is_stable(&assignment, &profile);
        let holds = report.stable;
        render(
            &StableJson {
                property: "stable",
                source: "assignment".into(),
                outcomes_checked: 1,
                holds,
                violation: report.blocking_cycle.map(|cycle| StableViolationJson {
                    assignment: items,
                    probability: None,
                    blocking_cycle: cycle.iter().map(|p| p.0 + 1).collect(),
                }),
            },
            args.out.as_deref(),
        )?;
        return Ok(i32::from(!holds));
    }
    let budget = resolve_budget(args.budget)?;
    let kind = parse_protocol(args.protocol.as_deref(), ProtocolKind::PreferencePriority)?;
    let strategy = load_strategy(args.adversary.as_deref(), profile.n())?;
    let dist = exact_distribution(kind, &profile, &strategy, budget)?;
    let mut violation = None;
    for (assignment, probability) in dist.outcomes() {
        let report = is_stable(assignment, &profile);
        if let Some(cycle) = report.blocking_cycle {
            violation = Some(StableViolationJson {
                assignment: assignment.to_one_based(),
                probability: Some(prob(probability)),
                blocking_cycle: cycle.iter().map(|p| p.0 + 1).collect(),
            });
            break;
        }
    }
    let holds = violation.is_none();
    render(
        &StableJson {
            property: "stable",
            source: format!("protocol {}", kind.as_str()),
            outcomes_checked: dist.support_size(),
            holds,
            violation,
        },
        args.out.as_deref(),
    )?;
    Ok(i32::from(!holds))
}

/// The bistochastic matrix a matrix-level property is checked on.
fn matrix_source(args: &VerifyArgs, profile: &PreferenceProfile) -> Result<(String, ProbabilityMatrix)> {
    if args.mechanism.is_some() && args.protocol.is_some() {
        return Err(Error::InvalidInput("pick --mechanism or --protocol, not both".into()));
    }
    if let Some(kind) = args.protocol.as_deref() {
        let kind = ProtocolKind::parse(kind)?;
        let strategy = load_strategy(args.adversary.as_deref(), profile.n())?;
        let budget = resolve_budget(args.budget)?;
        let matrix = exact_distribution(kind, profile, &strategy, budget)?.matrix()?;
        return Ok((format!("protocol {}", kind.as_str()), matrix));
    }
    let kind = args
        .mechanism
        .as_deref()
        .map_or(Ok(MechanismKind::ProbabilisticSerial), MechanismKind::parse)?;
    let (label, matrix) = match kind {
        MechanismKind::ProbabilisticSerial => ("mechanism ps", ps_matrix(profile)?),
        MechanismKind::RandomPriority => ("mechanism rp", rp_matrix(profile)?),
        MechanismKind::SerialDictatorship => {
            return Err(Error::InvalidInput(
                "sd yields a single assignment, not a matrix; use ps or rp".into(),
            ))
        }
    };
    Ok((label.into(), matrix))
}

fn verify_ordeff(args: VerifyArgs) -> Result<i32> {
    let profile = load_profile(&args.profile)?;
    let (source, matrix) = matrix_source(&args, &profile)?;
    let report = is_ordinally_efficient(&matrix, &profile)?;
    let holds = report.efficient;
    render(
        &OrdeffJson {
            property: "ordeff",
            source,
            holds,
            item_cycle: report
                .item_cycle
                .map(|cycle| cycle.iter().map(|j| j.0 + 1).collect()),
            dominating: report.dominating.map(|m| m.to_json()),
        },
        args.out.as_deref(),
    )?;
    Ok(i32::from(!holds))
}

fn verify_equal(args: VerifyArgs) -> Result<i32> {
    let profile = load_profile(&args.profile)?;
    let strength = match args.strength.as_deref() {
        None | Some("strong") => TreatmentStrength::Strong,
        Some("weak") => TreatmentStrength::Weak,
        Some(other) => {
            return Err(Error::InvalidInput(format!(
                "unknown strength {other:?} (use strong or weak)"
            )))
        }
    };
    let (source, matrix) = matrix_source(&args, &profile)?;
    let report = check_equal_treatment(&matrix, &profile, strength)?;
    let holds = report.holds;
    render(
        &EqualJson {
            property: "equal",
            source,
            strength: match strength {
                TreatmentStrength::Strong => "strong",
                TreatmentStrength::Weak => "weak",
            },
            holds,
            violation: report.violation.map(|v| EqualViolationJson {
                pair: [v.pair.0 .0 + 1, v.pair.1 .0 + 1],
                position: v.position,
                left: prob(&v.left),
                right: prob(&v.right),
            }),
        },
        args.out.as_deref(),
    )?;
    Ok(i32::from(!holds))
}

fn verify_truthful(args: VerifyArgs) -> Result<i32> {
    let profile = load_profile(&args.profile)?;
    let budget = resolve_budget(args.budget)?;
    let raw_player = args
        .player
        .ok_or_else(|| Error::InvalidInput("truthful needs --player".into()))?;
    let liar = parse_player(raw_player, profile.n())?;
    let report_text = args
        .report
        .as_deref()
        .ok_or_else(|| Error::InvalidInput("truthful needs --report, e.g. --report 2,1,3,4".into()))?;
    let reported: Vec<ItemId> = parse_index_list(report_text, profile.n(), "item")?
        .iter()
        .map(|&j| ItemId(j - 1))
        .collect();
    if args.mechanism.is_some() && args.protocol.is_some() {
        return Err(Error::InvalidInput("pick --mechanism or --protocol, not both".into()));
    }
    let (label, target) = if let Some(kind) = args.mechanism.as_deref() {
        match MechanismKind::parse(kind)? {
            MechanismKind::ProbabilisticSerial => ("mechanism ps".to_owned(), TruthTarget::PsMechanism),
            _ => {
                return Err(Error::InvalidInput(
                    "truthfulness is checked for ps or for a protocol".into(),
                ))
            }
        }
    } else {
        let kind = parse_protocol(args.protocol.as_deref(), ProtocolKind::OnlinePsVar)?;
        (format!("protocol {}", kind.as_str()), TruthTarget::Protocol(kind))
    };
    let report = check_truthfulness_gain(target, &profile, liar, reported.clone(), budget)?;
    let holds = report.gain_witness.is_none();
    let order = profile.order(liar);
    render(
        &TruthfulJson {
            property: "truthful",
            target: label,
            player: raw_player,
            reported: one_based_order(&reported),
            truthful_prefix: prefix_probs(&report.truthful_row, order),
            reported_prefix: prefix_probs(&report.reported_row, order),
            strict_gain: report.strict_gain,
            gain: report.gain_witness.as_ref().map(|v| PrefixViolationJson {
                prefix: v.prefix_len,
                got: prob(&v.right_prefix),
                bound: prob(&v.left_prefix),
            }),
            loss: report.loss_witness.as_ref().map(prefix_violation),
            holds,
        },
        args.out.as_deref(),
    )?;
    Ok(i32::from(!holds))
}

// ---------------------------------------------------------------------------
// reproduce
// ---------------------------------------------------------------------------

const EX_PS: &str = include_str!("../../examples/ex-ps.prof");
const EX_ONLINEPS: &str = include_str!("../../examples/ex-onlineps.prof");
const EX_NAIVEPP: &str = include_str!("../../examples/ex-naivepp.prof");
const EX_14PLAYER: &str = include_str!("../../examples/ex-14player.prof");
const EX_TRUTHFUL: &str = include_str!("../../examples/ex-truthful.prof");
const PLAYER4_ABORTS: &str = include_str!("../../examples/player4-aborts.json");
const PLAYERS89_ABORT: &str = include_str!("../../examples/players89-abort.json");
const PLAYER2_LIES: &str = include_str!("../../examples/player2-lies.json");

/// Exact value of `P[player 1 gets a top-4 item]` under NaivePP when
/// players 8 and 9 abort in their first round. Frozen from this tool's own
/// enumeration; any change is a regression, and the value must stay < 1.
const NAIVEPP_CORRUPTED_TOP4: &str = "22/25";

#[derive(Serialize)]
struct ReproduceJson {
    target: String,
    checks: Vec<CheckJson>,
    pass: bool,
}

#[derive(Serialize)]
struct CheckJson {
    check: String,
    expected: String,
    got: String,
    pass: bool,
}

#[derive(Default)]
struct Recorder {
    checks: Vec<CheckJson>,
}

impl Recorder {
    fn check(&mut self, name: &str, expected: impl Into<String>, got: impl Into<String>) {
        let (expected, got) = (expected.into(), got.into());
        let pass = expected == got;
        self.checks.push(CheckJson { check: name.into(), expected, got, pass });
    }

    fn value(&mut self, name: &str, expected: &str, got: &Rational) {
        self.check(name, expected, rational::format_exact(got));
    }

    fn flag(&mut self, name: &str, expected: bool, got: bool) {
        self.check(name, expected.to_string(), got.to_string());
    }

    fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

fn matrix_line(matrix: &ProbabilityMatrix) -> String {
    matrix
        .to_strings()
        .iter()
        .map(|row| row.join(" "))
        .collect::<Vec<_>>()
        .join("; ")
}

fn cmd_reproduce(args: ReproduceArgs) -> Result<i32> {
    let budget = resolve_budget(args.budget)?;
    let mut rec = Recorder::default();
    match args.target.as_str() {
        "ex-ps" => reproduce_ex_ps(&mut rec)?,
        "ex-onlineps" => reproduce_ex_onlineps(&mut rec, budget)?,
        "ex-naivepp" => reproduce_ex_naivepp(&mut rec, budget)?,
        "ex-14player" => reproduce_ex_14player(&mut rec, budget)?,
        "ex-truthful" => reproduce_ex_truthful(&mut rec, budget)?,
        other => {
            return Err(Error::InvalidInput(format!(
                "unknown target {other:?} (use ex-ps, ex-onlineps, ex-naivepp, ex-14player, or ex-truthful)"
            )))
        }
    }
    let pass = rec.pass();
    render(
        &ReproduceJson { target: args.target, checks: rec.checks, pass },
        args.out.as_deref(),
    )?;
    Ok(i32::from(!pass))
}

/// The 4-player instance where the eating mechanism's matrix has a unique
/// lottery decomposition with two equally likely assignments.
fn reproduce_ex_ps(rec: &mut Recorder) -> Result<()> {
    let profile = PreferenceProfile::parse_text(EX_PS)?;
    let matrix = ps_matrix(&profile)?;
    let expected = ProbabilityMatrix::from_strings(&[
        vec!["1/2".into(), "0".into(), "1/2".into(), "0".into()],
        vec!["1/2".into(), "0".into(), "0".into(), "1/2".into()],
        vec!["0".into(), "1/2".into(), "1/2".into(), "0".into()],
        vec!["0".into(), "1/2".into(), "0".into(), "1/2".into()],
    ])?;
    rec.check("ps matrix", matrix_line(&expected), matrix_line(&matrix));

    let terms = decompose(&matrix)?;
    rec.check("decomposition terms", "2", terms.len().to_string());
    if let [first, second] = terms.as_slice() {
        rec.value("first weight", "1/2", &first.weight);
        rec.check(
            "first assignment",
            "[1, 4, 3, 2]",
            format!("{:?}", first.assignment.to_one_based()),
        );
        rec.value("second weight", "1/2", &second.weight);
        rec.check(
            "second assignment",
            "[3, 1, 2, 4]",
            format!("{:?}", second.assignment.to_one_based()),
        );
    }
    rec.flag("recompose returns the matrix", true, recompose(&terms)? == matrix);
    rec.flag(
        "matrix is ordinally efficient",
        true,
        is_ordinally_efficient(&matrix, &profile)?.efficient,
    );
    rec.flag(
        "matrix treats equals equally (strong)",
        true,
        check_equal_treatment(&matrix, &profile, TreatmentStrength::Strong)?.holds,
    );
    Ok(())
}

/// Five players, two camps: fixed eating rates shortchange the larger camp,
/// varying rates restore the uniform share.
fn reproduce_ex_onlineps(rec: &mut Recorder, budget: u64) -> Result<()> {
    let profile = PreferenceProfile::parse_text(EX_ONLINEPS)?;
    let honest = AdversaryStrategy::honest();
    let focus = PlayerId(0);
    let order = profile.order(focus);

    let (fixed, _) = exact_row(ProtocolKind::OnlinePs, &profile, &honest, focus, budget)?;
    rec.value("fixed rates: P[player 1 in top 2]", "7/18", &top_prefix(&fixed, order, 2));
    let report = check_uniform_dominance(&fixed, order);
    rec.flag("fixed rates: uniform dominance", false, report.dominant);
    match report.violation {
        Some(v) => {
            rec.check("first failing prefix", "2", v.prefix_len.to_string());
            rec.value("mass at that prefix", "7/18", &v.left_prefix);
            rec.value("bound at that prefix", "2/5", &v.right_prefix);
        }
        None => rec.check("first failing prefix", "2", "none"),
    }

    let (varying, _) = exact_row(ProtocolKind::OnlinePsVar, &profile, &honest, focus, budget)?;
    rec.value("varying rates: P[player 1 in top 2]", "2/5", &top_prefix(&varying, order, 2));
    let mut all_dominant = true;
    for p in profile.players() {
        let (row, _) = exact_row(ProtocolKind::OnlinePsVar, &profile, &honest, p, budget)?;
        all_dominant &= check_uniform_dominance(&row, profile.order(p)).dominant;
    }
    rec.flag("varying rates: uniform dominance for every player", true, all_dominant);
    Ok(())
}

/// Nine players under the naive round protocol: honest runs always give
/// player 1 a top-4 item; two early aborters can push that below one.
fn reproduce_ex_naivepp(rec: &mut Recorder, budget: u64) -> Result<()> {
    let profile = PreferenceProfile::parse_text(EX_NAIVEPP)?;
    let honest = AdversaryStrategy::honest();
    let focus = PlayerId(0);
    let order = profile.order(focus);

    let (row, _) = exact_row(ProtocolKind::NaivePreferencePriority, &profile, &honest, focus, budget)?;
    rec.value("honest: P[player 1 in top 4]", "1/1", &top_prefix(&row, order, 4));

    let (pp_row, _) = exact_row(ProtocolKind::PreferencePriority, &profile, &honest, focus, budget)?;
    rec.value(
        "contrast, non-naive rounds: P[player 1 in top 4]",
        "1121/1800",
        &top_prefix(&pp_row, order, 4),
    );

    let strategy = AdversaryStrategy::from_json_str(PLAYERS89_ABORT)?;
    strategy.validate(profile.n())?;
    let (corrupted, _) =
        exact_row(ProtocolKind::NaivePreferencePriority, &profile, &strategy, focus, budget)?;
    let top4 = top_prefix(&corrupted, order, 4);
    rec.value("players 8 and 9 abort in round 1: P[player 1 in top 4]", NAIVEPP_CORRUPTED_TOP4, &top4);
    rec.flag("corrupted value is strictly below one", true, top4 < rational::one());
    Ok(())
}

/// Fourteen players under varying rates: a single early abort by player 4
/// nudges player 1's chance at its favorite item just below the honest
/// value, so the first prefix bound fails.
fn reproduce_ex_14player(rec: &mut Recorder, budget: u64) -> Result<()> {
    let profile = PreferenceProfile::parse_text(EX_14PLAYER)?;
    let strategy = AdversaryStrategy::from_json_str(PLAYER4_ABORTS)?;
    strategy.validate(profile.n())?;
    let focus = PlayerId(0);
    let report = check_maximin(ProtocolKind::OnlinePsVar, &profile, focus, &strategy, budget)?;
    rec.value("honest: P[player 1 gets its favorite]", "1132927/1499784", &report.honest_row[2]);
    rec.value(
        "player 4 aborts at the start: P[player 1 gets its favorite]",
        "77/102",
        &report.adversarial_row[2],
    );
    rec.flag("maximin security violated", false, report.secure);
    match report.violation {
        Some(v) => rec.check("violated prefix", "1", v.prefix_len.to_string()),
        None => rec.check("violated prefix", "1", "none"),
    }
    Ok(())
}

/// Four players under varying rates: reporting a shifted order raises the
/// liar's top-2 chance from 1/2 to 3/5 (and to 5/9 at fixed rates), so
/// neither eating protocol is strongly truthful.
fn reproduce_ex_truthful(rec: &mut Recorder, budget: u64) -> Result<()> {
    let profile = PreferenceProfile::parse_text(EX_TRUTHFUL)?;
    let honest = AdversaryStrategy::honest();
    let liar = PlayerId(1);
    let order = profile.order(liar);
    let lie = AdversaryStrategy::from_json_str(PLAYER2_LIES)?;
    lie.validate(profile.n())?;

    let (truth_var, _) = exact_row(ProtocolKind::OnlinePsVar, &profile, &honest, liar, budget)?;
    rec.value("varying rates, truthful: P[player 2 in top 2]", "1/2", &top_prefix(&truth_var, order, 2));
    let (truth_fixed, _) = exact_row(ProtocolKind::OnlinePs, &profile, &honest, liar, budget)?;
    rec.value("fixed rates, truthful: P[player 2 in top 2]", "1/2", &top_prefix(&truth_fixed, order, 2));

    let (lie_fixed, _) = exact_row(ProtocolKind::OnlinePs, &profile, &lie, liar, budget)?;
    rec.value("fixed rates, lying: P[player 2 in top 2]", "5/9", &top_prefix(&lie_fixed, order, 2));
    let (lie_var, _) = exact_row(ProtocolKind::OnlinePsVar, &profile, &lie, liar, budget)?;
    rec.value("varying rates, lying: P[player 2 in top 2]", "3/5", &top_prefix(&lie_var, order, 2));

    let gain = check_truthfulness_gain(
        TruthTarget::Protocol(ProtocolKind::OnlinePsVar),
        &profile,
        liar,
        profile.order(liar).to_vec(),
        budget,
    )?;
    rec.flag("reporting the truth is a no-op", true, gain.truthful_row == gain.reported_row);
    Ok(())
}
