//! Distributed assignment protocols as explicit step machines.
//!
//! A protocol state either is finished, branches on a lottery duel (a chance
//! node with exact probabilities), or hands a decision to corrupted players
//! (an adversary node listing every action the protocol tolerates). All
//! analysis — sampling, exact distributions, worst-case induction — drives
//! the same machine, so there is exactly one implementation of each
//! protocol's rules.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::adversary::{AdversaryStrategy, DecisionStamp, DuelAction, DuelPoint};
use crate::model::{Assignment, ItemId, PlayerId, PreferenceProfile};
use crate::rational::{self, Rational};
use crate::{Error, Result};

pub mod online;
pub mod pp;

pub use online::{InstantStep, OnlineState};
pub use pp::PpState;

/// One transition of a protocol state machine.
pub enum ProcessStep<S> {
    /// The run is over. The terminal state is returned so its event log
    /// (including end-of-run leftover assignments) stays readable.
    Done(S),
    /// A duel is being resolved by the shared randomness: each branch
    /// carries its exact probability. Probabilities sum to one.
    Chance(Vec<(Rational, S)>),
    /// Corrupted players choose how to (mis)behave in the duel at this
    /// point. Every tolerated action is listed; honest play is the
    /// empty abort set.
    Decision(DuelPoint, Vec<(DuelAction, S)>),
}

/// A protocol state machine with exact branching, usable by every driver.
pub trait Protocol: Clone {
    fn n(&self) -> usize;
    /// Advance to the next branch point (or the end). Pure: `self` is not
    /// consumed, so drivers can fan out.
    fn step(&self) -> ProcessStep<Self>;
    /// The item already locked in for `p`, if any.
    fn assigned_item(&self, p: PlayerId) -> Option<ItemId>;
    /// Events accumulated along this state's history (empty unless the
    /// root was created with logging).
    fn events(&self) -> &[ProtocolEvent];
    /// Serializes the forward-relevant state for memoization. With
    /// `focus = Some(p)`, other players' already-assigned items are
    /// omitted — the future of `p` does not depend on them — which lets
    /// runs that assigned the same items to different players share work.
    /// With `focus = None` the full state is encoded.
    fn encode_key(&self, focus: Option<PlayerId>, out: &mut Vec<u8>);
    /// The complete matching of a terminal state.
    fn final_assignment(&self) -> Assignment {
        let items: Vec<ItemId> = (0..self.n())
            .map(|p| self.assigned_item(PlayerId(p)).expect("run is finished"))
            .collect();
        Assignment::new(items).expect("a finished run matches players to distinct items")
    }
}

/// The four protocol variants.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ProtocolKind {
    /// Round-based; eliminates detected aborters; the main construction.
    PreferencePriority,
    /// Like `PreferencePriority` but races for the favorite remaining item
    /// every round. Manipulable by rushing.
    NaivePreferencePriority,
    /// Eating protocol with rate redistribution after every tournament.
    OnlinePsVar,
    /// Eating protocol at fixed unit rates. Not uniformly dominant.
    OnlinePs,
}

impl ProtocolKind {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "pp" => Ok(Self::PreferencePriority),
            "naivepp" => Ok(Self::NaivePreferencePriority),
            "opsvar" => Ok(Self::OnlinePsVar),
            "ops" => Ok(Self::OnlinePs),
            other => Err(Error::InvalidInput(format!("unknown protocol {other:?}"))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Self::PreferencePriority => "pp",
            Self::NaivePreferencePriority => "naivepp",
            Self::OnlinePsVar => "opsvar",
            Self::OnlinePs => "ops",
        }
    }
}

/// Everything observable about a protocol run, in execution order.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ProtocolEvent {
    /// A tournament resolved. `targets` pairs each participant with its
    /// win probability under honest play of the duels.
    TournamentHeld {
        stamp: DecisionStamp,
        item: Option<ItemId>,
        targets: Vec<(PlayerId, Rational)>,
        winner: PlayerId,
        detected: Vec<PlayerId>,
    },
    /// A player locked in an item.
    Assigned {
        stamp: DecisionStamp,
        player: PlayerId,
        item: ItemId,
    },
    /// A detected aborter was removed from play.
    Eliminated {
        stamp: DecisionStamp,
        player: PlayerId,
    },
    /// A player's consumption rate changed (eating protocols only).
    RateSet {
        stamp: DecisionStamp,
        player: PlayerId,
        rate: Rational,
    },
    /// End-of-run fallback: an eliminated player receives a leftover item.
    Leftover { player: PlayerId, item: ItemId },
}

impl std::fmt::Display for ProtocolEvent {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::TournamentHeld { stamp, item, targets, winner, detected } => {
                let at = item.map_or_else(String::new, |j| format!(" for {j}"));
                let field = targets
                    .iter()
                    .map(|(p, q)| format!("{p}:{}", rational::format_exact(q)))
                    .collect::<Vec<_>>()
                    .join(" ");
                write!(f, "[{stamp}] tournament{at} among {field} -> winner {winner}")?;
                if !detected.is_empty() {
                    let list = detected.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(",");
                    write!(f, " (detected {list})")?;
                }
                Ok(())
            }
            Self::Assigned { stamp, player, item } => {
                write!(f, "[{stamp}] {player} <- {item}")
            }
            Self::Eliminated { stamp, player } => {
                write!(f, "[{stamp}] {player} eliminated")
            }
            Self::RateSet { stamp, player, rate } => {
                write!(f, "[{stamp}] {player} eats at {}", rational::format_exact(rate))
            }
            Self::Leftover { player, item } => {
                write!(f, "[leftover] {player} <- {item}")
            }
        }
    }
}

/// Wire form of an event log entry (one-based ids, exact strings).
#[derive(Serialize, Deserialize)]
pub struct EventJson {
    pub kind: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub round: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub time: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub item: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub player: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub rate: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub winner: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub targets: Option<BTreeMap<String, String>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detected: Option<Vec<usize>>,
}

impl ProtocolEvent {
    fn stamp_fields(stamp: &DecisionStamp) -> (Option<u32>, Option<String>) {
        match stamp {
            DecisionStamp::Round(r) => (Some(*r), None),
            DecisionStamp::Time(t) => (None, Some(rational::format_exact(t))),
        }
    }

    pub fn to_json(&self) -> EventJson {
        let mut json = EventJson {
            kind: String::new(),
            round: None,
            time: None,
            item: None,
            player: None,
            rate: None,
            winner: None,
            targets: None,
            detected: None,
        };
        match self {
            Self::TournamentHeld { stamp, item, targets, winner, detected } => {
                json.kind = "tournament".into();
                (json.round, json.time) = Self::stamp_fields(stamp);
                json.item = item.map(|j| j.0 + 1);
                json.winner = Some(winner.0 + 1);
                json.targets = Some(
                    targets
                        .iter()
                        .map(|(p, q)| ((p.0 + 1).to_string(), rational::format_exact(q)))
                        .collect(),
                );
                if !detected.is_empty() {
                    json.detected = Some(detected.iter().map(|p| p.0 + 1).collect());
                }
            }
            Self::Assigned { stamp, player, item } => {
                json.kind = "assigned".into();
                (json.round, json.time) = Self::stamp_fields(stamp);
                json.player = Some(player.0 + 1);
                json.item = Some(item.0 + 1);
            }
            Self::Eliminated { stamp, player } => {
                json.kind = "eliminated".into();
                (json.round, json.time) = Self::stamp_fields(stamp);
                json.player = Some(player.0 + 1);
            }
            Self::RateSet { stamp, player, rate } => {
                json.kind = "rate".into();
                (json.round, json.time) = Self::stamp_fields(stamp);
                json.player = Some(player.0 + 1);
                json.rate = Some(rational::format_exact(rate));
            }
            Self::Leftover { player, item } => {
                json.kind = "leftover".into();
                json.player = Some(player.0 + 1);
                json.item = Some(item.0 + 1);
            }
        }
        json
    }
}

/// Rebuilds the final assignment from an event log; the log is complete
/// exactly when this succeeds.
pub fn replay_assignment(n: usize, events: &[ProtocolEvent]) -> Result<Assignment> {
    let mut item_of: Vec<Option<ItemId>> = vec![None; n];
    for event in events {
        let pair = match event {
            ProtocolEvent::Assigned { player, item, .. } => Some((*player, *item)),
            ProtocolEvent::Leftover { player, item } => Some((*player, *item)),
            _ => None,
        };
        if let Some((p, j)) = pair {
            if p.0 >= n {
                return Err(Error::Consistency(format!("event log names {p} outside the run")));
            }
            if item_of[p.0].replace(j).is_some() {
                return Err(Error::Consistency(format!("event log assigns {p} twice")));
            }
        }
    }
    let items: Option<Vec<ItemId>> = item_of.into_iter().collect();
    match items {
        Some(items) => Assignment::new(items),
        None => Err(Error::Consistency("event log leaves a player unassigned".into())),
    }
}

/// Compact, collision-free serializer for memo keys.
pub(crate) struct KeyEnc<'a> {
    out: &'a mut Vec<u8>,
}

impl<'a> KeyEnc<'a> {
    pub fn new(out: &'a mut Vec<u8>) -> Self {
        Self { out }
    }

    pub fn tag(&mut self, tag: u8) {
        self.out.push(tag);
    }

    pub fn usize(&mut self, v: usize) {
        self.out.extend_from_slice(&(v as u64).to_le_bytes());
    }

    pub fn bigint(&mut self, v: &BigInt) {
        let bytes = v.to_signed_bytes_le();
        self.usize(bytes.len());
        self.out.extend_from_slice(&bytes);
    }

    pub fn rational(&mut self, v: &Rational) {
        self.bigint(v.numer());
        self.bigint(v.denom());
    }
}

/// The outcome of one protocol invocation, per the run mode.
pub enum RunOutput {
    /// One sampled trajectory.
    Sampled {
        assignment: Assignment,
        events: Vec<ProtocolEvent>,
    },
    /// Every trajectory, deduplicated by final assignment.
    Exact {
        outcomes: Vec<(Assignment, Rational)>,
        nodes: u64,
    },
}

/// How to drive a run from the CLI.
#[derive(Clone, Copy, Debug)]
pub enum RunMode {
    Sample { seed: u64 },
    Exact { budget: u64 },
}

/// Builds the initial state for a protocol kind. Corrupted players' declared
/// orders (if any) replace their true ones for the protocol's eyes.
pub fn process(
    kind: ProtocolKind,
    profile: &PreferenceProfile,
    strategy: &AdversaryStrategy,
    log: bool,
) -> Result<ProtocolState> {
    strategy.validate(profile.n())?;
    let effective = strategy.effective_profile(profile)?;
    let context = std::rc::Rc::new(strategy.context.clone());
    Ok(match kind {
        ProtocolKind::PreferencePriority => {
            ProtocolState::Pp(PpState::new(effective, context, false, log))
        }
        ProtocolKind::NaivePreferencePriority => {
            ProtocolState::Pp(PpState::new(effective, context, true, log))
        }
        ProtocolKind::OnlinePsVar => {
            ProtocolState::Online(OnlineState::new(effective, context, true, log))
        }
        ProtocolKind::OnlinePs => {
            ProtocolState::Online(OnlineState::new(effective, context, false, log))
        }
    })
}

/// A run state of either protocol family, for callers that pick the kind at
/// runtime (the CLI). Statically-typed callers use [`PpState`] or
/// [`OnlineState`] directly.
#[derive(Clone, Debug)]
pub enum ProtocolState {
    Pp(PpState),
    Online(OnlineState),
}

impl ProtocolState {
    /// Lets worst-case drivers explore Byzantine winner dictation in duels
    /// between two corrupted players.
    pub fn with_dictation(self) -> Self {
        match self {
            Self::Pp(s) => Self::Pp(s.with_dictation()),
            Self::Online(s) => Self::Online(s.with_dictation()),
        }
    }
}

impl Protocol for ProtocolState {
    fn n(&self) -> usize {
        match self {
            Self::Pp(s) => s.n(),
            Self::Online(s) => s.n(),
        }
    }

    fn step(&self) -> ProcessStep<Self> {
        fn wrap<S: Protocol>(step: ProcessStep<S>, lift: impl Fn(S) -> ProtocolState) -> ProcessStep<ProtocolState> {
            match step {
                ProcessStep::Done(s) => ProcessStep::Done(lift(s)),
                ProcessStep::Chance(branches) => ProcessStep::Chance(
                    branches.into_iter().map(|(p, s)| (p, lift(s))).collect(),
                ),
                ProcessStep::Decision(point, menu) => ProcessStep::Decision(
                    point,
                    menu.into_iter().map(|(a, s)| (a, lift(s))).collect(),
                ),
            }
        }
        match self {
            Self::Pp(s) => wrap(s.step(), ProtocolState::Pp),
            Self::Online(s) => wrap(s.step(), ProtocolState::Online),
        }
    }

    fn assigned_item(&self, p: PlayerId) -> Option<ItemId> {
        match self {
            Self::Pp(s) => s.assigned_item(p),
            Self::Online(s) => s.assigned_item(p),
        }
    }

    fn events(&self) -> &[ProtocolEvent] {
        match self {
            Self::Pp(s) => s.events(),
            Self::Online(s) => s.events(),
        }
    }

    fn encode_key(&self, focus: Option<PlayerId>, out: &mut Vec<u8>) {
        match self {
            Self::Pp(s) => s.encode_key(focus, out),
            Self::Online(s) => s.encode_key(focus, out),
        }
    }
}

/// Runs one protocol invocation end to end.
pub fn run(
    kind: ProtocolKind,
    profile: &PreferenceProfile,
    strategy: &AdversaryStrategy,
    mode: RunMode,
) -> Result<RunOutput> {
    let state = process(kind, profile, strategy, matches!(mode, RunMode::Sample { .. }))?;
    match mode {
        RunMode::Sample { seed } => {
            use rand::SeedableRng;
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let (assignment, events) = sample_run(&state, strategy, &mut rng)?;
            Ok(RunOutput::Sampled { assignment, events })
        }
        RunMode::Exact { budget } => {
            let (paths, nodes) = enumerate_paths(&state, strategy, budget)?;
            let mut merged: BTreeMap<Assignment, Rational> = BTreeMap::new();
            for (assignment, prob) in paths {
                *merged.entry(assignment).or_insert_with(rational::zero) += prob;
            }
            Ok(RunOutput::Exact { outcomes: merged.into_iter().collect(), nodes })
        }
    }
}

/// Samples a single trajectory under the given adversary. Chance nodes are
/// resolved exactly: a uniform draw below the common denominator, so the
/// sampled law is the exact branch law, not a float approximation.
pub fn sample_run<P: Protocol>(
    root: &P,
    strategy: &AdversaryStrategy,
    rng: &mut impl Rng,
) -> Result<(Assignment, Vec<ProtocolEvent>)> {
    use num_bigint::RandBigInt;
    use num_traits::Zero;

    let mut state = root.clone();
    loop {
        match state.step() {
            ProcessStep::Done(terminal) => {
                return Ok((terminal.final_assignment(), terminal.events().to_vec()));
            }
            ProcessStep::Chance(branches) => {
                let denom = branches
                    .iter()
                    .fold(BigInt::from(1), |acc, (p, _)| num_integer::lcm(acc, p.denom().clone()));
                let mut draw = rng.gen_bigint_range(&BigInt::zero(), &denom);
                let mut chosen = None;
                for (p, child) in branches {
                    let ticket = p.numer() * (&denom / p.denom());
                    if draw < ticket {
                        chosen = Some(child);
                        break;
                    }
                    draw -= ticket;
                }
                state = chosen.expect("branch probabilities sum to one");
            }
            ProcessStep::Decision(point, menu) => {
                state = resolve_decision(strategy, &point, menu)?;
            }
        }
    }
}

/// Enumerates every trajectory under a fixed adversary strategy, returning
/// `(assignment, probability)` per path and the number of states explored.
/// Fails with [`Error::Budget`] if the walk exceeds `budget` states.
pub fn enumerate_paths<P: Protocol>(
    root: &P,
    strategy: &AdversaryStrategy,
    budget: u64,
) -> Result<(Vec<(Assignment, Rational)>, u64)> {
    let mut nodes = 0u64;
    let mut out = Vec::new();
    let mut stack = vec![(root.clone(), rational::one())];
    while let Some((state, prob)) = stack.pop() {
        nodes += 1;
        if nodes > budget {
            return Err(Error::Budget { nodes, budget });
        }
        match state.step() {
            ProcessStep::Done(terminal) => out.push((terminal.final_assignment(), prob)),
            ProcessStep::Chance(branches) => {
                for (p, child) in branches {
                    stack.push((child, &prob * &p));
                }
            }
            ProcessStep::Decision(point, menu) => {
                let next = resolve_decision(strategy, &point, menu)?;
                stack.push((next, prob));
            }
        }
    }
    Ok((out, nodes))
}

/// Picks the menu entry a scripted strategy takes at a decision point.
/// Scripted strategies only ever abort, so the chosen abort set always
/// appears in the menu (which lists every subset of the eligible aborters).
pub(crate) fn resolve_decision<S>(
    strategy: &AdversaryStrategy,
    point: &DuelPoint,
    menu: Vec<(DuelAction, S)>,
) -> Result<S> {
    let eligible = crate::lottery::eligible_aborters(&menu);
    let wanted = DuelAction::Aborts(strategy.abort_set(point, &eligible));
    menu.into_iter()
        .find(|(action, _)| *action == wanted)
        .map(|(_, state)| state)
        .ok_or_else(|| {
            Error::Strategy(format!("strategy chose an action the protocol does not offer at {point:?}"))
        })
}
