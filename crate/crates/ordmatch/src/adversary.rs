//! Adversary models and strategies.
//!
//! A coalition of corrupted players can deviate from a protocol in two
//! graded ways. Under **fail-stop** corruption a player follows the protocol
//! faithfully except that it may stop sending messages — observable by
//! everyone, so an aborting player is *detected*. Under **Byzantine**
//! corruption it may additionally send arbitrary messages; for the duel
//! lotteries used here that buys exactly two extra powers: a corrupted
//! player may misdeclare its preference order, and a duel whose *both*
//! participants are corrupted can be steered to either winner without
//! detection. A Byzantine player dueling an honest one gains nothing beyond
//! fail-stop, because the honest side's committed randomness keeps the duel
//! outcome uniform no matter what the corrupted side sends (asserted by an
//! exhaustive residue test in [`crate::lottery`]).
//!
//! The adversary is *rushing*: in every duel it observes the honest outcome
//! of the current exchange before deciding whether its members abort. The
//! enumeration engines therefore place one adversary decision node after
//! each duel's chance node.
//!
//! Strategies are deterministic. They are either scripted pattern lists
//! (the JSON-facing form: "player 3 aborts whenever dueling player 2") or
//! explicit sets of abort points (the form produced by strategy
//! enumeration). Mixed strategies never help the adversary here — it
//! minimizes a linear objective, so some deterministic strategy is always
//! among the minimizers.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::model::{ItemId, PlayerId, PreferenceProfile};
use crate::rational::{self, Rational};
use crate::{Error, Result};

/// How far the corrupted coalition may deviate.
#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum AdvModel {
    /// Nobody deviates (the baseline for every comparison).
    Honest,
    /// Corrupted players may only stop participating (detectably).
    FailStop,
    /// Fail-stop powers plus misdeclared preferences and control over duels
    /// between two corrupted players.
    Byzantine,
}

impl AdvModel {
    pub fn as_str(self) -> &'static str {
        match self {
            AdvModel::Honest => "honest",
            AdvModel::FailStop => "fail-stop",
            AdvModel::Byzantine => "byzantine",
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "honest" => Ok(AdvModel::Honest),
            "fail-stop" | "failstop" => Ok(AdvModel::FailStop),
            "byzantine" => Ok(AdvModel::Byzantine),
            other => Err(Error::InvalidInput(format!("unknown adversary model {other:?}"))),
        }
    }
}

/// The static part of an adversary: who is corrupted and how badly.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct AdvContext {
    pub corrupted: BTreeSet<PlayerId>,
    pub model: AdvModel,
    /// Corrupted players that crash before sending their very first
    /// message. Their silence is observable immediately, so every honest
    /// player treats them as eliminated from the start: they never consume
    /// anything and never join a tournament, and they are handed a leftover
    /// item once everyone else is matched. A crash *during* the run is not
    /// a separate notion — consumption is shared bookkeeping, so a player
    /// that goes silent mid-run is first noticed (and scored) at the next
    /// tournament it was due to act in, which an abort rule already covers.
    pub crashed: BTreeSet<PlayerId>,
}

impl AdvContext {
    pub fn honest() -> Self {
        Self { corrupted: BTreeSet::new(), model: AdvModel::Honest, crashed: BTreeSet::new() }
    }

    pub fn new(corrupted: impl IntoIterator<Item = PlayerId>, model: AdvModel) -> Self {
        let corrupted: BTreeSet<PlayerId> = corrupted.into_iter().collect();
        let model = if corrupted.is_empty() { AdvModel::Honest } else { model };
        Self { corrupted, model, crashed: BTreeSet::new() }
    }

    /// Marks a subset of the corrupted players as silent from the start.
    pub fn with_crashed(mut self, players: impl IntoIterator<Item = PlayerId>) -> Self {
        self.crashed = players.into_iter().collect();
        self
    }

    pub fn is_corrupted(&self, p: PlayerId) -> bool {
        self.model != AdvModel::Honest && self.corrupted.contains(&p)
    }

    pub fn is_crashed(&self, p: PlayerId) -> bool {
        self.model != AdvModel::Honest && self.crashed.contains(&p)
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if let Some(p) = self.corrupted.iter().find(|p| p.0 >= n) {
            return Err(Error::Strategy(format!(
                "corrupted player {} out of range for n = {n}",
                p.0 + 1
            )));
        }
        if self.model != AdvModel::Honest && self.corrupted.len() >= n {
            return Err(Error::Strategy(format!(
                "at most n-1 = {} players may be corrupted",
                n - 1
            )));
        }
        if let Some(p) = self.crashed.difference(&self.corrupted).next() {
            return Err(Error::Strategy(format!(
                "crashed player {} is not in the corrupted set",
                p.0 + 1
            )));
        }
        if !self.crashed.is_empty() && self.model == AdvModel::Honest {
            return Err(Error::Strategy("honest runs cannot crash players".into()));
        }
        Ok(())
    }
}

/// When a decision happened: preference-priority protocols count rounds,
/// eating protocols run in continuous time.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum DecisionStamp {
    Round(u32),
    Time(Rational),
}

impl std::fmt::Display for DecisionStamp {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            DecisionStamp::Round(r) => write!(f, "round {r}"),
            DecisionStamp::Time(t) => write!(f, "time {}", rational::format_exact(t)),
        }
    }
}

/// Identity of one duel inside one tournament: enough context for a
/// deterministic strategy to recognize it across branches.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct DuelPoint {
    pub stamp: DecisionStamp,
    /// Item the tournament is for; `None` for standalone lotteries.
    pub item: Option<ItemId>,
    /// The two participants, lower index first.
    pub pair: (PlayerId, PlayerId),
    /// Position of the duel within its tournament bracket, starting at 0.
    pub duel_index: u32,
}

impl DuelPoint {
    pub fn new(
        stamp: DecisionStamp,
        item: Option<ItemId>,
        a: PlayerId,
        b: PlayerId,
        duel_index: u32,
    ) -> Self {
        let pair = if a <= b { (a, b) } else { (b, a) };
        Self { stamp, item, pair, duel_index }
    }

    pub fn involves(&self, p: PlayerId) -> bool {
        self.pair.0 == p || self.pair.1 == p
    }

    pub fn opponent_of(&self, p: PlayerId) -> Option<PlayerId> {
        if self.pair.0 == p {
            Some(self.pair.1)
        } else if self.pair.1 == p {
            Some(self.pair.0)
        } else {
            None
        }
    }
}

/// One corrupted player's opportunity to abort at one duel.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct AbortPoint {
    pub player: PlayerId,
    pub duel: DuelPoint,
}

/// One move available to the adversary at a duel decision node.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum DuelAction {
    /// These corrupted participants abort (the empty set = play on). Used
    /// after the chance node has revealed the duel's nominal winner.
    Aborts(BTreeSet<PlayerId>),
    /// Both participants corrupted, Byzantine: choose the residues so that
    /// `winner` wins cleanly; the loser survives undetected.
    FixWinner(PlayerId),
    /// As [`DuelAction::FixWinner`], but the loser aborts on top, trading
    /// detection for nothing — included for completeness of the action set.
    FixWinnerLoserAborts(PlayerId),
}

impl DuelAction {
    pub fn play_on() -> Self {
        DuelAction::Aborts(BTreeSet::new())
    }
}

/// A scripted abort trigger; all present conditions must hold (an empty
/// trigger always fires).
#[derive(Clone, Default, PartialEq, Eq, Debug)]
pub struct Trigger {
    pub when_dueling: Option<PlayerId>,
    pub in_round: Option<u32>,
    pub at_time: Option<Rational>,
    pub for_item: Option<ItemId>,
}

impl Trigger {
    /// The unconditional trigger: abort at the first opportunity (for a
    /// fail-stop player this is equivalent to "abort at the first duel" and
    /// to "abort in the own first tournament", since an aborted player never
    /// acts again).
    pub fn always() -> Self {
        Self::default()
    }

    pub fn when_dueling(p: PlayerId) -> Self {
        Self { when_dueling: Some(p), ..Self::default() }
    }

    pub fn in_round(r: u32) -> Self {
        Self { in_round: Some(r), ..Self::default() }
    }

    pub fn for_item(j: ItemId) -> Self {
        Self { for_item: Some(j), ..Self::default() }
    }

    fn matches(&self, player: PlayerId, duel: &DuelPoint) -> bool {
        if let Some(opponent) = self.when_dueling {
            if duel.opponent_of(player) != Some(opponent) {
                return false;
            }
        }
        if let Some(round) = self.in_round {
            if duel.stamp != DecisionStamp::Round(round) {
                return false;
            }
        }
        if let Some(time) = &self.at_time {
            if duel.stamp != DecisionStamp::Time(time.clone()) {
                return false;
            }
        }
        if let Some(item) = self.for_item {
            if duel.item != Some(item) {
                return false;
            }
        }
        true
    }
}

/// One line of a scripted strategy: the listed players abort whenever the
/// trigger matches one of their duels.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ScriptEntry {
    pub players: BTreeSet<PlayerId>,
    pub trigger: Trigger,
}

/// The decision rule of an adversary strategy.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum DecisionRule {
    /// Never abort (corrupted players may still misdeclare preferences under
    /// the Byzantine model).
    Passive,
    /// Pattern list, checked in order; a player aborts if any entry fires.
    Scripted(Vec<ScriptEntry>),
    /// Explicit abort points, the shape produced by strategy enumeration.
    AbortAtPoints(BTreeSet<AbortPoint>),
}

/// A complete deterministic adversary strategy.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct AdversaryStrategy {
    pub context: AdvContext,
    pub rule: DecisionRule,
    /// Misdeclared preference orders (Byzantine only), keyed by player.
    pub declared: BTreeMap<PlayerId, Vec<ItemId>>,
}

impl AdversaryStrategy {
    /// The no-adversary strategy.
    pub fn honest() -> Self {
        Self {
            context: AdvContext::honest(),
            rule: DecisionRule::Passive,
            declared: BTreeMap::new(),
        }
    }

    /// Fail-stop strategy from a pattern list.
    pub fn scripted_failstop(
        corrupted: impl IntoIterator<Item = PlayerId>,
        entries: Vec<ScriptEntry>,
    ) -> Self {
        Self {
            context: AdvContext::new(corrupted, AdvModel::FailStop),
            rule: DecisionRule::Scripted(entries),
            declared: BTreeMap::new(),
        }
    }

    /// Fail-stop strategy whose corrupted players never send their first
    /// message: everyone learns immediately that they are gone, and the run
    /// proceeds without them from the start.
    pub fn crash_from_start(players: impl IntoIterator<Item = PlayerId>) -> Self {
        let players: BTreeSet<PlayerId> = players.into_iter().collect();
        Self {
            context: AdvContext::new(players.clone(), AdvModel::FailStop).with_crashed(players),
            rule: DecisionRule::Passive,
            declared: BTreeMap::new(),
        }
    }

    /// Fail-stop strategy that aborts exactly at the given points.
    pub fn failstop_at_points(
        corrupted: impl IntoIterator<Item = PlayerId>,
        points: BTreeSet<AbortPoint>,
    ) -> Self {
        Self {
            context: AdvContext::new(corrupted, AdvModel::FailStop),
            rule: DecisionRule::AbortAtPoints(points),
            declared: BTreeMap::new(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        self.context.validate(n)?;
        for (p, order) in &self.declared {
            if !self.context.corrupted.contains(p) {
                return Err(Error::Strategy(format!(
                    "declared order for uncorrupted player {}",
                    p.0 + 1
                )));
            }
            if self.context.model != AdvModel::Byzantine {
                return Err(Error::Strategy(
                    "misdeclared preferences require the byzantine model".into(),
                ));
            }
            if order.len() != n {
                return Err(Error::Strategy(format!(
                    "declared order for player {} has {} items, expected {n}",
                    p.0 + 1,
                    order.len()
                )));
            }
        }
        Ok(())
    }

    /// The profile the protocol actually runs on: the true profile with
    /// corrupted players' declared orders substituted.
    pub fn effective_profile(&self, truth: &PreferenceProfile) -> Result<PreferenceProfile> {
        let mut profile = truth.clone();
        for (p, order) in &self.declared {
            profile = profile.with_order(*p, order.clone())?;
        }
        Ok(profile)
    }

    /// Which of the `eligible` corrupted participants abort at this duel.
    pub fn abort_set(&self, duel: &DuelPoint, eligible: &BTreeSet<PlayerId>) -> BTreeSet<PlayerId> {
        eligible
            .iter()
            .copied()
            .filter(|&p| match &self.rule {
                DecisionRule::Passive => false,
                DecisionRule::Scripted(entries) => entries
                    .iter()
                    .any(|e| e.players.contains(&p) && e.trigger.matches(p, duel)),
                DecisionRule::AbortAtPoints(points) => {
                    points.contains(&AbortPoint { player: p, duel: duel.clone() })
                }
            })
            .collect()
    }
}

/// All fail-stop strategies over a fixed set of reachable abort points: one
/// strategy per subset, enumerated lazily in binary-counter order (the empty
/// subset — honest play — first).
///
/// The point set is typically produced by
/// [`crate::analysis::reachable_abort_points`], which walks the protocol's
/// full decision tree. `bound` caps the number of points so the subset count
/// stays enumerable.
pub fn enumerate_failstop_strategies(
    corrupted: impl IntoIterator<Item = PlayerId>,
    points: Vec<AbortPoint>,
    bound: usize,
) -> Result<impl Iterator<Item = AdversaryStrategy>> {
    if points.len() > bound {
        return Err(Error::TooLarge(format!(
            "{} reachable abort points exceed the enumeration bound {bound}",
            points.len()
        )));
    }
    let corrupted: BTreeSet<PlayerId> = corrupted.into_iter().collect();
    if let Some(point) = points.iter().find(|pt| !corrupted.contains(&pt.player)) {
        return Err(Error::Strategy(format!(
            "abort point for uncorrupted player {}",
            point.player.0 + 1
        )));
    }
    let total: u64 = 1u64 << points.len();
    Ok((0..total).map(move |mask| {
        let chosen: BTreeSet<AbortPoint> = points
            .iter()
            .enumerate()
            .filter(|(bit, _)| mask >> bit & 1 == 1)
            .map(|(_, pt)| pt.clone())
            .collect();
        AdversaryStrategy::failstop_at_points(corrupted.clone(), chosen)
    }))
}

// ---------------------------------------------------------------------------
// JSON wire format
// ---------------------------------------------------------------------------

/// JSON form of a strategy file. All indices are one-based.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct StrategyJson {
    pub corrupted: Vec<usize>,
    pub model: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub crashed: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub aborts: Vec<AbortRuleJson>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub declared: BTreeMap<String, Vec<usize>>,
}

/// JSON form of one scripted abort rule. Absent conditions are unconstrained;
/// a rule with no conditions fires at the first opportunity.
#[derive(Clone, Default, Debug, Serialize, Deserialize)]
pub struct AbortRuleJson {
    pub players: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub when_dueling: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub in_round: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub at_time: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub for_item: Option<usize>,
}

fn one_based_player(raw: usize) -> Result<PlayerId> {
    raw.checked_sub(1)
        .map(PlayerId)
        .ok_or_else(|| Error::Strategy("player index 0 (indices are one-based)".into()))
}

impl AdversaryStrategy {
    pub fn to_json(&self) -> StrategyJson {
        let aborts = match &self.rule {
            DecisionRule::Passive => Vec::new(),
            DecisionRule::Scripted(entries) => entries
                .iter()
                .map(|e| AbortRuleJson {
                    players: e.players.iter().map(|p| p.0 + 1).collect(),
                    when_dueling: e.trigger.when_dueling.map(|p| p.0 + 1),
                    in_round: e.trigger.in_round,
                    at_time: e.trigger.at_time.as_ref().map(rational::format_exact),
                    for_item: e.trigger.for_item.map(|j| j.0 + 1),
                })
                .collect(),
            DecisionRule::AbortAtPoints(_) => {
                // Enumerated strategies are an in-memory construct; their
                // point sets are branch-specific and not meaningfully
                // scriptable, so they serialize as their corrupted set only.
                Vec::new()
            }
        };
        StrategyJson {
            corrupted: self.context.corrupted.iter().map(|p| p.0 + 1).collect(),
            model: self.context.model.as_str().to_owned(),
            crashed: self.context.crashed.iter().map(|p| p.0 + 1).collect(),
            aborts,
            declared: self
                .declared
                .iter()
                .map(|(p, order)| {
                    ((p.0 + 1).to_string(), order.iter().map(|j| j.0 + 1).collect())
                })
                .collect(),
        }
    }

    pub fn from_json(json: &StrategyJson) -> Result<Self> {
        let corrupted = json
            .corrupted
            .iter()
            .map(|&p| one_based_player(p))
            .collect::<Result<BTreeSet<_>>>()?;
        let model = AdvModel::parse(&json.model)?;
        let crashed = json
            .crashed
            .iter()
            .map(|&p| one_based_player(p))
            .collect::<Result<BTreeSet<_>>>()?;
        if let Some(p) = crashed.difference(&corrupted).next() {
            return Err(Error::Strategy(format!(
                "crashed player {} is not in the corrupted set",
                p.0 + 1
            )));
        }
        let entries = json
            .aborts
            .iter()
            .map(|rule| {
                let players = rule
                    .players
                    .iter()
                    .map(|&p| one_based_player(p))
                    .collect::<Result<BTreeSet<_>>>()?;
                if let Some(p) = players.iter().find(|p| !corrupted.contains(p)) {
                    return Err(Error::Strategy(format!(
                        "abort rule names uncorrupted player {}",
                        p.0 + 1
                    )));
                }
                let trigger = Trigger {
                    when_dueling: rule.when_dueling.map(one_based_player).transpose()?,
                    in_round: rule.in_round,
                    at_time: rule.at_time.as_deref().map(rational::parse).transpose()?,
                    for_item: rule
                        .for_item
                        .map(|j| {
                            j.checked_sub(1).map(ItemId).ok_or_else(|| {
                                Error::Strategy("item index 0 (indices are one-based)".into())
                            })
                        })
                        .transpose()?,
                };
                Ok(ScriptEntry { players, trigger })
            })
            .collect::<Result<Vec<_>>>()?;
        let declared = json
            .declared
            .iter()
            .map(|(p, order)| {
                let p: usize = p
                    .parse()
                    .map_err(|_| Error::Strategy(format!("bad player key {p:?} in declared map")))?;
                let order = order
                    .iter()
                    .map(|&j| {
                        j.checked_sub(1).map(ItemId).ok_or_else(|| {
                            Error::Strategy("item index 0 in declared order".into())
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                Ok((one_based_player(p)?, order))
            })
            .collect::<Result<BTreeMap<_, _>>>()?;
        let rule = if entries.is_empty() { DecisionRule::Passive } else { DecisionRule::Scripted(entries) };
        let strategy = AdversaryStrategy {
            context: AdvContext { corrupted, model, crashed },
            rule,
            declared,
        };
        if strategy.context.model == AdvModel::Honest && !strategy.context.corrupted.is_empty() {
            return Err(Error::Strategy("honest model with a nonempty corrupted set".into()));
        }
        Ok(strategy)
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let json: StrategyJson = serde_json::from_str(text)?;
        Self::from_json(&json)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::ratio;

    fn duel(round: u32, item: usize, a: usize, b: usize, idx: u32) -> DuelPoint {
        DuelPoint::new(
            DecisionStamp::Round(round),
            Some(ItemId(item)),
            PlayerId(a),
            PlayerId(b),
            idx,
        )
    }

    #[test]
    fn duel_point_orders_its_pair() {
        let point = duel(1, 0, 3, 1, 0);
        assert_eq!(point.pair, (PlayerId(1), PlayerId(3)));
        assert!(point.involves(PlayerId(3)));
        assert_eq!(point.opponent_of(PlayerId(1)), Some(PlayerId(3)));
        assert_eq!(point.opponent_of(PlayerId(2)), None);
    }

    #[test]
    fn triggers_match_conjunctively() {
        let point = duel(2, 4, 7, 8, 1);
        assert!(Trigger::always().matches(PlayerId(7), &point));
        assert!(Trigger::when_dueling(PlayerId(8)).matches(PlayerId(7), &point));
        assert!(!Trigger::when_dueling(PlayerId(8)).matches(PlayerId(8), &point));
        assert!(Trigger::in_round(2).matches(PlayerId(7), &point));
        assert!(!Trigger::in_round(1).matches(PlayerId(7), &point));
        let both = Trigger { in_round: Some(2), for_item: Some(ItemId(4)), ..Trigger::default() };
        assert!(both.matches(PlayerId(8), &point));
        let wrong_item = Trigger { in_round: Some(2), for_item: Some(ItemId(3)), ..Trigger::default() };
        assert!(!wrong_item.matches(PlayerId(8), &point));
        let timed = Trigger { at_time: Some(ratio(1, 3)), ..Trigger::default() };
        assert!(!timed.matches(PlayerId(7), &point));
        let time_point = DuelPoint::new(
            DecisionStamp::Time(ratio(1, 3)),
            None,
            PlayerId(7),
            PlayerId(8),
            0,
        );
        assert!(timed.matches(PlayerId(7), &time_point));
    }

    #[test]
    fn scripted_strategy_selects_abort_sets() {
        let strategy = AdversaryStrategy::scripted_failstop(
            [PlayerId(7), PlayerId(8)],
            vec![ScriptEntry {
                players: [PlayerId(7), PlayerId(8)].into(),
                trigger: Trigger::in_round(1),
            }],
        );
        let eligible: BTreeSet<PlayerId> = [PlayerId(7)].into();
        assert_eq!(
            strategy.abort_set(&duel(1, 4, 7, 2, 0), &eligible),
            [PlayerId(7)].into()
        );
        assert!(strategy.abort_set(&duel(2, 4, 7, 2, 0), &eligible).is_empty());
        // Only eligible players can abort, whatever the script says.
        assert!(strategy.abort_set(&duel(1, 4, 7, 2, 0), &BTreeSet::new()).is_empty());
    }

    #[test]
    fn honest_strategy_never_aborts() {
        let strategy = AdversaryStrategy::honest();
        let eligible: BTreeSet<PlayerId> = [PlayerId(0)].into();
        assert!(strategy.abort_set(&duel(1, 0, 0, 1, 0), &eligible).is_empty());
        assert!(!strategy.context.is_corrupted(PlayerId(0)));
    }

    #[test]
    fn point_strategies_abort_exactly_at_their_points() {
        let pt = AbortPoint { player: PlayerId(2), duel: duel(1, 0, 2, 3, 0) };
        let strategy =
            AdversaryStrategy::failstop_at_points([PlayerId(2)], [pt.clone()].into());
        let eligible: BTreeSet<PlayerId> = [PlayerId(2)].into();
        assert_eq!(strategy.abort_set(&pt.duel, &eligible), [PlayerId(2)].into());
        assert!(strategy.abort_set(&duel(1, 0, 2, 3, 1), &eligible).is_empty());
    }

    #[test]
    fn enumeration_yields_all_subsets() {
        let points = vec![
            AbortPoint { player: PlayerId(1), duel: duel(1, 0, 1, 2, 0) },
            AbortPoint { player: PlayerId(1), duel: duel(2, 1, 1, 3, 0) },
        ];
        let strategies: Vec<_> =
            enumerate_failstop_strategies([PlayerId(1)], points, 20).unwrap().collect();
        assert_eq!(strategies.len(), 4);
        assert_eq!(strategies[0].rule, DecisionRule::AbortAtPoints(BTreeSet::new()));
        let distinct: BTreeSet<String> =
            strategies.iter().map(|s| format!("{:?}", s.rule)).collect();
        assert_eq!(distinct.len(), 4);
    }

    #[test]
    fn enumeration_respects_the_bound() {
        let points: Vec<_> = (0..5)
            .map(|i| AbortPoint { player: PlayerId(0), duel: duel(1, 0, 0, 1, i) })
            .collect();
        assert!(enumerate_failstop_strategies([PlayerId(0)], points.clone(), 4).is_err());
        assert_eq!(
            enumerate_failstop_strategies([PlayerId(0)], points, 5).unwrap().count(),
            32
        );
    }

    #[test]
    fn strategy_json_round_trips() {
        let strategy = AdversaryStrategy::scripted_failstop(
            [PlayerId(2)],
            vec![ScriptEntry {
                players: [PlayerId(2)].into(),
                trigger: Trigger::when_dueling(PlayerId(1)),
            }],
        );
        let text = serde_json::to_string_pretty(&strategy.to_json()).unwrap();
        let parsed = AdversaryStrategy::from_json_str(&text).unwrap();
        assert_eq!(parsed, strategy);
        assert!(text.contains("\"fail-stop\""));
        assert!(text.contains("\"when_dueling\": 2"));
    }

    #[test]
    fn crash_from_start_round_trips_and_stays_inside_the_coalition() {
        let strategy = AdversaryStrategy::crash_from_start([PlayerId(3)]);
        let text = serde_json::to_string_pretty(&strategy.to_json()).unwrap();
        assert!(text.contains("\"crashed\""));
        let parsed = AdversaryStrategy::from_json_str(&text).unwrap();
        assert_eq!(parsed, strategy);
        parsed.validate(14).unwrap();
        let bad = r#"{"corrupted": [2], "model": "fail-stop", "crashed": [3]}"#;
        assert!(AdversaryStrategy::from_json_str(bad).is_err());
    }

    #[test]
    fn strategy_json_validates() {
        // Abort rule for a player outside the corrupted set.
        let bad = r#"{"corrupted": [1], "model": "fail-stop",
                      "aborts": [{"players": [2]}]}"#;
        assert!(AdversaryStrategy::from_json_str(bad).is_err());
        // Declared order without the byzantine model.
        let declared = r#"{"corrupted": [1], "model": "fail-stop",
                           "declared": {"1": [2, 1]}}"#;
        let strategy = AdversaryStrategy::from_json_str(declared).unwrap();
        assert!(strategy.validate(2).is_err());
        // Whole-coalition corruption is out of scope.
        let all = r#"{"corrupted": [1, 2], "model": "fail-stop"}"#;
        assert!(AdversaryStrategy::from_json_str(all).unwrap().validate(2).is_err());
        // Byzantine misdeclaration is accepted.
        let byz = r#"{"corrupted": [2], "model": "byzantine",
                      "declared": {"2": [2, 1]}}"#;
        let strategy = AdversaryStrategy::from_json_str(byz).unwrap();
        strategy.validate(2).unwrap();
        let profile = PreferenceProfile::from_one_based(&[vec![1, 2], vec![1, 2]]).unwrap();
        let effective = strategy.effective_profile(&profile).unwrap();
        assert_eq!(effective.order(PlayerId(1)), &[ItemId(1), ItemId(0)]);
        assert_eq!(effective.order(PlayerId(0)), &[ItemId(0), ItemId(1)]);
    }
}
