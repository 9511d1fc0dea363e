//! Exact outcome analysis over protocol execution trees.
//!
//! Every driver here walks the same step machines from [`crate::protocols`]:
//! `exact_distribution` enumerates the full outcome law, `exact_row`
//! computes one player's item distribution with a memoized DP (the large
//! instances are only feasible this way), `worst_case_prefixes` runs
//! backward induction over adversary decisions, and
//! `claimed_ownership_prob` evaluates the interrupted-process device for the
//! eating protocols. Checkers for the game-theoretic properties live in
//! [`checks`]; exhaustive small-`n` theorem sweeps in [`sweeps`].

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::rc::Rc;

use crate::adversary::{AbortPoint, AdversaryStrategy, DuelAction, DuelPoint};
use crate::lottery::eligible_aborters;
use crate::model::{
    induced_matrix, Assignment, ItemId, PlayerId, PreferenceProfile, ProbabilityMatrix,
};
use crate::protocols::{
    process, resolve_decision, InstantStep, OnlineState, ProcessStep, Protocol, ProtocolKind,
    ProtocolState,
};
use crate::rational::{self, Rational};
use crate::{Error, Result};

pub mod checks;
pub mod sweeps;

pub use checks::{
    brute_force_efficient, brute_force_stable, check_equal_treatment, check_maximin,
    check_truthfulness_gain, check_uniform_dominance, is_ordinally_efficient, is_stable,
    top_prefix, EfficiencyReport, MaximinReport, StabilityReport, TreatmentReport,
    TreatmentStrength, TruthTarget, TruthfulnessReport, UniformReport,
};
pub use sweeps::{
    all_profiles, byzantine_uniform_secure, canonical_profiles, failstop_worst_secure,
    worst_case_prefix_prob, worst_case_prefix_profile, SweepFailure,
};

/// Default cap on explored states for every enumeration driver. Exceeding
/// it is a hard [`Error::Budget`], never a silent truncation.
pub const DEFAULT_BUDGET: u64 = 20_000_000;

/// Work counters for a tree walk, reported so pruning regressions show up
/// in test output instead of only in wall-clock time.
#[derive(Clone, Copy, Default, Debug)]
pub struct EnumStats {
    /// States stepped (memo hits excluded).
    pub nodes: u64,
    /// Lookups answered from the memo table.
    pub memo_hits: u64,
    /// Distinct states stored.
    pub memo_entries: u64,
}

impl EnumStats {
    fn charge(&mut self, budget: u64) -> Result<()> {
        self.nodes += 1;
        if self.nodes > budget {
            return Err(Error::Budget { nodes: self.nodes, budget });
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Full outcome distributions
// ---------------------------------------------------------------------------

/// An exact probability distribution over complete assignments.
#[derive(Clone, Debug)]
pub struct OutcomeDistribution {
    support: BTreeMap<Assignment, Rational>,
    /// States explored to compute it.
    pub nodes: u64,
    /// Human-readable origin, e.g. `"pp, honest"`.
    pub provenance: String,
}

impl OutcomeDistribution {
    /// Wraps a support map, checking that it is a genuine distribution.
    pub fn from_support(
        support: BTreeMap<Assignment, Rational>,
        nodes: u64,
        provenance: String,
    ) -> Result<Self> {
        if support.values().any(|q| q <= &rational::zero()) {
            return Err(Error::Consistency("non-positive outcome weight".into()));
        }
        let total = rational::sum(support.values());
        if total != rational::one() {
            return Err(Error::Consistency(format!(
                "outcome weights sum to {}, not 1",
                rational::format_exact(&total)
            )));
        }
        Ok(Self { support, nodes, provenance })
    }

    pub fn outcomes(&self) -> impl Iterator<Item = (&Assignment, &Rational)> {
        self.support.iter()
    }

    pub fn support_size(&self) -> usize {
        self.support.len()
    }

    pub fn probability(&self, a: &Assignment) -> Rational {
        self.support.get(a).cloned().unwrap_or_else(rational::zero)
    }

    /// The induced player-by-item probability matrix.
    pub fn matrix(&self) -> Result<ProbabilityMatrix> {
        induced_matrix(self.support.iter())
    }

    /// One player's item distribution.
    pub fn row(&self, p: PlayerId) -> Vec<Rational> {
        let n = self
            .support
            .keys()
            .next()
            .map(Assignment::n)
            .unwrap_or(0);
        let mut row = vec![rational::zero(); n];
        for (assignment, weight) in &self.support {
            row[assignment.item_of(p).0] += weight;
        }
        row
    }

    /// Probability that `p` ends up holding `j`.
    pub fn marginal(&self, p: PlayerId, j: ItemId) -> Rational {
        rational::sum(
            self.support
                .iter()
                .filter(|(a, _)| a.item_of(p) == j)
                .map(|(_, q)| q),
        )
    }
}

/// Exact outcome distribution of one protocol under one adversary strategy.
pub fn exact_distribution(
    kind: ProtocolKind,
    profile: &PreferenceProfile,
    strategy: &AdversaryStrategy,
    budget: u64,
) -> Result<OutcomeDistribution> {
    let root = process(kind, profile, strategy, false)?;
    let (support, stats) = distribution_from(&root, strategy, budget)?;
    OutcomeDistribution::from_support(
        support,
        stats.nodes,
        format!("{}, {}", kind.as_str(), strategy.context.model.as_str()),
    )
}

/// Memoized full-distribution walk from an arbitrary root state.
pub fn distribution_from<P: Protocol>(
    root: &P,
    strategy: &AdversaryStrategy,
    budget: u64,
) -> Result<(BTreeMap<Assignment, Rational>, EnumStats)> {
    type Memo = HashMap<Vec<u8>, Rc<BTreeMap<Assignment, Rational>>>;

    fn rec<P: Protocol>(
        state: &P,
        strategy: &AdversaryStrategy,
        memo: &mut Memo,
        stats: &mut EnumStats,
        budget: u64,
    ) -> Result<Rc<BTreeMap<Assignment, Rational>>> {
        let mut key = Vec::new();
        state.encode_key(None, &mut key);
        if let Some(hit) = memo.get(&key) {
            stats.memo_hits += 1;
            return Ok(Rc::clone(hit));
        }
        stats.charge(budget)?;
        let value = match state.step() {
            ProcessStep::Done(terminal) => {
                let mut map = BTreeMap::new();
                map.insert(terminal.final_assignment(), rational::one());
                map
            }
            ProcessStep::Chance(branches) => {
                let mut map: BTreeMap<Assignment, Rational> = BTreeMap::new();
                for (p, child) in branches {
                    let sub = rec(&child, strategy, memo, stats, budget)?;
                    for (a, q) in sub.iter() {
                        *map.entry(a.clone()).or_insert_with(rational::zero) += &p * q;
                    }
                }
                map
            }
            ProcessStep::Decision(point, menu) => {
                let next = resolve_decision(strategy, &point, menu)?;
                rec(&next, strategy, memo, stats, budget)?.as_ref().clone()
            }
        };
        let value = Rc::new(value);
        memo.insert(key, Rc::clone(&value));
        stats.memo_entries = memo.len() as u64;
        Ok(value)
    }

    let mut memo = Memo::new();
    let mut stats = EnumStats::default();
    let support = rec(root, strategy, &mut memo, &mut stats, budget)?;
    Ok((support.as_ref().clone(), stats))
}

// ---------------------------------------------------------------------------
// Single-player rows
// ---------------------------------------------------------------------------

/// One player's exact item distribution under a fixed adversary strategy.
///
/// This is the workhorse for large instances: states are memoized under
/// focused keys (which collapse runs differing only in items other players
/// already hold), and a subtree is never entered once the focus player's
/// item is locked in.
pub fn exact_row(
    kind: ProtocolKind,
    profile: &PreferenceProfile,
    strategy: &AdversaryStrategy,
    focus: PlayerId,
    budget: u64,
) -> Result<(Vec<Rational>, EnumStats)> {
    let root = process(kind, profile, strategy, false)?;
    row_from(&root, strategy, focus, budget)
}

/// [`exact_row`] from an arbitrary root state.
pub fn row_from<P: Protocol>(
    root: &P,
    strategy: &AdversaryStrategy,
    focus: PlayerId,
    budget: u64,
) -> Result<(Vec<Rational>, EnumStats)> {
    type Memo = HashMap<Vec<u8>, Rc<Vec<Rational>>>;

    fn unit(n: usize, item: ItemId) -> Vec<Rational> {
        let mut row = vec![rational::zero(); n];
        row[item.0] = rational::one();
        row
    }

    fn rec<P: Protocol>(
        state: &P,
        strategy: &AdversaryStrategy,
        focus: PlayerId,
        memo: &mut Memo,
        stats: &mut EnumStats,
        budget: u64,
    ) -> Result<Rc<Vec<Rational>>> {
        // Absorbing prune: the focus player's row is settled the moment its
        // item is, whatever the rest of the run does.
        if let Some(item) = state.assigned_item(focus) {
            return Ok(Rc::new(unit(state.n(), item)));
        }
        let mut key = Vec::new();
        state.encode_key(Some(focus), &mut key);
        if let Some(hit) = memo.get(&key) {
            stats.memo_hits += 1;
            return Ok(Rc::clone(hit));
        }
        stats.charge(budget)?;
        let row = match state.step() {
            ProcessStep::Done(terminal) => {
                let item = terminal
                    .assigned_item(focus)
                    .expect("a finished run assigns every player");
                unit(state.n(), item)
            }
            ProcessStep::Chance(branches) => {
                let mut row = vec![rational::zero(); state.n()];
                for (p, child) in branches {
                    let sub = rec(&child, strategy, focus, memo, stats, budget)?;
                    for (slot, q) in row.iter_mut().zip(sub.iter()) {
                        *slot += &p * q;
                    }
                }
                row
            }
            ProcessStep::Decision(point, menu) => {
                let next = resolve_decision(strategy, &point, menu)?;
                rec(&next, strategy, focus, memo, stats, budget)?.as_ref().clone()
            }
        };
        let row = Rc::new(row);
        memo.insert(key, Rc::clone(&row));
        stats.memo_entries = memo.len() as u64;
        Ok(row)
    }

    let mut memo = Memo::new();
    let mut stats = EnumStats::default();
    let row = rec(root, strategy, focus, &mut memo, &mut stats, budget)?;
    debug_assert_eq!(rational::sum(row.iter()), rational::one());
    Ok((row.as_ref().clone(), stats))
}

// ---------------------------------------------------------------------------
// Worst-case backward induction
// ---------------------------------------------------------------------------

/// Worst-case guarantees for one player: `prefix_minima[l]` is the minimum,
/// over every way the adversary can play its decision nodes, of the
/// probability that the player's final item ranks within its top `l + 1`
/// positions of `true_order`.
#[derive(Clone, Debug)]
pub struct WorstCase {
    pub prefix_minima: Vec<Rational>,
    pub stats: EnumStats,
}

/// Backward induction over the full decision tree rooted at `root`.
///
/// At chance nodes the prefix vector is averaged; at decision nodes it is
/// minimized component-wise. A component-wise minimum is exactly what a
/// security check needs: each component's minimum is attained by some
/// deterministic strategy, and every strategy's value is bounded below by
/// the minimum, so "all minima clear the bar" is equivalent to "every
/// strategy clears the bar at every prefix". The minimization ranges over
/// all history-dependent behavior — a strict superset of the label-based
/// scripted strategies.
pub fn worst_case_prefixes<P: Protocol>(
    root: &P,
    true_order: &[ItemId],
    focus: PlayerId,
    budget: u64,
) -> Result<WorstCase> {
    type Memo = HashMap<Vec<u8>, Rc<Vec<Rational>>>;

    fn leaf(n: usize, true_order: &[ItemId], item: ItemId) -> Vec<Rational> {
        let rank = true_order
            .iter()
            .position(|&j| j == item)
            .expect("assigned item appears in the preference order");
        (0..n)
            .map(|l| if l >= rank { rational::one() } else { rational::zero() })
            .collect()
    }

    fn rec<P: Protocol>(
        state: &P,
        true_order: &[ItemId],
        focus: PlayerId,
        memo: &mut Memo,
        stats: &mut EnumStats,
        budget: u64,
    ) -> Result<Rc<Vec<Rational>>> {
        if let Some(item) = state.assigned_item(focus) {
            return Ok(Rc::new(leaf(state.n(), true_order, item)));
        }
        // Full-state keys: with the adversary free to condition on anything,
        // no collapse across other players' assignments is attempted.
        let mut key = Vec::new();
        state.encode_key(None, &mut key);
        if let Some(hit) = memo.get(&key) {
            stats.memo_hits += 1;
            return Ok(Rc::clone(hit));
        }
        stats.charge(budget)?;
        let value = match state.step() {
            ProcessStep::Done(terminal) => {
                let item = terminal
                    .assigned_item(focus)
                    .expect("a finished run assigns every player");
                leaf(state.n(), true_order, item)
            }
            ProcessStep::Chance(branches) => {
                let mut value = vec![rational::zero(); state.n()];
                for (p, child) in branches {
                    let sub = rec(&child, true_order, focus, memo, stats, budget)?;
                    for (slot, q) in value.iter_mut().zip(sub.iter()) {
                        *slot += &p * q;
                    }
                }
                value
            }
            ProcessStep::Decision(_, menu) => {
                let mut value: Option<Vec<Rational>> = None;
                for (_, child) in menu {
                    let sub = rec(&child, true_order, focus, memo, stats, budget)?;
                    value = Some(match value {
                        None => sub.as_ref().clone(),
                        Some(acc) => acc
                            .into_iter()
                            .zip(sub.iter())
                            .map(|(a, b)| if &a <= b { a } else { b.clone() })
                            .collect(),
                    });
                }
                value.expect("decision nodes offer at least one action")
            }
        };
        let value = Rc::new(value);
        memo.insert(key, Rc::clone(&value));
        stats.memo_entries = memo.len() as u64;
        Ok(value)
    }

    let mut memo = Memo::new();
    let mut stats = EnumStats::default();
    let minima = rec(root, true_order, focus, &mut memo, &mut stats, budget)?;
    Ok(WorstCase { prefix_minima: minima.as_ref().clone(), stats })
}

// ---------------------------------------------------------------------------
// Interrupted-process ownership
// ---------------------------------------------------------------------------

/// Probability mass the `focus` player has "claimed" by time `t` in an
/// eating protocol: an assigned player counts 1, an eliminated player 0,
/// and a player mid-meal counts the fraction of its current item it has
/// consumed. Tournaments scheduled at or before `t` are resolved first —
/// they take no time — so at `t = 1` this is exactly the probability of
/// being assigned by time one.
pub fn claimed_ownership_prob(
    kind: ProtocolKind,
    profile: &PreferenceProfile,
    strategy: &AdversaryStrategy,
    focus: PlayerId,
    t: &Rational,
    budget: u64,
) -> Result<Rational> {
    if t < &rational::zero() || t > &rational::one() {
        return Err(Error::InvalidInput(format!(
            "ownership time {} outside [0, 1]",
            rational::format_exact(t)
        )));
    }
    match process(kind, profile, strategy, false)? {
        ProtocolState::Online(state) => claimed_ownership_from(&state, strategy, focus, t, budget),
        ProtocolState::Pp(_) => Err(Error::InvalidInput(
            "claimed ownership is defined for the eating protocols only".into(),
        )),
    }
}

/// [`claimed_ownership_prob`] from an arbitrary eating state, e.g. to
/// examine the process after conditioning on an earlier tournament.
pub fn claimed_ownership_from(
    root: &OnlineState,
    strategy: &AdversaryStrategy,
    focus: PlayerId,
    t: &Rational,
    budget: u64,
) -> Result<Rational> {
    fn rec(
        state: &OnlineState,
        strategy: &AdversaryStrategy,
        focus: PlayerId,
        t: &Rational,
        stats: &mut EnumStats,
        budget: u64,
    ) -> Result<Rational> {
        stats.charge(budget)?;
        if !state.has_instant_work() {
            match state.next_event_time() {
                // The next exhaustion is at or before `t`; play through it
                // (and its instantaneous tournaments).
                Some(next) if next <= *t => {}
                // `t` falls strictly inside the current quiet stretch (or
                // after all eating is over): extrapolate the meal in
                // progress.
                _ => return Ok(state.claimed_at(focus, t)),
            }
        }
        match state.instant_step() {
            InstantStep::Done(terminal) => Ok(terminal.claimed_at(focus, t)),
            InstantStep::Progress(next) => rec(&next, strategy, focus, t, stats, budget),
            InstantStep::Chance(branches) => {
                let mut acc = rational::zero();
                for (p, child) in branches {
                    acc += p * rec(&child, strategy, focus, t, stats, budget)?;
                }
                Ok(acc)
            }
            InstantStep::Decision(point, menu) => {
                let next = resolve_decision(strategy, &point, menu)?;
                rec(&next, strategy, focus, t, stats, budget)
            }
        }
    }

    debug_assert!(root.time() <= t, "interruption time precedes the state");
    let mut stats = EnumStats::default();
    rec(root, strategy, focus, t, &mut stats, budget)
}

// ---------------------------------------------------------------------------
// Execution trees and reachability
// ---------------------------------------------------------------------------

/// A materialized game tree: chance nodes with exact branch probabilities,
/// adversary decision nodes, and assignment leaves.
#[derive(Clone, Debug)]
pub enum ExecutionTree {
    Leaf(Assignment),
    Chance(Vec<(Rational, ExecutionTree)>),
    Decision(DuelPoint, Vec<(DuelAction, ExecutionTree)>),
}

impl ExecutionTree {
    pub fn node_count(&self) -> u64 {
        match self {
            Self::Leaf(_) => 1,
            Self::Chance(branches) => {
                1 + branches.iter().map(|(_, t)| t.node_count()).sum::<u64>()
            }
            Self::Decision(_, branches) => {
                1 + branches.iter().map(|(_, t)| t.node_count()).sum::<u64>()
            }
        }
    }

    pub fn leaf_count(&self) -> u64 {
        match self {
            Self::Leaf(_) => 1,
            Self::Chance(branches) => branches.iter().map(|(_, t)| t.leaf_count()).sum(),
            Self::Decision(_, branches) => branches.iter().map(|(_, t)| t.leaf_count()).sum(),
        }
    }

    pub fn depth(&self) -> usize {
        match self {
            Self::Leaf(_) => 0,
            Self::Chance(branches) => {
                1 + branches.iter().map(|(_, t)| t.depth()).max().unwrap_or(0)
            }
            Self::Decision(_, branches) => {
                1 + branches.iter().map(|(_, t)| t.depth()).max().unwrap_or(0)
            }
        }
    }
}

/// Which decision branches [`execution_tree`] materializes.
#[derive(Clone, Copy)]
pub enum DecisionScope<'a> {
    /// Every action the protocol tolerates (the full game tree).
    Every,
    /// Only the branch a fixed strategy takes.
    Under(&'a AdversaryStrategy),
}

/// Materializes the execution tree below `root`. Mainly a debugging and
/// reporting aid — the analysis drivers walk states directly.
pub fn execution_tree<P: Protocol>(
    root: &P,
    scope: DecisionScope<'_>,
    budget: u64,
) -> Result<ExecutionTree> {
    fn rec<P: Protocol>(
        state: &P,
        scope: DecisionScope<'_>,
        stats: &mut EnumStats,
        budget: u64,
    ) -> Result<ExecutionTree> {
        stats.charge(budget)?;
        Ok(match state.step() {
            ProcessStep::Done(terminal) => ExecutionTree::Leaf(terminal.final_assignment()),
            ProcessStep::Chance(branches) => {
                let mut out = Vec::with_capacity(branches.len());
                for (p, child) in branches {
                    out.push((p, rec(&child, scope, stats, budget)?));
                }
                ExecutionTree::Chance(out)
            }
            ProcessStep::Decision(point, menu) => match scope {
                DecisionScope::Every => {
                    let mut out = Vec::with_capacity(menu.len());
                    for (action, child) in menu {
                        out.push((action, rec(&child, scope, stats, budget)?));
                    }
                    ExecutionTree::Decision(point, out)
                }
                DecisionScope::Under(strategy) => {
                    let eligible = eligible_aborters(&menu);
                    let wanted = DuelAction::Aborts(strategy.abort_set(&point, &eligible));
                    let (action, child) = menu
                        .into_iter()
                        .find(|(action, _)| *action == wanted)
                        .ok_or_else(|| {
                            Error::Strategy(format!(
                                "strategy chose an action the protocol does not offer at {point:?}"
                            ))
                        })?;
                    ExecutionTree::Decision(point, vec![(action, rec(&child, scope, stats, budget)?)])
                }
            },
        })
    }

    let mut stats = EnumStats::default();
    rec(root, scope, &mut stats, budget)
}

/// Every abort opportunity any corrupted player ever gets, across every
/// branch of the full decision tree. The result is the ground set for
/// [`crate::adversary::enumerate_failstop_strategies`].
pub fn reachable_abort_points<P: Protocol>(root: &P, budget: u64) -> Result<Vec<AbortPoint>> {
    let mut stats = EnumStats::default();
    let mut seen: std::collections::HashSet<Vec<u8>> = std::collections::HashSet::new();
    let mut points: BTreeSet<AbortPoint> = BTreeSet::new();
    let mut stack = vec![root.clone()];
    while let Some(state) = stack.pop() {
        let mut key = Vec::new();
        state.encode_key(None, &mut key);
        if !seen.insert(key) {
            stats.memo_hits += 1;
            continue;
        }
        stats.charge(budget)?;
        match state.step() {
            ProcessStep::Done(_) => {}
            ProcessStep::Chance(branches) => {
                stack.extend(branches.into_iter().map(|(_, child)| child));
            }
            ProcessStep::Decision(point, menu) => {
                for p in eligible_aborters(&menu) {
                    points.insert(AbortPoint { player: p, duel: point.clone() });
                }
                stack.extend(menu.into_iter().map(|(_, child)| child));
            }
        }
    }
    Ok(points.into_iter().collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{AdvModel, ScriptEntry, Trigger};
    use crate::model::PreferenceProfile;
    use crate::protocols::{enumerate_paths, run, RunMode, RunOutput};

    fn profile(rows: &[&[usize]]) -> PreferenceProfile {
        let rows: Vec<Vec<usize>> = rows.iter().map(|r| r.to_vec()).collect();
        PreferenceProfile::from_one_based(&rows).unwrap()
    }

    /// Two head-to-head blocks; the instance where the eating mechanism and
    /// the round protocol genuinely differ.
    fn contested() -> PreferenceProfile {
        profile(&[
            &[1, 3, 2, 4],
            &[1, 4, 2, 3],
            &[2, 3, 1, 4],
            &[2, 4, 1, 3],
        ])
    }

    fn truthful_instance() -> PreferenceProfile {
        profile(&[
            &[1, 2, 3, 4],
            &[1, 2, 3, 4],
            &[2, 3, 4, 1],
            &[2, 3, 4, 1],
        ])
    }

    #[test]
    fn point_mass_for_a_single_player() {
        let profile = profile(&[&[1]]);
        for kind in [ProtocolKind::PreferencePriority, ProtocolKind::OnlinePsVar] {
            let dist =
                exact_distribution(kind, &profile, &AdversaryStrategy::honest(), DEFAULT_BUDGET)
                    .unwrap();
            assert_eq!(dist.support_size(), 1);
            let (assignment, weight) = dist.outcomes().next().unwrap();
            assert_eq!(assignment.to_one_based(), vec![1]);
            assert_eq!(weight, &rational::one());
        }
    }

    #[test]
    fn memoized_distribution_matches_plain_path_enumeration() {
        let profile = contested();
        let aborts = AdversaryStrategy::scripted_failstop(
            [PlayerId(2)],
            vec![ScriptEntry { players: [PlayerId(2)].into(), trigger: Trigger::always() }],
        );
        for kind in [
            ProtocolKind::PreferencePriority,
            ProtocolKind::NaivePreferencePriority,
            ProtocolKind::OnlinePsVar,
            ProtocolKind::OnlinePs,
        ] {
            for strategy in [AdversaryStrategy::honest(), aborts.clone()] {
                let dist = exact_distribution(kind, &profile, &strategy, DEFAULT_BUDGET).unwrap();
                let root = process(kind, &profile, &strategy, false).unwrap();
                let (paths, _) = enumerate_paths(&root, &strategy, DEFAULT_BUDGET).unwrap();
                let mut merged: BTreeMap<Assignment, Rational> = BTreeMap::new();
                for (a, q) in paths {
                    *merged.entry(a).or_insert_with(rational::zero) += q;
                }
                let support: BTreeMap<Assignment, Rational> =
                    dist.outcomes().map(|(a, q)| (a.clone(), q.clone())).collect();
                assert_eq!(support, merged, "{} under {:?}", kind.as_str(), strategy.rule);
            }
        }
    }

    #[test]
    fn focused_rows_match_full_distribution_rows() {
        let profile = contested();
        let aborts = AdversaryStrategy::scripted_failstop(
            [PlayerId(1), PlayerId(3)],
            vec![ScriptEntry {
                players: [PlayerId(1), PlayerId(3)].into(),
                trigger: Trigger::always(),
            }],
        );
        for kind in [
            ProtocolKind::PreferencePriority,
            ProtocolKind::NaivePreferencePriority,
            ProtocolKind::OnlinePsVar,
            ProtocolKind::OnlinePs,
        ] {
            for strategy in [AdversaryStrategy::honest(), aborts.clone()] {
                let dist = exact_distribution(kind, &profile, &strategy, DEFAULT_BUDGET).unwrap();
                for p in profile.players() {
                    let (row, _) = exact_row(kind, &profile, &strategy, p, DEFAULT_BUDGET).unwrap();
                    assert_eq!(row, dist.row(p), "{} row of {p}", kind.as_str());
                }
            }
        }
    }

    #[test]
    fn focused_rows_agree_with_sampling_support() {
        // Cheap smoke check that the sampled trajectories land inside the
        // exact support (law equality is the job of the exact tests).
        let profile = contested();
        let strategy = AdversaryStrategy::honest();
        let dist = exact_distribution(
            ProtocolKind::OnlinePsVar,
            &profile,
            &strategy,
            DEFAULT_BUDGET,
        )
        .unwrap();
        for seed in 0..20 {
            let out = run(
                ProtocolKind::OnlinePsVar,
                &profile,
                &strategy,
                RunMode::Sample { seed },
            )
            .unwrap();
            let RunOutput::Sampled { assignment, .. } = out else { panic!("sampled mode") };
            assert!(dist.probability(&assignment) > rational::zero());
        }
    }

    #[test]
    fn worst_case_with_no_adversary_is_the_honest_profile_of_prefixes() {
        let profile = contested();
        let honest = AdversaryStrategy::honest();
        for kind in [ProtocolKind::PreferencePriority, ProtocolKind::OnlinePsVar] {
            let root = process(kind, &profile, &honest, false).unwrap();
            for p in profile.players() {
                let worst =
                    worst_case_prefixes(&root, profile.order(p), p, DEFAULT_BUDGET).unwrap();
                let (row, _) = exact_row(kind, &profile, &honest, p, DEFAULT_BUDGET).unwrap();
                let ordered: Vec<Rational> =
                    profile.order(p).iter().map(|j| row[j.0].clone()).collect();
                assert_eq!(worst.prefix_minima, rational::prefix_sums(&ordered));
            }
        }
    }

    #[test]
    fn worst_case_equals_minimum_over_enumerated_failstop_strategies() {
        let profile = profile(&[&[1, 2, 3], &[1, 2, 3], &[1, 3, 2]]);
        let corrupted = [PlayerId(2)];
        let passive = AdversaryStrategy::scripted_failstop(corrupted, vec![]);
        let root = process(ProtocolKind::PreferencePriority, &profile, &passive, false).unwrap();
        let points = reachable_abort_points(&root, DEFAULT_BUDGET).unwrap();
        assert!(!points.is_empty());

        let focus = PlayerId(0);
        let mut best: Option<Vec<Rational>> = None;
        for strategy in
            crate::adversary::enumerate_failstop_strategies(corrupted, points, 20).unwrap()
        {
            let (row, _) = exact_row(
                ProtocolKind::PreferencePriority,
                &profile,
                &strategy,
                focus,
                DEFAULT_BUDGET,
            )
            .unwrap();
            let ordered: Vec<Rational> =
                profile.order(focus).iter().map(|j| row[j.0].clone()).collect();
            let prefixes = rational::prefix_sums(&ordered);
            best = Some(match best {
                None => prefixes,
                Some(acc) => acc
                    .into_iter()
                    .zip(prefixes)
                    .map(|(a, b)| if a <= b { a } else { b })
                    .collect(),
            });
        }

        let worst = worst_case_prefixes(&root, profile.order(focus), focus, DEFAULT_BUDGET).unwrap();
        assert_eq!(worst.prefix_minima, best.unwrap());
    }

    #[test]
    fn ownership_is_zero_at_the_start_and_one_at_the_end_of_honest_runs() {
        let profile = truthful_instance();
        let honest = AdversaryStrategy::honest();
        for kind in [ProtocolKind::OnlinePsVar, ProtocolKind::OnlinePs] {
            for p in profile.players() {
                let zero = claimed_ownership_prob(
                    kind,
                    &profile,
                    &honest,
                    p,
                    &rational::zero(),
                    DEFAULT_BUDGET,
                )
                .unwrap();
                assert_eq!(zero, rational::zero());
                let one = claimed_ownership_prob(
                    kind,
                    &profile,
                    &honest,
                    p,
                    &rational::one(),
                    DEFAULT_BUDGET,
                )
                .unwrap();
                match kind {
                    // Varying rates finish at time one on the nose.
                    ProtocolKind::OnlinePsVar => assert_eq!(one, rational::one()),
                    // Fixed rates run late: on this profile a player is
                    // assigned by time one only by winning its first or
                    // second race (1/2 + 1/2 * 1/2); the last loser is
                    // still eating the final item.
                    _ => assert_eq!(one, rational::ratio(3, 4)),
                }
            }
        }
    }

    #[test]
    fn ownership_grows_linearly_from_the_start_under_varying_rates() {
        let honest = AdversaryStrategy::honest();
        for profile in [truthful_instance(), contested()] {
            for p in profile.players() {
                for t in [
                    rational::ratio(1, 5),
                    rational::ratio(1, 3),
                    rational::ratio(1, 2),
                    rational::ratio(5, 8),
                    rational::ratio(9, 10),
                ] {
                    let claimed = claimed_ownership_prob(
                        ProtocolKind::OnlinePsVar,
                        &profile,
                        &honest,
                        p,
                        &t,
                        DEFAULT_BUDGET,
                    )
                    .unwrap();
                    assert_eq!(claimed, t, "player {p} at {}", rational::format_exact(&t));
                }
            }
        }
    }

    #[test]
    fn ownership_restarts_linearly_after_a_tournament_under_varying_rates() {
        // Walk honest branches up to the instant after the time-1/2
        // tournaments have all resolved, then check the claimed share climbs
        // as (t - 1/2)/(1 - 1/2) on every branch where the focus player is
        // still eating.
        let profile = truthful_instance();
        let honest = AdversaryStrategy::honest();
        let root = match process(ProtocolKind::OnlinePsVar, &profile, &honest, false).unwrap() {
            ProtocolState::Online(state) => state,
            ProtocolState::Pp(_) => unreachable!(),
        };
        let t0 = rational::ratio(1, 2);
        let focus = PlayerId(0);

        let mut settled = Vec::new();
        let mut stack = vec![root];
        while let Some(state) = stack.pop() {
            if state.time() == &t0 && !state.has_instant_work() {
                settled.push(state);
                continue;
            }
            match state.instant_step() {
                InstantStep::Done(_) => panic!("runs last past the first tournaments"),
                InstantStep::Progress(s) => stack.push(s),
                InstantStep::Chance(branches) => {
                    stack.extend(branches.into_iter().map(|(_, s)| s));
                }
                InstantStep::Decision(..) => panic!("honest runs have no decisions"),
            }
        }

        assert!(!settled.is_empty());
        let mut eating_branches = 0;
        for state in settled {
            if state.assigned_item(focus).is_some() {
                continue;
            }
            eating_branches += 1;
            for t in [rational::ratio(5, 8), rational::ratio(3, 4), rational::one()] {
                let claimed =
                    claimed_ownership_from(&state, &honest, focus, &t, DEFAULT_BUDGET).unwrap();
                let expected = (&t - &t0) / (rational::one() - &t0);
                assert_eq!(claimed, expected, "at {}", rational::format_exact(&t));
            }
        }
        assert!(eating_branches > 0);
    }

    #[test]
    fn fixed_rates_fall_behind_the_ownership_line() {
        // Five players, three of whom race for the first item: at the
        // moment it exhausts, a fixed-rate survivor has banked strictly
        // less than the elapsed time.
        let profile = profile(&[
            &[1, 2, 3, 4, 5],
            &[1, 2, 3, 4, 5],
            &[1, 2, 3, 4, 5],
            &[2, 1, 3, 4, 5],
            &[2, 1, 3, 4, 5],
        ]);
        let honest = AdversaryStrategy::honest();
        let t = rational::ratio(5, 12);
        let claimed = claimed_ownership_prob(
            ProtocolKind::OnlinePs,
            &profile,
            &honest,
            PlayerId(0),
            &t,
            DEFAULT_BUDGET,
        )
        .unwrap();
        assert_eq!(claimed, rational::ratio(7, 18));
        assert!(claimed < t);
    }

    #[test]
    fn ownership_rejects_round_protocols_and_bad_times() {
        let profile = truthful_instance();
        let honest = AdversaryStrategy::honest();
        let err = claimed_ownership_prob(
            ProtocolKind::PreferencePriority,
            &profile,
            &honest,
            PlayerId(0),
            &rational::ratio(1, 2),
            DEFAULT_BUDGET,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
        let err = claimed_ownership_prob(
            ProtocolKind::OnlinePsVar,
            &profile,
            &honest,
            PlayerId(0),
            &rational::ratio(3, 2),
            DEFAULT_BUDGET,
        )
        .unwrap_err();
        assert!(matches!(err, Error::InvalidInput(_)));
    }

    #[test]
    fn execution_tree_counts_leaves_like_path_enumeration() {
        let profile = contested();
        let strategy = AdversaryStrategy::honest();
        let root = process(ProtocolKind::PreferencePriority, &profile, &strategy, false).unwrap();
        let tree = execution_tree(&root, DecisionScope::Every, DEFAULT_BUDGET).unwrap();
        let (paths, _) = enumerate_paths(&root, &strategy, DEFAULT_BUDGET).unwrap();
        assert_eq!(tree.leaf_count(), paths.len() as u64);
        assert!(tree.node_count() > tree.leaf_count());
        assert!(tree.depth() > 0);
    }

    #[test]
    fn tight_budgets_error_out_with_counts() {
        let profile = contested();
        let strategy = AdversaryStrategy::honest();
        let err =
            exact_distribution(ProtocolKind::OnlinePsVar, &profile, &strategy, 3).unwrap_err();
        match err {
            Error::Budget { nodes, budget } => {
                assert_eq!(budget, 3);
                assert!(nodes > budget);
            }
            other => panic!("expected a budget error, got {other:?}"),
        }
    }

    #[test]
    fn abort_points_cover_exactly_the_corrupted_participants() {
        let profile = profile(&[&[1, 2, 3], &[1, 2, 3], &[1, 3, 2]]);
        let strategy = AdversaryStrategy::scripted_failstop([PlayerId(2)], vec![]);
        let root = process(ProtocolKind::PreferencePriority, &profile, &strategy, false).unwrap();
        let points = reachable_abort_points(&root, DEFAULT_BUDGET).unwrap();
        assert!(!points.is_empty());
        assert!(points.iter().all(|pt| pt.player == PlayerId(2)));
        assert!(points.iter().all(|pt| pt.duel.involves(PlayerId(2))));
    }

    #[test]
    fn relabeling_items_commutes_with_exact_distributions() {
        // The protocols never look at item indices except through the
        // declared orders and ascending tie-breaks, and those tie-breaks
        // relabel along: commuting with a relabeling is what lets sweeps
        // pin one player's order to the identity.
        let profile = contested();
        let perm: Vec<ItemId> = [2usize, 0, 3, 1].into_iter().map(ItemId).collect();
        let relabeled = profile.relabel_items(&perm).unwrap();
        let strategy = AdversaryStrategy::scripted_failstop(
            [PlayerId(3)],
            vec![ScriptEntry { players: [PlayerId(3)].into(), trigger: Trigger::in_round(1) }],
        );
        assert_eq!(strategy.context.model, AdvModel::FailStop);
        for kind in [ProtocolKind::PreferencePriority, ProtocolKind::OnlinePsVar] {
            let base = exact_distribution(kind, &profile, &strategy, DEFAULT_BUDGET).unwrap();
            let moved = exact_distribution(kind, &relabeled, &strategy, DEFAULT_BUDGET).unwrap();
            for (assignment, weight) in base.outcomes() {
                let mapped = Assignment::new(
                    (0..assignment.n())
                        .map(|p| perm[assignment.item_of(PlayerId(p)).0])
                        .collect(),
                )
                .unwrap();
                assert_eq!(&moved.probability(&mapped), weight, "{}", kind.as_str());
            }
        }
    }
}
