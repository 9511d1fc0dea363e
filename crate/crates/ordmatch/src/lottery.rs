//! Weighted duel lotteries: the distributed primitive that picks one winner
//! among candidates with prescribed exact probabilities.
//!
//! A **duel** between two sides carrying integer weights `k1 : k2` works on
//! the ring `Z_k`, `k = k1 + k2`: each side commits a uniformly random
//! residue, both open, and side one wins iff the sum lands in `{0, ..,
//! k1-1}`. A side that refuses to finish (aborts) loses the duel, is
//! *detected*, and the other side wins; if both abort, the lower-indexed
//! player wins by default (and both are detected).
//!
//! A **tournament** runs the candidates through a left-deep bracket in the
//! order given: the first two duel at odds `w1 : w2`, the standing winner
//! then meets candidate `i+1` at odds `(w1 + .. + wi) : w(i+1)`. Under
//! honest play every candidate wins with probability exactly `w_i / Σw`,
//! independent of the bracket order. The odds of each bracket position are
//! fixed up front, so an abort forfeits that duel but never changes the
//! arithmetic of later ones — this is what keeps honest win probabilities
//! from dropping below their target under any fail-stop behavior.
//!
//! Besides the winner, a tournament reports **survivors** (candidates that
//! lost some duel cleanly) and **detected** players (those that aborted);
//! the eating protocols treat the two very differently.
//!
//! [`TournamentRun`] is a small step machine that exposes every chance node
//! (duel outcome) and every adversary decision node (abort choices, and —
//! when both duelists are corrupted under the Byzantine model and the caller
//! asks for it — outright winner dictation). The exact-enumeration and
//! worst-case engines in [`crate::analysis`] drive it; [`outcome_distribution`]
//! is the standalone driver for a fixed strategy.

use std::collections::BTreeSet;
use std::rc::Rc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed};

use crate::adversary::{
    AdvContext, AdvModel, AdversaryStrategy, DecisionStamp, DuelAction, DuelPoint,
};
use crate::model::{ItemId, PlayerId};
use crate::rational::{self, Rational};
use crate::{Error, Result};

/// Candidates and their positive integer weights, in bracket order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct TournamentSpec {
    candidates: Vec<PlayerId>,
    weights: Vec<BigInt>,
}

impl TournamentSpec {
    pub fn new(candidates: Vec<PlayerId>, weights: Vec<BigInt>) -> Result<Self> {
        if candidates.is_empty() {
            return Err(Error::InvalidInput("tournament with no candidates".into()));
        }
        if candidates.len() != weights.len() {
            return Err(Error::Dimension(format!(
                "{} candidates but {} weights",
                candidates.len(),
                weights.len()
            )));
        }
        if let Some(pos) = weights.iter().position(|w| !w.is_positive()) {
            return Err(Error::InvalidInput(format!(
                "nonpositive weight for candidate {}",
                candidates[pos]
            )));
        }
        let distinct: BTreeSet<_> = candidates.iter().collect();
        if distinct.len() != candidates.len() {
            return Err(Error::InvalidInput("repeated candidate in tournament".into()));
        }
        Ok(Self { candidates, weights })
    }

    /// Equal weights for every candidate.
    pub fn uniform(candidates: Vec<PlayerId>) -> Result<Self> {
        let weights = vec![BigInt::one(); candidates.len()];
        Self::new(candidates, weights)
    }

    /// Integer weights proportional to the given rational fractions.
    /// Candidates with a zero fraction are excluded from the tournament
    /// entirely (they neither win nor survive nor get detected).
    pub fn from_fractions(entries: &[(PlayerId, Rational)]) -> Result<Self> {
        if let Some((p, _)) = entries.iter().find(|(_, f)| f < &rational::zero()) {
            return Err(Error::InvalidInput(format!("negative fraction for candidate {p}")));
        }
        let positive: Vec<&(PlayerId, Rational)> =
            entries.iter().filter(|(_, f)| f > &rational::zero()).collect();
        if positive.is_empty() {
            return Err(Error::InvalidInput("no candidate with positive fraction".into()));
        }
        let scale = positive
            .iter()
            .fold(BigInt::one(), |acc, (_, f)| acc.lcm(f.denom()));
        let (candidates, weights) = positive
            .into_iter()
            .map(|(p, f)| {
                let weight = (f * Rational::from_integer(scale.clone())).to_integer();
                (*p, weight)
            })
            .unzip();
        Self::new(candidates, weights)
    }

    pub fn candidates(&self) -> &[PlayerId] {
        &self.candidates
    }

    pub fn weights(&self) -> &[BigInt] {
        &self.weights
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        false // a spec always has at least one candidate
    }

    pub fn total_weight(&self) -> BigInt {
        self.weights.iter().sum()
    }

    /// The probability the lottery is meant to give candidate `p`:
    /// `w_p / Σw`, or zero for non-candidates.
    pub fn target_probability(&self, p: PlayerId) -> Rational {
        match self.candidates.iter().position(|&c| c == p) {
            Some(idx) => Rational::new(self.weights[idx].clone(), self.total_weight()),
            None => rational::zero(),
        }
    }
}

/// Where a tournament runs: its protocol stamp and the item at stake.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct TournamentCtx {
    pub stamp: DecisionStamp,
    pub item: Option<ItemId>,
}

impl TournamentCtx {
    /// Context for a standalone lottery outside any protocol.
    pub fn standalone() -> Self {
        Self { stamp: DecisionStamp::Round(1), item: None }
    }
}

/// Final result of one tournament.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TournamentOutcome {
    pub winner: PlayerId,
    /// Candidates that lost some duel cleanly, in detection-free standing.
    pub survivors: BTreeSet<PlayerId>,
    /// Candidates that aborted. Disjoint from `survivors`; contains the
    /// winner only in the corner case where every remaining duelist aborted
    /// and the default-winner rule promoted an aborted player.
    pub detected: BTreeSet<PlayerId>,
}

impl TournamentOutcome {
    pub fn winner_detected(&self) -> bool {
        self.detected.contains(&self.winner)
    }
}

/// One pending step of a tournament.
#[derive(Clone, Debug)]
pub enum TournamentStep {
    /// A duel's honest outcome is drawn; probabilities sum to one.
    Chance(Vec<(Rational, TournamentRun)>),
    /// The adversary chooses among the listed actions.
    Decision(DuelPoint, Vec<(DuelAction, TournamentRun)>),
    Done(TournamentOutcome),
}

/// A tournament in progress. Cheap to clone; every branch of the chance and
/// decision trees gets its own copy.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct TournamentRun {
    spec: Rc<TournamentSpec>,
    ctx: TournamentCtx,
    adv: Rc<AdvContext>,
    /// Whether decision nodes include Byzantine winner dictation for duels
    /// between two corrupted players. Worst-case engines turn this on;
    /// scripted evaluation leaves it off (scripts only describe aborts).
    explore_dictation: bool,
    leader: PlayerId,
    /// Sum of the weights of everyone who has entered the bracket so far.
    acc_weight: BigInt,
    /// Index into `candidates` of the next challenger.
    next: usize,
    duel_index: u32,
    survivors: BTreeSet<PlayerId>,
    detected: BTreeSet<PlayerId>,
    /// Players that have aborted; they are forced to abort any later duel.
    aborted: BTreeSet<PlayerId>,
    /// Set between a duel's chance node and its abort decision node.
    pending_nominal: Option<PlayerId>,
}

impl TournamentRun {
    pub fn new(spec: TournamentSpec, ctx: TournamentCtx, adv: Rc<AdvContext>) -> Self {
        let leader = spec.candidates[0];
        let acc_weight = spec.weights[0].clone();
        Self {
            spec: Rc::new(spec),
            ctx,
            adv,
            explore_dictation: false,
            leader,
            acc_weight,
            next: 1,
            duel_index: 0,
            survivors: BTreeSet::new(),
            detected: BTreeSet::new(),
            aborted: BTreeSet::new(),
            pending_nominal: None,
        }
    }

    /// Enables Byzantine winner dictation at both-corrupted duels.
    pub fn with_dictation(mut self) -> Self {
        self.explore_dictation = true;
        self
    }

    pub fn spec(&self) -> &TournamentSpec {
        &self.spec
    }

    pub fn ctx(&self) -> &TournamentCtx {
        &self.ctx
    }

    /// Serializes the run for protocol memo keys (bracket contents plus all
    /// progress fields; the adversary context is fixed per enumeration and
    /// omitted).
    pub(crate) fn encode(&self, out: &mut Vec<u8>) {
        let mut enc = crate::protocols::KeyEnc::new(out);
        enc.usize(self.spec.candidates.len());
        for (p, w) in self.spec.candidates.iter().zip(&self.spec.weights) {
            enc.usize(p.0);
            enc.bigint(w);
        }
        enc.usize(self.leader.0);
        enc.bigint(&self.acc_weight);
        enc.usize(self.next);
        enc.usize(self.duel_index as usize);
        for (tag, set) in [(1u8, &self.survivors), (2, &self.detected), (3, &self.aborted)] {
            enc.tag(tag);
            enc.usize(set.len());
            for p in set {
                enc.usize(p.0);
            }
        }
        match self.pending_nominal {
            None => enc.tag(0),
            Some(p) => {
                enc.tag(1);
                enc.usize(p.0);
            }
        }
    }

    fn challenger(&self) -> PlayerId {
        self.spec.candidates[self.next]
    }

    fn duel_point(&self) -> DuelPoint {
        DuelPoint::new(
            self.ctx.stamp.clone(),
            self.ctx.item,
            self.leader,
            self.challenger(),
            self.duel_index,
        )
    }

    /// Corrupted duelists that already aborted earlier (they must abort).
    fn forced(&self) -> BTreeSet<PlayerId> {
        [self.leader, self.challenger()]
            .into_iter()
            .filter(|p| self.aborted.contains(p))
            .collect()
    }

    /// Corrupted duelists still free to choose.
    fn voluntary(&self) -> BTreeSet<PlayerId> {
        [self.leader, self.challenger()]
            .into_iter()
            .filter(|&p| self.adv.is_corrupted(p) && !self.aborted.contains(&p))
            .collect()
    }

    /// Applies one resolved duel and advances the bracket.
    fn apply(&self, nominal: Option<PlayerId>, action: &DuelAction) -> Self {
        let mut run = self.clone();
        let leader = self.leader;
        let challenger = self.challenger();
        let other = |p: PlayerId| if p == leader { challenger } else { leader };

        let winner = match action {
            DuelAction::Aborts(chosen) => {
                let mut aborts = self.forced();
                aborts.extend(chosen.iter().copied());
                match aborts.len() {
                    0 => {
                        let winner = nominal.expect("clean duel needs a drawn outcome");
                        run.survivors.insert(other(winner));
                        winner
                    }
                    1 => {
                        let quitter = *aborts.iter().next().unwrap();
                        run.detected.insert(quitter);
                        run.aborted.insert(quitter);
                        other(quitter)
                    }
                    _ => {
                        // Both abort: the lower index wins by default and
                        // both are detected. The default winner stays in the
                        // aborted set, so it is forced to abort again later.
                        run.detected.extend([leader, challenger]);
                        run.aborted.extend([leader, challenger]);
                        leader.min(challenger)
                    }
                }
            }
            DuelAction::FixWinner(winner) => {
                run.survivors.insert(other(*winner));
                *winner
            }
            DuelAction::FixWinnerLoserAborts(winner) => {
                let loser = other(*winner);
                run.detected.insert(loser);
                run.aborted.insert(loser);
                *winner
            }
        };
        // The defaulted winner of a double abort may win the tournament
        // while detected; a later clean loss must not leave it in
        // `survivors` — it cannot lose cleanly because it is forced to
        // abort, so no extra bookkeeping is needed here.
        run.survivors.remove(&winner);
        run.leader = winner;
        run.acc_weight += &self.spec.weights[self.next];
        run.next += 1;
        run.duel_index += 1;
        run.pending_nominal = None;
        run
    }

    /// The next chance node, decision node, or final outcome.
    pub fn step(&self) -> TournamentStep {
        let mut run = self.clone();
        loop {
            if run.next >= run.spec.len() {
                return TournamentStep::Done(TournamentOutcome {
                    winner: run.leader,
                    survivors: run.survivors,
                    detected: run.detected,
                });
            }
            let point = run.duel_point();
            let forced = run.forced();
            let voluntary = run.voluntary();

            if let Some(nominal) = run.pending_nominal {
                return TournamentStep::Decision(
                    point,
                    abort_subsets(&voluntary)
                        .into_iter()
                        .map(|set| {
                            let child = run.apply(Some(nominal), &DuelAction::Aborts(set.clone()));
                            (DuelAction::Aborts(set), child)
                        })
                        .collect(),
                );
            }

            let both_dictated = run.explore_dictation
                && run.adv.model == AdvModel::Byzantine
                && forced.is_empty()
                && voluntary.len() == 2;
            if both_dictated {
                let (a, b) = (point.pair.0, point.pair.1);
                let actions = vec![
                    DuelAction::FixWinner(a),
                    DuelAction::FixWinner(b),
                    DuelAction::FixWinnerLoserAborts(a),
                    DuelAction::FixWinnerLoserAborts(b),
                    DuelAction::Aborts([a, b].into()),
                ];
                return TournamentStep::Decision(
                    point,
                    actions
                        .into_iter()
                        .map(|action| {
                            let child = run.apply(None, &action);
                            (action, child)
                        })
                        .collect(),
                );
            }

            if !forced.is_empty() {
                // The outcome no longer depends on the drawn residues.
                if voluntary.is_empty() {
                    run = run.apply(None, &DuelAction::play_on());
                    continue;
                }
                return TournamentStep::Decision(
                    point,
                    abort_subsets(&voluntary)
                        .into_iter()
                        .map(|set| {
                            let child = run.apply(None, &DuelAction::Aborts(set.clone()));
                            (DuelAction::Aborts(set), child)
                        })
                        .collect(),
                );
            }

            let total = &run.acc_weight + &run.spec.weights[run.next];
            let p_leader = Rational::new(run.acc_weight.clone(), total.clone());
            let p_challenger = Rational::new(run.spec.weights[run.next].clone(), total);
            let branches = [(p_leader, run.leader), (p_challenger, run.challenger())];
            if voluntary.is_empty() {
                return TournamentStep::Chance(
                    branches
                        .into_iter()
                        .map(|(prob, nominal)| {
                            (prob, run.apply(Some(nominal), &DuelAction::play_on()))
                        })
                        .collect(),
                );
            }
            return TournamentStep::Chance(
                branches
                    .into_iter()
                    .map(|(prob, nominal)| {
                        let mut child = run.clone();
                        child.pending_nominal = Some(nominal);
                        (prob, child)
                    })
                    .collect(),
            );
        }
    }
}

/// All subsets of a (tiny) voluntary-aborter set, empty set first.
fn abort_subsets(voluntary: &BTreeSet<PlayerId>) -> Vec<BTreeSet<PlayerId>> {
    let players: Vec<PlayerId> = voluntary.iter().copied().collect();
    (0..1usize << players.len())
        .map(|mask| {
            players
                .iter()
                .enumerate()
                .filter(|(bit, _)| mask >> bit & 1 == 1)
                .map(|(_, &p)| p)
                .collect()
        })
        .collect()
}

/// The corrupted players free to abort at a decision node, recovered from
/// its action menu (the largest offered abort set).
pub fn eligible_aborters<S>(menu: &[(DuelAction, S)]) -> BTreeSet<PlayerId> {
    menu.iter()
        .filter_map(|(action, _)| match action {
            DuelAction::Aborts(set) => Some(set),
            _ => None,
        })
        .fold(BTreeSet::new(), |mut acc, set| {
            acc.extend(set.iter().copied());
            acc
        })
}

/// Exact outcome distribution of one tournament under a fixed strategy.
///
/// Scripted strategies only describe aborts, so Byzantine winner dictation
/// is not explored here; a Byzantine scripted strategy behaves like the
/// fail-stop strategy with the same script (plus any misdeclared
/// preferences, which do not matter at the lottery level).
pub fn outcome_distribution(
    spec: &TournamentSpec,
    ctx: &TournamentCtx,
    strategy: &AdversaryStrategy,
) -> Vec<(Rational, TournamentOutcome)> {
    let run = TournamentRun::new(spec.clone(), ctx.clone(), Rc::new(strategy.context.clone()));
    let mut leaves = Vec::new();
    collect_outcomes(&run, strategy, rational::one(), &mut leaves);
    leaves
}

fn collect_outcomes(
    run: &TournamentRun,
    strategy: &AdversaryStrategy,
    prob: Rational,
    out: &mut Vec<(Rational, TournamentOutcome)>,
) {
    match run.step() {
        TournamentStep::Done(outcome) => out.push((prob, outcome)),
        TournamentStep::Chance(branches) => {
            for (p, child) in branches {
                collect_outcomes(&child, strategy, &prob * p, out);
            }
        }
        TournamentStep::Decision(point, menu) => {
            let eligible = eligible_aborters(&menu);
            let chosen = strategy.abort_set(&point, &eligible);
            let (_, child) = menu
                .iter()
                .find(|(action, _)| action == &DuelAction::Aborts(chosen.clone()))
                .expect("abort menu contains every subset of eligible aborters");
            collect_outcomes(child, strategy, prob, out);
        }
    }
}

/// Winner marginals of one tournament under a fixed strategy.
pub fn winner_distribution(
    spec: &TournamentSpec,
    ctx: &TournamentCtx,
    strategy: &AdversaryStrategy,
) -> Vec<(PlayerId, Rational)> {
    let mut per_winner: Vec<(PlayerId, Rational)> =
        spec.candidates().iter().map(|&c| (c, rational::zero())).collect();
    for (prob, outcome) in outcome_distribution(spec, ctx, strategy) {
        let slot = per_winner
            .iter_mut()
            .find(|(c, _)| *c == outcome.winner)
            .expect("winner is a candidate");
        slot.1 += prob;
    }
    per_winner
}

/// `P[p wins]` under honest play: exactly `w_p / Σw`.
pub fn honest_win_probability(spec: &TournamentSpec, p: PlayerId) -> Rational {
    winner_distribution(spec, &TournamentCtx::standalone(), &AdversaryStrategy::honest())
        .into_iter()
        .find(|(c, _)| *c == p)
        .map(|(_, prob)| prob)
        .unwrap_or_else(rational::zero)
}

// ---------------------------------------------------------------------------
// Ring-level replay: explicit residues instead of chance nodes.
// ---------------------------------------------------------------------------

/// Duel on the ring `Z_(k1+k2)` with the residue sum `e`: side one wins iff
/// `e mod (k1+k2) < k1`.
pub fn duel_first_wins(k1: &BigInt, k2: &BigInt, e: &BigInt) -> bool {
    let k = k1 + k2;
    e.mod_floor(&k) < *k1
}

/// Ring sizes of each bracket position: position `i` runs on
/// `Z_(w1+..+w(i+1) + w(i+2))`.
pub fn ring_sizes(spec: &TournamentSpec) -> Vec<BigInt> {
    let mut acc = spec.weights[0].clone();
    spec.weights[1..]
        .iter()
        .map(|w| {
            let k = &acc + w;
            acc += w;
            k
        })
        .collect()
}

/// Replays a tournament deterministically from a tape of residue sums, one
/// per bracket position, resolving aborts through `abort_rule` (which sees
/// each duel and the corrupted participants still able to abort).
///
/// Fixing the tape couples an honest run with any adversarial run: duel
/// position `i` is won toward the leader side iff `tape[i] <
/// w1 + .. + w(i+1)`, a predicate that does not depend on who the leader is.
pub fn replay_with_tape(
    spec: &TournamentSpec,
    ctx: &TournamentCtx,
    adv: &AdvContext,
    tape: &[BigInt],
    abort_rule: &dyn Fn(&DuelPoint, &BTreeSet<PlayerId>) -> BTreeSet<PlayerId>,
) -> TournamentOutcome {
    assert_eq!(tape.len(), spec.len() - 1, "one residue per bracket position");
    let mut leader = spec.candidates[0];
    let mut acc = spec.weights[0].clone();
    let mut survivors = BTreeSet::new();
    let mut detected = BTreeSet::new();
    let mut aborted: BTreeSet<PlayerId> = BTreeSet::new();
    for (pos, challenger) in spec.candidates[1..].iter().copied().enumerate() {
        let point = DuelPoint::new(ctx.stamp.clone(), ctx.item, leader, challenger, pos as u32);
        let mut aborts: BTreeSet<PlayerId> = [leader, challenger]
            .into_iter()
            .filter(|p| aborted.contains(p))
            .collect();
        let voluntary: BTreeSet<PlayerId> = [leader, challenger]
            .into_iter()
            .filter(|&p| adv.is_corrupted(p) && !aborted.contains(&p))
            .collect();
        aborts.extend(abort_rule(&point, &voluntary));
        let winner = match aborts.len() {
            0 => {
                let w = &spec.weights[pos + 1];
                let leader_wins = duel_first_wins(&acc, w, &tape[pos]);
                let winner = if leader_wins { leader } else { challenger };
                let loser = if leader_wins { challenger } else { leader };
                survivors.insert(loser);
                winner
            }
            1 => {
                let quitter = *aborts.iter().next().unwrap();
                detected.insert(quitter);
                aborted.insert(quitter);
                if quitter == leader {
                    challenger
                } else {
                    leader
                }
            }
            _ => {
                detected.extend([leader, challenger]);
                aborted.extend([leader, challenger]);
                leader.min(challenger)
            }
        };
        survivors.remove(&winner);
        acc += &spec.weights[pos + 1];
        leader = winner;
    }
    TournamentOutcome { winner: leader, survivors, detected }
}

/// All residue tapes for a spec: the cartesian product of `Z_k` over the
/// bracket's ring sizes. Only sensible for small total weight.
pub fn all_tapes(spec: &TournamentSpec) -> Vec<Vec<BigInt>> {
    let sizes = ring_sizes(spec);
    let mut tapes = vec![Vec::new()];
    for k in sizes {
        let limit = u64::try_from(&k).expect("tape enumeration needs small weights");
        tapes = tapes
            .into_iter()
            .flat_map(|tape| {
                (0..limit).map(move |e| {
                    let mut next = tape.clone();
                    next.push(BigInt::from(e));
                    next
                })
            })
            .collect();
    }
    tapes
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::adversary::{ScriptEntry, Trigger};
    use crate::rational::{one, ratio, zero};

    fn players(ids: &[usize]) -> Vec<PlayerId> {
        ids.iter().map(|&i| PlayerId(i)).collect()
    }

    fn weights(ws: &[i64]) -> Vec<BigInt> {
        ws.iter().map(|&w| BigInt::from(w)).collect()
    }

    fn honest_distribution(spec: &TournamentSpec) -> Vec<(PlayerId, Rational)> {
        winner_distribution(spec, &TournamentCtx::standalone(), &AdversaryStrategy::honest())
    }

    #[test]
    fn spec_validates_inputs() {
        assert!(TournamentSpec::new(players(&[0, 1]), weights(&[1, 0])).is_err());
        assert!(TournamentSpec::new(players(&[0, 0]), weights(&[1, 1])).is_err());
        assert!(TournamentSpec::new(players(&[0]), weights(&[1, 2])).is_err());
        assert!(TournamentSpec::new(vec![], vec![]).is_err());
        let spec = TournamentSpec::new(players(&[0, 1, 2]), weights(&[1, 1, 2])).unwrap();
        assert_eq!(spec.total_weight(), BigInt::from(4));
        assert_eq!(spec.target_probability(PlayerId(2)), ratio(1, 2));
        assert_eq!(spec.target_probability(PlayerId(9)), zero());
    }

    #[test]
    fn fractions_scale_to_integer_weights_and_drop_zeros() {
        let spec = TournamentSpec::from_fractions(&[
            (PlayerId(0), ratio(5, 8)),
            (PlayerId(1), ratio(3, 16)),
            (PlayerId(2), zero()),
            (PlayerId(3), ratio(3, 16)),
        ])
        .unwrap();
        assert_eq!(spec.candidates(), &players(&[0, 1, 3])[..]);
        assert_eq!(spec.weights(), &weights(&[10, 3, 3])[..]);
        assert!(TournamentSpec::from_fractions(&[(PlayerId(0), ratio(-1, 2))]).is_err());
        assert!(TournamentSpec::from_fractions(&[(PlayerId(0), zero())]).is_err());
    }

    #[test]
    fn single_candidate_wins_by_default() {
        let spec = TournamentSpec::uniform(players(&[3])).unwrap();
        let outcomes =
            outcome_distribution(&spec, &TournamentCtx::standalone(), &AdversaryStrategy::honest());
        assert_eq!(outcomes.len(), 1);
        assert_eq!(outcomes[0].0, one());
        assert_eq!(outcomes[0].1.winner, PlayerId(3));
        assert!(outcomes[0].1.survivors.is_empty());
        assert!(outcomes[0].1.detected.is_empty());

        // A lone corrupted candidate has no duel, hence no abort opportunity.
        let strategy = AdversaryStrategy::scripted_failstop(
            [PlayerId(3)],
            vec![ScriptEntry { players: [PlayerId(3)].into(), trigger: Trigger::always() }],
        );
        let outcomes = outcome_distribution(&spec, &TournamentCtx::standalone(), &strategy);
        assert_eq!(outcomes.len(), 1);
        assert!(outcomes[0].1.detected.is_empty());
    }

    #[test]
    fn two_candidate_duel_matches_odds() {
        let spec = TournamentSpec::new(players(&[0, 1]), weights(&[1, 3])).unwrap();
        assert_eq!(honest_win_probability(&spec, PlayerId(0)), ratio(1, 4));
        assert_eq!(honest_win_probability(&spec, PlayerId(1)), ratio(3, 4));
        for (_, outcome) in
            outcome_distribution(&spec, &TournamentCtx::standalone(), &AdversaryStrategy::honest())
        {
            let loser = if outcome.winner == PlayerId(0) { PlayerId(1) } else { PlayerId(0) };
            assert_eq!(outcome.survivors, [loser].into());
            assert!(outcome.detected.is_empty());
        }
    }

    #[test]
    fn caterpillar_with_uneven_weights_hits_targets() {
        // Weights (1, 1, 2): the third candidate joins the final at odds 2:2.
        let spec = TournamentSpec::new(players(&[0, 1, 2]), weights(&[1, 1, 2])).unwrap();
        assert_eq!(honest_win_probability(&spec, PlayerId(2)), ratio(1, 2));
        let dist = honest_distribution(&spec);
        assert_eq!(dist[0].1, ratio(1, 4));
        assert_eq!(dist[1].1, ratio(1, 4));
        assert_eq!(dist[2].1, ratio(1, 2));
    }

    #[test]
    fn honest_marginals_equal_weight_shares_exhaustively() {
        // The structural law: every candidate wins with probability exactly
        // w_i / Σw, for every candidate count up to six and assorted weights.
        let weight_sets: [&[i64]; 8] = [
            &[1, 1],
            &[2, 5],
            &[1, 1, 1],
            &[3, 1, 2],
            &[1, 2, 3, 4],
            &[5, 1, 1, 2, 3],
            &[1, 1, 1, 1, 1, 1],
            &[7, 2, 5, 1, 3, 4],
        ];
        for ws in weight_sets {
            let ids: Vec<usize> = (0..ws.len()).collect();
            let spec = TournamentSpec::new(players(&ids), weights(ws)).unwrap();
            let total: i64 = ws.iter().sum();
            let dist = honest_distribution(&spec);
            let mut mass = zero();
            for (idx, (p, prob)) in dist.iter().enumerate() {
                assert_eq!(*prob, ratio(ws[idx], total), "candidate {p} off target");
                mass += prob;
            }
            assert_eq!(mass, one());
        }
    }

    #[test]
    fn honest_survivors_are_everyone_but_the_winner() {
        let spec = TournamentSpec::new(players(&[0, 1, 2, 3]), weights(&[4, 4, 1, 1])).unwrap();
        for (_, outcome) in
            outcome_distribution(&spec, &TournamentCtx::standalone(), &AdversaryStrategy::honest())
        {
            assert!(outcome.detected.is_empty());
            assert_eq!(outcome.survivors.len(), 3);
            assert!(!outcome.survivors.contains(&outcome.winner));
        }
    }

    #[test]
    fn abort_transfers_the_duel_and_detects_the_quitter() {
        // Two candidates, the second corrupted and always aborting.
        let spec = TournamentSpec::uniform(players(&[0, 1])).unwrap();
        let strategy = AdversaryStrategy::scripted_failstop(
            [PlayerId(1)],
            vec![ScriptEntry { players: [PlayerId(1)].into(), trigger: Trigger::always() }],
        );
        let outcomes = outcome_distribution(&spec, &TournamentCtx::standalone(), &strategy);
        // Both chance branches resolve identically: player 0 wins, 1 detected.
        let mut mass = zero();
        for (prob, outcome) in &outcomes {
            assert_eq!(outcome.winner, PlayerId(0));
            assert_eq!(outcome.detected, [PlayerId(1)].into());
            assert!(outcome.survivors.is_empty());
            mass += prob;
        }
        assert_eq!(mass, one());
    }

    #[test]
    fn paper_style_three_player_attack_in_final_bracket_order() {
        // Bracket order (1, 3, 2): player 3 only ever meets player 2 in the
        // final, and aborting there hands player 2 the win. Player 1 keeps
        // its 1/3; player 3's share moves entirely to player 2.
        let spec = TournamentSpec::uniform(players(&[0, 2, 1])).unwrap();
        let strategy = AdversaryStrategy::scripted_failstop(
            [PlayerId(2)],
            vec![ScriptEntry {
                players: [PlayerId(2)].into(),
                trigger: Trigger::when_dueling(PlayerId(1)),
            }],
        );
        let dist = winner_distribution(&spec, &TournamentCtx::standalone(), &strategy);
        let prob_of = |p: usize| {
            dist.iter().find(|(c, _)| *c == PlayerId(p)).map(|(_, q)| q.clone()).unwrap()
        };
        assert_eq!(prob_of(0), ratio(1, 3));
        assert_eq!(prob_of(1), ratio(2, 3));
        assert_eq!(prob_of(2), zero());
    }

    #[test]
    fn same_attack_in_ascending_bracket_order() {
        // Ascending bracket (1, 2, 3): player 3 meets player 2 only if 2
        // beats 1 first, so the attack transfers less mass.
        let spec = TournamentSpec::uniform(players(&[0, 1, 2])).unwrap();
        let strategy = AdversaryStrategy::scripted_failstop(
            [PlayerId(2)],
            vec![ScriptEntry {
                players: [PlayerId(2)].into(),
                trigger: Trigger::when_dueling(PlayerId(1)),
            }],
        );
        let dist = winner_distribution(&spec, &TournamentCtx::standalone(), &strategy);
        assert_eq!(dist[0].1, ratio(1, 3));
        assert_eq!(dist[1].1, ratio(1, 2));
        assert_eq!(dist[2].1, ratio(1, 6));
    }

    #[test]
    fn double_abort_defaults_to_lower_index_and_detects_both() {
        let spec = TournamentSpec::uniform(players(&[4, 2])).unwrap();
        let strategy = AdversaryStrategy::scripted_failstop(
            [PlayerId(2), PlayerId(4)],
            vec![ScriptEntry {
                players: [PlayerId(2), PlayerId(4)].into(),
                trigger: Trigger::always(),
            }],
        );
        let outcomes = outcome_distribution(&spec, &TournamentCtx::standalone(), &strategy);
        for (_, outcome) in &outcomes {
            assert_eq!(outcome.winner, PlayerId(2));
            assert!(outcome.winner_detected());
            assert_eq!(outcome.detected, [PlayerId(2), PlayerId(4)].into());
            assert!(outcome.survivors.is_empty());
        }
    }

    #[test]
    fn defaulted_winner_is_forced_to_abort_later() {
        // Candidates (0, 1, 2); 0 and 1 both abort their duel, so 0 wins by
        // default, then must abort against (honest) 2, who wins cleanly.
        let spec = TournamentSpec::uniform(players(&[0, 1, 2])).unwrap();
        let strategy = AdversaryStrategy::scripted_failstop(
            [PlayerId(0), PlayerId(1)],
            vec![ScriptEntry {
                players: [PlayerId(0), PlayerId(1)].into(),
                trigger: Trigger::in_round(1),
            }],
        );
        let outcomes = outcome_distribution(&spec, &TournamentCtx::standalone(), &strategy);
        // The first duel's residues are drawn before the abort decision, so
        // the chance split remains even though both branches end identically.
        let mut mass = zero();
        for (prob, outcome) in &outcomes {
            assert_eq!(outcome.winner, PlayerId(2));
            assert_eq!(outcome.detected, [PlayerId(0), PlayerId(1)].into());
            assert!(outcome.survivors.is_empty());
            mass += prob;
        }
        assert_eq!(mass, one());
    }

    #[test]
    fn honest_floor_holds_for_every_failstop_strategy() {
        // For every subset-of-abort-points strategy of a corrupted coalition,
        // every honest candidate keeps at least its target probability.
        use crate::adversary::AbortPoint;

        let spec = TournamentSpec::new(players(&[0, 1, 2]), weights(&[2, 1, 1])).unwrap();
        let ctx = TournamentCtx::standalone();
        for corrupted in [vec![1], vec![2], vec![1, 2]] {
            let corrupted: BTreeSet<PlayerId> = corrupted.into_iter().map(PlayerId).collect();
            // Collect reachable abort points by walking with every branch.
            let adv = AdvContext::new(corrupted.clone(), AdvModel::FailStop);
            let mut points: BTreeSet<AbortPoint> = BTreeSet::new();
            let run = TournamentRun::new(spec.clone(), ctx.clone(), Rc::new(adv));
            collect_points(&run, &mut points);
            let strategies = crate::adversary::enumerate_failstop_strategies(
                corrupted.clone(),
                points.into_iter().collect(),
                20,
            )
            .unwrap();
            for strategy in strategies {
                let dist = winner_distribution(&spec, &ctx, &strategy);
                for (p, prob) in dist {
                    if !corrupted.contains(&p) {
                        assert!(
                            prob >= spec.target_probability(p),
                            "honest {p} dropped below target under {:?}",
                            strategy.rule
                        );
                    }
                }
            }
        }
    }

    fn collect_points(run: &TournamentRun, out: &mut BTreeSet<crate::adversary::AbortPoint>) {
        match run.step() {
            TournamentStep::Done(_) => {}
            TournamentStep::Chance(branches) => {
                for (_, child) in branches {
                    collect_points(&child, out);
                }
            }
            TournamentStep::Decision(point, menu) => {
                for p in eligible_aborters(&menu) {
                    out.insert(crate::adversary::AbortPoint { player: p, duel: point.clone() });
                }
                for (_, child) in menu {
                    collect_points(&child, out);
                }
            }
        }
    }

    #[test]
    fn byzantine_dictation_menu_has_five_actions() {
        let spec = TournamentSpec::uniform(players(&[0, 1])).unwrap();
        let adv = AdvContext::new([PlayerId(0), PlayerId(1)], AdvModel::Byzantine);
        let run =
            TournamentRun::new(spec, TournamentCtx::standalone(), Rc::new(adv)).with_dictation();
        match run.step() {
            TournamentStep::Decision(point, menu) => {
                assert_eq!(menu.len(), 5);
                assert_eq!(point.pair, (PlayerId(0), PlayerId(1)));
                // Dictating a winner leaves the loser an undetected survivor.
                let (_, child) = menu
                    .iter()
                    .find(|(a, _)| a == &DuelAction::FixWinner(PlayerId(1)))
                    .unwrap();
                match child.step() {
                    TournamentStep::Done(outcome) => {
                        assert_eq!(outcome.winner, PlayerId(1));
                        assert_eq!(outcome.survivors, [PlayerId(0)].into());
                        assert!(outcome.detected.is_empty());
                    }
                    other => panic!("expected Done, got {other:?}"),
                }
            }
            other => panic!("expected a dictation decision, got {other:?}"),
        }
    }

    #[test]
    fn byzantine_against_honest_reduces_to_fail_stop() {
        // Ring-level check: in a duel with an honest side, every fixed
        // corrupted residue leaves the outcome distribution untouched —
        // exactly k1 of the k honest residues make side one win.
        for (k1, k2) in [(1i64, 1i64), (2, 1), (3, 5), (4, 4)] {
            let (k1, k2) = (BigInt::from(k1), BigInt::from(k2));
            let k = &k1 + &k2;
            let k_u64 = u64::try_from(&k).unwrap();
            for s2 in 0..k_u64 {
                let mut wins_for_first = 0u64;
                for s1 in 0..k_u64 {
                    let e = BigInt::from(s1) + BigInt::from(s2);
                    if duel_first_wins(&k1, &k2, &e) {
                        wins_for_first += 1;
                    }
                }
                assert_eq!(BigInt::from(wins_for_first), k1);
            }
        }
    }

    #[test]
    fn coupled_replay_only_shrinks_survivor_sets() {
        // Fix the residue tape and replay honestly and under every
        // label-based abort rule: the adversarial survivor set is always a
        // subset of the honest one, and an honest winner keeps winning.
        let spec = TournamentSpec::new(players(&[0, 1, 2]), weights(&[1, 2, 1])).unwrap();
        let ctx = TournamentCtx::standalone();
        let corrupted: BTreeSet<PlayerId> = [PlayerId(1), PlayerId(2)].into();
        let adv = AdvContext::new(corrupted.clone(), AdvModel::FailStop);
        let honest_adv = AdvContext::honest();

        for tape in all_tapes(&spec) {
            let honest =
                replay_with_tape(&spec, &ctx, &honest_adv, &tape, &|_, _| BTreeSet::new());
            // Every subset of (player, duel-index) pairs as an abort rule.
            for mask in 0..1u32 << 4 {
                let rule = move |point: &DuelPoint, eligible: &BTreeSet<PlayerId>| {
                    eligible
                        .iter()
                        .copied()
                        .filter(|p| {
                            let bit = (p.0 - 1) * 2 + point.duel_index as usize;
                            mask >> bit & 1 == 1
                        })
                        .collect()
                };
                let attacked = replay_with_tape(&spec, &ctx, &adv, &tape, &rule);
                assert!(
                    attacked.survivors.is_subset(&honest.survivors),
                    "survivors grew under attack: tape {tape:?} mask {mask:#b}"
                );
                if !corrupted.contains(&honest.winner) {
                    assert_eq!(attacked.winner, honest.winner);
                }
            }
        }
    }

    #[test]
    fn leaf_probabilities_always_sum_to_one() {
        let spec = TournamentSpec::new(players(&[0, 1, 2, 3]), weights(&[3, 1, 4, 2])).unwrap();
        let strategy = AdversaryStrategy::scripted_failstop(
            [PlayerId(1), PlayerId(3)],
            vec![ScriptEntry {
                players: [PlayerId(3)].into(),
                trigger: Trigger::when_dueling(PlayerId(0)),
            }],
        );
        let outcomes = outcome_distribution(&spec, &TournamentCtx::standalone(), &strategy);
        let mass: Rational =
            outcomes.iter().fold(zero(), |acc, (p, _)| acc + p);
        assert_eq!(mass, one());
    }
}
