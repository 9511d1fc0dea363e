//! The round-based priority protocol and its naive variant.
//!
//! In round `r`, every unmatched player whose `r`-th favorite item is still
//! available enters that item's class; each class of two or more runs an
//! augmented tournament with uniform weights, and a class of one is a
//! default winner (no duels, so no way to abort). Detected aborters are
//! eliminated and receive leftover items at the end. The naive variant
//! races for the *favorite remaining* item every round instead, which is
//! exactly what makes it manipulable by rushing adversaries.

use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::rc::Rc;

use crate::adversary::{AdvContext, DecisionStamp};
use crate::lottery::{TournamentCtx, TournamentOutcome, TournamentRun, TournamentSpec, TournamentStep};
use crate::model::{ItemId, PlayerId, PreferenceProfile};
use crate::protocols::{KeyEnc, ProcessStep, Protocol, ProtocolEvent};
use crate::rational::{self, Rational};

/// The classes of one round, in ascending item order: each still-available
/// item paired with the unmatched players that target it this round.
/// Items targeted by nobody do not appear.
pub fn round_classes(
    profile: &PreferenceProfile,
    survivors: &BTreeSet<PlayerId>,
    remaining: &BTreeSet<ItemId>,
    round: u32,
    naive: bool,
) -> Vec<(ItemId, Vec<PlayerId>)> {
    let mut classes: BTreeMap<ItemId, Vec<PlayerId>> = BTreeMap::new();
    for &p in survivors {
        let target = if naive {
            profile.favorite_among(p, remaining)
        } else {
            let j = profile.favorite(p, (round - 1) as usize);
            remaining.contains(&j).then_some(j)
        };
        if let Some(j) = target {
            classes.entry(j).or_default().push(p);
        }
    }
    classes.into_iter().collect()
}

/// A mid-run state of the (naive) priority protocol.
#[derive(Clone, Debug)]
pub struct PpState {
    profile: Rc<PreferenceProfile>,
    adv: Rc<AdvContext>,
    naive: bool,
    dictation: bool,
    log: bool,
    /// Current round, `0` before the first round starts.
    round: u32,
    survivors: BTreeSet<PlayerId>,
    remaining: BTreeSet<ItemId>,
    assignment: Vec<Option<ItemId>>,
    eliminated: BTreeSet<PlayerId>,
    pending: VecDeque<(ItemId, Vec<PlayerId>)>,
    tourn: Option<TournamentRun>,
    events: Vec<ProtocolEvent>,
}

impl PpState {
    pub fn new(profile: PreferenceProfile, adv: Rc<AdvContext>, naive: bool, log: bool) -> Self {
        let n = profile.n();
        // Players that crashed before their first message never enter a
        // round: they count as eliminated from the start and collect a
        // leftover item at the end like any other detected aborter.
        let survivors: BTreeSet<PlayerId> =
            (0..n).map(PlayerId).filter(|p| !adv.is_crashed(*p)).collect();
        let eliminated: BTreeSet<PlayerId> =
            (0..n).map(PlayerId).filter(|p| adv.is_crashed(*p)).collect();
        let mut state = Self {
            profile: Rc::new(profile),
            adv,
            naive,
            dictation: false,
            log,
            round: 0,
            survivors,
            remaining: (0..n).map(ItemId).collect(),
            assignment: vec![None; n],
            eliminated,
            pending: VecDeque::new(),
            tourn: None,
            events: Vec::new(),
        };
        if state.log {
            for p in state.eliminated.clone() {
                state.events.push(ProtocolEvent::Eliminated { stamp: state.stamp(), player: p });
            }
        }
        state
    }

    /// Lets worst-case drivers explore Byzantine winner dictation in duels
    /// between two corrupted players. Scripted evaluation never needs this.
    pub fn with_dictation(mut self) -> Self {
        self.dictation = true;
        self
    }

    pub fn round(&self) -> u32 {
        self.round
    }

    pub fn survivors(&self) -> &BTreeSet<PlayerId> {
        &self.survivors
    }

    pub fn remaining_items(&self) -> &BTreeSet<ItemId> {
        &self.remaining
    }

    pub fn is_eliminated(&self, p: PlayerId) -> bool {
        self.eliminated.contains(&p)
    }

    fn stamp(&self) -> DecisionStamp {
        DecisionStamp::Round(self.round)
    }

    fn assign(&mut self, p: PlayerId, item: ItemId) {
        debug_assert!(self.assignment[p.0].is_none());
        self.assignment[p.0] = Some(item);
        self.survivors.remove(&p);
        self.remaining.remove(&item);
        if self.log {
            self.events.push(ProtocolEvent::Assigned { stamp: self.stamp(), player: p, item });
        }
    }

    fn eliminate(&mut self, p: PlayerId) {
        self.survivors.remove(&p);
        self.eliminated.insert(p);
        if self.log {
            self.events.push(ProtocolEvent::Eliminated { stamp: self.stamp(), player: p });
        }
    }

    fn apply_tournament(&mut self, outcome: TournamentOutcome, item: ItemId) {
        if self.log {
            let run = self.tourn.as_ref().expect("a tournament just finished");
            let targets = run
                .spec()
                .candidates()
                .iter()
                .map(|&c| (c, run.spec().target_probability(c)))
                .collect();
            self.events.push(ProtocolEvent::TournamentHeld {
                stamp: self.stamp(),
                item: Some(item),
                targets,
                winner: outcome.winner,
                detected: outcome.detected.iter().copied().collect(),
            });
        }
        self.tourn = None;
        self.assign(outcome.winner, item);
        for p in outcome.detected {
            if p != outcome.winner {
                self.eliminate(p);
            }
        }
    }

    /// End of the last round: every non-eliminated player has an item
    /// (a structural fact of the round schedule, not an assumption about
    /// the adversary), and eliminated players pick over the leftovers in
    /// index order.
    fn finish(&mut self) -> Self {
        assert!(
            self.survivors.is_empty(),
            "all non-eliminated players are matched within {} rounds",
            self.profile.n()
        );
        let unmatched: Vec<PlayerId> = self.eliminated.iter().copied().collect();
        for p in unmatched {
            let item = self
                .profile
                .favorite_among(p, &self.remaining)
                .expect("as many leftover items as unmatched players");
            self.assignment[p.0] = Some(item);
            self.remaining.remove(&item);
            if self.log {
                self.events.push(ProtocolEvent::Leftover { player: p, item });
            }
        }
        self.clone()
    }

    fn with_tourn(&self, run: TournamentRun) -> Self {
        let mut next = self.clone();
        next.tourn = Some(run);
        next
    }
}

impl Protocol for PpState {
    fn n(&self) -> usize {
        self.profile.n()
    }

    fn step(&self) -> ProcessStep<Self> {
        let mut state = self.clone();
        loop {
            if let Some(run) = &state.tourn {
                match run.step() {
                    TournamentStep::Done(outcome) => {
                        let item = run.ctx().item.expect("class tournaments carry their item");
                        state.apply_tournament(outcome, item);
                        continue;
                    }
                    TournamentStep::Chance(branches) => {
                        return ProcessStep::Chance(
                            branches
                                .into_iter()
                                .map(|(p, child)| (p, state.with_tourn(child)))
                                .collect(),
                        );
                    }
                    TournamentStep::Decision(point, menu) => {
                        return ProcessStep::Decision(
                            point,
                            menu.into_iter()
                                .map(|(action, child)| (action, state.with_tourn(child)))
                                .collect(),
                        );
                    }
                }
            }

            if let Some((item, class)) = state.pending.pop_front() {
                if let [lone] = class[..] {
                    state.assign(lone, item);
                    continue;
                }
                let spec = TournamentSpec::uniform(class).expect("classes are nonempty");
                let ctx = TournamentCtx { stamp: state.stamp(), item: Some(item) };
                let run = TournamentRun::new(spec, ctx, Rc::clone(&state.adv));
                state.tourn = Some(if state.dictation { run.with_dictation() } else { run });
                continue;
            }

            if state.round as usize >= state.n() {
                return ProcessStep::Done(state.finish());
            }
            state.round += 1;
            state.pending =
                round_classes(&state.profile, &state.survivors, &state.remaining, state.round, state.naive)
                    .into();
        }
    }

    fn assigned_item(&self, p: PlayerId) -> Option<ItemId> {
        self.assignment[p.0]
    }

    fn events(&self) -> &[ProtocolEvent] {
        &self.events
    }

    fn encode_key(&self, focus: Option<PlayerId>, out: &mut Vec<u8>) {
        let mut enc = KeyEnc::new(out);
        enc.tag(b'P');
        enc.tag(self.naive as u8);
        enc.usize(self.round as usize);
        enc.usize(self.survivors.len());
        for p in &self.survivors {
            enc.usize(p.0);
        }
        enc.usize(self.remaining.len());
        for j in &self.remaining {
            enc.usize(j.0);
        }
        enc.usize(self.pending.len());
        for (item, class) in &self.pending {
            enc.usize(item.0);
            enc.usize(class.len());
            for p in class {
                enc.usize(p.0);
            }
        }
        match &self.tourn {
            None => enc.tag(0),
            Some(run) => {
                enc.tag(1);
                run.encode(out);
            }
        }
        let mut enc = KeyEnc::new(out);
        match focus {
            // Which items the other players hold cannot influence the rest
            // of the run (only `remaining` can, and it is already encoded),
            // so focused keys record just the focus player's own slot.
            Some(f) => {
                enc.tag(1);
                enc.usize(f.0);
                match &self.assignment[f.0] {
                    None => enc.tag(0),
                    Some(j) => {
                        enc.tag(1);
                        enc.usize(j.0);
                    }
                }
            }
            None => {
                enc.tag(0);
                for slot in &self.assignment {
                    match slot {
                        None => enc.tag(0),
                        Some(j) => {
                            enc.tag(1);
                            enc.usize(j.0);
                        }
                    }
                }
            }
        }
        // The eliminated set feeds the end-of-run leftover stage, so it
        // stays in the key in both modes.
        enc.usize(self.eliminated.len());
        for p in &self.eliminated {
            enc.usize(p.0);
        }
    }
}

/// Reference evaluator for honest runs: the distribution of `focus`'s final
/// item, computed by direct recursion over rounds with uniform class
/// winners. Independent of the step machine, so the two can cross-check
/// each other. `round` is the next round to run (pass 1 for a fresh game);
/// the state must be reachable by honest play (every player in `survivors`
/// has its first `round - 1` favorites outside `remaining`).
pub fn honest_row(
    profile: &PreferenceProfile,
    survivors: &BTreeSet<PlayerId>,
    remaining: &BTreeSet<ItemId>,
    round: u32,
    naive: bool,
    focus: PlayerId,
) -> Vec<Rational> {
    assert!(survivors.contains(&focus), "focus must still be in play");
    assert!(remaining.len() >= survivors.len());
    let classes = round_classes(profile, survivors, remaining, round, naive);
    rec_classes(profile, &classes, survivors, remaining, round, naive, focus)
}

#[allow(clippy::too_many_arguments)]
fn rec_classes(
    profile: &PreferenceProfile,
    classes: &[(ItemId, Vec<PlayerId>)],
    survivors: &BTreeSet<PlayerId>,
    remaining: &BTreeSet<ItemId>,
    round: u32,
    naive: bool,
    focus: PlayerId,
) -> Vec<Rational> {
    let n = profile.n();
    let Some(((item, class), rest)) = classes.split_first() else {
        assert!(
            (round as usize) < n,
            "an honest survivor is never left over after the last round"
        );
        return honest_row(profile, survivors, remaining, round + 1, naive, focus);
    };
    let share = rational::ratio(1, class.len() as i64);
    let mut row = vec![rational::zero(); n];
    for &winner in class {
        let contribution = if winner == focus {
            let mut unit = vec![rational::zero(); n];
            unit[item.0] = rational::one();
            unit
        } else {
            let mut survivors = survivors.clone();
            let mut remaining = remaining.clone();
            survivors.remove(&winner);
            remaining.remove(item);
            rec_classes(profile, rest, &survivors, &remaining, round, naive, focus)
        };
        for (slot, value) in row.iter_mut().zip(contribution) {
            *slot += share.clone() * value;
        }
    }
    row
}
