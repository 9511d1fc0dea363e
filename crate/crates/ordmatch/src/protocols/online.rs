//! The online eating protocols.
//!
//! Players eat their favorite available item; when an item runs out, the
//! players that were eating it race for it in an augmented tournament with
//! weights proportional to the fractions they ate. The varying-rates
//! variant then tops up every survivor's rate so that it restarts at
//! `1/(1 - t)` — the restored-ownership invariant that makes the protocol
//! uniformly dominant. The fixed-rate variant skips the top-up, which is
//! exactly why it fails uniform dominance.

use std::collections::{BTreeMap, VecDeque};
use std::rc::Rc;

use crate::adversary::{AdvContext, DecisionStamp, DuelAction, DuelPoint};
use crate::lottery::{TournamentCtx, TournamentOutcome, TournamentRun, TournamentSpec, TournamentStep};
use crate::model::{ItemId, PlayerId, PreferenceProfile};
use crate::protocols::{KeyEnc, ProcessStep, Protocol, ProtocolEvent};
use crate::rational::{self, Rational};

#[derive(Clone, PartialEq, Eq, Debug)]
enum PlayerStatus {
    Eating { item: ItemId, eaten: Rational },
    Assigned(ItemId),
    Eliminated,
}

/// An exhausted item waiting for its tournament: the item plus every
/// player that was eating it, with the fraction each consumed.
#[derive(Clone, PartialEq, Eq, Debug)]
struct BatchEntry {
    item: ItemId,
    eaters: Vec<(PlayerId, Rational)>,
}

/// A mid-run state of an eating protocol.
#[derive(Clone, Debug)]
pub struct OnlineState {
    profile: Rc<PreferenceProfile>,
    adv: Rc<AdvContext>,
    varying: bool,
    dictation: bool,
    log: bool,
    time: Rational,
    status: Vec<PlayerStatus>,
    rate: Vec<Rational>,
    /// Remaining fraction per item; `None` once the item is assigned.
    item_left: Vec<Option<Rational>>,
    /// Items that exhausted at the current instant, in ascending item
    /// order, each awaiting its tournament.
    batch: VecDeque<BatchEntry>,
    tourn: Option<(TournamentRun, BatchEntry)>,
    events: Vec<ProtocolEvent>,
}

impl OnlineState {
    pub fn new(profile: PreferenceProfile, adv: Rc<AdvContext>, varying: bool, log: bool) -> Self {
        let n = profile.n();
        // A player that crashed before its first message is public knowledge
        // from the start: it never eats, so its favorite item is shared by
        // one mouth fewer and every exhaustion time downstream shifts.
        let status = profile
            .players()
            .map(|p| {
                if adv.is_crashed(p) {
                    PlayerStatus::Eliminated
                } else {
                    PlayerStatus::Eating { item: profile.favorite(p, 0), eaten: rational::zero() }
                }
            })
            .collect();
        let rate = profile
            .players()
            .map(|p| if adv.is_crashed(p) { rational::zero() } else { rational::one() })
            .collect();
        let mut state = Self {
            profile: Rc::new(profile),
            adv,
            varying,
            dictation: false,
            log,
            time: rational::zero(),
            status,
            rate,
            item_left: vec![Some(rational::one()); n],
            batch: VecDeque::new(),
            tourn: None,
            events: Vec::new(),
        };
        if state.log {
            for p in state.adv.crashed.clone() {
                state.events.push(ProtocolEvent::Eliminated { stamp: state.stamp(), player: p });
            }
        }
        state
    }

    /// Lets worst-case drivers explore Byzantine winner dictation in duels
    /// between two corrupted players.
    pub fn with_dictation(mut self) -> Self {
        self.dictation = true;
        self
    }

    pub fn time(&self) -> &Rational {
        &self.time
    }

    /// True while exhausted items from the current instant still await
    /// their tournaments.
    pub fn has_instant_work(&self) -> bool {
        self.tourn.is_some() || !self.batch.is_empty()
    }

    pub fn is_eliminated(&self, p: PlayerId) -> bool {
        matches!(self.status[p.0], PlayerStatus::Eliminated)
    }

    pub fn current_rate(&self, p: PlayerId) -> &Rational {
        &self.rate[p.0]
    }

    /// How much of the run `p` has locked in by time `t`, counting the
    /// fraction of its current item: `1` once assigned, `0` once
    /// eliminated. Only meaningful for `self.time() <= t` and `t` at or
    /// before the next exhaustion.
    pub fn claimed_at(&self, p: PlayerId, t: &Rational) -> Rational {
        match &self.status[p.0] {
            PlayerStatus::Assigned(_) => rational::one(),
            PlayerStatus::Eliminated => rational::zero(),
            PlayerStatus::Eating { eaten, .. } => {
                debug_assert!(t >= &self.time);
                eaten + &self.rate[p.0] * (t - &self.time)
            }
        }
    }

    /// When the next item (or items) will run out, with the culprits in
    /// ascending item order; `None` when nobody is eating.
    fn next_exhaustions(&self) -> Option<(Rational, Vec<ItemId>)> {
        let pace = self.paces();
        let dt = pace
            .iter()
            .map(|(item, rate)| {
                let left = self.item_left[item.0].as_ref().expect("eaten items stay in play");
                left / rate
            })
            .min()?;
        let exhausted = pace
            .iter()
            .filter(|(item, rate)| {
                self.item_left[item.0].as_ref().expect("eaten items stay in play") == &(&dt * *rate)
            })
            .map(|(item, _)| *item)
            .collect();
        Some((dt, exhausted))
    }

    /// Total eating pace per item at this instant.
    fn paces(&self) -> BTreeMap<ItemId, Rational> {
        let mut pace: BTreeMap<ItemId, Rational> = BTreeMap::new();
        for (p, status) in self.status.iter().enumerate() {
            if let PlayerStatus::Eating { item, .. } = status {
                *pace.entry(*item).or_insert_with(rational::zero) += &self.rate[p];
            }
        }
        pace
    }

    /// The time of the next exhaustion, if anyone is still eating.
    pub fn next_event_time(&self) -> Option<Rational> {
        self.next_exhaustions().map(|(dt, _)| &self.time + dt)
    }

    fn stamp(&self) -> DecisionStamp {
        DecisionStamp::Time(self.time.clone())
    }

    fn assign(&mut self, p: PlayerId, item: ItemId) {
        self.status[p.0] = PlayerStatus::Assigned(item);
        self.rate[p.0] = rational::zero();
        self.item_left[item.0] = None;
        if self.log {
            self.events.push(ProtocolEvent::Assigned { stamp: self.stamp(), player: p, item });
        }
    }

    fn eliminate(&mut self, p: PlayerId) {
        self.status[p.0] = PlayerStatus::Eliminated;
        self.rate[p.0] = rational::zero();
        if self.log {
            self.events.push(ProtocolEvent::Eliminated { stamp: self.stamp(), player: p });
        }
    }

    /// Points a surviving participant at its next item. Fresh plate: the
    /// eaten counter restarts at zero.
    fn repick(&mut self, p: PlayerId) {
        let available = (0..self.n())
            .map(ItemId)
            .filter(|j| matches!(&self.item_left[j.0], Some(left) if left > &rational::zero()))
            .collect();
        let item = self
            .profile
            .favorite_among(p, &available)
            .expect("a surviving participant always has an item left to eat");
        self.status[p.0] = PlayerStatus::Eating { item, eaten: rational::zero() };
    }

    fn apply_tournament(&mut self, outcome: TournamentOutcome, entry: BatchEntry) {
        if self.log {
            let targets = entry
                .eaters
                .iter()
                .map(|(p, fraction)| (*p, fraction.clone()))
                .collect();
            self.events.push(ProtocolEvent::TournamentHeld {
                stamp: self.stamp(),
                item: Some(entry.item),
                targets,
                winner: outcome.winner,
                detected: outcome.detected.iter().copied().collect(),
            });
        }
        let winner_rate = self.rate[outcome.winner.0].clone();
        let fraction_of = |p: PlayerId| {
            entry
                .eaters
                .iter()
                .find(|(q, _)| *q == p)
                .map(|(_, f)| f.clone())
                .expect("tournament participants ate the item")
        };
        let winner_fraction = fraction_of(outcome.winner);
        self.assign(outcome.winner, entry.item);
        for &p in &outcome.detected {
            if p != outcome.winner {
                self.eliminate(p);
            }
        }
        // Everyone else goes back to the buffet; under varying rates the
        // winner's rate is split among them in proportion to what they ate,
        // where the proportions are taken over all non-winners (detected
        // ones included — their share of the split is simply lost).
        let split_base = rational::one() - &winner_fraction;
        for &p in &outcome.survivors {
            if self.varying {
                let share = &winner_rate * &fraction_of(p) / &split_base;
                self.rate[p.0] += share;
                // Restored ownership: a survivor's new rate always lands
                // exactly at 1/(1 - t), whatever mix of rates fed the item.
                let restored = rational::one() / (rational::one() - &self.time);
                assert_eq!(self.rate[p.0], restored, "rate law broken for {p}");
                if self.log {
                    self.events.push(ProtocolEvent::RateSet {
                        stamp: self.stamp(),
                        player: p,
                        rate: self.rate[p.0].clone(),
                    });
                }
            }
            self.repick(p);
        }
    }

    /// Advances to the next exhaustion instant and queues the exhausted
    /// items (ascending) for their tournaments.
    fn advance(&mut self) -> bool {
        let Some((dt, exhausted)) = self.next_exhaustions() else {
            return false;
        };
        self.time += &dt;
        for (p, status) in self.status.iter_mut().enumerate() {
            if let PlayerStatus::Eating { item, eaten } = status {
                *eaten += &self.rate[p] * &dt;
                if let Some(left) = self.item_left[item.0].as_mut() {
                    *left -= &self.rate[p] * &dt;
                }
            }
        }
        for item in exhausted {
            debug_assert_eq!(self.item_left[item.0], Some(rational::zero()));
            let eaters: Vec<(PlayerId, Rational)> = self
                .status
                .iter()
                .enumerate()
                .filter_map(|(p, status)| match status {
                    PlayerStatus::Eating { item: j, eaten } if *j == item => {
                        Some((PlayerId(p), eaten.clone()))
                    }
                    _ => None,
                })
                .collect();
            let total = eaters.iter().fold(rational::zero(), |acc, (_, f)| acc + f);
            assert_eq!(total, rational::one(), "an item exhausts exactly when fully eaten");
            self.batch.push_back(BatchEntry { item, eaters });
        }
        true
    }

    fn finish(&mut self) -> Self {
        assert!(
            self.status.iter().all(|s| !matches!(s, PlayerStatus::Eating { .. })),
            "the run is over only once nobody is eating"
        );
        let unmatched: Vec<PlayerId> = (0..self.n())
            .map(PlayerId)
            .filter(|p| matches!(self.status[p.0], PlayerStatus::Eliminated))
            .collect();
        for p in unmatched {
            let available = (0..self.n())
                .map(ItemId)
                .filter(|j| self.item_left[j.0].is_some())
                .collect();
            let item = self
                .profile
                .favorite_among(p, &available)
                .expect("as many leftover items as unmatched players");
            self.status[p.0] = PlayerStatus::Assigned(item);
            self.item_left[item.0] = None;
            if self.log {
                self.events.push(ProtocolEvent::Leftover { player: p, item });
            }
        }
        self.clone()
    }

    fn with_tourn(&self, run: TournamentRun) -> Self {
        let mut next = self.clone();
        next.tourn.as_mut().expect("a tournament is running").0 = run;
        next
    }

    /// One bounded transition: unlike [`Protocol::step`], which rolls
    /// forward until the next chance node, decision node, or the end of the
    /// run, this never performs more than one unit of work — so callers can
    /// observe the quiet state between two exhaustion instants, or between
    /// a resolved tournament and the next one of the same instant.
    pub fn instant_step(&self) -> InstantStep {
        let mut state = self.clone();
        if let Some((run, entry)) = &state.tourn {
            return match run.step() {
                TournamentStep::Done(outcome) => {
                    let entry = entry.clone();
                    state.tourn = None;
                    state.apply_tournament(outcome, entry);
                    InstantStep::Progress(state)
                }
                TournamentStep::Chance(branches) => InstantStep::Chance(
                    branches
                        .into_iter()
                        .map(|(p, child)| (p, state.with_tourn(child)))
                        .collect(),
                ),
                TournamentStep::Decision(point, menu) => InstantStep::Decision(
                    point,
                    menu.into_iter()
                        .map(|(action, child)| (action, state.with_tourn(child)))
                        .collect(),
                ),
            };
        }
        if let Some(entry) = state.batch.pop_front() {
            debug_assert!(entry.eaters.iter().all(|(_, f)| f > &rational::zero()));
            if let [(lone, _)] = entry.eaters[..] {
                // Sole eater: default winner, nothing to abort.
                state.assign(lone, entry.item);
            } else {
                let spec = TournamentSpec::from_fractions(&entry.eaters)
                    .expect("exhaustion fractions are positive and sum to one");
                let ctx = TournamentCtx { stamp: state.stamp(), item: Some(entry.item) };
                let run = TournamentRun::new(spec, ctx, Rc::clone(&state.adv));
                let run = if state.dictation { run.with_dictation() } else { run };
                state.tourn = Some((run, entry));
            }
            return InstantStep::Progress(state);
        }
        if state.advance() {
            InstantStep::Progress(state)
        } else {
            InstantStep::Done(state.finish())
        }
    }
}

/// Result of [`OnlineState::instant_step`].
#[derive(Clone, Debug)]
pub enum InstantStep {
    /// Nobody eats any more; leftovers are handed out and the run is over.
    Done(OnlineState),
    /// Work happened without a chance or decision: a tournament outcome was
    /// applied, a sole eater was assigned, a tournament was opened, or —
    /// only from a quiet state — time advanced to the next exhaustion.
    Progress(OnlineState),
    /// A duel's outcome is drawn.
    Chance(Vec<(Rational, OnlineState)>),
    /// The adversary chooses.
    Decision(DuelPoint, Vec<(DuelAction, OnlineState)>),
}

impl Protocol for OnlineState {
    fn n(&self) -> usize {
        self.profile.n()
    }

    fn step(&self) -> ProcessStep<Self> {
        let mut state = self.clone();
        loop {
            match state.instant_step() {
                InstantStep::Done(s) => return ProcessStep::Done(s),
                InstantStep::Progress(s) => state = s,
                InstantStep::Chance(branches) => return ProcessStep::Chance(branches),
                InstantStep::Decision(point, menu) => {
                    return ProcessStep::Decision(point, menu)
                }
            }
        }
    }

    fn assigned_item(&self, p: PlayerId) -> Option<ItemId> {
        match self.status[p.0] {
            PlayerStatus::Assigned(item) => Some(item),
            _ => None,
        }
    }

    fn events(&self) -> &[ProtocolEvent] {
        &self.events
    }

    fn encode_key(&self, focus: Option<PlayerId>, out: &mut Vec<u8>) {
        let mut enc = KeyEnc::new(out);
        enc.tag(b'O');
        enc.tag(self.varying as u8);
        enc.rational(&self.time);
        match focus {
            Some(f) => {
                enc.tag(1);
                enc.usize(f.0);
            }
            None => enc.tag(0),
        }
        for (p, status) in self.status.iter().enumerate() {
            match status {
                PlayerStatus::Eating { item, eaten } => {
                    enc.tag(1);
                    enc.usize(item.0);
                    enc.rational(eaten);
                }
                // Which item an already-matched player holds is invisible
                // to everyone else's future, so focused keys keep only the
                // focus player's own.
                PlayerStatus::Assigned(item) => {
                    enc.tag(2);
                    if focus.is_none_or(|f| f.0 == p) {
                        enc.usize(item.0);
                    }
                }
                PlayerStatus::Eliminated => enc.tag(3),
            }
            enc.rational(&self.rate[p]);
        }
        for left in &self.item_left {
            match left {
                None => enc.tag(0),
                Some(x) => {
                    enc.tag(1);
                    enc.rational(x);
                }
            }
        }
        enc.usize(self.batch.len());
        for entry in &self.batch {
            enc.usize(entry.item.0);
            enc.usize(entry.eaters.len());
            for (p, f) in &entry.eaters {
                enc.usize(p.0);
                enc.rational(f);
            }
        }
        match &self.tourn {
            None => {
                let mut enc = KeyEnc::new(out);
                enc.tag(0);
            }
            Some((run, entry)) => {
                let mut enc = KeyEnc::new(out);
                enc.tag(1);
                enc.usize(entry.item.0);
                enc.usize(entry.eaters.len());
                for (p, f) in &entry.eaters {
                    enc.usize(p.0);
                    enc.rational(f);
                }
                run.encode(out);
            }
        }
    }
}
