//! Exhaustive sweeps: worst-case guarantees over whole strategy classes and
//! whole profile families. These are the engines behind "secure against
//! every coalition" claims at small `n`, where exact enumeration is
//! feasible.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use crate::adversary::{AdvContext, AdvModel, AdversaryStrategy, DecisionRule};
use crate::model::{all_orders, ItemId, PlayerId, PreferenceProfile};
use crate::protocols::{process, ProtocolKind};
use crate::rational::{self, Rational};
use crate::{Error, Result};

use super::{exact_row, worst_case_prefixes, EnumStats};

// ---------------------------------------------------------------------------
// Profile families
// ---------------------------------------------------------------------------

/// Every preference profile on `n` players and `n` items: `(n!)^n` of them.
pub fn all_profiles(n: usize) -> impl Iterator<Item = PreferenceProfile> {
    profile_family(n, 0)
}

/// Every profile whose first player ranks the items in index order:
/// `(n!)^(n-1)` of them.
///
/// For item-symmetric questions this family is exhaustive: any profile maps
/// onto a canonical one by relabeling items with the inverse of player 1's
/// order, and the protocols commute with item relabelings.
pub fn canonical_profiles(n: usize) -> impl Iterator<Item = PreferenceProfile> {
    profile_family(n, 1)
}

fn profile_family(n: usize, fixed: usize) -> impl Iterator<Item = PreferenceProfile> {
    let orders = all_orders(n);
    let base = orders.len() as u128;
    let count = base
        .checked_pow((n - fixed) as u32)
        .expect("profile family too large to enumerate");
    (0..count).map(move |code| {
        let mut rows: Vec<Vec<ItemId>> = Vec::with_capacity(n);
        rows.resize_with(fixed, || (0..n).map(ItemId).collect());
        let mut rest = code;
        for _ in fixed..n {
            rows.push(orders[(rest % base) as usize].clone());
            rest /= base;
        }
        PreferenceProfile::new(rows).expect("rows are permutations")
    })
}

// ---------------------------------------------------------------------------
// Coalition sweeps
// ---------------------------------------------------------------------------

/// One witnessed breach from a sweep: some player's worst-case top-`l`
/// probability fell below the bound it was checked against.
#[derive(Clone, Debug)]
pub struct SweepFailure {
    pub profile: PreferenceProfile,
    pub focus: PlayerId,
    /// Prefix length `l`, one-based.
    pub prefix_len: usize,
    pub worst: Rational,
    pub bound: Rational,
}

impl fmt::Display for SweepFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "player {} top-{}: worst case {} falls below {}",
            self.focus,
            self.prefix_len,
            rational::format_exact(&self.worst),
            rational::format_exact(&self.bound)
        )
    }
}

/// The maximal coalition against one player, with no in-protocol script:
/// decision nodes stay open for worst-case induction to range over.
fn coalition_against(
    profile: &PreferenceProfile,
    focus: PlayerId,
    model: AdvModel,
) -> AdversaryStrategy {
    let corrupted: Vec<PlayerId> = profile.players().filter(|&p| p != focus).collect();
    AdversaryStrategy {
        context: AdvContext::new(corrupted, model),
        rule: DecisionRule::Passive,
        declared: BTreeMap::new(),
    }
}

/// Every subset of `members`, empty set first.
fn subsets(members: &[PlayerId]) -> impl Iterator<Item = BTreeSet<PlayerId>> + '_ {
    assert!(members.len() < usize::BITS as usize, "coalition too large to power-set");
    (0..1usize << members.len()).map(move |mask| {
        members
            .iter()
            .enumerate()
            .filter(|(i, _)| mask >> i & 1 == 1)
            .map(|(_, &p)| p)
            .collect()
    })
}

fn fold_minima(acc: Option<Vec<Rational>>, next: Vec<Rational>) -> Option<Vec<Rational>> {
    Some(match acc {
        None => next,
        Some(acc) => acc
            .into_iter()
            .zip(next)
            .map(|(a, b)| if a <= b { a } else { b })
            .collect(),
    })
}

/// Is every player maximin secure against every fail-stop coalition on this
/// profile? Returns the first breach, or `None` when the guarantee holds.
///
/// Each player is checked against the single maximal coalition (everyone
/// else corrupted), which covers all `2^(n-1) - 1` smaller coalitions: a
/// corrupted player always has "never abort" on the menu, so shrinking the
/// coalition only removes decision nodes and cannot lower the minimum. The
/// coalition's opening move — which members crash before their first
/// message — is a root-level choice, so the induction runs once per crash
/// subset and the minima are folded across them.
pub fn failstop_worst_secure(
    kind: ProtocolKind,
    profile: &PreferenceProfile,
    budget: u64,
) -> Result<Option<SweepFailure>> {
    let honest = AdversaryStrategy::honest();
    for focus in profile.players() {
        let strategy = coalition_against(profile, focus, AdvModel::FailStop);
        let members: Vec<PlayerId> = strategy.context.corrupted.iter().copied().collect();
        let mut minima: Option<Vec<Rational>> = None;
        for crashed in subsets(&members) {
            let mut strategy = strategy.clone();
            strategy.context = strategy.context.with_crashed(crashed);
            let root = process(kind, profile, &strategy, false)?;
            let worst = worst_case_prefixes(&root, profile.order(focus), focus, budget)?;
            minima = fold_minima(minima, worst.prefix_minima);
        }
        let minima = minima.expect("at least the crash-free run");
        let (row, _) = exact_row(kind, profile, &honest, focus, budget)?;
        let ordered: Vec<Rational> =
            profile.order(focus).iter().map(|j| row[j.0].clone()).collect();
        let baseline = rational::prefix_sums(&ordered);
        if let Some(failure) = first_breach(profile, focus, &minima, &baseline) {
            return Ok(Some(failure));
        }
    }
    Ok(None)
}

/// Does the protocol keep every player's worst case above the uniform
/// lottery, even against Byzantine coalitions that misdeclare preferences
/// and dictate duels between corrupted players? Returns the first breach of
/// `worst top-l >= l / n`, or `None`.
pub fn byzantine_uniform_secure(
    kind: ProtocolKind,
    profile: &PreferenceProfile,
    budget: u64,
) -> Result<Option<SweepFailure>> {
    let n = profile.n();
    let bounds: Vec<Rational> = (1..=n).map(|l| rational::ratio(l as i64, n as i64)).collect();
    for focus in profile.players() {
        let corrupted: BTreeSet<PlayerId> =
            profile.players().filter(|&p| p != focus).collect();
        let (minima, _) = worst_case_prefix_profile(kind, profile, focus, &corrupted, budget)?;
        if let Some(failure) = first_breach(profile, focus, &minima, &bounds) {
            return Ok(Some(failure));
        }
    }
    Ok(None)
}

fn first_breach(
    profile: &PreferenceProfile,
    focus: PlayerId,
    worst: &[Rational],
    bounds: &[Rational],
) -> Option<SweepFailure> {
    worst.iter().zip(bounds).enumerate().find_map(|(idx, (w, b))| {
        (w < b).then(|| SweepFailure {
            profile: profile.clone(),
            focus,
            prefix_len: idx + 1,
            worst: w.clone(),
            bound: b.clone(),
        })
    })
}

/// Worst-case prefix vector for `focus` against a fixed Byzantine coalition:
/// entry `l - 1` is the minimum probability that `focus` ends with one of
/// its top `l` items, over every crash subset (members silent from the
/// start), every declared-order combination of the remaining members, and
/// every in-protocol decision (aborts anywhere; dictated winners in duels
/// between two corrupted players).
///
/// The declared combinations are enumerated outright and folded with a
/// component-wise minimum; the node budget applies to each induction
/// separately. Corrupted players' *true* orders never influence the run,
/// and a crashed member's declared order is moot (it never eats and never
/// joins a class), so this sweep closes over the whole Byzantine strategy
/// class.
pub fn worst_case_prefix_profile(
    kind: ProtocolKind,
    profile: &PreferenceProfile,
    focus: PlayerId,
    corrupted: &BTreeSet<PlayerId>,
    budget: u64,
) -> Result<(Vec<Rational>, EnumStats)> {
    if corrupted.contains(&focus) {
        return Err(Error::InvalidInput(format!(
            "worst-case guarantees are for honest players; player {} is corrupted",
            focus.0 + 1
        )));
    }
    let members: Vec<PlayerId> = corrupted.iter().copied().collect();
    let orders = all_orders(profile.n());
    let base = orders.len() as u128;
    let mut minima: Option<Vec<Rational>> = None;
    let mut stats = EnumStats::default();
    for crashed in subsets(&members) {
        let active: Vec<PlayerId> =
            members.iter().copied().filter(|p| !crashed.contains(p)).collect();
        let combos = base
            .checked_pow(active.len() as u32)
            .expect("declared-order enumeration too large");
        for code in 0..combos {
            let mut declared = BTreeMap::new();
            let mut rest = code;
            for &p in &active {
                declared.insert(p, orders[(rest % base) as usize].clone());
                rest /= base;
            }
            let strategy = AdversaryStrategy {
                context: AdvContext::new(members.iter().copied(), AdvModel::Byzantine)
                    .with_crashed(crashed.iter().copied()),
                rule: DecisionRule::Passive,
                declared,
            };
            let root = process(kind, profile, &strategy, false)?.with_dictation();
            let worst = worst_case_prefixes(&root, profile.order(focus), focus, budget)?;
            stats.nodes += worst.stats.nodes;
            stats.memo_hits += worst.stats.memo_hits;
            stats.memo_entries += worst.stats.memo_entries;
            minima = fold_minima(minima, worst.prefix_minima);
        }
    }
    Ok((minima.expect("at least the empty declaration"), stats))
}

/// Single-prefix form of [`worst_case_prefix_profile`]: the minimum
/// probability that `focus` finishes with one of its top `prefix_len` items.
pub fn worst_case_prefix_prob(
    kind: ProtocolKind,
    profile: &PreferenceProfile,
    focus: PlayerId,
    corrupted: &BTreeSet<PlayerId>,
    prefix_len: usize,
    budget: u64,
) -> Result<Rational> {
    if prefix_len == 0 || prefix_len > profile.n() {
        return Err(Error::InvalidInput(format!(
            "prefix length {prefix_len} out of range for n = {}",
            profile.n()
        )));
    }
    let (minima, _) = worst_case_prefix_profile(kind, profile, focus, corrupted, budget)?;
    Ok(minima[prefix_len - 1].clone())
}
