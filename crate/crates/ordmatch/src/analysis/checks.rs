//! Verdicts on assignments, matrices, and protocol runs: stability, ordinal
//! efficiency, equal treatment, uniform dominance, maximin security, and
//! truthfulness. Each graph-based test ships with a brute-force oracle that
//! re-derives the verdict straight from the definition, so the two can be
//! cross-validated on random instances.

use std::collections::BTreeSet;

use itertools::Itertools;

use crate::adversary::{AdvContext, AdvModel, AdversaryStrategy, DecisionRule};
use crate::mechanisms::ps_matrix;
use crate::model::{
    dominance_violation, strictly_dominates_matrix, Assignment, DominanceViolation, ItemId,
    PlayerId, PreferenceProfile, ProbabilityMatrix,
};
use crate::protocols::ProtocolKind;
use crate::rational::{self, Rational};
use crate::{Error, Result};

use super::{exact_row, EnumStats};

// ---------------------------------------------------------------------------
// Maximin security and uniform dominance
// ---------------------------------------------------------------------------

/// Outcome of a maximin comparison for one honest player.
#[derive(Clone, Debug)]
pub struct MaximinReport {
    /// Whether the adversarial row dominates the honest row.
    pub secure: bool,
    pub honest_row: Vec<Rational>,
    pub adversarial_row: Vec<Rational>,
    /// First failing prefix, when insecure.
    pub violation: Option<DominanceViolation>,
    pub stats: EnumStats,
}

/// Compares the focus player's exact item distribution under `strategy`
/// against its distribution when everyone is honest. Secure means the
/// adversary cannot push any top-`l` probability below its honest value.
pub fn check_maximin(
    kind: ProtocolKind,
    profile: &PreferenceProfile,
    focus: PlayerId,
    strategy: &AdversaryStrategy,
    budget: u64,
) -> Result<MaximinReport> {
    if strategy.context.is_corrupted(focus) {
        return Err(Error::InvalidInput(format!(
            "maximin security is a guarantee for honest players; player {} is corrupted",
            focus.0 + 1
        )));
    }
    let honest = AdversaryStrategy::honest();
    let (honest_row, honest_stats) = exact_row(kind, profile, &honest, focus, budget)?;
    let (adversarial_row, adv_stats) = exact_row(kind, profile, strategy, focus, budget)?;
    let violation = dominance_violation(&adversarial_row, &honest_row, profile.order(focus));
    Ok(MaximinReport {
        secure: violation.is_none(),
        honest_row,
        adversarial_row,
        violation,
        stats: EnumStats {
            nodes: honest_stats.nodes + adv_stats.nodes,
            memo_hits: honest_stats.memo_hits + adv_stats.memo_hits,
            memo_entries: honest_stats.memo_entries + adv_stats.memo_entries,
        },
    })
}

/// Outcome of a uniform-dominance check on one row.
#[derive(Clone, Debug)]
pub struct UniformReport {
    pub dominant: bool,
    pub row: Vec<Rational>,
    /// First prefix whose mass falls below `l / n`, when not dominant.
    pub violation: Option<DominanceViolation>,
}

/// Does this item distribution dominate the uniform one? Equivalently: does
/// the player get one of its top `l` items with probability at least
/// `l / n`, for every `l`?
pub fn check_uniform_dominance(row: &[Rational], order: &[ItemId]) -> UniformReport {
    let n = order.len();
    let uniform = vec![rational::ratio(1, n as i64); n];
    let violation = dominance_violation(row, &uniform, order);
    UniformReport { dominant: violation.is_none(), row: row.to_vec(), violation }
}

// ---------------------------------------------------------------------------
// Stability
// ---------------------------------------------------------------------------

/// Outcome of a stability check on a single assignment.
#[derive(Clone, Debug)]
pub struct StabilityReport {
    pub stable: bool,
    /// Players who could trade their items around a cycle so that everyone
    /// in it strictly improves.
    pub blocking_cycle: Option<Vec<PlayerId>>,
}

/// An assignment is stable when no group of players can swap their items
/// among themselves with every trader strictly better off. That is exactly
/// acyclicity of the envy digraph with an edge `i -> k` whenever `i`
/// strictly prefers `k`'s item to its own.
pub fn is_stable(assignment: &Assignment, profile: &PreferenceProfile) -> StabilityReport {
    let n = profile.n();
    let envies = |i: usize| -> Vec<usize> {
        (0..n)
            .filter(|&k| {
                k != i
                    && profile.prefers(
                        PlayerId(i),
                        assignment.item_of(PlayerId(k)),
                        assignment.item_of(PlayerId(i)),
                    )
            })
            .collect()
    };
    match find_cycle(n, envies) {
        Some(cycle) => StabilityReport {
            stable: false,
            blocking_cycle: Some(cycle.into_iter().map(PlayerId).collect()),
        },
        None => StabilityReport { stable: true, blocking_cycle: None },
    }
}

/// Definitional oracle: scans every alternative matching for one where each
/// player either keeps its item or strictly improves, with at least one
/// strict improvement. Exponential; for cross-validation at small `n`.
pub fn brute_force_stable(assignment: &Assignment, profile: &PreferenceProfile) -> bool {
    let n = profile.n();
    for items in (0..n).permutations(n) {
        let candidate = Assignment::new(items.into_iter().map(ItemId).collect()).unwrap();
        if candidate == *assignment {
            continue;
        }
        let all_weakly_improve = profile.players().all(|p| {
            candidate.item_of(p) == assignment.item_of(p)
                || profile.prefers(p, candidate.item_of(p), assignment.item_of(p))
        });
        if all_weakly_improve {
            return false;
        }
    }
    true
}

/// First directed cycle reachable in a functional digraph given by `next`,
/// as the list of vertices around the cycle.
fn find_cycle(n: usize, next: impl Fn(usize) -> Vec<usize>) -> Option<Vec<usize>> {
    #[derive(Clone, Copy, PartialEq)]
    enum Color {
        White,
        Gray,
        Black,
    }
    fn dfs(
        v: usize,
        next: &impl Fn(usize) -> Vec<usize>,
        color: &mut [Color],
        trail: &mut Vec<usize>,
    ) -> Option<Vec<usize>> {
        color[v] = Color::Gray;
        trail.push(v);
        for w in next(v) {
            match color[w] {
                Color::Gray => {
                    let start = trail.iter().position(|&u| u == w).unwrap();
                    return Some(trail[start..].to_vec());
                }
                Color::White => {
                    if let Some(cycle) = dfs(w, next, color, trail) {
                        return Some(cycle);
                    }
                }
                Color::Black => {}
            }
        }
        trail.pop();
        color[v] = Color::Black;
        None
    }

    let mut color = vec![Color::White; n];
    let mut trail = Vec::new();
    (0..n).find_map(|v| {
        if color[v] == Color::White {
            dfs(v, &next, &mut color, &mut trail)
        } else {
            None
        }
    })
}

// ---------------------------------------------------------------------------
// Ordinal efficiency
// ---------------------------------------------------------------------------

/// Outcome of an ordinal-efficiency check on a bistochastic matrix.
#[derive(Clone, Debug)]
pub struct EfficiencyReport {
    pub efficient: bool,
    /// An item cycle witnessing inefficiency: each item is preferred, by
    /// some player consuming the next one, over that next one.
    pub item_cycle: Option<Vec<ItemId>>,
    /// A bistochastic matrix strictly dominating the input, built by
    /// shifting mass around the cycle. Present exactly when inefficient.
    pub dominating: Option<ProbabilityMatrix>,
}

/// A bistochastic matrix is ordinally efficient when no other bistochastic
/// matrix dominates it row-wise (every player at least as happy at every
/// prefix, someone strictly happier). Efficiency is equivalent to the
/// acyclicity of the relation `a -> b` ("some player eats `b` while
/// preferring `a`"): a cycle lets mass rotate so every touched player
/// trades a worse item for a better one.
pub fn is_ordinally_efficient(
    matrix: &ProbabilityMatrix,
    profile: &PreferenceProfile,
) -> Result<EfficiencyReport> {
    matrix.require_bistochastic()?;
    let n = profile.n();
    let desired_over = |a: usize| -> Vec<usize> {
        (0..n)
            .filter(|&b| {
                b != a
                    && profile.players().any(|p| {
                        matrix.entry(p, ItemId(b)) > &rational::zero()
                            && profile.prefers(p, ItemId(a), ItemId(b))
                    })
            })
            .collect()
    };
    let Some(cycle) = find_cycle(n, desired_over) else {
        return Ok(EfficiencyReport { efficient: true, item_cycle: None, dominating: None });
    };
    let cycle: Vec<ItemId> = cycle.into_iter().map(ItemId).collect();
    let dominating = shift_around_cycle(matrix, profile, &cycle)?;
    if !strictly_dominates_matrix(&dominating, matrix, profile) {
        return Err(Error::Consistency(
            "constructed certificate fails to dominate its source".into(),
        ));
    }
    Ok(EfficiencyReport { efficient: false, item_cycle: Some(cycle), dominating: Some(dominating) })
}

/// Builds the dominating certificate for an item cycle: for every edge
/// `a -> b` of the cycle, one player who eats `b` but prefers `a` sheds mass
/// from `b` onto `a`. Row sums are untouched; column sums telescope around
/// the cycle.
fn shift_around_cycle(
    matrix: &ProbabilityMatrix,
    profile: &PreferenceProfile,
    cycle: &[ItemId],
) -> Result<ProbabilityMatrix> {
    let witness = |a: ItemId, b: ItemId| -> Option<PlayerId> {
        profile
            .players()
            .find(|&p| matrix.entry(p, b) > &rational::zero() && profile.prefers(p, a, b))
    };
    let edges: Vec<(PlayerId, ItemId, ItemId)> = cycle
        .iter()
        .enumerate()
        .map(|(l, &a)| {
            let b = cycle[(l + 1) % cycle.len()];
            let p = witness(a, b).expect("cycle edges carry a witness by construction");
            (p, a, b)
        })
        .collect();
    let shift = edges
        .iter()
        .map(|(p, _, b)| matrix.entry(*p, *b))
        .min()
        .expect("cycles are nonempty")
        .clone();
    let mut entries: Vec<Vec<Rational>> =
        profile.players().map(|p| matrix.row(p).to_vec()).collect();
    for (p, a, b) in &edges {
        entries[p.0][a.0] += &shift;
        entries[p.0][b.0] -= &shift;
    }
    let out = ProbabilityMatrix::new(entries)?;
    out.require_bistochastic()?;
    Ok(out)
}

/// Definitional oracle for ordinal efficiency: searches every item cycle
/// (subset plus rotation order) for one along which mass can shift, without
/// going through the relation digraph. Exponential; for cross-validation at
/// small `n`.
pub fn brute_force_efficient(matrix: &ProbabilityMatrix, profile: &PreferenceProfile) -> bool {
    let n = profile.n();
    let eats_but_prefers = |a: ItemId, b: ItemId| {
        profile
            .players()
            .any(|p| matrix.entry(p, b) > &rational::zero() && profile.prefers(p, a, b))
    };
    for size in 2..=n {
        for subset in (0..n).combinations(size) {
            // Fix the smallest element first so each cyclic order is
            // enumerated once.
            let first = subset[0];
            for rest in subset[1..].iter().copied().permutations(size - 1) {
                let mut cycle = vec![first];
                cycle.extend(rest);
                let ok = (0..size).all(|l| {
                    eats_but_prefers(ItemId(cycle[l]), ItemId(cycle[(l + 1) % size]))
                });
                if ok {
                    return false;
                }
            }
        }
    }
    true
}

// ---------------------------------------------------------------------------
// Equal treatment
// ---------------------------------------------------------------------------

/// How much of the preference orders an equal-treatment check compares.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum TreatmentStrength {
    /// Players agreeing on their top-`l` items get identical probabilities
    /// on those `l` items, for every pair and every common prefix.
    Strong,
    /// Only players with fully identical orders must receive identical
    /// rows.
    Weak,
}

/// A witnessed equal-treatment failure.
#[derive(Clone, Debug)]
pub struct TreatmentViolation {
    pub pair: (PlayerId, PlayerId),
    /// One-based position within the common prefix where the rows differ.
    pub position: usize,
    pub left: Rational,
    pub right: Rational,
}

/// Outcome of an equal-treatment check.
#[derive(Clone, Debug)]
pub struct TreatmentReport {
    pub holds: bool,
    pub violation: Option<TreatmentViolation>,
}

/// Checks that players who rank their first `l` items identically are
/// served identically on them.
pub fn check_equal_treatment(
    matrix: &ProbabilityMatrix,
    profile: &PreferenceProfile,
    strength: TreatmentStrength,
) -> Result<TreatmentReport> {
    matrix.require_bistochastic()?;
    let n = profile.n();
    for i in profile.players() {
        for k in profile.players().filter(|k| k.0 > i.0) {
            let common = profile
                .order(i)
                .iter()
                .zip(profile.order(k))
                .take_while(|(a, b)| a == b)
                .count();
            let compared = match strength {
                TreatmentStrength::Strong => common,
                TreatmentStrength::Weak if common == n => n,
                TreatmentStrength::Weak => 0,
            };
            for pos in 0..compared {
                let item = profile.order(i)[pos];
                let (left, right) = (matrix.entry(i, item), matrix.entry(k, item));
                if left != right {
                    return Ok(TreatmentReport {
                        holds: false,
                        violation: Some(TreatmentViolation {
                            pair: (i, k),
                            position: pos + 1,
                            left: left.clone(),
                            right: right.clone(),
                        }),
                    });
                }
            }
        }
    }
    Ok(TreatmentReport { holds: true, violation: None })
}

// ---------------------------------------------------------------------------
// Truthfulness
// ---------------------------------------------------------------------------

/// What a truthfulness check runs the liar through.
#[derive(Clone, Copy, Debug)]
pub enum TruthTarget {
    Protocol(ProtocolKind),
    /// The centralized eating mechanism, for contrast with the protocols.
    PsMechanism,
}

/// Both of the liar's rows and how they compare along its true order.
#[derive(Clone, Debug)]
pub struct TruthfulnessReport {
    pub truthful_row: Vec<Rational>,
    pub reported_row: Vec<Rational>,
    /// The misreport row strictly dominates the truthful row: lying is an
    /// unqualified improvement.
    pub strict_gain: bool,
    /// First prefix (of the true order) where lying scores higher; any
    /// entry here already refutes strong truthfulness.
    pub gain_witness: Option<DominanceViolation>,
    /// First prefix where lying scores lower.
    pub loss_witness: Option<DominanceViolation>,
}

/// Compares the liar's exact item distribution when it reports the truth
/// against the one where it reports `reported`, everyone else unchanged and
/// honest. Both rows are scored against the liar's *true* order.
pub fn check_truthfulness_gain(
    target: TruthTarget,
    profile: &PreferenceProfile,
    liar: PlayerId,
    reported: Vec<ItemId>,
    budget: u64,
) -> Result<TruthfulnessReport> {
    let truthful_row;
    let reported_row;
    match target {
        TruthTarget::PsMechanism => {
            let lied = profile.with_order(liar, reported)?;
            truthful_row = ps_matrix(profile)?.row(liar).to_vec();
            reported_row = ps_matrix(&lied)?.row(liar).to_vec();
        }
        TruthTarget::Protocol(kind) => {
            let honest = AdversaryStrategy::honest();
            let lie = AdversaryStrategy {
                context: AdvContext::new([liar], AdvModel::Byzantine),
                rule: DecisionRule::Passive,
                declared: [(liar, reported)].into(),
            };
            lie.validate(profile.n())?;
            // A passive liar follows the protocol to the letter; only its
            // declared order differs from the truth.
            truthful_row = exact_row(kind, profile, &honest, liar, budget)?.0;
            reported_row = exact_row(kind, profile, &lie, liar, budget)?.0;
        }
    }
    let order = profile.order(liar);
    let gain_witness = dominance_violation(&truthful_row, &reported_row, order);
    let loss_witness = dominance_violation(&reported_row, &truthful_row, order);
    let strict_gain = loss_witness.is_none() && reported_row != truthful_row;
    Ok(TruthfulnessReport { truthful_row, reported_row, strict_gain, gain_witness, loss_witness })
}

/// Convenience: the probability mass `row` puts on `player`'s top `len`
/// items.
pub fn top_prefix(row: &[Rational], order: &[ItemId], len: usize) -> Rational {
    rational::sum(order[..len].iter().map(|j| &row[j.0]))
}

/// The set of players whose declared orders differ from `profile`'s.
pub fn misreporters(strategy: &AdversaryStrategy, profile: &PreferenceProfile) -> BTreeSet<PlayerId> {
    strategy
        .declared
        .iter()
        .filter(|(p, order)| profile.order(**p) != order.as_slice())
        .map(|(p, _)| *p)
        .collect()
}
