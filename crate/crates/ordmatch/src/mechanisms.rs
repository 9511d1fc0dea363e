//! Centralized assignment mechanisms, computed exactly: serial dictatorship,
//! random priority, and the probabilistic serial (simultaneous eating)
//! mechanism, plus the Birkhoff decomposition of a bistochastic matrix into
//! a lottery over deterministic assignments.
//!
//! These mechanisms assume a trusted party; they are the benchmarks the
//! distributed protocols in [`crate::protocols`] are measured against.

use std::collections::BTreeSet;

use crate::model::{Assignment, ItemId, PlayerId, PreferenceProfile, ProbabilityMatrix};
use crate::rational::{self, Rational};
use crate::{Error, Result};

/// Largest `n` for which random priority enumerates all `n!` rankings.
pub const RP_MAX_PLAYERS: usize = 8;

/// Which centralized mechanism to run (the CLI surface).
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum MechanismKind {
    SerialDictatorship,
    RandomPriority,
    ProbabilisticSerial,
}

impl MechanismKind {
    pub fn parse(text: &str) -> Result<Self> {
        match text {
            "sd" => Ok(Self::SerialDictatorship),
            "rp" => Ok(Self::RandomPriority),
            "ps" => Ok(Self::ProbabilisticSerial),
            other => Err(Error::InvalidInput(format!("unknown mechanism {other:?}"))),
        }
    }
}

/// Serial dictatorship: players pick their favorite remaining item in the
/// given priority order.
pub fn serial_dictatorship(profile: &PreferenceProfile, ranking: &[PlayerId]) -> Result<Assignment> {
    let n = profile.n();
    if ranking.len() != n {
        return Err(Error::Dimension(format!("ranking has {} players, expected {n}", ranking.len())));
    }
    let distinct: BTreeSet<_> = ranking.iter().collect();
    if distinct.len() != n || ranking.iter().any(|p| p.0 >= n) {
        return Err(Error::InvalidInput("ranking is not a permutation of the players".into()));
    }
    let mut available: BTreeSet<ItemId> = profile.items().collect();
    let mut item_of = vec![ItemId(0); n];
    for &p in ranking {
        let choice = profile
            .favorite_among(p, &available)
            .expect("as many items as players remain");
        available.remove(&choice);
        item_of[p.0] = choice;
    }
    Assignment::new(item_of)
}

/// Random priority: serial dictatorship under a uniformly random priority
/// order, as an exact matrix. Enumerates all `n!` orders, so `n` is capped
/// at [`RP_MAX_PLAYERS`].
pub fn rp_matrix(profile: &PreferenceProfile) -> Result<ProbabilityMatrix> {
    use itertools::Itertools;
    let n = profile.n();
    if n > RP_MAX_PLAYERS {
        return Err(Error::TooLarge(format!(
            "random priority enumerates n! orders; n = {n} exceeds the bound {RP_MAX_PLAYERS}"
        )));
    }
    let mut counts = vec![vec![0u64; n]; n];
    let mut total = 0u64;
    for ranking in (0..n).permutations(n) {
        let ranking: Vec<PlayerId> = ranking.into_iter().map(PlayerId).collect();
        let assignment = serial_dictatorship(profile, &ranking)?;
        for (p, j) in assignment.pairs() {
            counts[p.0][j.0] += 1;
        }
        total += 1;
    }
    let entries = counts
        .into_iter()
        .map(|row| {
            row.into_iter()
                .map(|c| rational::ratio(c as i64, total as i64))
                .collect()
        })
        .collect();
    ProbabilityMatrix::new(entries)
}

/// Probabilistic serial: everyone eats their favorite remaining item at unit
/// speed; `P(i, j)` is the fraction of item `j` that player `i` has eaten
/// when everything is gone (at time exactly one).
pub fn ps_matrix(profile: &PreferenceProfile) -> Result<ProbabilityMatrix> {
    let n = profile.n();
    let mut left: Vec<Rational> = vec![rational::one(); n];
    let mut gone: BTreeSet<ItemId> = BTreeSet::new();
    let mut eaten = vec![vec![rational::zero(); n]; n];
    let mut current: Vec<Option<ItemId>> = profile.players().map(|p| Some(profile.favorite(p, 0))).collect();

    while gone.len() < n {
        // Eater counts per item; items without eaters just wait.
        let mut eaters = vec![0u32; n];
        for item in current.iter().flatten() {
            eaters[item.0] += 1;
        }
        let step = (0..n)
            .filter(|&j| eaters[j] > 0)
            .map(|j| &left[j] / rational::int(eaters[j] as i64))
            .min()
            .expect("every unfinished player eats something");
        let mut newly_gone = Vec::new();
        for j in 0..n {
            if eaters[j] > 0 {
                left[j] -= &step * rational::int(eaters[j] as i64);
                if left[j] == rational::zero() {
                    newly_gone.push(ItemId(j));
                }
            }
        }
        for (p, item) in current.iter().enumerate() {
            if let Some(j) = item {
                eaten[p][j.0] += &step;
            }
        }
        // Simultaneous exhaustions are processed in ascending item order;
        // with a trusted party the order is immaterial, but it keeps runs
        // byte-for-byte deterministic.
        for j in newly_gone {
            gone.insert(j);
        }
        let available: BTreeSet<ItemId> =
            (0..n).map(ItemId).filter(|j| !gone.contains(j)).collect();
        for p in 0..n {
            if current[p].map_or(false, |j| gone.contains(&j)) {
                current[p] = profile.favorite_among(PlayerId(p), &available);
            }
        }
    }
    let matrix = ProbabilityMatrix::new(eaten)?;
    matrix.require_bistochastic()?;
    Ok(matrix)
}

/// One term of a Birkhoff decomposition.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct LotteryTerm {
    pub weight: Rational,
    pub assignment: Assignment,
}

/// Decomposes a bistochastic matrix into a convex combination of
/// assignments by greedy peeling: repeatedly take the lexicographically
/// smallest perfect matching inside the positive support (smallest item for
/// player 1, then for player 2, ...), peel off its minimum entry, and
/// continue. Deterministic, at most `n² - n + 1` terms.
pub fn decompose(matrix: &ProbabilityMatrix) -> Result<Vec<LotteryTerm>> {
    matrix.require_bistochastic()?;
    let n = matrix.n();
    let mut work: Vec<Vec<Rational>> = (0..n)
        .map(|p| matrix.row(PlayerId(p)).to_vec())
        .collect();
    let mut terms = Vec::new();
    let mut remaining = rational::one();

    while remaining > rational::zero() {
        let matching = lex_smallest_matching(&work)
            .ok_or_else(|| Error::Consistency("support of a bistochastic matrix lost its perfect matching".into()))?;
        let weight = matching
            .iter()
            .enumerate()
            .map(|(p, j)| work[p][j.0].clone())
            .min()
            .expect("matching is nonempty");
        debug_assert!(weight > rational::zero());
        for (p, j) in matching.iter().enumerate() {
            work[p][j.0] -= &weight;
        }
        remaining -= &weight;
        terms.push(LotteryTerm {
            weight,
            assignment: Assignment::new(matching)?,
        });
    }
    // Everything must have been peeled to zero.
    if work.iter().flatten().any(|v| v != &rational::zero()) {
        return Err(Error::Consistency("decomposition left a nonzero residue".into()));
    }
    Ok(terms)
}

/// Re-sums a decomposition back into its matrix (the verification direction).
pub fn recompose(terms: &[LotteryTerm]) -> Result<ProbabilityMatrix> {
    crate::model::induced_matrix(terms.iter().map(|t| (&t.assignment, &t.weight)))
}

/// Lexicographically smallest perfect matching within the positive support:
/// player 0 takes the smallest feasible item, then player 1, and so on.
/// Feasibility of each tentative choice is checked with a bipartite matching
/// on the remainder, so the greedy choice never dead-ends.
fn lex_smallest_matching(work: &[Vec<Rational>]) -> Option<Vec<ItemId>> {
    let n = work.len();
    let mut chosen: Vec<ItemId> = Vec::with_capacity(n);
    let mut used = vec![false; n];
    for p in 0..n {
        let mut advanced = false;
        for j in 0..n {
            if used[j] || work[p][j] == rational::zero() {
                continue;
            }
            used[j] = true;
            if remainder_has_matching(work, p + 1, &used) {
                chosen.push(ItemId(j));
                advanced = true;
                break;
            }
            used[j] = false;
        }
        if !advanced {
            return None;
        }
    }
    Some(chosen)
}

/// Can players `from..n` be matched to unused support items? Kuhn's
/// augmenting-path matching; plenty for the tiny matrices here.
fn remainder_has_matching(work: &[Vec<Rational>], from: usize, used: &[bool]) -> bool {
    let n = work.len();
    let mut match_of_item: Vec<Option<usize>> = vec![None; n];
    fn try_assign(
        p: usize,
        work: &[Vec<Rational>],
        used: &[bool],
        visited: &mut [bool],
        match_of_item: &mut [Option<usize>],
    ) -> bool {
        let n = work.len();
        for j in 0..n {
            if used[j] || visited[j] || work[p][j] == rational::zero() {
                continue;
            }
            visited[j] = true;
            let free = match match_of_item[j] {
                None => true,
                Some(q) => try_assign(q, work, used, visited, match_of_item),
            };
            if free {
                match_of_item[j] = Some(p);
                return true;
            }
        }
        false
    }
    for p in from..n {
        let mut visited = vec![false; n];
        if !try_assign(p, work, used, &mut visited, &mut match_of_item) {
            return false;
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{one, ratio, zero};

    fn ps_example_profile() -> PreferenceProfile {
        PreferenceProfile::from_one_based(&[
            vec![1, 3, 2, 4],
            vec![1, 4, 2, 3],
            vec![2, 3, 1, 4],
            vec![2, 4, 1, 3],
        ])
        .unwrap()
    }

    /// The eating-mechanism matrix of [`ps_example_profile`], derived by hand:
    /// m1 and m2 are split within {1,2} and {3,4} up to time 1/2, then m3 and
    /// m4 are split across the pairs {1,3} and {2,4}.
    fn ps_example_matrix() -> ProbabilityMatrix {
        ProbabilityMatrix::new(vec![
            vec![ratio(1, 2), zero(), ratio(1, 2), zero()],
            vec![ratio(1, 2), zero(), zero(), ratio(1, 2)],
            vec![zero(), ratio(1, 2), ratio(1, 2), zero()],
            vec![zero(), ratio(1, 2), zero(), ratio(1, 2)],
        ])
        .unwrap()
    }

    fn players(ids: &[usize]) -> Vec<PlayerId> {
        ids.iter().map(|&i| PlayerId(i)).collect()
    }

    #[test]
    fn serial_dictatorship_picks_in_priority_order() {
        let profile = ps_example_profile();
        let a = serial_dictatorship(&profile, &players(&[0, 1, 2, 3])).unwrap();
        assert_eq!(a.to_one_based(), vec![1, 4, 2, 3]);
        let a = serial_dictatorship(&profile, &players(&[3, 2, 1, 0])).unwrap();
        assert_eq!(a.to_one_based(), vec![4, 1, 3, 2]);
        assert!(serial_dictatorship(&profile, &players(&[0, 0, 1, 2])).is_err());
        assert!(serial_dictatorship(&profile, &players(&[0, 1])).is_err());
    }

    #[test]
    fn rp_matrix_averages_all_priority_orders() {
        let profile = ps_example_profile();
        let rp = rp_matrix(&profile).unwrap();
        assert!(rp.is_bistochastic());
        // Player 1 gets its favorite m1 iff it precedes player 2.
        assert_eq!(rp.entry(PlayerId(0), ItemId(0)), &ratio(1, 2));
        assert_eq!(rp.entry(PlayerId(1), ItemId(0)), &ratio(1, 2));
        // Nobody else ever takes m1.
        assert_eq!(rp.entry(PlayerId(2), ItemId(0)), &zero());
    }

    #[test]
    fn rp_matrix_refuses_oversized_instances() {
        let n = RP_MAX_PLAYERS + 1;
        let rows: Vec<Vec<usize>> = (0..n).map(|_| (1..=n).collect()).collect();
        let profile = PreferenceProfile::from_one_based(&rows).unwrap();
        assert!(matches!(rp_matrix(&profile), Err(Error::TooLarge(_))));
    }

    #[test]
    fn ps_matrix_matches_the_four_player_example() {
        let profile = ps_example_profile();
        assert_eq!(ps_matrix(&profile).unwrap(), ps_example_matrix());
    }

    #[test]
    fn ps_matrix_on_identical_preferences_is_uniform() {
        for n in 2..=5usize {
            let rows: Vec<Vec<usize>> = (0..n).map(|_| (1..=n).collect()).collect();
            let profile = PreferenceProfile::from_one_based(&rows).unwrap();
            assert_eq!(ps_matrix(&profile).unwrap(), ProbabilityMatrix::uniform(n));
        }
    }

    #[test]
    fn ps_matrix_handles_items_nobody_wants_yet() {
        // Five players: three chase m1 first, two chase m2; m3..m5 idle
        // until the popular items are gone.
        let profile = PreferenceProfile::from_one_based(&[
            vec![1, 2, 3, 4, 5],
            vec![1, 2, 3, 4, 5],
            vec![1, 2, 3, 4, 5],
            vec![2, 1, 3, 4, 5],
            vec![2, 1, 3, 4, 5],
        ])
        .unwrap();
        let ps = ps_matrix(&profile).unwrap();
        let row1 = ps.row(PlayerId(0));
        assert_eq!(row1[0], ratio(1, 3));
        assert_eq!(row1[1], ratio(1, 15));
        assert_eq!(row1[2], ratio(1, 5));
        assert_eq!(row1[3], ratio(1, 5));
        assert_eq!(row1[4], ratio(1, 5));
        let row4 = ps.row(PlayerId(3));
        assert_eq!(row4[1], ratio(2, 5));
        assert_eq!(row4[0], zero());
    }

    #[test]
    fn decompose_uniform_three_by_three() {
        let terms = decompose(&ProbabilityMatrix::uniform(3)).unwrap();
        assert_eq!(terms.len(), 3);
        for term in &terms {
            assert_eq!(term.weight, ratio(1, 3));
        }
        // Lexicographic peeling order.
        assert_eq!(terms[0].assignment.to_one_based(), vec![1, 2, 3]);
        assert_eq!(terms[1].assignment.to_one_based(), vec![2, 3, 1]);
        assert_eq!(terms[2].assignment.to_one_based(), vec![3, 1, 2]);
    }

    #[test]
    fn decompose_splits_the_eating_matrix_into_two_assignments() {
        let terms = decompose(&ps_example_matrix()).unwrap();
        assert_eq!(terms.len(), 2);
        // The lexicographically smaller support matching starts 1 -> m1.
        assert_eq!(terms[0].weight, ratio(1, 2));
        assert_eq!(terms[0].assignment.to_one_based(), vec![1, 4, 3, 2]);
        assert_eq!(terms[1].weight, ratio(1, 2));
        assert_eq!(terms[1].assignment.to_one_based(), vec![3, 1, 2, 4]);
    }

    #[test]
    fn decompose_requires_a_bistochastic_matrix() {
        let lopsided = ProbabilityMatrix::new(vec![
            vec![ratio(1, 2), ratio(1, 2)],
            vec![ratio(1, 4), ratio(3, 4)],
        ])
        .unwrap();
        assert!(decompose(&lopsided).is_err());
    }

    #[test]
    fn decompositions_recompose_exactly() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for trial in 0..40 {
            let n = 2 + trial % 4;
            // A random bistochastic matrix: a convex combination of a few
            // random permutation matrices with small rational weights.
            let k = 1 + rng.gen_range(0..4);
            let mut weights: Vec<i64> = (0..k).map(|_| rng.gen_range(1..6)).collect();
            let total: i64 = weights.iter().sum();
            let mut entries = vec![vec![zero(); n]; n];
            for w in weights.drain(..) {
                let mut items: Vec<usize> = (0..n).collect();
                for i in (1..n).rev() {
                    items.swap(i, rng.gen_range(0..=i));
                }
                for (p, &j) in items.iter().enumerate() {
                    entries[p][j] += ratio(w, total);
                }
            }
            let matrix = ProbabilityMatrix::new(entries).unwrap();
            let terms = decompose(&matrix).unwrap();
            let total_weight =
                terms.iter().fold(zero(), |acc, t| acc + &t.weight);
            assert_eq!(total_weight, one());
            assert!(terms.len() <= n * n - n + 1, "too many terms for n = {n}");
            assert_eq!(recompose(&terms).unwrap(), matrix);
        }
    }

    #[test]
    fn recompose_is_inverse_on_the_uniform_matrix() {
        let terms = decompose(&ProbabilityMatrix::uniform(4)).unwrap();
        assert_eq!(recompose(&terms).unwrap(), ProbabilityMatrix::uniform(4));
    }
}
