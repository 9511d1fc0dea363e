//! Core data model: players, items, preference profiles, assignments,
//! probability matrices, and the dominance orders that all guarantees in
//! this crate are phrased in.
//!
//! Indices are dense and zero-based everywhere inside the crate; every
//! human-facing rendering (text profiles, JSON, `Display`) is one-based, with
//! items written `m1, m2, ...`.

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::rational::{self, Rational};
use crate::{Error, Result};

/// A player, identified by a dense zero-based index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct PlayerId(pub usize);

/// An item, identified by a dense zero-based index.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct ItemId(pub usize);

impl fmt::Display for PlayerId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0 + 1)
    }
}

impl fmt::Display for ItemId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "m{}", self.0 + 1)
    }
}

/// Strict total preference orders for `n` players over `n` items.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct PreferenceProfile {
    /// `orders[p][r]` is player `p`'s rank-`r` favorite (rank 0 = best).
    orders: Vec<Vec<ItemId>>,
    /// `ranks[p][j]` is the rank player `p` gives item `j` (inverse of `orders`).
    ranks: Vec<Vec<usize>>,
}

impl PreferenceProfile {
    /// Builds a profile from one order per player, validating that each row
    /// is a permutation of all `n` items.
    pub fn new(orders: Vec<Vec<ItemId>>) -> Result<Self> {
        let n = orders.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty preference profile".into()));
        }
        let mut ranks = vec![vec![usize::MAX; n]; n];
        for (p, order) in orders.iter().enumerate() {
            if order.len() != n {
                return Err(Error::Dimension(format!(
                    "player {} ranks {} items, expected {n}",
                    p + 1,
                    order.len()
                )));
            }
            for (rank, &item) in order.iter().enumerate() {
                if item.0 >= n {
                    return Err(Error::InvalidInput(format!(
                        "player {} ranks nonexistent item {} (n = {n})",
                        p + 1,
                        item.0 + 1
                    )));
                }
                if ranks[p][item.0] != usize::MAX {
                    return Err(Error::InvalidInput(format!(
                        "player {} ranks item {} twice",
                        p + 1,
                        item
                    )));
                }
                ranks[p][item.0] = rank;
            }
        }
        Ok(Self { orders, ranks })
    }

    /// Convenience constructor from one-based item indices, most preferred
    /// first — the same shape as the text file format.
    pub fn from_one_based(rows: &[Vec<usize>]) -> Result<Self> {
        let orders = rows
            .iter()
            .map(|row| {
                row.iter()
                    .map(|&j| {
                        j.checked_sub(1)
                            .map(ItemId)
                            .ok_or_else(|| Error::InvalidInput("item index 0 in profile (indices are one-based)".into()))
                    })
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(orders)
    }

    /// Parses the text format: first line `n`, then one line per player with
    /// `n` one-based item indices, most preferred first. Blank lines and
    /// `#`-comments are ignored.
    pub fn parse_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());
        let (first_no, first) = lines
            .next()
            .ok_or_else(|| Error::InvalidInput("empty profile file".into()))?;
        let n: usize = first.parse().map_err(|_| {
            Error::InvalidInput(format!("line {first_no}: expected player count, got {first:?}"))
        })?;
        if n == 0 {
            return Err(Error::InvalidInput(format!("line {first_no}: player count must be positive")));
        }
        let mut rows = Vec::with_capacity(n);
        for _ in 0..n {
            let (line_no, line) = lines.next().ok_or_else(|| {
                Error::InvalidInput(format!("expected {n} preference lines, found {}", rows.len()))
            })?;
            let row = line
                .split_whitespace()
                .map(|tok| {
                    tok.parse::<usize>().map_err(|_| {
                        Error::InvalidInput(format!("line {line_no}: bad item index {tok:?}"))
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            rows.push(row);
        }
        if let Some((line_no, _)) = lines.next() {
            return Err(Error::InvalidInput(format!(
                "line {line_no}: trailing content after {n} preference lines"
            )));
        }
        Self::from_one_based(&rows)
    }

    /// Renders the text format parsed by [`PreferenceProfile::parse_text`].
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.n());
        for order in &self.orders {
            let row: Vec<String> = order.iter().map(|j| (j.0 + 1).to_string()).collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    /// Number of players (= number of items).
    pub fn n(&self) -> usize {
        self.orders.len()
    }

    /// All players, in index order.
    pub fn players(&self) -> impl Iterator<Item = PlayerId> {
        (0..self.n()).map(PlayerId)
    }

    /// All items, in index order.
    pub fn items(&self) -> impl Iterator<Item = ItemId> {
        (0..self.n()).map(ItemId)
    }

    /// Player `p`'s full order, most preferred first.
    pub fn order(&self, p: PlayerId) -> &[ItemId] {
        &self.orders[p.0]
    }

    /// Player `p`'s favorite at `rank` (0 = most preferred).
    pub fn favorite(&self, p: PlayerId, rank: usize) -> ItemId {
        self.orders[p.0][rank]
    }

    /// Player `p`'s most preferred item among `available`, if any.
    pub fn favorite_among(&self, p: PlayerId, available: &BTreeSet<ItemId>) -> Option<ItemId> {
        self.orders[p.0].iter().copied().find(|j| available.contains(j))
    }

    /// The rank player `p` gives item `j` (0 = most preferred).
    pub fn rank(&self, p: PlayerId, j: ItemId) -> usize {
        self.ranks[p.0][j.0]
    }

    /// Whether player `p` strictly prefers item `a` to item `b`.
    pub fn prefers(&self, p: PlayerId, a: ItemId, b: ItemId) -> bool {
        self.rank(p, a) < self.rank(p, b)
    }

    /// Player `p`'s `len` most preferred items.
    pub fn top(&self, p: PlayerId, len: usize) -> &[ItemId] {
        &self.orders[p.0][..len]
    }

    /// A copy of the profile with player `p`'s order replaced — the basic
    /// building block for misreport analysis.
    pub fn with_order(&self, p: PlayerId, order: Vec<ItemId>) -> Result<Self> {
        let mut orders = self.orders.clone();
        orders[p.0] = order;
        Self::new(orders)
    }

    /// A copy with items relabeled: item `j` becomes `perm[j]`.
    pub fn relabel_items(&self, perm: &[ItemId]) -> Result<Self> {
        let orders = self
            .orders
            .iter()
            .map(|row| row.iter().map(|j| perm[j.0]).collect())
            .collect();
        Self::new(orders)
    }
}

/// All strict orders over `n` items, in lexicographic order of item indices.
pub fn all_orders(n: usize) -> Vec<Vec<ItemId>> {
    use itertools::Itertools;
    (0..n).permutations(n).map(|p| p.into_iter().map(ItemId).collect()).collect()
}

/// A complete assignment: every player holds exactly one item.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct Assignment {
    item_of: Vec<ItemId>,
}

impl Assignment {
    /// Validates that `item_of` is a bijection.
    pub fn new(item_of: Vec<ItemId>) -> Result<Self> {
        let n = item_of.len();
        let mut seen = vec![false; n];
        for &j in &item_of {
            if j.0 >= n {
                return Err(Error::InvalidInput(format!(
                    "assignment uses nonexistent item {} (n = {n})",
                    j.0 + 1
                )));
            }
            if seen[j.0] {
                return Err(Error::InvalidInput(format!("item {j} assigned twice")));
            }
            seen[j.0] = true;
        }
        Ok(Self { item_of })
    }

    /// Convenience constructor from one-based item indices.
    pub fn from_one_based(items: &[usize]) -> Result<Self> {
        let item_of = items
            .iter()
            .map(|&j| {
                j.checked_sub(1)
                    .map(ItemId)
                    .ok_or_else(|| Error::InvalidInput("item index 0 in assignment".into()))
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(item_of)
    }

    pub fn n(&self) -> usize {
        self.item_of.len()
    }

    /// The item player `p` holds.
    pub fn item_of(&self, p: PlayerId) -> ItemId {
        self.item_of[p.0]
    }

    /// The player holding item `j`.
    pub fn player_of(&self, j: ItemId) -> PlayerId {
        PlayerId(self.item_of.iter().position(|&i| i == j).expect("assignment is a bijection"))
    }

    /// `(player, item)` pairs in player order.
    pub fn pairs(&self) -> impl Iterator<Item = (PlayerId, ItemId)> + '_ {
        self.item_of.iter().enumerate().map(|(p, &j)| (PlayerId(p), j))
    }

    /// One-based item index per player, the JSON-facing shape.
    pub fn to_one_based(&self) -> Vec<usize> {
        self.item_of.iter().map(|j| j.0 + 1).collect()
    }

    /// The 0/1 permutation matrix of this assignment.
    pub fn permutation_matrix(&self) -> ProbabilityMatrix {
        let n = self.n();
        let mut entries = vec![vec![rational::zero(); n]; n];
        for (p, j) in self.pairs() {
            entries[p.0][j.0] = rational::one();
        }
        ProbabilityMatrix::new(entries).expect("permutation matrix is valid")
    }
}

impl fmt::Display for Assignment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.pairs().map(|(p, j)| format!("{p}\u{2192}{j}")).collect();
        write!(f, "{}", parts.join(", "))
    }
}

/// A nonnegative `n × n` matrix of exact probabilities; rows are players,
/// columns are items. Random assignments are the bistochastic ones.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProbabilityMatrix {
    entries: Vec<Vec<Rational>>,
}

impl ProbabilityMatrix {
    /// Validates shape and nonnegativity.
    pub fn new(entries: Vec<Vec<Rational>>) -> Result<Self> {
        let n = entries.len();
        if n == 0 {
            return Err(Error::InvalidInput("empty matrix".into()));
        }
        for (p, row) in entries.iter().enumerate() {
            if row.len() != n {
                return Err(Error::Dimension(format!(
                    "row {} has {} entries, expected {n}",
                    p + 1,
                    row.len()
                )));
            }
            for (j, value) in row.iter().enumerate() {
                if value < &rational::zero() {
                    return Err(Error::InvalidInput(format!(
                        "negative probability at row {}, column {}",
                        p + 1,
                        j + 1
                    )));
                }
            }
        }
        Ok(Self { entries })
    }

    /// Parses entries given as `"num/den"` strings.
    pub fn from_strings(rows: &[Vec<String>]) -> Result<Self> {
        let entries = rows
            .iter()
            .map(|row| row.iter().map(|s| rational::parse(s)).collect::<Result<Vec<_>>>())
            .collect::<Result<Vec<_>>>()?;
        Self::new(entries)
    }

    /// The uniform bistochastic matrix, every entry `1/n`.
    pub fn uniform(n: usize) -> Self {
        let cell = rational::ratio(1, n as i64);
        Self { entries: vec![vec![cell; n]; n] }
    }

    pub fn n(&self) -> usize {
        self.entries.len()
    }

    pub fn row(&self, p: PlayerId) -> &[Rational] {
        &self.entries[p.0]
    }

    pub fn entry(&self, p: PlayerId, j: ItemId) -> &Rational {
        &self.entries[p.0][j.0]
    }

    /// Checks that every row and every column sums to exactly one.
    pub fn require_bistochastic(&self) -> Result<()> {
        let n = self.n();
        for p in 0..n {
            let sum = rational::sum(&self.entries[p]);
            if sum != rational::one() {
                return Err(Error::Consistency(format!(
                    "row {} sums to {}, not 1",
                    p + 1,
                    rational::format_exact(&sum)
                )));
            }
        }
        for j in 0..n {
            let sum: Rational =
                (0..n).map(|p| self.entries[p][j].clone()).fold(rational::zero(), |a, b| a + b);
            if sum != rational::one() {
                return Err(Error::Consistency(format!(
                    "column {} sums to {}, not 1",
                    j + 1,
                    rational::format_exact(&sum)
                )));
            }
        }
        Ok(())
    }

    pub fn is_bistochastic(&self) -> bool {
        self.require_bistochastic().is_ok()
    }

    /// Entries as `"num/den"` strings, the JSON-facing shape.
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        self.entries
            .iter()
            .map(|row| row.iter().map(rational::format_exact).collect())
            .collect()
    }

    /// Serializable JSON form (`{"n": .., "entries": [["num/den", ..], ..]}`).
    pub fn to_json(&self) -> MatrixJson {
        MatrixJson { n: self.n(), entries: self.to_strings() }
    }

    pub fn from_json(json: &MatrixJson) -> Result<Self> {
        let matrix = Self::from_strings(&json.entries)?;
        if matrix.n() != json.n {
            return Err(Error::Dimension(format!(
                "matrix declares n = {}, entries are {}×{}",
                json.n,
                matrix.n(),
                matrix.n()
            )));
        }
        Ok(matrix)
    }
}

/// JSON wire form of a [`ProbabilityMatrix`].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct MatrixJson {
    pub n: usize,
    pub entries: Vec<Vec<String>>,
}

/// The matrix induced by a distribution over assignments: entry `(i, j)` is
/// the total probability that player `i` receives item `j`.
pub fn induced_matrix<'a, I>(outcomes: I) -> Result<ProbabilityMatrix>
where
    I: IntoIterator<Item = (&'a Assignment, &'a Rational)>,
{
    let mut entries: Option<Vec<Vec<Rational>>> = None;
    let mut total = rational::zero();
    for (assignment, prob) in outcomes {
        if prob < &rational::zero() {
            return Err(Error::InvalidInput("negative outcome probability".into()));
        }
        let n = assignment.n();
        let rows = entries.get_or_insert_with(|| vec![vec![rational::zero(); n]; n]);
        if rows.len() != n {
            return Err(Error::Dimension("assignments of mixed sizes".into()));
        }
        for (p, j) in assignment.pairs() {
            rows[p.0][j.0] += prob;
        }
        total += prob;
    }
    let entries = entries.ok_or_else(|| Error::InvalidInput("empty outcome distribution".into()))?;
    if total != rational::one() {
        return Err(Error::Consistency(format!(
            "outcome probabilities sum to {}, not 1",
            rational::format_exact(&total)
        )));
    }
    ProbabilityMatrix::new(entries)
}

/// Witness that a prefix-sum comparison failed: at the `prefix_len` most
/// preferred items, `left_prefix < right_prefix`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DominanceViolation {
    pub prefix_len: usize,
    pub left_prefix: Rational,
    pub right_prefix: Rational,
}

impl fmt::Display for DominanceViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "prefix {}: {} < {}",
            self.prefix_len,
            rational::format_full(&self.left_prefix),
            rational::format_full(&self.right_prefix)
        )
    }
}

/// First prefix (in the order `order`, most preferred first) at which `left`
/// fails to weakly dominate `right`, or `None` if `left` dominates.
///
/// `left` and `right` are indexed by item; they may be sub-distributions
/// (sums below one), which is what worst-case rows are.
pub fn dominance_violation(
    left: &[Rational],
    right: &[Rational],
    order: &[ItemId],
) -> Option<DominanceViolation> {
    let mut left_acc = rational::zero();
    let mut right_acc = rational::zero();
    for (pos, &item) in order.iter().enumerate() {
        left_acc += &left[item.0];
        right_acc += &right[item.0];
        if left_acc < right_acc {
            return Some(DominanceViolation {
                prefix_len: pos + 1,
                left_prefix: left_acc,
                right_prefix: right_acc,
            });
        }
    }
    None
}

/// Vector dominance: every prefix sum of `left` along `order` is at least
/// the matching prefix sum of `right`.
pub fn dominates_vec(left: &[Rational], right: &[Rational], order: &[ItemId]) -> bool {
    dominance_violation(left, right, order).is_none()
}

/// Matrix dominance: every player's row of `left` dominates its row of
/// `right` with respect to that player's own preference order.
pub fn dominates_matrix(
    left: &ProbabilityMatrix,
    right: &ProbabilityMatrix,
    profile: &PreferenceProfile,
) -> bool {
    profile
        .players()
        .all(|p| dominates_vec(left.row(p), right.row(p), profile.order(p)))
}

/// Strict matrix dominance: dominance plus at least one differing entry.
pub fn strictly_dominates_matrix(
    left: &ProbabilityMatrix,
    right: &ProbabilityMatrix,
    profile: &PreferenceProfile,
) -> bool {
    left != right && dominates_matrix(left, right, profile)
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

    #[test]
    fn profile_round_trips_through_text() {
        let profile = ps_example_profile();
        let text = profile.to_text();
        assert_eq!(PreferenceProfile::parse_text(&text).unwrap(), profile);
        assert_eq!(text.lines().next(), Some("4"));
    }

    #[test]
    fn profile_text_accepts_comments_and_blanks() {
        let text = "# demo\n2\n\n1 2  # player 1\n2 1\n";
        let profile = PreferenceProfile::parse_text(text).unwrap();
        assert_eq!(profile.favorite(PlayerId(0), 0), ItemId(0));
        assert_eq!(profile.favorite(PlayerId(1), 0), ItemId(1));
    }

    #[test]
    fn profile_rejects_malformed_input() {
        assert!(PreferenceProfile::parse_text("").is_err());
        assert!(PreferenceProfile::parse_text("2\n1 2\n").is_err()); // missing row
        assert!(PreferenceProfile::parse_text("2\n1 1\n2 1\n").is_err()); // repeat
        assert!(PreferenceProfile::parse_text("2\n1 3\n2 1\n").is_err()); // out of range
        assert!(PreferenceProfile::parse_text("2\n0 1\n2 1\n").is_err()); // zero index
        assert!(PreferenceProfile::parse_text("2\n1 2\n2 1\n3 4\n").is_err()); // trailing
        assert!(PreferenceProfile::parse_text("2\n1 2 1\n2 1\n").is_err()); // too wide
    }

    #[test]
    fn ranks_and_favorites_are_inverse() {
        let profile = ps_example_profile();
        for p in profile.players() {
            for rank in 0..profile.n() {
                let item = profile.favorite(p, rank);
                assert_eq!(profile.rank(p, item), rank);
            }
        }
        assert!(profile.prefers(PlayerId(0), ItemId(2), ItemId(1))); // m3 over m2
        assert_eq!(profile.top(PlayerId(1), 2), &[ItemId(0), ItemId(3)]);
    }

    #[test]
    fn favorite_among_respects_availability() {
        let profile = ps_example_profile();
        let available: BTreeSet<ItemId> = [ItemId(1), ItemId(3)].into();
        assert_eq!(profile.favorite_among(PlayerId(0), &available), Some(ItemId(1)));
        assert_eq!(profile.favorite_among(PlayerId(1), &available), Some(ItemId(3)));
        assert_eq!(profile.favorite_among(PlayerId(0), &BTreeSet::new()), None);
    }

    #[test]
    fn all_orders_enumerates_permutations() {
        assert_eq!(all_orders(3).len(), 6);
        assert_eq!(all_orders(3)[0], vec![ItemId(0), ItemId(1), ItemId(2)]);
        let distinct: BTreeSet<_> = all_orders(4).into_iter().collect();
        assert_eq!(distinct.len(), 24);
    }

    #[test]
    fn assignment_validates_bijection() {
        assert!(Assignment::from_one_based(&[3, 1, 2, 4]).is_ok());
        assert!(Assignment::from_one_based(&[1, 1, 2, 4]).is_err());
        assert!(Assignment::from_one_based(&[1, 2, 3, 5]).is_err());
        let a = Assignment::from_one_based(&[3, 1, 2, 4]).unwrap();
        assert_eq!(a.item_of(PlayerId(0)), ItemId(2));
        assert_eq!(a.player_of(ItemId(2)), PlayerId(0));
        assert_eq!(a.to_one_based(), vec![3, 1, 2, 4]);
        assert_eq!(a.to_string(), "1\u{2192}m3, 2\u{2192}m1, 3\u{2192}m2, 4\u{2192}m4");
    }

    #[test]
    fn permutation_matrix_is_bistochastic() {
        let a = Assignment::from_one_based(&[2, 3, 1]).unwrap();
        let m = a.permutation_matrix();
        assert!(m.is_bistochastic());
        assert_eq!(m.entry(PlayerId(0), ItemId(1)), &one());
        assert_eq!(m.entry(PlayerId(0), ItemId(0)), &zero());
    }

    #[test]
    fn bistochastic_check_catches_bad_rows_and_columns() {
        let m = ProbabilityMatrix::new(vec![
            vec![ratio(1, 2), ratio(1, 2)],
            vec![ratio(1, 2), ratio(1, 4)],
        ])
        .unwrap();
        assert!(!m.is_bistochastic());
        let m = ProbabilityMatrix::new(vec![
            vec![ratio(1, 2), ratio(1, 2)],
            vec![ratio(1, 2), ratio(1, 2)],
        ])
        .unwrap();
        assert!(m.is_bistochastic());
        // Rows sum to one but columns do not.
        let m = ProbabilityMatrix::new(vec![
            vec![one(), zero()],
            vec![one(), zero()],
        ])
        .unwrap();
        assert!(!m.is_bistochastic());
        assert!(ProbabilityMatrix::new(vec![vec![ratio(-1, 2), ratio(3, 2)], vec![one(), zero()]])
            .is_err());
    }

    #[test]
    fn matrix_json_round_trips() {
        let m = ProbabilityMatrix::uniform(3);
        let json = serde_json::to_string(&m.to_json()).unwrap();
        let parsed: MatrixJson = serde_json::from_str(&json).unwrap();
        assert_eq!(ProbabilityMatrix::from_json(&parsed).unwrap(), m);
        assert!(json.contains("\"1/3\""));
    }

    #[test]
    fn induced_matrix_averages_permutations() {
        let a = Assignment::from_one_based(&[3, 1, 2, 4]).unwrap(); // head
        let b = Assignment::from_one_based(&[1, 4, 3, 2]).unwrap(); // tail
        let half = ratio(1, 2);
        let m = induced_matrix([(&a, &half), (&b, &half)]).unwrap();
        assert!(m.is_bistochastic());
        assert_eq!(m.entry(PlayerId(0), ItemId(2)), &half);
        assert_eq!(m.entry(PlayerId(0), ItemId(0)), &half);
        assert_eq!(m.entry(PlayerId(3), ItemId(3)), &half);
        assert_eq!(m.entry(PlayerId(3), ItemId(1)), &half);
        assert_eq!(m.entry(PlayerId(0), ItemId(1)), &zero());

        let bad = induced_matrix([(&a, &half)]);
        assert!(bad.is_err(), "probabilities must sum to one");
    }

    #[test]
    fn dominance_compares_prefix_sums() {
        // Player 1's probabilistic-serial row against a hand-made competitor,
        // along the order m1 > m3 > m2 > m4.
        let order = [ItemId(0), ItemId(2), ItemId(1), ItemId(3)];
        let left = [ratio(1, 2), zero(), ratio(1, 2), zero()];
        let right = [ratio(1, 2), ratio(1, 4), ratio(1, 8), ratio(1, 8)];
        assert!(dominates_vec(&left, &right, &order));
        assert!(!dominates_vec(&right, &left, &order));
        let violation = dominance_violation(&right, &left, &order).unwrap();
        assert_eq!(violation.prefix_len, 2);
        assert_eq!(violation.left_prefix, ratio(5, 8));
        assert_eq!(violation.right_prefix, one());
    }

    #[test]
    fn dominance_handles_sub_distributions() {
        let order = [ItemId(0), ItemId(1)];
        let worst = [ratio(1, 3), ratio(1, 3)];
        let honest = [ratio(1, 2), ratio(1, 2)];
        assert!(dominates_vec(&honest, &worst, &order));
        let violation = dominance_violation(&worst, &honest, &order).unwrap();
        assert_eq!(violation.prefix_len, 1);
    }

    #[test]
    fn dominance_is_reflexive_and_antisymmetric_on_matrices() {
        let profile = ps_example_profile();
        let uniform = ProbabilityMatrix::uniform(4);
        assert!(dominates_matrix(&uniform, &uniform, &profile));
        assert!(!strictly_dominates_matrix(&uniform, &uniform, &profile));

        let ps = ProbabilityMatrix::new(vec![
            vec![ratio(1, 2), zero(), ratio(1, 2), zero()],
            vec![ratio(1, 2), zero(), zero(), ratio(1, 2)],
            vec![zero(), ratio(1, 2), ratio(1, 2), zero()],
            vec![zero(), ratio(1, 2), zero(), ratio(1, 2)],
        ])
        .unwrap();
        assert!(strictly_dominates_matrix(&ps, &uniform, &profile));
        assert!(!dominates_matrix(&uniform, &ps, &profile));
    }
}
