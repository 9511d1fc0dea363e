//! Fixed versus varying eating rates on a five-player race.
//!
//! Three players chase m1 while two chase m2, so whoever loses the m1
//! race arrives at m2 late. At fixed unit rates that lateness is never
//! compensated and player 1's top-two chance lands at 7/18 — below the
//! uniform 2/5. Restoring every survivor's rate to 1/(1 - t) after each
//! tournament lifts it back to exactly 2/5 and makes every row dominate
//! the uniform lottery.

use ordmatch::adversary::AdversaryStrategy;
use ordmatch::analysis::{check_uniform_dominance, exact_row, DEFAULT_BUDGET};
use ordmatch::model::PreferenceProfile;
use ordmatch::protocols::ProtocolKind;
use ordmatch::rational::{format_exact, prefix_sums};

fn main() -> ordmatch::Result<()> {
    let profile = PreferenceProfile::parse_text(include_str!("ex-onlineps.prof"))?;
    let honest = AdversaryStrategy::honest();

    for (kind, label) in [
        (ProtocolKind::OnlinePs, "fixed rates"),
        (ProtocolKind::OnlinePsVar, "varying rates"),
    ] {
        println!("{label}:");
        for p in profile.players() {
            let (row, _) = exact_row(kind, &profile, &honest, p, DEFAULT_BUDGET)?;
            let ordered: Vec<_> =
                profile.order(p).iter().map(|j| row[j.0].clone()).collect();
            let prefixes = prefix_sums(&ordered);
            let report = check_uniform_dominance(&row, profile.order(p));
            let verdict = match report.violation {
                None => "dominates the uniform lottery".to_string(),
                Some(v) => format!(
                    "top-{} mass {} falls below {}",
                    v.prefix_len,
                    format_exact(&v.left_prefix),
                    format_exact(&v.right_prefix)
                ),
            };
            let shown: Vec<String> = prefixes.iter().map(format_exact).collect();
            println!("  player {}: prefixes [{}] -- {verdict}", p, shown.join(", "));
        }
    }
    Ok(())
}
