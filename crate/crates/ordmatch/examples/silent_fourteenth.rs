//! A single silent player tips a fourteen-player run.
//!
//! Player 1 wants m3 and, when everyone behaves, gets it with probability
//! 1132927/1499784 (about 0.7554). If player 4 never sends its first
//! message, m1 is shared by one mouth fewer, every exhaustion time
//! downstream shifts, and player 1's chance drops to 77/102 (about
//! 0.7549) — strictly below the honest value, so the varying-rate eating
//! protocol is not maximin secure.
//!
//! The timing is what matters: the same player aborting *inside* the
//! first tournament instead (after the shared clock already ran to 1/3)
//! leaves player 1 better off than honest play. Both runs finish in well
//! under a second thanks to the memoized row DP.

use ordmatch::adversary::AdversaryStrategy;
use ordmatch::analysis::{check_maximin, DEFAULT_BUDGET};
use ordmatch::model::{PlayerId, PreferenceProfile};
use ordmatch::protocols::ProtocolKind;
use ordmatch::rational::{format_decimal, format_exact};

fn main() -> ordmatch::Result<()> {
    let profile = PreferenceProfile::parse_text(include_str!("ex-14player.prof"))?;
    let strategy = AdversaryStrategy::crash_from_start([PlayerId(3)]);
    strategy.validate(profile.n())?;

    let focus = PlayerId(0);
    let report =
        check_maximin(ProtocolKind::OnlinePsVar, &profile, focus, &strategy, DEFAULT_BUDGET)?;

    let favorite = profile.order(focus)[0];
    println!(
        "honest run:        P[player {focus} gets {favorite}] = {} ({})",
        format_exact(&report.honest_row[favorite.0]),
        format_decimal(&report.honest_row[favorite.0]),
    );
    println!(
        "player 4 silent:   P[player {focus} gets {favorite}] = {} ({})",
        format_exact(&report.adversarial_row[favorite.0]),
        format_decimal(&report.adversarial_row[favorite.0]),
    );
    match report.violation {
        Some(v) => println!(
            "maximin security breaks at prefix {}: {} < {}",
            v.prefix_len,
            format_exact(&v.left_prefix),
            format_exact(&v.right_prefix),
        ),
        None => println!("maximin security held (unexpected on this instance)"),
    }
    println!("states stepped: {}", report.stats.nodes);
    Ok(())
}
