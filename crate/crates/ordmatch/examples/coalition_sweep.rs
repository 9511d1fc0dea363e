//! Exhaustive worst-case sweeps at small n.
//!
//! For every canonical three-player profile (player 1's order fixed to
//! m1 m2 m3 — the protocols commute with item relabelings, so this loses
//! nothing), pit each player against the maximal fail-stop coalition of
//! the other two and let backward induction range over every crash subset
//! and every abort decision. The priority protocol survives all of it;
//! the eating protocol with varying rates instead clears the weaker
//! uniform bar against full Byzantine coalitions, misdeclarations and
//! dictated duels included.

use ordmatch::analysis::{
    byzantine_uniform_secure, canonical_profiles, failstop_worst_secure, DEFAULT_BUDGET,
};
use ordmatch::protocols::ProtocolKind;

fn main() -> ordmatch::Result<()> {
    for n in [2, 3] {
        let mut checked = 0usize;
        for profile in canonical_profiles(n) {
            if let Some(breach) =
                failstop_worst_secure(ProtocolKind::PreferencePriority, &profile, DEFAULT_BUDGET)?
            {
                println!("pp, n = {n}: BREACH -- {breach}");
                return Ok(());
            }
            checked += 1;
        }
        println!("pp, n = {n}: maximin secure on all {checked} canonical profiles");
    }

    for n in [2, 3] {
        let mut checked = 0usize;
        for profile in canonical_profiles(n) {
            if let Some(breach) =
                byzantine_uniform_secure(ProtocolKind::OnlinePsVar, &profile, DEFAULT_BUDGET)?
            {
                println!("opsvar, n = {n}: BREACH -- {breach}");
                return Ok(());
            }
            checked += 1;
        }
        println!("opsvar, n = {n}: uniformly dominant in the worst case on all {checked} canonical profiles");
    }
    Ok(())
}
