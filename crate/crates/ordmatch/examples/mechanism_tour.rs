//! The offline mechanisms on one contested four-player profile.
//!
//! Players 1 and 2 both want m1 first, players 3 and 4 both want m2, and
//! the second choices interleave. Simultaneous eating splits every
//! contested item cleanly; random priority over all 4! orders agrees here
//! on the contested items but wastes probability elsewhere. The eating
//! matrix then factors into two deterministic assignments, each stable,
//! and recomposing the lottery gives the matrix back.

use ordmatch::analysis::{check_equal_treatment, is_ordinally_efficient, is_stable, TreatmentStrength};
use ordmatch::mechanisms::{decompose, ps_matrix, recompose, rp_matrix, serial_dictatorship};
use ordmatch::model::{PlayerId, PreferenceProfile};
use ordmatch::rational::format_exact;

fn main() -> ordmatch::Result<()> {
    let profile = PreferenceProfile::parse_text(include_str!("ex-ps.prof"))?;

    let ps = ps_matrix(&profile)?;
    println!("simultaneous eating:");
    for p in profile.players() {
        let cells: Vec<String> = ps.row(p).iter().map(format_exact).collect();
        println!("  player {p}: [{}]", cells.join(", "));
    }
    let efficiency = is_ordinally_efficient(&ps, &profile)?;
    println!("ordinally efficient: {}", efficiency.efficient);
    let treatment = check_equal_treatment(&ps, &profile, TreatmentStrength::Strong)?;
    println!("equal treatment of equals: {}", treatment.holds);

    let rp = rp_matrix(&profile)?;
    println!("random priority puts {} on player 1's favorite (eating gives {})",
        format_exact(rp.entry(PlayerId(0), profile.order(PlayerId(0))[0])),
        format_exact(ps.entry(PlayerId(0), profile.order(PlayerId(0))[0])),
    );

    println!("lottery decomposition:");
    let terms = decompose(&ps)?;
    for term in &terms {
        let items: Vec<String> =
            profile.players().map(|p| term.assignment.item_of(p).to_string()).collect();
        let stability = is_stable(&term.assignment, &profile);
        println!(
            "  weight {}: [{}] (stable: {})",
            format_exact(&term.weight),
            items.join(", "),
            stability.stable,
        );
    }
    assert_eq!(recompose(&terms)?, ps, "the lottery averages back to the matrix");
    println!("recomposition: exact");

    let ranking: Vec<PlayerId> = profile.players().collect();
    let sd = serial_dictatorship(&profile, &ranking)?;
    let items: Vec<String> =
        profile.players().map(|p| sd.item_of(p).to_string()).collect();
    println!("serial dictatorship under ranking 1 2 3 4: [{}]", items.join(", "));
    Ok(())
}
