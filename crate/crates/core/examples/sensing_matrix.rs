//! The sensing matrix `A = S F D` of a small converter and its
//! conditioning: every set of `2N` columns must be linearly independent for
//! blind recovery.

use mwc_lab::ctf::check_subset_rank;
use mwc_lab::frontend::{build_sensing_matrix, derive_params, gen_sign_matrix, MwcConfig, SignMode, SignalClass};
use mwc_lab::seed::SeedTree;

fn main() -> mwc_lab::Result<()> {
    let class = SignalClass { n_bands: 2, band_width: 30e6, nyquist_rate: 1e9 };
    let fp = 1e9 / 15.0;
    let params = derive_params(&class, fp, fp)?;
    for m in [4, 6, 8] {
        let signs = gen_sign_matrix(m, 15, &mut SeedTree::new(3).rng(), SignMode::Independent)?;
        let config = MwcConfig::new(signs, fp, 1)?;
        let matrix = build_sensing_matrix(&config, &params)?;
        let rank = check_subset_rank(&matrix.a, 2 * class.n_bands)?;
        println!(
            "m = {m}: A is {}x{}, every {}-column subset full rank: {} (worst cond {:.1})",
            matrix.n_rows(),
            matrix.n_slices(),
            2 * class.n_bands,
            rank.full_rank,
            rank.worst_condition
        );
    }
    Ok(())
}
