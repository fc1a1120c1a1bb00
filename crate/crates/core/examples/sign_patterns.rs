//! Periodic sign waveforms: independent rows, rows taken from a few shifted
//! registers, and the Fourier coefficients each pattern contributes.

use mwc_lab::frontend::{fourier_coeff, gen_sign_matrix, SignMode};
use mwc_lab::seed::SeedTree;

fn main() -> mwc_lab::Result<()> {
    let mut rng = SeedTree::new(7).rng();
    let independent = gen_sign_matrix(4, 19, &mut rng, SignMode::Independent)?;
    println!("independent rows:\n{}", independent.to_text());

    let shared = gen_sign_matrix(6, 19, &mut rng, SignMode::SharedRegister { registers: 2, shift: 3 })?;
    println!("two registers, each reused with a shift of 3 chips:\n{}", shared.to_text());

    let row = independent.row(0);
    println!("|c_l| of row 0:");
    for l in 0..=12 {
        println!("  l = {l:>2}  {:.4}", fourier_coeff(row, l).norm());
    }
    Ok(())
}
