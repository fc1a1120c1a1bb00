//! Design parameters of the 10 GHz, six-band converter at the two sampling
//! choices: one channel per slice rate (`q = 1`) and five-fold faster
//! channels (`q = 5`).

use mwc_lab::experiments::params_report;
use mwc_lab::frontend::SignalClass;

fn main() -> mwc_lab::Result<()> {
    let class = SignalClass { n_bands: 6, band_width: 50e6, nyquist_rate: 10e9 };
    let fp = class.nyquist_rate / 195.0;
    for q in [1.0, 5.0] {
        let report = params_report(&class, fp, q * fp, 195)?;
        println!("--- f_s = {q} f_p");
        println!("{report}");
    }
    Ok(())
}
