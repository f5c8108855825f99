//! Sweeps the head-token mass of the fixed-entropy regime and prints the mean
//! compression ratio at each entropy. Pass an output path to also write CSV.

use compsig::compress::CompressorConfig;
use compsig::synth::{self, EntropyRegime, SweepParams};

fn main() -> compsig::Result<()> {
    let regime = EntropyRegime::new(0.5, 8)?;
    println!("h=0.5 over 8 words: pmf {:?}", regime.pmf());
    println!("entropy {:.4} bits (max {:.4})", regime.entropy_bits(), 3.0);
    println!("sample: {}\n", synth::sample_text(&regime, 12, 7)?.text);

    let params = SweepParams {
        samples_per_h: 20,
        ..Default::default()
    };
    let rows = synth::entropy_sweep(&params, &CompressorConfig::default())?;
    println!("{:>8} {:>8} {:>8} {:>8}", "h", "H(bits)", "mean R", "sd R");
    for r in &rows {
        println!("{:>8.4} {:>8.3} {:>8.4} {:>8.4}", r.h, r.entropy_bits, r.mean_ratio, r.sd_ratio);
    }
    if let Some(out) = std::env::args().nth(1) {
        compsig::report::write_sweep(&out, &rows)?;
        println!("wrote {out}");
    }
    Ok(())
}
