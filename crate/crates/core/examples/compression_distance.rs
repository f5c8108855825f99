//! Compressed sizes, ratios, conditional cost and NCD for a few short texts.

use compsig::compress::{self, CompressorConfig};

fn main() -> compsig::Result<()> {
    let cfg = CompressorConfig::default();
    let texts = [
        ("prose", "The river ran slowly past the mill, and the miller watched it from the door as he did every evening."),
        ("prose-2", "The river ran quickly past the farm, and the farmer watched it from the gate as he did every morning."),
        ("numbers", "3 1 4 1 5 9 2 6 5 3 5 8 9 7 9 3 2 3 8 4 6 2 6 4 3 3 8 3 2 7 9 5 0 2 8 8 4 1 9 7 1 6 9 3 9 9 3"),
    ];

    println!("{:<8} {:>6} {:>6} {:>7}", "text", "bytes", "C(x)", "ratio");
    for (name, t) in &texts {
        let b = t.as_bytes();
        println!(
            "{name:<8} {:>6} {:>6} {:>7.4}",
            b.len(),
            compress::compressed_size(b, &cfg),
            compress::compression_ratio(b, &cfg)?
        );
    }

    println!("\nNCD matrix");
    for (a, x) in &texts {
        let row: Vec<String> = texts
            .iter()
            .map(|(_, y)| compress::ncd(x.as_bytes(), y.as_bytes(), &cfg).map(|d| format!("{d:.3}")))
            .collect::<compsig::Result<_>>()?;
        println!("{a:<8} {}", row.join("  "));
    }

    let (x, y) = (texts[0].1.as_bytes(), texts[1].1.as_bytes());
    println!(
        "\nmarginal bytes per input byte for prose-2 after prose: {:.4}",
        compress::conditional_compression(x, y, &cfg)?
    );
    let raw = CompressorConfig::new(9, false)?;
    println!(
        "ratio of prose at level 9 without header: {:.4}",
        compress::compression_ratio(x, &raw)?
    );
    Ok(())
}
