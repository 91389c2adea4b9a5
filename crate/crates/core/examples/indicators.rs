//! Prints the coercivity, consistency, limit-conformity, compactness and
//! interpolation indicators across refinement levels.
//!
//! `cargo run --release --example indicators -- 2`

use gdm::harness::{indicator_table, IndicatorConfig};

pub fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dim = std::env::args().nth(1).map_or(Ok(1), |s| s.parse())?;
    table(IndicatorConfig::new(dim))
}

pub fn table(cfg: IndicatorConfig) -> Result<(), Box<dyn std::error::Error>> {
    let rows = indicator_table(&cfg)?;
    for r in rows {
        println!(
            "level {} h {:.4} {:<4} {:>14.8e} {:?} ratio {}",
            r.level,
            r.h,
            r.indicator,
            r.value,
            r.kind,
            r.ratio.map_or("-".into(), |v| format!("{v:.3}"))
        );
    }
    Ok(())
}
