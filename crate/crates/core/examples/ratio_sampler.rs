//! Empirical Cauchy–Schwarz ratios over random maps, written as CSV.

use noncomm_lp::inequalities::{ratio_sampler, RatioProfile};
use noncomm_lp::sesquilinear::MapKind;
use noncomm_lp::{PExponent, Result, TracedAlgebra};

fn main() -> Result<()> {
    for p in [1.5, 2.0, 4.0] {
        let profile = RatioProfile {
            p: PExponent::new(p)?,
            targets: vec![TracedAlgebra::full(3), TracedAlgebra::new(vec![2, 1], vec![1.0, 0.5])?],
            dims: vec![2, 3, 4],
            max_rank: 3,
            kind: MapKind::Mixed,
            trials: 500,
            seed: 11,
        };
        let table = ratio_sampler(&profile)?;
        println!(
            "p={p}: max {:.4} (trial {}), mean {:.4}",
            table.summary.max_ratio, table.summary.argmax_trial, table.summary.mean_ratio
        );
        if p == 2.0 {
            let csv = table.to_csv(profile.seed);
            print!("{}", csv.lines().take(4).map(|l| format!("{l}\n")).collect::<String>());
        }
    }
    Ok(())
}
