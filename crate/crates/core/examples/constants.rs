//! Print the constant table at one (n, m, p), the crossover verdict and the
//! MS > C > S > AT chain.
//!
//! cargo run --example constants -- 3 4 1.5

use sobolev_lab::constants::{compare_chain, constants_table, crossover, s_over_at, SobolevParams};

fn main() -> sobolev_lab::Result<()> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let n = args.first().and_then(|s| s.parse().ok()).unwrap_or(3);
    let m = args.get(1).and_then(|s| s.parse().ok()).unwrap_or(4);
    let p = args.get(2).and_then(|s| s.parse().ok()).unwrap_or(1.5);

    let params = SobolevParams::new(n, m, p)?;
    println!("constants at (n, m, p) = ({n}, {m}, {p})");
    for row in constants_table(&params)? {
        let flag = if row.outside_proven_range {
            "  (outside proved range)"
        } else {
            ""
        };
        println!("  {:<22} {:>14.8}{flag}", row.name, row.value);
    }

    if m > 0 {
        let c = crossover(n, m, p)?;
        println!(
            "S̃ = {:.6}, legacy constants {:.6} and {:.6}: {:?}",
            c.log_s_tilde.exp(),
            c.log_legacy_mean_curvature.exp(),
            c.log_legacy_rearrangement.exp(),
            c.verdict
        );
    }

    if n >= 3 {
        for row in compare_chain(n)?.rows {
            println!(
                "chain with m = {:>5}: MS {:.4e} > C {:.4e} > S {:.4e} > AT {:.4e}",
                row.m,
                row.log_michael_simon.exp(),
                row.log_brendle_c.exp(),
                row.log_sobolev_s.exp(),
                row.log_aubin_talenti.exp()
            );
        }
    }

    // S approaches AT in high dimension.
    for big in [100, 10_000, 1_000_000] {
        println!(
            "S/AT at n = {big:>7}, p = 2: {:.10}",
            s_over_at(big, 2.0)?.ratio
        );
    }
    Ok(())
}
