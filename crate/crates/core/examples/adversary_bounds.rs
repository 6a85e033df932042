// Numerical check of the adversary-matrix bounds for learning with
// first-difference queries at small n.

use convex_oracles::hardness::verify_adversary_bounds;

pub fn run_example() -> convex_oracles::Result<()> {
    println!("n  |Gamma|   max_g |Gamma o Delta_g|  2^(n+3)  ratio");
    for n in 1..=6 {
        let rep = verify_adversary_bounds(n, 0)?;
        println!(
            "{n}  {:8.1}  {:23.3}  {:7}  {:.3}",
            rep.gamma_norm, rep.max_masked_norm, rep.masked_bound, rep.lower_bound_ratio
        );
        assert!(rep.row_sums_exact && rep.masked_ok() && rep.block_ok());
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("adversary example failed");
}
