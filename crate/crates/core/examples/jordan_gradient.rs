// Statevector simulation of Jordan's gradient algorithm: a single run on a
// linear phase, the median-of-runs gradient from a noisy evaluator, and the
// relational-oracle diagnostic.

use convex_oracles::jordan::{
    grad_via_standard_oracle, jordan_distribution, relational_run, tabulate, GridSpec, PhaseScale,
    RelationalApproximator,
};
use convex_oracles::Vector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> convex_oracles::Result<()> {
    let g = Vector::from_vec(vec![0.3125, -0.1]);
    let grid = GridSpec::new(4, Vector::zeros(2), 1.0)?;
    let h = tabulate(&grid, |x| Ok(g.dot(x)))?;
    let dist = jordan_distribution(&grid, &h)?;
    for axis in 0..2 {
        let miss = dist.miss_probability(axis, g[axis], 0.25);
        println!("axis {axis}: P[miss by more than 1/4] = {miss:.4}");
    }
    // 0.3125 * 16 = 5 is an integral frequency, so axis 0 is exact.
    assert!(dist.miss_probability(0, g[0], 1e-12) < 1e-12);

    let slope = Vector::from_vec(vec![0.7, -0.4]);
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut f = |x: &Vector| Ok(slope.dot(x) + 0.05 * x.norm_squared());
    let origin = Vector::zeros(2);
    let r = 0.01;
    let delta = 1e-6;
    let q = grad_via_standard_oracle(&mut f, &origin, r, r, delta, 0.1, &mut rng)?;
    println!(
        "gradient {:?} from {} runs ({} phase queries, {} grid points, m = {})",
        q.gradient.as_slice(),
        q.repetitions,
        q.phase_queries,
        q.evaluations,
        q.scale.bits
    );
    assert!((q.gradient - slope).amax() <= q.scale.error_bound(r) + 0.05 * r * 3.0);

    // A relational evaluator that returns junk with probability 1/1200.
    let grid = GridSpec::new(4, Vector::zeros(1), 1.0)?;
    let scale = PhaseScale::new(1.0, 1e-3)?;
    let oracle = RelationalApproximator::new(1.0 / 1200.0, 0.37)?;
    let mut line = |x: &Vector| Ok(0.3 * x[0]);
    let run = relational_run(&grid, &mut line, &scale, &oracle)?;
    println!(
        "state distance {:.4}, total variation {:.4}",
        run.state_distance,
        run.total_variation()
    );
    assert!(run.state_distance < 1.0 / 16.0 && run.total_variation() <= 1.0 / 16.0);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("jordan example failed");
}
