// Approximate subgradients of a nonsmooth convex function from noisy
// evaluations, via randomized finite differences.

use convex_oracles::subgrad::{classical_subgradient, fd_gradient, fd_laplacian, FdParams};
use convex_oracles::Vector;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> convex_oracles::Result<()> {
    let mut quad = |x: &Vector| Ok(x.dot(x) + x[0]);
    let x = Vector::from_vec(vec![0.5, -1.0]);
    let g = fd_gradient(&mut quad, &x, 1e-3)?;
    let lap = fd_laplacian(&mut quad, &x, 1e-3)?;
    println!("quadratic: gradient {:?}, laplacian {lap:.6}", g.as_slice());

    // |x|_1 is 1-Lipschitz per coordinate, so L = sqrt(n).
    let n = 4;
    let delta = 1e-9;
    let mut noisy_l1 = {
        let mut calls = 0u64;
        move |x: &Vector| {
            calls += 1;
            let wobble = if calls % 2 == 0 { delta } else { -delta };
            Ok(x.iter().map(|v| v.abs()).sum::<f64>() + wobble)
        }
    };
    let params = FdParams::classical(n, 0.1, delta, 0.1, (n as f64).sqrt())?;
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let rep = classical_subgradient(&mut noisy_l1, &params, &mut rng)?;
    println!(
        "l1 norm: gradient {:?}, a = {:.3e}, b = {:.3e}, {} evaluations",
        rep.gradient.as_slice(),
        rep.slack_a,
        rep.slack_b,
        rep.queries
    );

    // The certificate f(y) >= f(0) + <g, y> - a|y| - b on a few probes.
    let f = |y: &Vector| y.iter().map(|v| v.abs()).sum::<f64>();
    for probe in [[1.0, 0.0, 0.0, 0.0], [-0.3, 0.2, 0.7, -1.1], [0.0; 4]] {
        let y = Vector::from_column_slice(&probe);
        assert!(rep.holds_at(0.0, &y, f(&y)));
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("finite difference example failed");
}
