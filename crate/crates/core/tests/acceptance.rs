//! Acceptance suite. Each test prints one `PASS`/`FAIL` line; run with
//! `cargo test --test acceptance -- --nocapture --test-threads=1` to see them.

use std::time::{Duration, Instant};

use convex_oracles::hardness::{
    first_diff_game, gen_codeword_caps, verify_adversary_bounds, CodewordParams, FirstDiffOracle,
    ValGame,
};
use convex_oracles::jordan::{
    jordan_distribution, relational_run, tabulate, GridSpec, PhaseScale, RelationalApproximator,
};
use convex_oracles::opt_engine::optimize_via_membership;
use convex_oracles::polarity::agreement_check;
use convex_oracles::sep_from_mem::{
    search_steps, BodyBounds, GradientMode, HeightFunction, SepFromMem, SepParams, SEARCH_CONSTANT,
};
use convex_oracles::subgrad::{fd_gradient, fd_laplacian};
use convex_oracles::{
    BoundaryPolicy, ConvexBody, Oracle, OracleHandle, SepAnswer, SeparationOracle, ValAnswer,
    Vector,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn verdict(id: u32, ok: bool, detail: String) {
    println!(
        "{} criterion {id}: {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {id} failed: {detail}");
}

fn unit_ball(n: usize) -> ConvexBody {
    ConvexBody::ball(Vector::zeros(n), 1.0).unwrap()
}

fn unit_box(n: usize) -> ConvexBody {
    ConvexBody::axis_box(Vector::from_element(n, -1.0), Vector::from_element(n, 1.0)).unwrap()
}

fn random_direction(rng: &mut ChaCha8Rng, n: usize) -> Vector {
    loop {
        let v = Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
        let norm = v.norm();
        if norm > 1e-3 && norm <= 1.0 {
            return v / norm;
        }
    }
}

fn separation_from(
    body: &ConvexBody,
    mode: GradientMode,
    eta: f64,
    rho: f64,
    seed: u64,
) -> SepFromMem<OracleHandle> {
    let bounds = BodyBounds::of(body);
    let (n, r, big_r) = (body.dim(), bounds.inner_radius, bounds.outer_radius);
    let params = match mode {
        GradientMode::Classical => SepParams::classical(n, r, big_r, eta, rho),
        GradientMode::Quantum => SepParams::quantum(n, r, big_r, eta, rho),
    }
    .unwrap();
    let mem = OracleHandle::new(body.clone(), params.mem_eps, 0.0, seed).unwrap();
    SepFromMem::new(mem, bounds, params, seed).unwrap()
}

#[test]
fn criterion_01_separation_validity() {
    let start = Instant::now();
    let (eta, rho) = (0.1, 0.2);
    let mut worst = 1.0f64;
    let mut details = Vec::new();
    for (name, make) in [
        ("ball", unit_ball as fn(usize) -> ConvexBody),
        ("box", unit_box),
    ] {
        for n in [2usize, 4, 8] {
            let body = make(n);
            let shrunk = body.shrink_expand(-eta).unwrap();
            let mut sep = separation_from(&body, GradientMode::Classical, eta, rho, 100 + n as u64);
            let mut rng = ChaCha8Rng::seed_from_u64(n as u64);
            let mut valid = 0;
            let mut trials = 0;
            while trials < 100 {
                let x = random_direction(&mut rng, n) * rng.gen_range(0.5..3.0 * (n as f64).sqrt());
                if body.distance(&x).unwrap() <= eta {
                    continue;
                }
                trials += 1;
                if let SepAnswer::Separated(plane) = sep.query_sep(&x).unwrap() {
                    let s = plane.normal();
                    valid += (shrunk.support(s).unwrap() <= s.dot(&x) + eta) as u32;
                }
            }
            let rate = valid as f64 / trials as f64;
            worst = worst.min(rate);
            details.push(format!("{name}{n}={rate:.2}"));
        }
    }
    let elapsed = start.elapsed();
    verdict(
        1,
        worst >= 1.0 - rho && elapsed < Duration::from_secs(60),
        format!(
            "valid-hyperplane rates {} (min {worst:.2} >= 0.80), {:.1}s < 60s",
            details.join(" "),
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_02_query_count_shapes() {
    let (eta, rho) = (0.1, 0.2);
    // Classical: MEM per separation is 1 + 2(n-1) S(n), with S(n) the binary
    // search length. Dividing out S(n) removes the log factor.
    let mut per_n = Vec::new();
    for n in [2usize, 4, 8] {
        let body = unit_ball(n);
        let mut sep = separation_from(&body, GradientMode::Classical, eta, rho, 5);
        let mut x = Vector::zeros(n);
        x[0] = 2.0;
        assert!(matches!(
            sep.query_sep(&x).unwrap(),
            SepAnswer::Separated(_)
        ));
        let mem = sep.membership().ledger().mem;
        let steps = search_steps(
            &BodyBounds::of(&body),
            sep.membership().eps(),
            sep.params().delta,
        );
        per_n.push((n, mem, (mem - 1) as f64 / steps as f64));
    }
    let slope_lo = (per_n[1].2 - per_n[0].2) / 2.0;
    let slope_hi = (per_n[2].2 - per_n[1].2) / 4.0;
    let slope_ratio = slope_hi / slope_lo;
    let raw_ratio = per_n[2].1 as f64 / per_n[1].1 as f64;
    let classical_ok = slope_ratio <= 1.4 && raw_ratio <= 2.0 * 1.4;

    let mut phase = Vec::new();
    for n in 1..=3usize {
        let body = unit_ball(n);
        let mut sep = separation_from(&body, GradientMode::Quantum, 0.2, 0.2, 3);
        let mut x = Vector::zeros(n);
        x[0] = 1.5;
        assert!(matches!(
            sep.query_sep(&x).unwrap(),
            SepAnswer::Separated(_)
        ));
        phase.push(sep.stats().superposition_queries);
    }
    let quantum_ok = phase.iter().all(|&p| p == phase[0]) && phase[0] > 0;
    verdict(
        2,
        classical_ok && quantum_ok,
        format!(
            "classical MEM {:?} (per-step slope ratio {slope_ratio:.3} <= 1.4, MEM(8)/MEM(4) = {raw_ratio:.3} <= 2.8); quantum phase queries at n=1,2,3: {phase:?}",
            per_n.iter().map(|p| p.1).collect::<Vec<_>>()
        ),
    );
}

#[test]
fn criterion_03_jordan_core() {
    let start = Instant::now();
    let bits = 4;
    let tol = 2f64.powi(2 - bits as i32);
    let grid = GridSpec::new(bits, Vector::zeros(2), 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(33);
    let mut worst = 0.0f64;
    for g in [
        [0.3, -0.2],
        [0.123, 0.456],
        [-0.41, 0.17],
        [0.0333, -0.0777],
    ] {
        let g = Vector::from_column_slice(&g);
        let h = tabulate(&grid, |x| Ok(g.dot(x))).unwrap();
        let dist = jordan_distribution(&grid, &h).unwrap();
        let sampler = dist.sampler().unwrap();
        let mut misses = [0u32; 2];
        for _ in 0..500 {
            let v = sampler.sample(&mut rng);
            for i in 0..2 {
                misses[i] += ((v[i] - g[i]).abs() > tol) as u32;
            }
        }
        for m in misses {
            worst = worst.max(m as f64 / 500.0);
        }
    }
    let mut integral_exact = true;
    for g in [[0.25, -0.125], [0.0, 0.4375], [-0.5, 0.0625]] {
        let g = Vector::from_column_slice(&g);
        let h = tabulate(&grid, |x| Ok(g.dot(x))).unwrap();
        let dist = jordan_distribution(&grid, &h).unwrap();
        for i in 0..2 {
            integral_exact &= dist.miss_probability(i, g[i], 1e-12) < 1e-12;
        }
        let sampler = dist.sampler().unwrap();
        integral_exact &= (0..100).all(|_| sampler.sample(&mut rng) == g);
    }
    let elapsed = start.elapsed();
    verdict(
        3,
        worst <= 1.0 / 3.0 + 0.07 && integral_exact && elapsed < Duration::from_secs(30),
        format!(
            "worst empirical miss rate {worst:.3} <= 0.403, integral frequencies exact: {integral_exact}, {:.2}s < 30s",
            elapsed.as_secs_f64()
        ),
    );
}

#[test]
fn criterion_04_relational_oracle() {
    let grid = GridSpec::new(4, Vector::zeros(1), 1.0).unwrap();
    let scale = PhaseScale::new(1.0, 1e-3).unwrap();
    assert_eq!(scale.bits, 4);
    let (mut worst_state, mut worst_tv) = (0.0f64, 0.0f64);
    for (slope, shift) in [(0.3, 0.37), (-0.21, 0.5), (0.05, 0.11), (0.44, 0.9)] {
        let oracle = RelationalApproximator::new(1.0 / 1200.0, shift).unwrap();
        let mut f = |x: &Vector| Ok(slope * x[0] + 0.01 * x[0] * x[0]);
        let run = relational_run(&grid, &mut f, &scale, &oracle).unwrap();
        worst_state = worst_state.max(run.state_distance);
        worst_tv = worst_tv.max(run.total_variation());
    }
    verdict(
        4,
        worst_state < 1.0 / 16.0 && worst_tv <= 1.0 / 16.0,
        format!(
            "state distance {worst_state:.4} < 0.0625, total variation {worst_tv:.4} <= 0.0625"
        ),
    );
}

#[test]
fn criterion_05_height_function() {
    let delta = 1e-3;
    let n = 3;
    let body = unit_ball(n);
    let bounds = BodyBounds::of(&body);
    let mem_eps = bounds.inner_radius / (3.0 * bounds.outer_radius) * delta;
    let bound = SEARCH_CONSTANT * (bounds.outer_radius / delta).log2() + 3.0;
    let mut worst_err = 0.0f64;
    let mut worst_queries = 0u64;
    for policy in [BoundaryPolicy::Adversarial, BoundaryPolicy::Random] {
        let mut mem = OracleHandle::new(body.clone(), mem_eps, 0.0, 17)
            .unwrap()
            .with_policy(policy);
        let x = Vector::from_vec(vec![0.0, 0.0, -2.0]);
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut hf = HeightFunction::toward(&mut mem, &bounds, &x, delta).unwrap();
        let mut ys = Vec::new();
        for _ in 0..1000 {
            let y = random_direction(&mut rng, n - 1) * (0.5 * rng.gen::<f64>().sqrt());
            let value = hf.eval(&y).unwrap();
            worst_err = worst_err.max((value + (1.0 - y.norm_squared()).sqrt()).abs());
            ys.push(y);
        }
        drop(hf);
        let calls = mem.ledger().mem;
        worst_queries = worst_queries.max(calls.div_ceil(ys.len() as u64));
        assert_eq!(calls % ys.len() as u64, 0);
    }
    verdict(
        5,
        worst_err <= delta && (worst_queries as f64) <= bound,
        format!(
            "max |h - exact| = {worst_err:.2e} <= 1e-3, MEM per call {worst_queries} <= {SEARCH_CONSTANT} log2(R/delta) + 3 = {bound:.2}, both policies"
        ),
    );
}

fn random_quadratic(rng: &mut ChaCha8Rng, n: usize) -> (nalgebra::DMatrix<f64>, Vector) {
    let m = nalgebra::DMatrix::from_fn(n, n, |_, _| rng.gen_range(-1.0..1.0));
    (
        m.transpose() * m,
        Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0)),
    )
}

#[test]
fn criterion_06_finite_difference_bounds() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let (mut gap_33, mut gap_39) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut lipschitz_ok = true;
    for _ in 0..1000 {
        let n = rng.gen_range(1..=6);
        let (a, b) = random_quadratic(&mut rng, n);
        let r1 = 0.1;
        let r2 = rng.gen_range(1e-3..r1);
        let z = Vector::from_fn(n, |_, _| rng.gen_range(-r1..r1));
        let mut f = |x: &Vector| Ok(x.dot(&(&a * x)) + b.dot(x));
        let fd = fd_gradient(&mut f, &z, r2).unwrap();
        let lap = fd_laplacian(&mut f, &z, r2).unwrap();
        let g = 2.0 * &a * &z + &b;
        // Lipschitz bound on B_inf(0, 2 r1) from the operator norm of 2A.
        let lipschitz = b.norm() + 2.0 * a.norm() * 2.0 * r1 * (n as f64).sqrt();
        lipschitz_ok &= g.norm() <= lipschitz;
        gap_33 = gap_33.max((&g - &fd).lp_norm(1) - r2 * lap / 2.0);
        let fz = f(&z).unwrap();
        for k in 0..20 {
            let y = if k < 2 * n {
                let mut e = Vector::zeros(n);
                e[k / 2] = if k % 2 == 0 { r2 } else { -r2 };
                e
            } else {
                let w = Vector::from_fn(n, |_, _| rng.gen_range(-1.0..1.0));
                let scale = rng.gen::<f64>() * r2 / w.lp_norm(1);
                w * scale
            };
            let d = f(&(&z + &y)).unwrap() - fz - y.dot(&fd);
            gap_39 = gap_39.max(d.abs() - r2 * r2 * lap / 2.0);
        }
    }

    // Expected Laplacian over the box, for two functions with known L.
    let (n, r1, r2, lipschitz) = (4usize, 0.1, 0.04, 2.0);
    let affine: Vec<(Vector, f64)> = (0..6)
        .map(|_| {
            let a = random_direction(&mut rng, n) * rng.gen_range(0.5..lipschitz);
            (a, rng.gen_range(-0.02..0.02))
        })
        .collect();
    let max_norm = affine.iter().map(|(a, _)| a.norm()).fold(0.0, f64::max);
    let scaled_l1 = |x: &Vector| Ok(lipschitz / (n as f64).sqrt() * x.lp_norm(1));
    let max_affine = |x: &Vector| {
        Ok(affine
            .iter()
            .map(|(a, c)| a.dot(x) + c)
            .fold(f64::NEG_INFINITY, f64::max))
    };
    let mut mean_ratio = 0.0f64;
    for (mut f, l) in [
        (
            Box::new(scaled_l1) as Box<dyn FnMut(&Vector) -> convex_oracles::Result<f64>>,
            lipschitz,
        ),
        (Box::new(max_affine), max_norm),
    ] {
        let samples = 10_000;
        let mut sum = 0.0;
        for _ in 0..samples {
            let z = Vector::from_fn(n, |_, _| rng.gen_range(-r1..r1));
            sum += fd_laplacian(&mut f, &z, r2).unwrap();
        }
        mean_ratio = mean_ratio.max(sum / samples as f64 / (n as f64 * l / r1));
    }
    // Exact subgradients of both test functions have norm at most L.
    for _ in 0..1000 {
        let x = Vector::from_fn(n, |_, _| rng.gen_range(-r1..r1));
        let sign = x.map(|v| v.signum() * lipschitz / (n as f64).sqrt());
        let active = affine
            .iter()
            .max_by(|p, q| (p.0.dot(&x) + p.1).total_cmp(&(q.0.dot(&x) + q.1)))
            .unwrap();
        lipschitz_ok &= sign.norm() <= lipschitz + 1e-12 && active.0.norm() <= max_norm;
    }
    verdict(
        6,
        gap_33 <= 1e-9 && gap_39 <= 1e-9 && mean_ratio <= 1.05 && lipschitz_ok,
        format!(
            "gradient gap excess {gap_33:.1e}, linearization excess {gap_39:.1e} (both <= 1e-9), mean Laplacian / (nL/r1) = {mean_ratio:.3} <= 1.05, |g| <= L: {lipschitz_ok}"
        ),
    );
}

#[test]
fn criterion_07_polarity() {
    let mut ok = true;
    let mut parts = Vec::new();
    for n in [2usize, 3] {
        for (name, body) in [
            ("ball", ConvexBody::ball(Vector::zeros(n), 2.0).unwrap()),
            ("box", unit_box(n)),
        ] {
            let check = agreement_check(&body, 1000, 70 + n as u64).unwrap();
            ok &= check.all_exact();
            ok &= [
                &check.mem_polar_via_val,
                &check.val_via_mem_polar,
                &check.sep_polar_via_viol,
                &check.viol_via_sep_polar,
            ]
            .iter()
            .all(|s| s.queries == 1000);
            parts.push(format!(
                "{name}{n}:{}",
                if check.all_exact() {
                    "100%"
                } else {
                    "mismatch"
                }
            ));
        }
    }
    verdict(
        7,
        ok,
        format!(
            "4 adapters x 1000 queries, agreement {} with 1 source query per call",
            parts.join(" ")
        ),
    );
}

#[test]
fn criterion_08_adversary_bounds() {
    let mut ok = true;
    let mut parts = Vec::new();
    let mut n8_time = Duration::ZERO;
    for n in 2..=8 {
        let start = Instant::now();
        let rep = verify_adversary_bounds(n, 0).unwrap();
        if n == 8 {
            n8_time = start.elapsed();
        }
        ok &=
            rep.row_sums_exact && rep.exhaustive && rep.masks_checked == 1 << n && rep.masked_ok();
        parts.push(format!(
            "n={n}: {:.1}/{}",
            rep.max_masked_norm, rep.masked_bound
        ));
    }
    verdict(
        8,
        ok && n8_time < Duration::from_secs(120),
        format!("Gamma e = n 2^n e exactly; max_g |Gamma o Delta_g| / 2^(n+3): {}; n=8 in {:.1}s < 120s", parts.join(", "), n8_time.as_secs_f64()),
    );
}

#[test]
fn criterion_09_hardness_games() {
    let eps = 1.0 / 48.0;
    let caps = gen_codeword_caps(32, eps, &CodewordParams::default(), 9).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut decoded = 0;
    for trial in 0..100 {
        let i = rng.gen_range(0..caps.family.len());
        decoded += (caps.decode_trial(i, 1000 + trial).unwrap() == Some(i)) as u32;
    }

    let mut val_trials = 0;
    let mut val_correct = 0;
    for n in [2usize, 4, 8, 16] {
        let game = ValGame::new(n);
        let mut strings = vec![vec![false; n]];
        for i in 0..n {
            let mut z = vec![false; n];
            z[i] = true;
            strings.push(z);
        }
        for (t, z) in strings.iter().enumerate() {
            let weight = z.iter().filter(|&&b| b).count();
            let expected = if weight == 0 {
                ValAnswer::AllBelow
            } else {
                ValAnswer::SomeAbove
            };
            let forced = game.forced_answer(z).unwrap();
            let mut val = game.oracle(z, t as u64).unwrap();
            val_trials += 1;
            val_correct +=
                (forced == Some(expected) && game.play(&mut val).unwrap() == weight) as u32;
        }
    }

    let mut learned = 0;
    let mut max_queries = 0;
    for _ in 0..100 {
        let mut oracle = FirstDiffOracle::random(20, &mut rng);
        let out = first_diff_game(&mut oracle).unwrap();
        learned += (out.recovered && out.queries <= 21) as u32;
        max_queries = max_queries.max(out.queries);
    }
    verdict(
        9,
        decoded == 100 && val_correct == val_trials && learned == 100,
        format!(
            "codeword decode {decoded}/100 (n=32, {} caps); VAL game forced and answered {val_correct}/{val_trials}; greedy learner {learned}/100 (max {max_queries} <= 21 queries)",
            caps.family.len()
        ),
    );
}

#[test]
fn criterion_10_opt_from_mem() {
    let start = Instant::now();
    let body = unit_ball(3);
    let bounds = BodyBounds::of(&body);
    let eps = 1e-2;
    let c = Vector::from_vec(vec![1.0, 0.0, 0.0]);
    let run = || {
        let params =
            convex_oracles::opt_engine::pipeline_params(&bounds, eps, GradientMode::Classical)
                .unwrap();
        let mem = OracleHandle::new(body.clone(), params.mem_eps, 0.0, 10).unwrap();
        optimize_via_membership(mem, &bounds, &c, eps, GradientMode::Classical, 10).unwrap()
    };
    let first = run();
    let second = run();
    let value = first.optimize.value.unwrap_or(f64::NEG_INFINITY);
    let elapsed = start.elapsed();
    verdict(
        10,
        value >= 1.0 - eps
            && first.mem_queries == second.mem_queries
            && first.mem_queries == first.predicted_mem_queries()
            && elapsed < Duration::from_secs(120),
        format!(
            "value {value:.5} >= 0.99, MEM ledger {} on both runs ({} SEP calls), {:.1}s < 120s",
            first.mem_queries,
            first.optimize.sep_queries,
            elapsed.as_secs_f64()
        ),
    );
}
