// The instances behind the query lower bounds, played as games: decoding a
// codeword from one separation answer, the corner-box validity game, and
// learning a string from first-difference queries.

use convex_oracles::hardness::{
    first_diff_game, gen_codeword_caps, round_to_corner, CodewordParams, CornerBoxSep,
    FirstDiffOracle, FirstDiffSep, ValGame, MAX_CAP_EPS,
};
use convex_oracles::opt_engine::optimize;
use convex_oracles::{Oracle, SeparationOracle, Vector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn run_example() -> convex_oracles::Result<()> {
    let caps = gen_codeword_caps(24, MAX_CAP_EPS, &CodewordParams::default(), 2)?;
    let decoded = (0..caps.family.len())
        .filter(|&i| caps.decode_trial(i, 40 + i as u64).ok() == Some(Some(i)))
        .count();
    println!(
        "{} caps, {decoded} decoded from a single SEP answer",
        caps.family.len()
    );
    assert_eq!(decoded, caps.family.len());

    let game = ValGame::new(6);
    for z in [
        vec![false; 6],
        vec![false, false, true, false, false, false],
    ] {
        let mut val = game.oracle(&z, 3)?;
        println!(
            "|z| = {} -> game answers {}",
            z.iter().filter(|&&b| b).count(),
            game.play(&mut val)?
        );
    }
    let mut sep = CornerBoxSep::new(vec![false, true, false, false])?;
    sep.query_sep(&Vector::from_vec(vec![0.3, 0.5, -0.2, 0.1]))?;
    println!("corner-box SEP used {} bit query", sep.bit_queries());

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut oracle = FirstDiffOracle::random(20, &mut rng);
    let out = first_diff_game(&mut oracle)?;
    println!(
        "greedy learner: recovered = {}, {} queries",
        out.recovered, out.queries
    );

    // Any point near K_z = B_inf(z, 1/3) rounds to z.
    let mut oracle = FirstDiffOracle::random(6, &mut rng);
    let hidden = oracle.hidden().to_vec();
    let mut sep = FirstDiffSep::new(&mut oracle);
    let c = Vector::from_element(6, 1.0).normalize();
    let center = Vector::from_element(6, 0.5);
    let rep = optimize(&mut sep, &c, 0.05, &center, 6f64.sqrt() * 5.0 / 6.0, 10_000)?;
    let point = Vector::from_vec(rep.maximizer.expect("K_z is nonempty"));
    println!("found a point of K_z with {} SEP queries", sep.ledger().sep);
    assert_eq!(round_to_corner(&point), hidden);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("lower bound example failed");
}
