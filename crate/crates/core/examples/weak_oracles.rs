// Weak oracles over analytic bodies, their query ledgers, and majority-vote
// amplification of a noisy membership oracle.
//
// ```text
// cargo run --example weak_oracles
// ```

use convex_oracles::oracles::amplify;
use convex_oracles::{
    ConvexBody, MemAnswer, MembershipOracle, Oracle, OracleHandle, SepAnswer, SeparationOracle,
    ValAnswer, ValidityOracle, Vector,
};

pub fn run_example() -> convex_oracles::Result<()> {
    let cube = ConvexBody::axis_box(Vector::from_element(3, -1.0), Vector::from_element(3, 1.0))?;
    let mut oracle = OracleHandle::new(cube, 0.05, 0.0, 11)?;

    let inside = Vector::from_vec(vec![0.2, -0.3, 0.9]);
    let outside = Vector::from_vec(vec![1.5, 0.0, 0.0]);
    assert_eq!(oracle.query_mem(&inside)?, MemAnswer::InExpanded);
    assert_eq!(oracle.query_mem(&outside)?, MemAnswer::NotInShrunk);

    match oracle.query_sep(&outside)? {
        SepAnswer::Separated(plane) => {
            println!("separating normal {:?}", plane.normal().as_slice())
        }
        SepAnswer::InExpanded => unreachable!("the point is far outside"),
    }

    let c = Vector::from_element(3, 1.0).normalize();
    let support = 3f64.sqrt();
    assert_eq!(oracle.query_val(&c, support + 0.2)?, ValAnswer::AllBelow);
    assert_eq!(oracle.query_val(&c, support - 0.2)?, ValAnswer::SomeAbove);
    println!("ledger after four kinds of query: {:?}", oracle.ledger());

    // A membership oracle that errs one time in four, amplified to 1e-3.
    let ball = ConvexBody::ball(Vector::zeros(2), 1.0)?;
    let noisy = OracleHandle::new(ball, 0.01, 0.25, 5)?;
    let mut strong = amplify(noisy, 1e-3)?;
    let far = Vector::from_vec(vec![0.0, 3.0]);
    let wrong = (0..200)
        .filter(|_| {
            strong
                .query_mem(&far)
                .map(|a| a != MemAnswer::NotInShrunk)
                .unwrap_or(true)
        })
        .count();
    println!(
        "{} repetitions per call, {wrong}/200 wrong answers",
        strong.repetitions()
    );
    assert!(wrong <= 2);
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("weak oracle example failed");
}
