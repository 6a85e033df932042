// Oracles for the polar body K* from oracles for K: membership from validity,
// separation from violation, and optimization from violation by bisection.

use convex_oracles::polarity::{agreement_check, opt_via_viol, polar_body, Polar};
use convex_oracles::{
    ConvexBody, MemAnswer, MembershipOracle, OptAnswer, Oracle, OracleHandle, Vector,
};

pub fn run_example() -> convex_oracles::Result<()> {
    let cube = ConvexBody::axis_box(Vector::from_element(2, -1.0), Vector::from_element(2, 1.0))?;
    let cross = polar_body(&cube)?;
    println!(
        "polar of the square has outer radius {}",
        cross.outer_radius()
    );

    let mut polar = Polar::new(OracleHandle::strong(cube.clone(), 1)?);
    let inside = Vector::from_vec(vec![0.4, 0.4]);
    let outside = Vector::from_vec(vec![0.6, 0.6]);
    assert_eq!(polar.query_mem(&inside)?, MemAnswer::InExpanded);
    assert_eq!(polar.query_mem(&outside)?, MemAnswer::NotInShrunk);
    println!(
        "two polar MEM queries cost {} VAL queries",
        polar.inner().ledger().val
    );

    let check = agreement_check(&cube, 1000, 4)?;
    println!(
        "adapters agree with the closed-form polar: {}",
        check.all_exact()
    );
    assert!(check.all_exact());

    let mut viol = OracleHandle::new(cube, 1e-4, 0.0, 2)?;
    let c = Vector::from_vec(vec![0.6, 0.8]);
    match opt_via_viol(&mut viol, &c, 1e-2, &Vector::zeros(2), 2f64.sqrt())? {
        OptAnswer::Maximizer(y) => {
            println!(
                "maximizer {:?} after {} VIOL queries",
                y.as_slice(),
                viol.ledger().viol
            );
            assert!(c.dot(&y) >= 1.4 - 1e-2);
        }
        OptAnswer::ShrunkEmpty => unreachable!(),
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("polarity example failed");
}
