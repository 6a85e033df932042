// A separation oracle built from membership queries, classically (2(n-1)
// height evaluations) and with the simulated quantum gradient (a number of
// phase-oracle queries that does not depend on n).

use convex_oracles::sep_from_mem::{BodyBounds, HeightFunction, SepFromMem, SepParams};
use convex_oracles::{ConvexBody, Oracle, OracleHandle, SepAnswer, SeparationOracle, Vector};

pub fn run_example() -> convex_oracles::Result<()> {
    let body = ConvexBody::axis_box(Vector::from_element(3, -1.0), Vector::from_element(3, 1.0))?;
    let bounds = BodyBounds::of(&body);

    // The height function seen from below: h(y) = -1 on the whole bottom face.
    let delta = 1e-3;
    let mut mem = OracleHandle::new(
        body.clone(),
        bounds.inner_radius / (3.0 * bounds.outer_radius) * delta,
        0.0,
        1,
    )?;
    let x = Vector::from_vec(vec![0.0, 0.0, -2.0]);
    let mut hf = HeightFunction::toward(&mut mem, &bounds, &x, delta)?;
    let value = hf.eval(&Vector::from_vec(vec![0.2, -0.1]))?;
    println!(
        "h(0.2, -0.1) = {value:.5} using {} membership queries",
        hf.search_steps()
    );
    assert!((value + 1.0).abs() <= delta);

    let params = SepParams::classical(3, bounds.inner_radius, bounds.outer_radius, 0.1, 0.2)?;
    let mem = OracleHandle::new(body.clone(), params.mem_eps, 0.0, 2)?;
    let mut sep = SepFromMem::new(mem, bounds.clone(), params, 7)?;
    let y = Vector::from_vec(vec![1.4, 0.3, 1.2]);
    match sep.query_sep(&y)? {
        SepAnswer::Separated(plane) => {
            let slack = body.shrink_expand(-0.1)?.support(plane.normal())? - plane.normal().dot(&y);
            println!(
                "classical: normal {:?}, support gap {slack:.4}",
                plane.normal().as_slice()
            );
            assert!(slack <= 0.1);
        }
        SepAnswer::InExpanded => unreachable!("y is outside B(K, 0.1)"),
    }
    println!(
        "classical ledger: {} MEM for one SEP",
        sep.membership().ledger().mem
    );

    for n in 1..=2 {
        let ball = ConvexBody::ball(Vector::zeros(n), 1.0)?;
        let bounds = BodyBounds::of(&ball);
        let params = SepParams::quantum(n, 1.0, 1.0, 0.2, 0.2)?;
        let mem = OracleHandle::new(ball, params.mem_eps, 0.0, 3)?;
        let mut sep = SepFromMem::new(mem, bounds, params, 3)?;
        let mut y = Vector::zeros(n);
        y[0] = 1.5;
        sep.query_sep(&y)?;
        println!(
            "quantum n={n}: {} phase-oracle queries, {} pointwise MEM queries",
            sep.stats().superposition_queries,
            sep.membership().ledger().mem
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("separation example failed");
}
