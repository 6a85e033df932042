// Linear optimization with the central-cut ellipsoid method, first over an
// exact separation oracle and then end to end from membership queries.

use convex_oracles::opt_engine::{
    optimize, optimize_via_membership, pipeline_params, DEFAULT_MAX_ITERATIONS,
};
use convex_oracles::sep_from_mem::{BodyBounds, GradientMode};
use convex_oracles::{ConvexBody, OracleHandle, Vector};

pub fn run_example() -> convex_oracles::Result<()> {
    let normals = vec![
        Vector::from_vec(vec![1.0, 1.0]),
        Vector::from_vec(vec![-1.0, 0.0]),
        Vector::from_vec(vec![0.0, -1.0]),
    ];
    let triangle = ConvexBody::polytope(
        normals,
        vec![1.0, 0.0, 0.0],
        &Vector::from_vec(vec![0.25, 0.25]),
    )?;
    let mut sep = OracleHandle::new(triangle.clone(), 1e-3, 0.0, 1)?;
    let c = Vector::from_vec(vec![1.0, 0.0]);
    let rep = optimize(
        &mut sep,
        &c,
        1e-2,
        triangle.center(),
        triangle.outer_radius() + triangle.center().norm(),
        DEFAULT_MAX_ITERATIONS,
    )?;
    println!(
        "triangle: value {:.4} after {} iterations",
        rep.value.unwrap_or(f64::NAN),
        rep.iterations
    );
    assert!(rep.value.unwrap() >= 1.0 - 1e-2);

    let ball = ConvexBody::ball(Vector::zeros(3), 1.0)?;
    let bounds = BodyBounds::of(&ball);
    let eps = 1e-2;
    let params = pipeline_params(&bounds, eps, GradientMode::Classical)?;
    let mem = OracleHandle::new(ball, params.mem_eps, 0.0, 5)?;
    let c = Vector::from_vec(vec![1.0, 0.0, 0.0]);
    let rep = optimize_via_membership(mem, &bounds, &c, eps, GradientMode::Classical, 5)?;
    println!(
        "ball from MEM: value {:.4}, {} SEP calls, {} MEM queries ({} predicted)",
        rep.optimize.value.unwrap_or(f64::NAN),
        rep.optimize.sep_queries,
        rep.mem_queries,
        rep.predicted_mem_queries()
    );
    assert_eq!(rep.mem_queries, rep.predicted_mem_queries());
    Ok(())
}

#[allow(dead_code)]
fn main() {
    run_example().expect("ellipsoid example failed");
}
