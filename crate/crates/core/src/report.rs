//! Reports behind the command-line front end. Each report echoes every input
//! parameter next to its results and serializes deterministically.

use std::fmt::Write as _;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::invalid;
use crate::geometry::{BodySpec, ConvexBody, Vector};
use crate::hardness::{first_diff_bench, verify_adversary_bounds, AdversaryReport};
use crate::jordan::{jordan_distribution, tabulate, GridSpec};
use crate::opt_engine::{optimize_via_membership, pipeline_params, PipelineReport};
use crate::oracles::{BoundaryPolicy, Oracle, OracleHandle, SepAnswer, SeparationOracle};
use crate::polarity::{agreement_check, PolarCheck};
use crate::sep_from_mem::{
    BodyBounds, GradientMode, HeightFunction, SepFromMem, SepParams, SepStats,
};
use crate::Result;

fn to_vec(v: &Vector) -> Vec<f64> {
    v.iter().copied().collect()
}

/// A separation answer in report form.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "answer", rename_all = "snake_case")]
pub enum SepAnswerReport {
    InExpanded,
    Separated { normal: Vec<f64>, offset: f64 },
}

impl From<&SepAnswer> for SepAnswerReport {
    fn from(a: &SepAnswer) -> Self {
        match a {
            SepAnswer::InExpanded => SepAnswerReport::InExpanded,
            SepAnswer::Separated(h) => SepAnswerReport::Separated {
                normal: to_vec(h.normal()),
                offset: h.offset(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparateInput {
    pub body: BodySpec,
    pub point: Vec<f64>,
    pub eta: f64,
    pub rho: f64,
    pub mode: GradientMode,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SeparateReport {
    pub command: &'static str,
    pub input: SeparateInput,
    pub params: SepParams,
    pub result: SepAnswerReport,
    pub mem_queries: u64,
    pub sep_queries: u64,
    pub stats: SepStats,
}

/// Membership oracle with the precision a reduction with `params` requires.
fn membership_for(body: ConvexBody, params: &SepParams, seed: u64) -> Result<OracleHandle> {
    OracleHandle::new(body, params.mem_eps, 0.0, seed)
}

fn sep_params(mode: GradientMode, bounds: &BodyBounds, eta: f64, rho: f64) -> Result<SepParams> {
    let (n, r, big_r) = (bounds.dim(), bounds.inner_radius, bounds.outer_radius);
    match mode {
        GradientMode::Classical => SepParams::classical(n, r, big_r, eta, rho),
        GradientMode::Quantum => SepParams::quantum(n, r, big_r, eta, rho),
    }
}

/// One separation query answered from membership queries.
pub fn separate(input: SeparateInput) -> Result<SeparateReport> {
    let body = input.body.build()?;
    let bounds = BodyBounds::of(&body);
    let params = sep_params(input.mode, &bounds, input.eta, input.rho)?;
    let mem = membership_for(body, &params, input.seed)?;
    let mut sep = SepFromMem::new(mem, bounds, params, input.seed)?;
    let answer = sep.query_sep(&Vector::from_column_slice(&input.point))?;
    Ok(SeparateReport {
        command: "separate",
        params,
        result: (&answer).into(),
        mem_queries: sep.membership().ledger().mem,
        sep_queries: sep.ledger().sep,
        stats: sep.stats().clone(),
        input,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizeInput {
    pub body: BodySpec,
    pub objective: Vec<f64>,
    pub eps: f64,
    pub mode: GradientMode,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OptimizeOutput {
    pub command: &'static str,
    pub input: OptimizeInput,
    pub report: PipelineReport,
    pub predicted_mem_queries: u64,
}

/// The ellipsoid method over separation built from membership.
pub fn optimize(input: OptimizeInput) -> Result<OptimizeOutput> {
    let body = input.body.build()?;
    let bounds = BodyBounds::of(&body);
    let params = pipeline_params(&bounds, input.eps, input.mode)?;
    let mem = membership_for(body, &params, input.seed)?;
    let c = Vector::from_column_slice(&input.objective);
    let report = optimize_via_membership(mem, &bounds, &c, input.eps, input.mode, input.seed)?;
    Ok(OptimizeOutput {
        command: "optimize",
        predicted_mem_queries: report.predicted_mem_queries(),
        report,
        input,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalHInput {
    pub body: BodySpec,
    pub y: Vec<f64>,
    /// Direction whose ray is rotated onto `-e_n`; `-e_n` when absent.
    pub toward: Option<Vec<f64>>,
    pub delta: f64,
    pub policy: BoundaryPolicy,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EvalHReport {
    pub command: &'static str,
    pub input: EvalHInput,
    pub mem_eps: f64,
    pub value: f64,
    pub mem_queries: u64,
    pub search_steps: u64,
}

/// One height-function evaluation with membership precision `r δ / (3R)`.
pub fn eval_h(input: EvalHInput) -> Result<EvalHReport> {
    let body = input.body.build()?;
    let bounds = BodyBounds::of(&body);
    let n = bounds.dim();
    if n < 2 {
        return Err(invalid("the height function needs n >= 2"));
    }
    let mem_eps = bounds.inner_radius / (3.0 * bounds.outer_radius) * input.delta;
    let mut mem = OracleHandle::new(body, mem_eps, 0.0, input.seed)?.with_policy(input.policy);
    let x = match &input.toward {
        Some(t) => bounds.center() + Vector::from_column_slice(t),
        None => {
            let mut e = Vector::zeros(n);
            e[n - 1] = -1.0;
            bounds.center() + e
        }
    };
    let (value, search_steps) = {
        let mut hf = HeightFunction::toward(&mut mem, &bounds, &x, input.delta)?;
        (
            hf.eval(&Vector::from_column_slice(&input.y))?,
            hf.search_steps(),
        )
    };
    Ok(EvalHReport {
        command: "eval-h",
        mem_eps,
        value,
        mem_queries: mem.ledger().mem,
        search_steps,
        input,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JordanDemoInput {
    pub gradient: Vec<f64>,
    pub bits: u32,
    pub shots: u64,
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct AxisReport {
    pub axis: usize,
    pub target: f64,
    pub tolerance: f64,
    pub exact_miss_probability: f64,
    pub empirical_miss_rate: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct JordanDemoReport {
    pub command: &'static str,
    pub input: JordanDemoInput,
    pub qubits: u32,
    pub axes: Vec<AxisReport>,
    /// Per-register marginals as CSV.
    #[serde(skip)]
    pub csv: String,
}

/// Jordan's algorithm on the linear phase `<g, x>` over the unit grid, with
/// exact miss probabilities at tolerance `2^(2-m)` and sampled shots.
pub fn jordan_demo(input: JordanDemoInput) -> Result<JordanDemoReport> {
    if input.gradient.is_empty() || input.gradient.iter().any(|g| !(g.abs() < 0.5)) {
        return Err(invalid("gradient coordinates must lie in (-1/2, 1/2)"));
    }
    let g = Vector::from_column_slice(&input.gradient);
    let grid = GridSpec::new(input.bits, Vector::zeros(g.len()), 1.0)?;
    let h = tabulate(&grid, |x| Ok(g.dot(x)))?;
    let dist = jordan_distribution(&grid, &h)?;
    let tolerance = 2f64.powi(2 - input.bits as i32);
    let sampler = dist.sampler()?;
    let mut rng = ChaCha8Rng::seed_from_u64(input.seed);
    let mut misses = vec![0u64; g.len()];
    for _ in 0..input.shots {
        let v = sampler.sample(&mut rng);
        for (i, m) in misses.iter_mut().enumerate() {
            *m += ((v[i] - g[i]).abs() > tolerance) as u64;
        }
    }
    let axes = (0..g.len())
        .map(|axis| AxisReport {
            axis,
            target: g[axis],
            tolerance,
            exact_miss_probability: dist.miss_probability(axis, g[axis], tolerance),
            empirical_miss_rate: if input.shots == 0 {
                0.0
            } else {
                misses[axis] as f64 / input.shots as f64
            },
        })
        .collect();
    Ok(JordanDemoReport {
        command: "jordan-demo",
        qubits: grid.qubits(),
        axes,
        csv: dist.to_csv(),
        input,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PolarCheckReport {
    pub command: &'static str,
    pub body: BodySpec,
    pub queries: usize,
    pub seed: u64,
    pub check: PolarCheck,
    pub all_exact: bool,
}

pub fn polar_check(body: BodySpec, queries: usize, seed: u64) -> Result<PolarCheckReport> {
    let check = agreement_check(&body.build()?, queries, seed)?;
    Ok(PolarCheckReport {
        command: "polar-check",
        all_exact: check.all_exact(),
        body,
        queries,
        seed,
        check,
    })
}

/// `PASS`/`FAIL` lines for the adversary-matrix checks, and whether all passed.
pub fn adversary_lines(n: usize, seed: u64) -> Result<(String, bool, AdversaryReport)> {
    let rep = verify_adversary_bounds(n, seed)?;
    let mut out = String::new();
    let tag = |ok: bool| if ok { "PASS" } else { "FAIL" };
    let masks = if rep.exhaustive { "all" } else { "sampled" };
    let _ = writeln!(
        out,
        "# n={} seed={} masks={} ({})",
        n, seed, rep.masks_checked, masks
    );
    let _ = writeln!(
        out,
        "{} eigenvector: every row sum of Gamma equals n*2^n = {}",
        tag(rep.eigen_ok()),
        rep.row_sum
    );
    let _ = writeln!(
        out,
        "{} masked-norm: max_g |Gamma o Delta_g| = {:.6} <= 2^(n+3) = {} (max residual {:.3e})",
        tag(rep.masked_ok()),
        rep.max_masked_norm,
        rep.masked_bound,
        rep.max_relative_residual
    );
    let _ = writeln!(
        out,
        "{} block-norm: max_g |G| = {:.6} <= 2^(n+2) = {}, |Gamma_g^U| = |G| within {:.3e}, entries within {:.3e}",
        tag(rep.block_ok()),
        rep.max_block_norm,
        rep.block_bound,
        rep.block_reduction_error,
        rep.block_formula_error
    );
    let _ = writeln!(
        out,
        "# |Gamma| = {:.6}, ratio n*2^n / max_g |Gamma o Delta_g| = {:.6}",
        rep.gamma_norm, rep.lower_bound_ratio
    );
    let ok = rep.eigen_ok() && rep.masked_ok() && rep.block_ok();
    Ok((out, ok, rep))
}

/// `n,seed,trial,queries,recovered` rows of the greedy first-difference learner.
pub fn first_diff_csv(n: usize, trials: u64, seed: u64) -> Result<(String, bool)> {
    let rows = first_diff_bench(n, trials, seed)?;
    let mut out = String::from("n,seed,trial,queries,recovered\n");
    let mut ok = true;
    for row in rows {
        ok &= row.recovered && row.queries <= n as u64 + 1;
        let _ = writeln!(
            out,
            "{n},{seed},{},{},{}",
            row.trial, row.queries, row.recovered
        );
    }
    Ok((out, ok))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BenchBody {
    Ball,
    Box,
}

impl BenchBody {
    pub fn build(self, n: usize) -> Result<ConvexBody> {
        match self {
            BenchBody::Ball => ConvexBody::ball(Vector::zeros(n), 1.0),
            BenchBody::Box => {
                ConvexBody::axis_box(Vector::from_element(n, -1.0), Vector::from_element(n, 1.0))
            }
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            BenchBody::Ball => "ball",
            BenchBody::Box => "box",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BenchRow {
    pub n: usize,
    pub mem: u64,
    pub sep: u64,
    pub phase_queries: u64,
    pub height_evaluations: u64,
    pub mem_per_separation: u64,
}

/// Separation from membership at the point `2 e_1` of the unit body, per `n`.
pub fn bench_row(
    mode: GradientMode,
    body: BenchBody,
    n: usize,
    eta: f64,
    rho: f64,
    seed: u64,
) -> Result<BenchRow> {
    let body = body.build(n)?;
    let bounds = BodyBounds::of(&body);
    let params = sep_params(mode, &bounds, eta, rho)?;
    let mem = membership_for(body, &params, seed)?;
    let mut sep = SepFromMem::new(mem, bounds, params, seed)?;
    let mut point = Vector::zeros(n);
    point[0] = 2.0;
    sep.query_sep(&point)?;
    let stats = sep.stats().clone();
    Ok(BenchRow {
        n,
        mem: sep.membership().ledger().mem,
        sep: sep.ledger().sep,
        phase_queries: stats.superposition_queries,
        height_evaluations: stats.height_evaluations,
        mem_per_separation: sep.mem_queries_per_separation(stats.height_evaluations),
    })
}

pub fn bench_csv(
    mode: GradientMode,
    body: BenchBody,
    dims: &[usize],
    eta: f64,
    rho: f64,
    seed: u64,
) -> Result<String> {
    let reduction = match mode {
        GradientMode::Classical => "sep-from-mem",
        GradientMode::Quantum => "sep-from-mem-quantum",
    };
    let mut out =
        String::from("reduction,body,n,eta,rho,seed,mem,sep,phase_queries,height_evaluations\n");
    for &n in dims {
        let row = bench_row(mode, body, n, eta, rho, seed)?;
        let _ = writeln!(
            out,
            "{reduction},{},{n},{eta},{rho},{seed},{},{},{},{}",
            body.name(),
            row.mem,
            row.sep,
            row.phase_queries,
            row.height_evaluations
        );
    }
    Ok(out)
}
