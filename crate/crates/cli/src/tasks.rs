//! Execution of scenario tasks.

use std::collections::BTreeMap;
use std::fmt::Display;
use std::sync::Arc;

use holonoid::algebroid::{
    leaf_classify, leaf_trace, InvolutivityCertificate, InvolutivityVerdict, PairCoefficients, SignedGenerator,
    SingularSubalgebroid,
};
use holonoid::groupoid::{GroupoidElement, GroupoidSpec, NumericSection};
use holonoid::holonomy::{
    chart_domain_check, covering_lift_word, equivalent, identity_test, include_word, invert, pushforward_word, word_phi,
    Chart, GroupoidMorphism, QuotientOracle, Verdict, Word,
};
use holonoid::poly::{format_rational, parse_rational, ratio, rank_of_vectors, Polynomial, PolyVector, Rational};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use crate::context::{covering_spec, Context, Diagnostic};
use crate::report::Table;
use crate::sampling::{partner, point_in_region, random_word};
use crate::schema::{BatteryMode, MorphismBlock, RandomPoints, RegionBlock, Task};

pub type Metrics = BTreeMap<String, Value>;

/// Phi distance above which a battery pair is known to be distinct.
pub const DISTINCT_PHI: f64 = 1e-3;

#[derive(Debug, Clone, Default)]
pub struct Outcome {
    pub metrics: Metrics,
    pub details: Value,
    pub table: Option<Table>,
}

fn err<E: Display>(block: &str) -> impl Fn(E) -> Diagnostic + '_ {
    move |e| Diagnostic::new(block, e)
}

fn metrics<const N: usize>(pairs: [(&str, Value); N]) -> Metrics {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}

fn fmt_vec(v: &[f64]) -> String {
    v.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ")
}

fn word_json(w: &Word) -> Value {
    serde_json::to_value(w).unwrap_or(Value::Null)
}

fn region(block: &str, r: &RegionBlock) -> Result<holonoid::holonomy::Region, Diagnostic> {
    holonoid::holonomy::Region::new(r.lower.clone(), r.upper.clone()).map_err(err(block))
}

fn charts(ctx: &Context, block: &str, names: &[String]) -> Result<Vec<Arc<Chart>>, Diagnostic> {
    if names.is_empty() {
        return Err(Diagnostic::new(block, "no charts given"));
    }
    names.iter().map(|n| ctx.chart(block, n).cloned()).collect()
}

pub fn run(ctx: &Context, block: &str, task: &Task, rng: &mut ChaCha8Rng) -> Result<Outcome, Diagnostic> {
    match task {
        Task::VerifyPresentation {
            presentation,
            check_degree,
        } => verify_presentation(ctx, block, presentation, *check_degree),
        Task::Involutivity {
            subalgebroid,
            expected_constants,
        } => involutivity(ctx, block, subalgebroid, expected_constants.as_deref()),
        Task::Syzygies { subalgebroid, degree } => {
            let sub = ctx.subalgebroid(block, subalgebroid)?;
            let basis = sub.syzygy_basis_upto(*degree);
            let relations: Vec<Vec<String>> = basis.relations.iter().map(PolyVector::to_strings).collect();
            Ok(Outcome {
                metrics: metrics([("relations", json!(relations.len())), ("degree_bound", json!(degree))]),
                details: json!({ "relations": relations }),
                table: None,
            })
        }
        Task::FiberDimensions {
            subalgebroid,
            points,
            random_points,
            degree,
        } => fiber_dimensions(ctx, block, subalgebroid, points, random_points.as_ref(), *degree, rng),
        Task::LeafTrace {
            subalgebroid,
            seeds,
            time,
            step,
            invariants,
            proximity,
            zero_level_tolerance,
        } => {
            let sub = ctx.subalgebroid(block, subalgebroid)?;
            let n = sub.presentation().base_dim();
            let invs = invariants
                .iter()
                .map(|t| Polynomial::parse(t, n).map_err(err(block)))
                .collect::<Result<Vec<_>, _>>()?;
            leaf_task(block, sub, seeds, *time, *step, &invs, *proximity, *zero_level_tolerance)
        }
        Task::ChartEval { chart, lambda, base } => {
            let c = ctx.chart(block, chart)?;
            let g = c.eval(lambda, base).map_err(err(block))?;
            let spec = c.groupoid();
            Ok(Outcome {
                metrics: metrics([
                    ("distance_to_unit", json!(spec.distance_to_unit(&g).map_err(err(block))?)),
                    ("source", json!(spec.source(&g))),
                    ("target", json!(spec.target(&g))),
                ]),
                details: json!({ "element": g }),
                table: None,
            })
        }
        Task::DomainCheck { chart, density } => {
            let c = ctx.chart(block, chart)?;
            let r = chart_domain_check(c, *density);
            Ok(Outcome {
                metrics: metrics([
                    ("passed", json!(r.passed)),
                    ("points_checked", json!(r.points_checked)),
                    ("min_singular_value", json!(r.min_singular_value)),
                ]),
                details: json!({ "failure": r.failure }),
                table: None,
            })
        }
        Task::Equivalence { left, right, oracle } => {
            let w1 = ctx.word(&format!("{block}.left"), left)?;
            let w2 = ctx.word(&format!("{block}.right"), right)?;
            let oracle = ctx.oracle(block, oracle.as_ref())?;
            let v = equivalent(&w1, &w2, &ctx.effective.equiv, oracle).map_err(err(block))?;
            let d = phi_distance(&w1, &w2).map_err(err(block))?;
            Ok(verdict_outcome(&v, d, json!({ "left": word_json(&w1), "right": word_json(&w2) })))
        }
        Task::IdentityTest { word, oracle } => {
            let w = ctx.word(&format!("{block}.word"), word)?;
            let oracle = ctx.oracle(block, oracle.as_ref())?;
            let v = identity_test(&w, &ctx.effective.equiv, oracle).map_err(err(block))?;
            let g = word_phi(&w).map_err(err(block))?;
            let d = w.groupoid().distance_to_unit(&g).map_err(err(block))?;
            Ok(verdict_outcome(&v, d, json!({ "word": word_json(&w) })))
        }
        Task::EquivalenceBattery {
            charts: names,
            count,
            modes,
            source_box,
            lambda_range,
            max_length,
            oracle,
        } => {
            let cs = charts(ctx, block, names)?;
            let oracle = ctx.oracle(block, oracle.as_ref())?;
            let src = region(&format!("{block}.source_box"), source_box)?;
            if modes.is_empty() {
                return Err(Diagnostic::new(block, "no battery modes given"));
            }
            let plan = BatteryPlan {
                charts: &cs,
                count: *count,
                modes,
                source: &src,
                range: *lambda_range,
                max_length: *max_length,
                oracle,
            };
            Ok(battery(ctx, &plan, rng))
        }
        Task::WordLaws {
            charts: names,
            count,
            source_box,
            lambda_range,
            max_length,
        } => {
            let cs = charts(ctx, block, names)?;
            let src = region(&format!("{block}.source_box"), source_box)?;
            word_laws(ctx, &cs, *count, &src, *lambda_range, *max_length, rng)
        }
        Task::Pushforward {
            chart,
            morphism,
            target_groupoid,
            target_subalgebroid,
            count,
            source_box,
            lambda_range,
        } => {
            let c = ctx.chart(block, chart)?;
            let target = ctx.groupoid(block, target_groupoid)?;
            let sub = ctx.subalgebroid(block, target_subalgebroid)?;
            let src = region(&format!("{block}.source_box"), source_box)?;
            let m = match morphism {
                MorphismBlock::Identity => GroupoidMorphism::Identity,
                MorphismBlock::AnchorToPair => GroupoidMorphism::AnchorToPair,
                MorphismBlock::Covering(cov) => GroupoidMorphism::Covering(covering_spec(cov)),
            };
            pushforward(ctx, block, c, &m, target, sub, *count, &src, *lambda_range, rng)
        }
        Task::Include { word, chart } => {
            let w = ctx.word(&format!("{block}.word"), word)?;
            let big = ctx.chart(block, chart)?;
            let v = include_word(&w, big).map_err(err(block))?;
            let d = phi_distance(&w, &v).map_err(err(block))?;
            Ok(Outcome {
                metrics: metrics([("phi_error", json!(d)), ("lambdas", json!(v.lambdas()))]),
                details: json!({ "word": word_json(&v) }),
                table: None,
            })
        }
        Task::CoveringLift { covering, words } => {
            let cov = covering_spec(covering);
            let cover = cov.source_spec().map_err(err(block))?;
            let mut offsets = Vec::new();
            let mut max_projection = 0.0_f64;
            let mut deterministic = true;
            let mut lifts = Vec::new();
            for (i, wb) in words.iter().enumerate() {
                let b = format!("{block}.words[{i}]");
                let w = ctx.word(&b, wb)?;
                let (_, g) = covering_lift_word(&w, &cov).map_err(err(&b))?;
                let (_, again) = covering_lift_word(&w, &cov).map_err(err(&b))?;
                deterministic &= g == again;
                let phi = word_phi(&w).map_err(err(&b))?;
                let down = cov.project(&g).map_err(err(&b))?;
                max_projection = max_projection.max(w.groupoid().distance(&down, &phi).map_err(err(&b))?);
                offsets.push(cover.offset(&g).unwrap_or_default());
                lifts.push(json!(g));
            }
            Ok(Outcome {
                metrics: metrics([
                    ("offsets", json!(offsets)),
                    ("max_projection_error", json!(max_projection)),
                    ("deterministic", json!(deterministic)),
                ]),
                details: json!({ "lifts": lifts }),
                table: None,
            })
        }
        Task::FlowCheck {
            groupoid,
            count,
            coefficient_range,
            denominator,
            max_time,
            source_box,
        } => {
            let g = ctx.groupoid(block, groupoid)?;
            let src = region(&format!("{block}.source_box"), source_box)?;
            if *denominator <= 0 || *coefficient_range < 0 {
                return Err(Diagnostic::new(block, "need denominator > 0 and coefficient_range >= 0"));
            }
            flow_check(ctx, g, *count, *coefficient_range, *denominator, *max_time, &src, rng)
        }
    }
}

fn phi_distance(w1: &Word, w2: &Word) -> Result<f64, holonoid::holonomy::HolonomyError> {
    Ok(w1.groupoid().distance(&word_phi(w1)?, &word_phi(w2)?)?)
}

fn verdict_outcome(v: &Verdict, distance: f64, mut details: Value) -> Outcome {
    details["verdict"] = serde_json::to_value(v).unwrap_or(Value::Null);
    Outcome {
        metrics: metrics([("verdict", json!(v.kind())), ("phi_distance", json!(distance))]),
        details,
        table: None,
    }
}

fn verify_presentation(ctx: &Context, block: &str, name: &str, degree: u32) -> Result<Outcome, Diagnostic> {
    let p = ctx
        .presentations
        .get(name)
        .or_else(|| ctx.groupoids.get(name).map(|g| g.presentation()))
        .ok_or_else(|| Diagnostic::new(block, format!("unknown presentation {name:?}")))?;
    let r = p.verify(degree);
    let jacobi: Vec<Value> = r
        .jacobi_defects
        .iter()
        .map(|(d, s)| json!({ "terms": d, "defect": s.to_strings() }))
        .collect();
    let anchor: Vec<Value> = r
        .anchor_defects
        .iter()
        .map(|((i, j), s)| json!({ "pair": [i, j], "defect": s.to_strings() }))
        .collect();
    Ok(Outcome {
        metrics: metrics([
            ("valid", json!(r.is_valid())),
            ("jacobi_defects", json!(jacobi.len())),
            ("anchor_defects", json!(anchor.len())),
        ]),
        details: json!({ "jacobi": jacobi, "anchor": anchor }),
        table: None,
    })
}

fn involutivity(
    ctx: &Context,
    block: &str,
    name: &str,
    expected: Option<&[Vec<Vec<String>>]>,
) -> Result<Outcome, Diagnostic> {
    let sub = ctx.subalgebroid(block, name)?;
    let cert = sub.involutivity_certificate().map_err(err(block))?;
    let n = sub.presentation().base_dim();
    let printed: Vec<(usize, usize, Vec<String>)> = cert
        .coefficients
        .iter()
        .map(|pc| (pc.i, pc.j, pc.coefficients.iter().map(Polynomial::to_string).collect()))
        .collect();
    let mut m = Metrics::new();
    let verdict = match &cert.verdict {
        InvolutivityVerdict::Certified => "certified",
        InvolutivityVerdict::NotInvolutive { .. } => "not_involutive",
        InvolutivityVerdict::UndeterminedUpTo(_) => "undetermined",
    };
    m.insert("verdict".into(), json!(verdict));
    m.insert("reverified".into(), json!(cert.reverify(sub)));
    m.insert("reparsed_reverifies".into(), json!(reparse_reverifies(sub, &printed, n)));
    m.insert(
        "all_constant".into(),
        json!(cert.is_certified() && cert.coefficients.iter().all(|pc| pc.coefficients.iter().all(Polynomial::is_constant))),
    );
    if let Some(exp) = expected {
        m.insert("constants_match".into(), json!(constants_match(&cert, exp, block)?));
    }
    let mut details = json!({
        "coefficients": printed
            .iter()
            .map(|(i, j, c)| json!({ "i": i, "j": j, "coefficients": c }))
            .collect::<Vec<_>>(),
    });
    if let InvolutivityVerdict::NotInvolutive { point, pair } = &cert.verdict {
        let exact = point
            .iter()
            .map(|t| parse_rational(t))
            .collect::<Result<Vec<Rational>, _>>()
            .ok();
        let confirmed = exact.map(|x| witness_confirmed(sub, &x, *pair)).unwrap_or(Ok(false))?;
        m.insert("witness_confirmed".into(), json!(confirmed));
        m.insert("pair".into(), json!([pair.0, pair.1]));
        details["witness_point"] = json!(point);
    }
    if let InvolutivityVerdict::UndeterminedUpTo(d) = cert.verdict {
        details["undetermined_up_to"] = json!(d);
    }
    Ok(Outcome {
        metrics: m,
        details,
        table: None,
    })
}

/// Parses printed coefficient strings back and re-expands the identities.
fn reparse_reverifies(sub: &SingularSubalgebroid, printed: &[(usize, usize, Vec<String>)], n: usize) -> bool {
    if printed.is_empty() {
        return false;
    }
    let parsed: Result<Vec<PairCoefficients>, _> = printed
        .iter()
        .map(|(i, j, c)| {
            c.iter()
                .map(|t| Polynomial::parse(t, n))
                .collect::<Result<Vec<_>, _>>()
                .map(|coefficients| PairCoefficients {
                    i: *i,
                    j: *j,
                    coefficients,
                })
        })
        .collect();
    let Ok(coefficients) = parsed else {
        return false;
    };
    InvolutivityCertificate {
        verdict: InvolutivityVerdict::Certified,
        coefficients,
        witness_point: None,
    }
    .reverify(sub)
}

fn constants_match(cert: &InvolutivityCertificate, expected: &[Vec<Vec<String>>], block: &str) -> Result<bool, Diagnostic> {
    if !cert.is_certified() {
        return Ok(false);
    }
    for pc in &cert.coefficients {
        let row = expected
            .get(pc.i)
            .and_then(|p| p.get(pc.j))
            .ok_or_else(|| Diagnostic::new(block, format!("expected_constants lacks pair ({}, {})", pc.i, pc.j)))?;
        if row.len() != pc.coefficients.len() {
            return Ok(false);
        }
        for (text, f) in row.iter().zip(&pc.coefficients) {
            let c = parse_rational(text).map_err(err(block))?;
            if !f.is_constant() || f.constant_term() != c {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Exact check that the bracket of `pair` leaves the span at `x`.
fn witness_confirmed(sub: &SingularSubalgebroid, x: &[Rational], pair: (usize, usize)) -> Result<bool, Diagnostic> {
    let r = sub.presentation().rank();
    let gens = sub.generators();
    let values: Vec<Vec<Rational>> = gens
        .iter()
        .map(|g| g.eval(x))
        .collect::<Result<_, _>>()
        .map_err(err("witness"))?;
    let b = sub
        .presentation()
        .bracket(&gens[pair.0], &gens[pair.1])
        .map_err(err("witness"))?;
    let mut with = values.clone();
    with.push(b.eval(x).map_err(err("witness"))?);
    Ok(rank_of_vectors(&with, r) > rank_of_vectors(&values, r))
}

fn random_rational_point(rng: &mut ChaCha8Rng, n: usize, spec: &RandomPoints) -> Vec<Rational> {
    (0..n)
        .map(|_| loop {
            let k = rng.gen_range(-spec.range..=spec.range);
            if !(spec.nonzero && k == 0) {
                break ratio(k, spec.denominator);
            }
        })
        .collect()
}

fn fiber_dimensions(
    ctx: &Context,
    block: &str,
    name: &str,
    points: &[Vec<String>],
    random: Option<&RandomPoints>,
    degree: Option<u32>,
    rng: &mut ChaCha8Rng,
) -> Result<Outcome, Diagnostic> {
    let sub = ctx.subalgebroid(block, name)?;
    let n = sub.presentation().base_dim();
    let bound = degree.unwrap_or(sub.degree_bound());
    let mut table = Table::new(&["kind", "point", "dim", "upper_bound_only", "minimal_generators"]);
    let mut upper_bound_only = false;
    let mut eval = |x: &[Rational], kind: &str, table: &mut Table| -> Result<usize, Diagnostic> {
        let fd = sub.fiber_dim_at(x, bound).map_err(err(block))?;
        let gens = sub.minimal_generators_at(x, bound).map_err(err(block))?;
        upper_bound_only |= fd.upper_bound_only;
        table.push(vec![
            kind.into(),
            x.iter().map(format_rational).collect::<Vec<_>>().join(" "),
            fd.dim.to_string(),
            fd.upper_bound_only.to_string(),
            gens.iter().map(|g| g.to_string()).collect::<Vec<_>>().join(" "),
        ]);
        Ok(fd.dim)
    };
    let mut dims = Vec::new();
    let mut details = Vec::new();
    for p in points {
        if p.len() != n {
            return Err(Diagnostic::new(block, format!("point {p:?} must have {n} coordinates")));
        }
        let x = p
            .iter()
            .map(|t| parse_rational(t).map_err(err(block)))
            .collect::<Result<Vec<_>, _>>()?;
        let d = eval(&x, "given", &mut table)?;
        dims.push(d);
        details.push(json!({ "point": p, "dim": d }));
    }
    let mut m = Metrics::new();
    if let Some(spec) = random {
        if spec.denominator <= 0 || spec.range < 0 || (spec.nonzero && spec.range == 0) {
            return Err(Diagnostic::new(block, "random_points needs denominator > 0 and a nonempty range"));
        }
        let mut rdims = Vec::with_capacity(spec.count);
        for _ in 0..spec.count {
            let x = random_rational_point(rng, n, spec);
            rdims.push(eval(&x, "random", &mut table)?);
        }
        m.insert("random_points".into(), json!(rdims.len()));
        m.insert("random_min".into(), json!(rdims.iter().min()));
        m.insert("random_max".into(), json!(rdims.iter().max()));
    }
    m.insert("dims".into(), json!(dims));
    m.insert("degree_bound".into(), json!(bound));
    m.insert("upper_bound_only".into(), json!(upper_bound_only));
    Ok(Outcome {
        metrics: m,
        details: json!({ "points": details }),
        table: Some(table),
    })
}

/// Each leg lasts at most one time unit; every generator is followed
/// forward and back in both orders so traces stay near their seed.
fn trace_directions(generators: usize, time: f64) -> Vec<SignedGenerator> {
    let pattern: Vec<SignedGenerator> = (0..generators)
        .flat_map(|i| {
            [
                SignedGenerator::forward(i),
                SignedGenerator::backward(i),
                SignedGenerator::backward(i),
                SignedGenerator::forward(i),
            ]
        })
        .collect();
    let reps = ((time / pattern.len() as f64).ceil() as usize).max(1);
    pattern.iter().copied().cycle().take(reps * pattern.len()).collect()
}

#[allow(clippy::too_many_arguments)]
fn leaf_task(
    block: &str,
    sub: &SingularSubalgebroid,
    seeds: &[Vec<f64>],
    time: f64,
    step: f64,
    invariants: &[Polynomial],
    proximity: f64,
    zero_tol: f64,
) -> Result<Outcome, Diagnostic> {
    let c = leaf_classify(sub, seeds, invariants, time, step, proximity).map_err(err(block))?;
    let directions = trace_directions(sub.num_generators(), time);
    let mut table = Table::new(&["seed", "sample", "coordinates"]);
    let mut max_drift = 0.0_f64;
    let mut max_drift_off_zero = 0.0_f64;
    let mut exits = 0;
    let mut traces = Vec::new();
    for (k, seed) in seeds.iter().enumerate() {
        let t = leaf_trace(sub, seed, time, step, &directions, invariants).map_err(err(block))?;
        let drift = t.invariant_drift.iter().copied().fold(0.0, f64::max);
        max_drift = max_drift.max(drift);
        if c.invariant_values[k].iter().any(|v| v.abs() > zero_tol) {
            max_drift_off_zero = max_drift_off_zero.max(drift);
        }
        exits += usize::from(t.exit.is_some());
        for (i, s) in t.samples.iter().enumerate().step_by(10) {
            table.push(vec![k.to_string(), i.to_string(), fmt_vec(s)]);
        }
        traces.push(json!({
            "seed": seed,
            "label": c.labels[k],
            "orbit_rank": c.orbit_ranks[k],
            "invariants": c.invariant_values[k],
            "drift": t.invariant_drift,
            "samples": t.samples.len(),
            "exit": t.exit,
        }));
    }
    Ok(Outcome {
        metrics: metrics([
            ("seeds", json!(seeds.len())),
            ("labels", json!(c.labels)),
            ("distinct_leaves", json!(c.distinct_labels())),
            ("zero_level_leaves", json!(c.distinct_labels_on_zero_level(zero_tol))),
            ("max_drift", json!(max_drift)),
            ("max_drift_off_zero_level", json!(max_drift_off_zero)),
            ("exits", json!(exits)),
        ]),
        details: json!({ "seeds": traces }),
        table: Some(table),
    })
}

struct BatteryPlan<'a> {
    charts: &'a [Arc<Chart>],
    count: usize,
    modes: &'a [BatteryMode],
    source: &'a holonoid::holonomy::Region,
    range: f64,
    max_length: usize,
    oracle: Option<&'a QuotientOracle>,
}

fn mode_name(m: BatteryMode) -> &'static str {
    match m {
        BatteryMode::Split => "split",
        BatteryMode::Merge => "merge",
        BatteryMode::Perturb => "perturb",
        BatteryMode::Wrap => "wrap",
        BatteryMode::Random => "random",
    }
}

/// Ground truth of a battery pair when one is available.
fn battery_truth(distance: f64, mode: BatteryMode, oracle: Option<&QuotientOracle>, w1: &Word, w2: &Word) -> Option<bool> {
    if distance > DISTINCT_PHI {
        return Some(false);
    }
    if let Some(o) = oracle {
        return o.compare(w1, w2).ok().map(|r| r.equivalent);
    }
    matches!(mode, BatteryMode::Split | BatteryMode::Merge).then_some(true)
}

#[derive(Default)]
struct Tally {
    pairs: usize,
    equivalent: usize,
    not_equivalent: usize,
    unknown: usize,
    contradictions: usize,
}

impl Tally {
    fn add(&mut self, v: &Verdict, contradiction: bool) {
        self.pairs += 1;
        match v {
            Verdict::Equivalent { .. } => self.equivalent += 1,
            Verdict::NotEquivalent { .. } => self.not_equivalent += 1,
            Verdict::Unknown { .. } => self.unknown += 1,
        }
        self.contradictions += usize::from(contradiction);
    }

    fn json(&self) -> Value {
        json!({
            "pairs": self.pairs,
            "equivalent": self.equivalent,
            "not_equivalent": self.not_equivalent,
            "unknown": self.unknown,
            "contradictions": self.contradictions,
        })
    }
}

fn battery(ctx: &Context, plan: &BatteryPlan, rng: &mut ChaCha8Rng) -> Outcome {
    let mut total = Tally::default();
    let mut by_mode: BTreeMap<&str, Tally> = BTreeMap::new();
    let mut generation_failures = 0;
    let mut evaluation_errors = 0;
    let mut truth_unknown = 0;
    let (mut equal_phi, mut equal_phi_equivalent) = (0, 0);
    let (mut distinct_phi, mut distinct_phi_not_equivalent) = (0, 0);
    let mut flagged = Vec::new();
    let mut table = Table::new(&["pair", "mode", "left", "right", "phi_distance", "verdict", "truth"]);
    for i in 0..plan.count {
        let mode = plan.modes[i % plan.modes.len()];
        let pool = if mode == BatteryMode::Merge { &plan.charts[..1] } else { plan.charts };
        let source = point_in_region(rng, plan.source);
        let len = rng.gen_range(1..=plan.max_length.max(1));
        let pair = random_word(rng, pool, &source, len, plan.range)
            .and_then(|w1| partner(rng, mode, &w1, plan.charts, plan.range, plan.max_length).map(|w2| (w1, w2)));
        let Ok((w1, w2)) = pair else {
            generation_failures += 1;
            continue;
        };
        let (v, d) = match (equivalent(&w1, &w2, &ctx.effective.equiv, plan.oracle), phi_distance(&w1, &w2)) {
            (Ok(v), Ok(d)) => (v, d),
            _ => {
                evaluation_errors += 1;
                continue;
            }
        };
        let truth = battery_truth(d, mode, plan.oracle, &w1, &w2);
        let contradiction = matches!(
            (truth, &v),
            (Some(true), Verdict::NotEquivalent { .. }) | (Some(false), Verdict::Equivalent { .. })
        );
        truth_unknown += usize::from(truth.is_none());
        if d <= ctx.effective.equiv.tol_phi {
            equal_phi += 1;
            equal_phi_equivalent += usize::from(v.is_equivalent());
        }
        if d > DISTINCT_PHI {
            distinct_phi += 1;
            distinct_phi_not_equivalent += usize::from(v.is_not_equivalent());
        }
        total.add(&v, contradiction);
        by_mode.entry(mode_name(mode)).or_default().add(&v, contradiction);
        if contradiction || (v.is_unknown() && flagged.len() < 10) {
            flagged.push(json!({
                "pair": i,
                "mode": mode_name(mode),
                "left": word_json(&w1),
                "right": word_json(&w2),
                "contradiction": contradiction,
                "verdict": v,
            }));
        }
        table.push(vec![
            i.to_string(),
            mode_name(mode).into(),
            fmt_vec(&w1.lambdas()),
            fmt_vec(&w2.lambdas()),
            d.to_string(),
            v.kind().into(),
            truth.map_or("unknown".into(), |t| t.to_string()),
        ]);
    }
    let rate = if total.pairs == 0 {
        0.0
    } else {
        total.unknown as f64 / total.pairs as f64
    };
    let modes: serde_json::Map<String, Value> = by_mode.iter().map(|(k, t)| (k.to_string(), t.json())).collect();
    Outcome {
        metrics: metrics([
            ("pairs", json!(total.pairs)),
            ("equivalent", json!(total.equivalent)),
            ("not_equivalent", json!(total.not_equivalent)),
            ("unknown", json!(total.unknown)),
            ("unknown_rate", json!(rate)),
            ("contradictions", json!(total.contradictions)),
            ("truth_unknown", json!(truth_unknown)),
            ("generation_failures", json!(generation_failures)),
            ("evaluation_errors", json!(evaluation_errors)),
            ("equal_phi_pairs", json!(equal_phi)),
            ("equal_phi_equivalent", json!(equal_phi_equivalent)),
            ("distinct_phi_pairs", json!(distinct_phi)),
            ("distinct_phi_not_equivalent", json!(distinct_phi_not_equivalent)),
            ("by_mode", Value::Object(modes)),
        ]),
        details: json!({ "flagged": flagged }),
        table: Some(table),
    }
}

fn word_laws(
    ctx: &Context,
    cs: &[Arc<Chart>],
    count: usize,
    src: &holonoid::holonomy::Region,
    range: f64,
    max_length: usize,
    rng: &mut ChaCha8Rng,
) -> Result<Outcome, Diagnostic> {
    let g = cs[0].groupoid().clone();
    let mut max_compose = 0.0_f64;
    let mut max_inverse = 0.0_f64;
    let mut max_double = 0.0_f64;
    let mut max_kappa = 0.0_f64;
    let mut tally = Tally::default();
    let mut failures = 0;
    let mut table = Table::new(&["sample", "word", "compose_error", "inverse_error", "identity_verdict"]);
    for i in 0..count {
        let draw = |rng: &mut ChaCha8Rng, x: &[f64]| {
            let len = rng.gen_range(1..=max_length.max(1));
            random_word(rng, cs, x, len, range)
        };
        let x = point_in_region(rng, src);
        let result = draw(rng, &x).and_then(|w2| draw(rng, w2.target()).map(|w1| (w1, w2))).and_then(|(w1, w2)| {
            let composed = word_phi(&holonoid::holonomy::compose(&w1, &w2)?)?;
            let product = g.multiply(&word_phi(&w1)?, &word_phi(&w2)?)?;
            let compose_error = g.distance(&composed, &product)?;
            let inv = invert(&w2)?;
            let (p, q) = (word_phi(&w2)?, word_phi(&inv)?);
            let inverse_error = g
                .distance_to_unit(&g.multiply(&p, &q)?)?
                .max(g.distance_to_unit(&g.multiply(&q, &p)?)?);
            let twice = invert(&inv)?;
            let double_error = g.distance(&word_phi(&twice)?, &p)?;
            let kappa = twice
                .lambdas()
                .iter()
                .zip(w2.lambdas())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            let loop_word = holonoid::holonomy::compose(&w2, &inv)?;
            let v = identity_test(&loop_word, &ctx.effective.equiv, None)?;
            Ok((w2, compose_error, inverse_error, double_error, kappa, v))
        });
        match result {
            Ok((w, ce, ie, de, ke, v)) => {
                max_compose = max_compose.max(ce);
                max_inverse = max_inverse.max(ie);
                max_double = max_double.max(de);
                max_kappa = max_kappa.max(ke);
                table.push(vec![
                    i.to_string(),
                    fmt_vec(&w.lambdas()),
                    ce.to_string(),
                    ie.to_string(),
                    v.kind().into(),
                ]);
                tally.add(&v, false);
            }
            Err(_) => failures += 1,
        }
    }
    Ok(Outcome {
        metrics: metrics([
            ("samples", json!(tally.pairs)),
            ("failures", json!(failures)),
            ("max_compose_error", json!(max_compose)),
            ("max_inverse_error", json!(max_inverse)),
            ("max_double_inverse_error", json!(max_double)),
            ("max_kappa_parameter_error", json!(max_kappa)),
            ("identity_equivalent", json!(tally.equivalent)),
            ("identity_not_equivalent", json!(tally.not_equivalent)),
            ("identity_unknown", json!(tally.unknown)),
        ]),
        details: Value::Null,
        table: Some(table),
    })
}

#[allow(clippy::too_many_arguments)]
fn pushforward(
    ctx: &Context,
    block: &str,
    chart: &Arc<Chart>,
    m: &GroupoidMorphism,
    target: &Arc<GroupoidSpec>,
    sub: &Arc<SingularSubalgebroid>,
    count: usize,
    src: &holonoid::holonomy::Region,
    range: f64,
    rng: &mut ChaCha8Rng,
) -> Result<Outcome, Diagnostic> {
    let source = chart.groupoid().clone();
    let charts = [chart.clone()];
    let mut max_error = 0.0_f64;
    let mut failures = 0;
    let mut equivalent_pairs = 0;
    let mut violations = 0;
    let mut table = Table::new(&["sample", "word", "error", "pair_verdict", "pushed_verdict"]);
    let probe = Word::single(chart, &vec![0.0; chart.num_params()], &point_in_region(rng, src))
        .map_err(err(block))?;
    pushforward_word(&probe, m, target, sub).map_err(err(block))?;
    for i in 0..count {
        let x = point_in_region(rng, src);
        let len = rng.gen_range(1..=2);
        let Ok(w) = random_word(rng, &charts, &x, len, range) else {
            failures += 1;
            continue;
        };
        let pushed = pushforward_word(&w, m, target, sub).map_err(err(block))?;
        let mapped = m
            .apply(&source, target, &word_phi(&w).map_err(err(block))?)
            .map_err(err(block))?;
        let e = target
            .distance(&mapped, &word_phi(&pushed).map_err(err(block))?)
            .map_err(err(block))?;
        max_error = max_error.max(e);
        let split = partner(rng, BatteryMode::Split, &w, &charts, range, 2).map_err(err(block))?;
        let v = equivalent(&w, &split, &ctx.effective.equiv, None).map_err(err(block))?;
        let mut pushed_kind = "-";
        if v.is_equivalent() {
            equivalent_pairs += 1;
            let pushed_split = pushforward_word(&split, m, target, sub).map_err(err(block))?;
            let pv = equivalent(&pushed, &pushed_split, &ctx.effective.equiv, None).map_err(err(block))?;
            violations += usize::from(pv.is_not_equivalent());
            pushed_kind = pv.kind();
        }
        table.push(vec![
            i.to_string(),
            fmt_vec(&w.lambdas()),
            e.to_string(),
            v.kind().into(),
            pushed_kind.into(),
        ]);
    }
    Ok(Outcome {
        metrics: metrics([
            ("samples", json!(count - failures)),
            ("failures", json!(failures)),
            ("max_error", json!(max_error)),
            ("equivalent_pairs", json!(equivalent_pairs)),
            ("violations", json!(violations)),
        ]),
        details: Value::Null,
        table: Some(table),
    })
}

/// A section whose components are affine in the coordinates, or constant
/// where flows of nonconstant sections are not supported.
fn random_section(rng: &mut ChaCha8Rng, g: &GroupoidSpec, range: i64, den: i64) -> NumericSection {
    let n = g.base_dim();
    let linear = n > 0 && !g.base_domain().is_torus();
    let mut c = || format!("{}/{den}", rng.gen_range(-range..=range));
    let texts: Vec<String> = (0..g.rank())
        .map(|_| {
            let mut s = c();
            if linear {
                for v in 0..n {
                    s.push_str(&format!(" + {}*x{v}", c()));
                }
            }
            s
        })
        .collect();
    NumericSection::compile(&PolyVector::parse(&texts, n).expect("generated sections parse"))
}

#[allow(clippy::too_many_arguments)]
fn flow_check(
    ctx: &Context,
    g: &GroupoidSpec,
    count: usize,
    range: i64,
    den: i64,
    max_time: f64,
    src: &holonoid::holonomy::Region,
    rng: &mut ChaCha8Rng,
) -> Result<Outcome, Diagnostic> {
    let rk = &ctx.effective.rk;
    let half = 0.5 * max_time;
    let mut max_semigroup = 0.0_f64;
    let mut max_target = 0.0_f64;
    let mut max_source = 0.0_f64;
    let mut samples = 0;
    let mut skipped = 0;
    let domain = g.base_domain();
    let mut table = Table::new(&["sample", "a", "b", "semigroup_error", "target_error"]);
    for i in 0..count {
        let alpha = random_section(rng, g, range, den);
        let beta = random_section(rng, g, range, den);
        let x = point_in_region(rng, src);
        let s = rng.gen_range(0.0..=half);
        let a = rng.gen_range(0.0..=half);
        let b = rng.gen_range(0.0..=half);
        let result = (|| -> Result<(f64, f64, f64), holonoid::groupoid::GroupoidError> {
            let g0: GroupoidElement = g.right_invariant_flow(&beta, &g.unit(&x)?, s, rk)?;
            let once = g.right_invariant_flow(&alpha, &g0, a + b, rk)?;
            let mid = g.right_invariant_flow(&alpha, &g0, a, rk)?;
            let twice = g.right_invariant_flow(&alpha, &mid, b, rk)?;
            let moved = g.anchor_flow(&alpha, &g.target(&g0), a + b, rk)?;
            Ok((
                g.distance(&once, &twice)?,
                domain.distance(&g.target(&once), &moved),
                domain.distance(&g.source(&once), &g.source(&g0)),
            ))
        })();
        match result {
            Ok((se, te, so)) => {
                samples += 1;
                max_semigroup = max_semigroup.max(se);
                max_target = max_target.max(te);
                max_source = max_source.max(so);
                table.push(vec![i.to_string(), a.to_string(), b.to_string(), se.to_string(), te.to_string()]);
            }
            Err(_) => skipped += 1,
        }
    }
    Ok(Outcome {
        metrics: metrics([
            ("samples", json!(samples)),
            ("skipped", json!(skipped)),
            ("max_semigroup_error", json!(max_semigroup)),
            ("max_target_error", json!(max_target)),
            ("max_source_error", json!(max_source)),
        ]),
        details: Value::Null,
        table: Some(table),
    })
}
