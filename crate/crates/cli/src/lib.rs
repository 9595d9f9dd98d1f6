//! Scenario files, the example gallery, and report generation for the
//! `holonoid` command.

pub mod context;
pub mod gallery;
pub mod report;
pub mod sampling;
pub mod schema;
pub mod tasks;

use std::path::Path;
use std::time::Instant;

use holonoid::holonomy::chart_domain_check;
use serde_json::Value;

pub use context::{Context, Diagnostic, Overrides};
pub use report::{Report, Summary, TaskRecord};
pub use schema::Scenario;

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub overrides: Overrides,
    /// Record wall-clock time per task; reports then differ between runs.
    pub timings: bool,
}

/// Parses scenario text; errors carry the line and column.
pub fn parse_scenario(text: &str, origin: &str) -> Result<Scenario, Diagnostic> {
    serde_json::from_str(text).map_err(|e| Diagnostic::new(origin, e))
}

/// Loads `gallery:NAME` or a scenario file.
pub fn load_scenario(spec: &str) -> Result<Scenario, Diagnostic> {
    if let Some(name) = spec.strip_prefix("gallery:") {
        return gallery::scenario(name);
    }
    let text = std::fs::read_to_string(Path::new(spec)).map_err(|e| Diagnostic::new(spec, e))?;
    parse_scenario(&text, spec)
}

fn task_block(index: usize, id: Option<&String>) -> String {
    match id {
        Some(id) => format!("tasks[{index}] ({id})"),
        None => format!("tasks[{index}]"),
    }
}

/// Resolves every name a task refers to without running it.
fn check_references(ctx: &Context, block: &str, task: &schema::Task) -> Result<(), Diagnostic> {
    use schema::Task::*;
    let chart = |n: &String| ctx.chart(block, n).map(|_| ());
    let sub = |n: &String| ctx.subalgebroid(block, n).map(|_| ());
    match task {
        VerifyPresentation { presentation, .. } => {
            if ctx.presentations.contains_key(presentation) || ctx.groupoids.contains_key(presentation) {
                Ok(())
            } else {
                Err(Diagnostic::new(block, format!("unknown presentation {presentation:?}")))
            }
        }
        Involutivity { subalgebroid, .. }
        | Syzygies { subalgebroid, .. }
        | FiberDimensions { subalgebroid, .. }
        | LeafTrace { subalgebroid, .. } => sub(subalgebroid),
        ChartEval { chart: c, .. } | DomainCheck { chart: c, .. } => chart(c),
        Equivalence { left, right, oracle } => {
            ctx.word(&format!("{block}.left"), left)?;
            ctx.word(&format!("{block}.right"), right)?;
            ctx.oracle(block, oracle.as_ref()).map(|_| ())
        }
        IdentityTest { word, oracle } => {
            ctx.word(&format!("{block}.word"), word)?;
            ctx.oracle(block, oracle.as_ref()).map(|_| ())
        }
        EquivalenceBattery { charts, oracle, .. } => {
            charts.iter().try_for_each(chart)?;
            ctx.oracle(block, oracle.as_ref()).map(|_| ())
        }
        WordLaws { charts, .. } => charts.iter().try_for_each(chart),
        Pushforward {
            chart: c,
            target_groupoid,
            target_subalgebroid,
            ..
        } => {
            chart(c)?;
            ctx.groupoid(block, target_groupoid)?;
            sub(target_subalgebroid)
        }
        Include { word, chart: c } => {
            ctx.word(&format!("{block}.word"), word)?;
            chart(c)
        }
        CoveringLift { words, .. } => words
            .iter()
            .enumerate()
            .try_for_each(|(i, w)| ctx.word(&format!("{block}.words[{i}]"), w).map(|_| ())),
        FlowCheck { groupoid, .. } => ctx.groupoid(block, groupoid).map(|_| ()),
    }
}

/// Parse-level and dimension checks, the submersion grid check of every
/// chart, and name resolution for every task. Nothing is executed.
pub fn validate(s: &Scenario, overrides: &Overrides) -> Vec<Diagnostic> {
    let ctx = match Context::build(s, overrides) {
        Ok(c) => c,
        Err(d) => return vec![d],
    };
    let mut out = Vec::new();
    for (name, block) in &s.charts {
        let chart = &ctx.charts[name];
        let r = chart_domain_check(chart, block.check_density);
        if let Some(f) = r.failure {
            let message = match f.singular_value {
                Some(sv) => format!(
                    "t o phi is not a submersion at lambda = {:?}, base = {:?} (smallest singular value {sv:e})",
                    f.lambda, f.base
                ),
                None => format!("chart cannot be evaluated at lambda = {:?}, base = {:?}", f.lambda, f.base),
            };
            out.push(Diagnostic::new(format!("charts.{name}"), message));
        }
    }
    for (i, t) in s.tasks.iter().enumerate() {
        if let Err(d) = check_references(&ctx, &task_block(i, t.id.as_ref()), &t.task) {
            out.push(d);
        }
    }
    out
}

/// Runs every task in order. Only scenario-level problems are errors;
/// task failures are recorded in the report.
pub fn run_scenario(s: &Scenario, opts: &RunOptions) -> Result<Report, Diagnostic> {
    let ctx = Context::build(s, &opts.overrides)?;
    let mut records = Vec::with_capacity(s.tasks.len());
    for (index, t) in s.tasks.iter().enumerate() {
        let block = task_block(index, t.id.as_ref());
        let mut rng = sampling::task_rng(ctx.effective.seed, index);
        let start = Instant::now();
        let outcome = tasks::run(&ctx, &block, &t.task, &mut rng);
        let elapsed = start.elapsed().as_secs_f64() * 1e3;
        let (metrics, details, table, error) = match outcome {
            Ok(o) => (o.metrics, o.details, o.table, None),
            Err(d) => (Default::default(), Value::Null, None, Some(d.to_string())),
        };
        let assertions = report::evaluate(&t.assertions, &metrics);
        records.push(TaskRecord {
            index,
            id: t.id.clone().unwrap_or_else(|| t.task.kind().to_string()),
            kind: t.task.kind().to_string(),
            error,
            passed: assertions.iter().all(|a| a.passed),
            metrics,
            details,
            assertions,
            elapsed_ms: opts.timings.then_some(elapsed),
            table,
        });
    }
    let assertions: usize = records.iter().map(|r| r.assertions.len()).sum();
    let failed_assertions: usize = records
        .iter()
        .map(|r| r.assertions.iter().filter(|a| !a.passed).count())
        .sum();
    Ok(Report {
        schema_version: schema::SCHEMA_VERSION,
        scenario: s.name.clone(),
        settings: ctx.effective,
        summary: Summary {
            tasks: records.len(),
            errors: records.iter().filter(|r| r.error.is_some()).count(),
            assertions,
            failed_assertions,
            passed: failed_assertions == 0,
        },
        tasks: records,
    })
}
