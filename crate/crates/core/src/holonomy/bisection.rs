//! Local bisections of the groupoid, the constant-parameter bisections
//! carried by words, and the sampled test for carrying a given bisection.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::groupoid::{GroupoidElement, GroupoidError, GroupoidSpec};

use super::chart::Chart;
use super::verdict::{EquivParams, SampleResidual, SampleStatus, Verdict, Witness};
use super::word::{word_phi, Word};
use super::HolonomyError;

/// A local section `y |-> b(y)` of the source map.
pub trait Bisection {
    fn groupoid(&self) -> &Arc<GroupoidSpec>;
    fn eval(&self, y: &[f64]) -> Result<GroupoidElement, HolonomyError>;
}

/// `y |-> 1_y`.
#[derive(Debug, Clone)]
pub struct IdentityBisection {
    pub groupoid: Arc<GroupoidSpec>,
}

impl Bisection for IdentityBisection {
    fn groupoid(&self) -> &Arc<GroupoidSpec> {
        &self.groupoid
    }

    fn eval(&self, y: &[f64]) -> Result<GroupoidElement, HolonomyError> {
        Ok(self.groupoid.unit(y)?)
    }
}

/// The bisection carried by a word with all parameters held fixed: the
/// word is rebased at `y`, chaining each factor's base through targets.
#[derive(Debug, Clone)]
pub struct CarriedBisection {
    word: Word,
}

impl CarriedBisection {
    pub fn word(&self) -> &Word {
        &self.word
    }
}

pub fn carried_bisection(w: &Word) -> CarriedBisection {
    CarriedBisection { word: w.clone() }
}

impl Bisection for CarriedBisection {
    fn groupoid(&self) -> &Arc<GroupoidSpec> {
        self.word.groupoid()
    }

    fn eval(&self, y: &[f64]) -> Result<GroupoidElement, HolonomyError> {
        let g = word_phi(&self.word.rebase(y)?)?;
        // The source is the sample itself, not an integrated quantity.
        Ok(match g {
            GroupoidElement::Pair { target, .. } => GroupoidElement::Pair {
                target,
                source: self.word.groupoid().base_domain().wrapped(y),
            },
            other => other,
        })
    }
}

/// Base points around `x`: `x` itself followed by `count` points at
/// distance `radius`. In dimension 1 these are `x +- r`; in dimension 2,
/// equally spaced on a circle; in dimension 3, the cube diagonals; beyond,
/// `+- r e_i` along the first four axes.
pub fn sample_points(x: &[f64], radius: f64, count: usize) -> Vec<Vec<f64>> {
    let n = x.len();
    let mut out = vec![x.to_vec()];
    if n == 0 || count == 0 {
        return out;
    }
    let offsets: Vec<Vec<f64>> = match n {
        1 => vec![vec![radius], vec![-radius]],
        2 => (0..count)
            .map(|i| {
                let a = std::f64::consts::TAU * i as f64 / count as f64;
                vec![radius * a.cos(), radius * a.sin()]
            })
            .collect(),
        3 => {
            let s = radius / 3f64.sqrt();
            (0..8)
                .map(|i| {
                    (0..3)
                        .map(|b| if i >> b & 1 == 1 { -s } else { s })
                        .collect()
                })
                .collect()
        }
        _ => (0..4.min(n))
            .flat_map(|i| {
                [radius, -radius].map(|r| {
                    let mut e = vec![0.0; n];
                    e[i] = r;
                    e
                })
            })
            .collect(),
    };
    for d in offsets.into_iter().take(count.max(2)) {
        out.push(x.iter().zip(&d).map(|(a, b)| a + b).collect());
    }
    out
}

fn residual(
    groupoid: &GroupoidSpec,
    w: &Word,
    lambdas: &[f64],
    y: &[f64],
    want: &GroupoidElement,
) -> Result<Vec<f64>, HolonomyError> {
    let g = word_phi(&w.with_lambdas_at(lambdas, y, false)?)?;
    let mut d = groupoid.difference(&g, want)?;
    // Sources coincide by construction; only the target-side coordinates
    // carry information for pair arrows.
    if let GroupoidElement::Pair { target, .. } = &g {
        d.truncate(target.len());
    }
    Ok(d)
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

#[derive(Debug, Clone)]
struct NewtonOutcome {
    lambdas: Vec<f64>,
    residual: f64,
    iterations: usize,
    converged: bool,
}

/// Damped Gauss-Newton in the word parameters for `Phi(w at y) = want`.
fn newton(
    w: &Word,
    start: &[f64],
    y: &[f64],
    want: &GroupoidElement,
    params: &EquivParams,
) -> Result<NewtonOutcome, HolonomyError> {
    let groupoid = w.groupoid().clone();
    let mut lambdas = start.to_vec();
    let mut r = residual(&groupoid, w, &lambdas, y, want)?;
    let mut rn = norm(&r);
    let k = lambdas.len();
    let mut iterations = 0;
    while rn > params.tol_residual && iterations < params.newton_max_iter && k > 0 {
        iterations += 1;
        let h = params.fd_step;
        let mut jac = DMatrix::<f64>::zeros(r.len(), k);
        let mut ok = true;
        for col in 0..k {
            let mut plus = lambdas.clone();
            let mut minus = lambdas.clone();
            plus[col] += h;
            minus[col] -= h;
            match (
                residual(&groupoid, w, &plus, y, want),
                residual(&groupoid, w, &minus, y, want),
            ) {
                (Ok(a), Ok(b)) => {
                    for row in 0..r.len() {
                        jac[(row, col)] = (a[row] - b[row]) / (2.0 * h);
                    }
                }
                _ => {
                    ok = false;
                    break;
                }
            }
        }
        if !ok {
            break;
        }
        let rhs = -DVector::from_vec(r.clone());
        let Ok(step) = jac.svd(true, true).solve(&rhs, 1e-12) else {
            break;
        };
        let mut t = 1.0;
        let mut improved = false;
        for _ in 0..20 {
            let trial: Vec<f64> = lambdas.iter().zip(step.iter()).map(|(l, s)| l + t * s).collect();
            if let Ok(tr) = residual(&groupoid, w, &trial, y, want) {
                let tn = norm(&tr);
                if tn < rn {
                    lambdas = trial;
                    r = tr;
                    rn = tn;
                    improved = true;
                    break;
                }
            }
            t *= 0.5;
        }
        if !improved {
            break;
        }
    }
    Ok(NewtonOutcome {
        converged: rn <= params.tol_residual,
        lambdas,
        residual: rn,
        iterations,
    })
}

fn is_domain_error(e: &HolonomyError) -> bool {
    matches!(
        e,
        HolonomyError::ChartDomain { .. }
            | HolonomyError::Groupoid(GroupoidError::OutOfDomain(_))
            | HolonomyError::Groupoid(GroupoidError::DomainExit { .. })
    )
}

fn max_dev(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Sampled test whether `w` carries the bisection `c`: for each sample
/// `y` around `s(w)`, a Newton solve looks for parameters, continuously
/// connected to those of `w`, whose rebased word evaluates to `c(y)`.
pub fn carries_test(w: &Word, c: &dyn Bisection, params: &EquivParams, direction: &str) -> Verdict {
    let groupoid = w.groupoid().clone();
    let domain = groupoid.base_domain();
    let phi = match word_phi(w) {
        Ok(g) => g,
        Err(e) => return Verdict::unknown(Vec::new(), format!("word does not evaluate: {e}")),
    };
    let at_base = match c.eval(w.source()) {
        Ok(g) => g,
        Err(e) => return Verdict::unknown(Vec::new(), format!("bisection does not evaluate at the source: {e}")),
    };
    let gap = groupoid.distance(&phi, &at_base).unwrap_or(f64::INFINITY);
    if gap > params.tol_phi {
        return Verdict::NotEquivalent {
            witness: Witness::PhiMismatch {
                distance: gap,
                left: phi,
                right: at_base,
            },
        };
    }
    let lambda = w.lambdas();
    let mut radius = params.sample_radius;
    'radius: for _ in 0..=params.max_radius_halvings {
        let mut rows = Vec::new();
        let samples = sample_points(w.source(), radius, params.sample_count);
        for (index, raw) in samples.iter().enumerate() {
            let y = domain.wrapped(raw);
            if !domain.contains(raw) {
                radius *= 0.5;
                continue 'radius;
            }
            let want = match c.eval(&y) {
                Ok(g) => g,
                Err(e) if is_domain_error(&e) => {
                    radius *= 0.5;
                    continue 'radius;
                }
                Err(e) => return Verdict::unknown(rows, format!("bisection failed at {y:?}: {e}")),
            };
            if let Err(e) = w.with_lambdas_at(&lambda, &y, true) {
                if is_domain_error(&e) {
                    radius *= 0.5;
                    continue 'radius;
                }
                return Verdict::unknown(rows, format!("word failed at {y:?}: {e}"));
            }
            if index == 0 {
                // The solution must pass through (lambda, s(w)) itself.
                let r = residual(&groupoid, w, &lambda, &y, &want).map(|r| norm(&r)).unwrap_or(f64::INFINITY);
                rows.push(SampleResidual {
                    direction: direction.to_string(),
                    sample: y,
                    residual: r,
                    lambda: lambda.clone(),
                    iterations: 0,
                    status: if r <= params.tol_residual {
                        SampleStatus::Converged
                    } else {
                        SampleStatus::Stalled
                    },
                });
                continue;
            }
            let out = match newton(w, &lambda, &y, &want, params) {
                Ok(o) => o,
                Err(e) => return Verdict::unknown(rows, format!("solve failed at {y:?}: {e}")),
            };
            let mut status = if out.converged {
                SampleStatus::Converged
            } else {
                SampleStatus::Stalled
            };
            let dev = max_dev(&out.lambdas, &lambda);
            if out.converged && dev > params.continuity_floor {
                // A continuous solution branch shrinks with the sample
                // radius; a jump to another branch does not.
                let near: Vec<f64> = w
                    .source()
                    .iter()
                    .zip(domain.diff(&y, w.source()))
                    .map(|(x, d)| x + 0.25 * d)
                    .collect();
                let near = domain.wrapped(&near);
                let shrinks = c
                    .eval(&near)
                    .and_then(|want_near| newton(w, &lambda, &near, &want_near, params))
                    .map(|o| o.converged && max_dev(&o.lambdas, &lambda) <= 0.5 * dev + params.continuity_floor)
                    .unwrap_or(false);
                if !shrinks {
                    status = SampleStatus::Jump;
                }
            }
            rows.push(SampleResidual {
                direction: direction.to_string(),
                sample: y,
                residual: out.residual,
                lambda: out.lambdas,
                iterations: out.iterations,
                status,
            });
        }
        let all_ok = rows.iter().all(|r| r.status == SampleStatus::Converged);
        if all_ok {
            let max_residual = rows.iter().map(|r| r.residual).fold(0.0, f64::max);
            return Verdict::Equivalent {
                tolerance: params.tol_residual,
                samples_used: rows.len(),
                max_residual,
                direction: direction.to_string(),
            };
        }
        return Verdict::unknown(rows, "no continuous parameter solution at every sample".into());
    }
    Verdict::unknown(Vec::new(), "samples leave the domain at every radius".into())
}

/// `(lambda, y) |-> b^{-1} o phi(lambda, y)`: the chart left-translated by
/// the inverse of a bisection, where `b^{-1}(z) = b(w)^{-1}` for the point
/// `w` with `t(b(w)) = z`.
pub struct TranslatedChart {
    chart: Arc<Chart>,
    bisection: Arc<dyn Bisection + Send + Sync>,
}

#[derive(Debug, Clone, Serialize)]
pub struct TranslatedPoint {
    pub element: GroupoidElement,
    /// The point `w` with `t(b(w)) = t(phi(lambda, y))`.
    pub preimage: Vec<f64>,
}

pub fn translate_chart(chart: Arc<Chart>, b: Arc<dyn Bisection + Send + Sync>) -> TranslatedChart {
    TranslatedChart { chart, bisection: b }
}

impl TranslatedChart {
    pub fn chart(&self) -> &Arc<Chart> {
        &self.chart
    }

    pub fn eval(&self, lambda: &[f64], y: &[f64]) -> Result<TranslatedPoint, HolonomyError> {
        let groupoid = self.chart.groupoid().clone();
        let phi = self.chart.eval(lambda, y)?;
        let z = groupoid.target(&phi);
        let w = self.invert_target(&z)?;
        let bw = self.bisection.eval(&w)?;
        let element = groupoid.multiply(&groupoid.invert(&bw)?, &phi)?;
        Ok(TranslatedPoint { element, preimage: w })
    }

    /// Solves `t(b(w)) = z` by Newton's method with central differences.
    fn invert_target(&self, z: &[f64]) -> Result<Vec<f64>, HolonomyError> {
        let groupoid = self.chart.groupoid().clone();
        let domain = groupoid.base_domain();
        let n = z.len();
        if n == 0 {
            return Ok(Vec::new());
        }
        let tau = |w: &[f64]| -> Result<Vec<f64>, HolonomyError> {
            Ok(groupoid.target(&self.bisection.eval(w)?))
        };
        let mut w = z.to_vec();
        let h = 1e-6;
        for _ in 0..50 {
            let r = domain.diff(&tau(&w)?, z);
            if norm(&r) <= 1e-12 {
                return Ok(w);
            }
            let mut jac = DMatrix::<f64>::zeros(n, n);
            for col in 0..n {
                let mut p = w.clone();
                let mut m = w.clone();
                p[col] += h;
                m[col] -= h;
                let d = domain.diff(&tau(&p)?, &tau(&m)?);
                for row in 0..n {
                    jac[(row, col)] = d[row] / (2.0 * h);
                }
            }
            let step = jac
                .lu()
                .solve(&(-DVector::from_vec(r.clone())))
                .ok_or_else(|| HolonomyError::NotInvertible { point: w.clone() })?;
            for (wi, s) in w.iter_mut().zip(step.iter()) {
                *wi += s;
            }
            w = domain.wrapped(&w);
        }
        let r = domain.diff(&tau(&w)?, z);
        if norm(&r) <= 1e-9 {
            Ok(w)
        } else {
            Err(HolonomyError::NotInvertible { point: w })
        }
    }
}
