//! Seeded random points, parameters, and words.

use std::f64::consts::TAU;
use std::sync::Arc;

use holonoid::holonomy::{Chart, HolonomyError, Region, Word};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;

use crate::schema::BatteryMode;

const ATTEMPTS: usize = 64;

/// Independent stream for task `index` under the scenario seed.
pub fn task_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64 + 1);
    rng
}

pub fn point_in(rng: &mut ChaCha8Rng, lower: &[f64], upper: &[f64]) -> Vec<f64> {
    lower
        .iter()
        .zip(upper)
        .map(|(&a, &b)| if a < b { rng.gen_range(a..=b) } else { a })
        .collect()
}

pub fn point_in_region(rng: &mut ChaCha8Rng, r: &Region) -> Vec<f64> {
    point_in(rng, &r.lower, &r.upper)
}

/// Parameters in `[-range, range]`, shrunk so that both `lambda` and
/// `-lambda` lie in the chart's parameter box.
pub fn random_lambda(rng: &mut ChaCha8Rng, chart: &Chart, range: f64) -> Vec<f64> {
    let b = chart.lambda_box();
    b.lower
        .iter()
        .zip(&b.upper)
        .map(|(&lo, &hi)| {
            let r = range.min(-lo).min(hi);
            if r > 0.0 {
                rng.gen_range(-r..=r)
            } else {
                0.0
            }
        })
        .collect()
}

/// Application-order steps of a word.
pub fn steps_of(w: &Word) -> Vec<(Arc<Chart>, Vec<f64>)> {
    w.factors().iter().rev().map(|p| (p.chart.clone(), p.lambda.clone())).collect()
}

pub fn from_steps(w: &Word, steps: &[(Arc<Chart>, Vec<f64>)]) -> Result<Word, HolonomyError> {
    let mut out = Word::empty(w.groupoid().clone(), w.source())?;
    for (c, l) in steps {
        out = out.then(c, l)?;
    }
    Ok(out)
}

/// A word of `len` random steps from `source`; every step lands inside
/// the base box of its chart, so that the word can be inverted.
pub fn random_word(
    rng: &mut ChaCha8Rng,
    charts: &[Arc<Chart>],
    source: &[f64],
    len: usize,
    range: f64,
) -> Result<Word, HolonomyError> {
    let g = charts
        .first()
        .ok_or_else(|| HolonomyError::Shape("no charts to draw from".into()))?
        .groupoid()
        .clone();
    let mut w = Word::empty(g, source)?;
    for _ in 0..len {
        let mut scale = 1.0;
        let mut next = None;
        for attempt in 0..ATTEMPTS {
            let chart = &charts[rng.gen_range(0..charts.len())];
            let lambda = random_lambda(rng, chart, range * scale);
            if let Ok(candidate) = w.clone().then(chart, &lambda) {
                if chart.base_box().contains(candidate.target()) {
                    next = Some(candidate);
                    break;
                }
            }
            if attempt % 8 == 7 {
                scale *= 0.5;
            }
        }
        w = next.ok_or_else(|| HolonomyError::Shape(format!("no admissible step from {:?}", w.target())))?;
    }
    Ok(w)
}

/// The partner of `w` in an equivalence battery.
pub fn partner(
    rng: &mut ChaCha8Rng,
    mode: BatteryMode,
    w: &Word,
    charts: &[Arc<Chart>],
    range: f64,
    max_length: usize,
) -> Result<Word, HolonomyError> {
    let steps = steps_of(w);
    match mode {
        BatteryMode::Split => {
            let halves: Vec<_> = steps
                .iter()
                .flat_map(|(c, l)| {
                    let h: Vec<f64> = l.iter().map(|v| 0.5 * v).collect();
                    [(c.clone(), h.clone()), (c.clone(), h)]
                })
                .collect();
            from_steps(w, &halves)
        }
        BatteryMode::Merge => {
            let Some((chart, _)) = steps.first() else {
                return Ok(w.clone());
            };
            if steps.iter().any(|(c, _)| !Arc::ptr_eq(c, chart)) {
                return Err(HolonomyError::Shape("merge needs a single chart".into()));
            }
            let mut total = vec![0.0; chart.num_params()];
            for (_, l) in &steps {
                for (t, v) in total.iter_mut().zip(l) {
                    *t += v;
                }
            }
            from_steps(w, &[(chart.clone(), total)])
        }
        BatteryMode::Perturb => {
            let mut s = steps;
            let Some((chart, last)) = s.last_mut() else {
                return Err(HolonomyError::Shape("cannot perturb the empty word".into()));
            };
            let k = rng.gen_range(0..last.len().max(1));
            let base = last.clone();
            for _ in 0..ATTEMPTS {
                let delta = rng.gen_range(0.01..0.1) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let mut l = base.clone();
                l[k] += delta;
                if chart.lambda_box().contains(&l) {
                    *last = l;
                    return from_steps(w, &s);
                }
            }
            Err(HolonomyError::Shape("no admissible perturbation".into()))
        }
        BatteryMode::Wrap => {
            let mut s = steps;
            let Some((chart, first)) = s.first_mut() else {
                return Err(HolonomyError::Shape("cannot wrap the empty word".into()));
            };
            let base = first.clone();
            for m in [1.0, -1.0, 2.0, -2.0] {
                let mut l = base.clone();
                l[0] += m * TAU;
                if chart.lambda_box().contains(&l) {
                    *first = l;
                    return from_steps(w, &s);
                }
            }
            Err(HolonomyError::Shape("parameter box too small to wrap".into()))
        }
        BatteryMode::Random => {
            let len = rng.gen_range(1..=max_length.max(1));
            random_word(rng, charts, w.source(), len, range)
        }
    }
}
