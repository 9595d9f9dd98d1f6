//! Numeric tracing of the orbits of the induced singular foliation.

use std::fmt;
use std::str::FromStr;

use serde::Serialize;

use crate::ode::rk4_fixed;
use crate::poly::{CompiledPoly, Polynomial};

use super::subalgebroid::SingularSubalgebroid;
use super::AlgebroidError;

/// Flow direction `sign * rho(alpha_index)`; text form `+0`, `-1`, ...
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SignedGenerator {
    pub index: usize,
    pub negative: bool,
}

impl SignedGenerator {
    pub fn forward(index: usize) -> Self {
        SignedGenerator { index, negative: false }
    }

    pub fn backward(index: usize) -> Self {
        SignedGenerator { index, negative: true }
    }
}

impl FromStr for SignedGenerator {
    type Err = AlgebroidError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (negative, digits) = match s.as_bytes().first() {
            Some(b'-') => (true, &s[1..]),
            Some(b'+') => (false, &s[1..]),
            _ => (false, s),
        };
        let index = digits.parse().map_err(|_| AlgebroidError::Shape {
            block: "directions".into(),
            message: format!("bad signed generator {s:?}"),
        })?;
        Ok(SignedGenerator { index, negative })
    }
}

impl fmt::Display for SignedGenerator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", if self.negative { '-' } else { '+' }, self.index)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatchExit {
    pub sample: Vec<f64>,
    pub leg: usize,
    pub time: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct LeafTrace {
    /// Every accepted state, starting with the seed.
    pub samples: Vec<Vec<f64>>,
    /// Max `|I(sample) - I(seed)|` per supplied invariant.
    pub invariant_drift: Vec<f64>,
    pub exit: Option<PatchExit>,
}

/// Concatenated fixed-step RK4 flows of `sign * rho(alpha_i)`, one leg per
/// listed direction, each lasting `time_budget / directions.len()`. Tracing
/// stops at the first sample outside the patch, which is reported.
pub fn leaf_trace(
    b: &SingularSubalgebroid,
    seed: &[f64],
    time_budget: f64,
    step: f64,
    directions: &[SignedGenerator],
    invariants: &[Polynomial],
) -> Result<LeafTrace, AlgebroidError> {
    let n = b.presentation().base_dim();
    if seed.len() != n {
        return Err(AlgebroidError::PointDimension {
            expected: n,
            found: seed.len(),
        });
    }
    if !(step > 0.0) {
        return Err(AlgebroidError::Shape {
            block: "leaf_trace".into(),
            message: "step must be positive".into(),
        });
    }
    if !b.patch().contains_f64(seed) {
        return Err(AlgebroidError::OutsidePatch(seed.to_vec()));
    }
    let fields = anchored_fields(b)?;
    for d in directions {
        if d.index >= fields.len() {
            return Err(AlgebroidError::Shape {
                block: "directions".into(),
                message: format!("generator index {} out of range", d.index),
            });
        }
    }
    let compiled_invariants: Vec<CompiledPoly> = invariants.iter().map(Polynomial::compile).collect();
    let initial: Vec<f64> = compiled_invariants.iter().map(|p| p.eval(seed)).collect();
    let lo = b.patch().lower_f64();
    let hi = b.patch().upper_f64();

    let mut samples = vec![seed.to_vec()];
    let mut drift = vec![0.0_f64; invariants.len()];
    let mut exit = None;
    let mut state = seed.to_vec();
    let leg_time = if directions.is_empty() {
        0.0
    } else {
        time_budget / directions.len() as f64
    };
    let steps = (leg_time.abs() / step).ceil() as usize;
    for (leg, d) in directions.iter().enumerate() {
        let field = &fields[d.index];
        let sign = if d.negative { -1.0 } else { 1.0 };
        let mut rhs = |y: &[f64], out: &mut [f64]| {
            for (o, f) in out.iter_mut().zip(field) {
                *o = sign * f.eval(y);
            }
        };
        let mut observe = |y: &[f64]| {
            let inside = y.iter().zip(lo.iter().zip(&hi)).all(|(v, (a, c))| *a <= *v && *v <= *c);
            if inside {
                for ((dr, p), i0) in drift.iter_mut().zip(&compiled_invariants).zip(&initial) {
                    *dr = dr.max((p.eval(y) - i0).abs());
                }
                samples.push(y.to_vec());
            }
            inside
        };
        match rk4_fixed(&mut rhs, &state, leg_time, steps, &mut observe) {
            Ok(y) => state = y,
            Err(failure) => {
                exit = Some(PatchExit {
                    sample: failure.sample,
                    leg,
                    time: failure.time,
                });
                break;
            }
        }
    }
    Ok(LeafTrace {
        samples,
        invariant_drift: drift,
        exit,
    })
}

fn anchored_fields(b: &SingularSubalgebroid) -> Result<Vec<Vec<CompiledPoly>>, AlgebroidError> {
    b.generators()
        .iter()
        .map(|g| {
            Ok(b.presentation()
                .anchor_of(g)?
                .entries()
                .iter()
                .map(Polynomial::compile)
                .collect())
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct LeafClassification {
    /// Leaf label per seed, numbered by first appearance.
    pub labels: Vec<usize>,
    /// Rank of the anchored generators at each seed (leaf dimension).
    pub orbit_ranks: Vec<usize>,
    pub invariant_values: Vec<Vec<f64>>,
}

impl LeafClassification {
    pub fn distinct_labels(&self) -> usize {
        let mut l = self.labels.clone();
        l.sort_unstable();
        l.dedup();
        l.len()
    }

    /// Distinct labels among seeds where every invariant vanishes.
    pub fn distinct_labels_on_zero_level(&self, tol: f64) -> usize {
        let mut l: Vec<usize> = self
            .labels
            .iter()
            .zip(&self.invariant_values)
            .filter(|(_, v)| v.iter().all(|x| x.abs() <= tol))
            .map(|(l, _)| *l)
            .collect();
        l.sort_unstable();
        l.dedup();
        l.len()
    }
}

/// Groups seeds into leaves: two seeds share a leaf when their orbit
/// dimensions and invariant values agree and the traced orbit of one
/// passes within `proximity` of the other (closed transitively).
pub fn leaf_classify(
    b: &SingularSubalgebroid,
    seeds: &[Vec<f64>],
    invariants: &[Polynomial],
    time_budget: f64,
    step: f64,
    proximity: f64,
) -> Result<LeafClassification, AlgebroidError> {
    let m = b.num_generators();
    let mut orbit_ranks = Vec::with_capacity(seeds.len());
    let mut orbits = Vec::with_capacity(seeds.len());
    let compiled: Vec<CompiledPoly> = invariants.iter().map(Polynomial::compile).collect();
    let invariant_values: Vec<Vec<f64>> = seeds
        .iter()
        .map(|s| compiled.iter().map(|p| p.eval(s)).collect())
        .collect();
    for seed in seeds {
        let exact: Vec<_> = seed
            .iter()
            .map(|&v| crate::poly::rational::from_f64(v).ok_or_else(|| AlgebroidError::OutsidePatch(seed.clone())))
            .collect::<Result<_, _>>()?;
        orbit_ranks.push(b.evaluation_ranks(&exact)?.1);
        let mut samples = Vec::new();
        for i in 0..m {
            for dir in [SignedGenerator::forward(i), SignedGenerator::backward(i)] {
                let t = leaf_trace(b, seed, time_budget, step, &[dir], &[])?;
                samples.extend(t.samples);
            }
        }
        orbits.push(samples);
    }
    let k = seeds.len();
    let mut parent: Vec<usize> = (0..k).collect();
    fn find(p: &mut [usize], i: usize) -> usize {
        let mut r = i;
        while p[r] != r {
            r = p[r];
        }
        p[i] = r;
        r
    }
    for i in 0..k {
        for j in 0..k {
            if i == j || orbit_ranks[i] != orbit_ranks[j] {
                continue;
            }
            let same_level = invariant_values[i]
                .iter()
                .zip(&invariant_values[j])
                .all(|(a, c)| (a - c).abs() <= 1e-6 * (1.0 + a.abs()));
            if !same_level {
                continue;
            }
            let reaches = orbits[i].iter().any(|s| {
                s.iter().zip(&seeds[j]).map(|(a, c)| (a - c) * (a - c)).sum::<f64>().sqrt() <= proximity
            });
            if reaches {
                let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                parent[ri.max(rj)] = ri.min(rj);
            }
        }
    }
    let mut label_of_root = std::collections::HashMap::new();
    let labels = (0..k)
        .map(|i| {
            let root = find(&mut parent, i);
            let next = label_of_root.len();
            *label_of_root.entry(root).or_insert(next)
        })
        .collect();
    Ok(LeafClassification {
        labels,
        orbit_ranks,
        invariant_values,
    })
}
