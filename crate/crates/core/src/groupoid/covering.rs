//! Discrete-fiber coverings of torus models and unique path lifting.

use serde::Serialize;

use crate::algebroid::AlgebroidMorphism;

use super::model::wrap_centered;
use super::{identity_action, BaseDomain, GroupTag, GroupoidElement, GroupoidError, GroupoidSpec, MatrixGroup};

/// Largest accepted jump between consecutive path samples, in torus
/// coordinates: half the injectivity radius `1/2` of `R -> R/Z`.
pub const LIFT_MAX_JUMP: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum CoveringSpec {
    /// `R^k x| T^k -> T^k x T^k`, `(v, x) |-> (x + v mod 1, x)`.
    ActionOverTorusPair { dim: usize },
    /// `R^k -> T^k` as groups, reduction mod 1.
    VectorGroupOverTorus { dim: usize },
}

impl CoveringSpec {
    pub fn dim(&self) -> usize {
        match self {
            CoveringSpec::ActionOverTorusPair { dim } | CoveringSpec::VectorGroupOverTorus { dim } => *dim,
        }
    }

    pub fn source_spec(&self) -> Result<GroupoidSpec, GroupoidError> {
        let k = self.dim();
        let translations = MatrixGroup::new(GroupTag::Translation, k, 1e-9)?;
        match self {
            CoveringSpec::ActionOverTorusPair { .. } => {
                GroupoidSpec::transformation(translations, BaseDomain::Torus { dim: k }, identity_action(k))
            }
            CoveringSpec::VectorGroupOverTorus { .. } => {
                GroupoidSpec::new(super::GroupoidModel::MatrixGroup(translations))
            }
        }
    }

    pub fn target_spec(&self) -> Result<GroupoidSpec, GroupoidError> {
        match self {
            CoveringSpec::ActionOverTorusPair { dim } => GroupoidSpec::pair_torus(*dim),
            CoveringSpec::VectorGroupOverTorus { dim } => GroupoidSpec::matrix_group(GroupTag::Torus, *dim),
        }
    }

    /// The induced map of algebroids; both frames are the coordinate
    /// translations, so it is the identity.
    pub fn algebroid_map(&self) -> AlgebroidMorphism {
        match self {
            CoveringSpec::ActionOverTorusPair { dim } => AlgebroidMorphism::identity(*dim, *dim),
            CoveringSpec::VectorGroupOverTorus { dim } => AlgebroidMorphism::identity(0, *dim),
        }
    }

    pub fn project(&self, g: &GroupoidElement) -> Result<GroupoidElement, GroupoidError> {
        let source = self.source_spec()?;
        let target = self.target_spec()?;
        let v = source.offset(g).ok_or(GroupoidError::ModelMismatch)?;
        match self {
            CoveringSpec::ActionOverTorusPair { .. } => {
                let x = source.source(g);
                target.pair_element(&source.target(g), &x)
            }
            CoveringSpec::VectorGroupOverTorus { .. } => target.vector_group_element(&v, &[]),
        }
    }
}

/// Endpoint of the unique continuous lift, starting at the unit of the
/// covering groupoid, of a sampled path in the covered groupoid.
pub fn covering_lift_path(cov: &CoveringSpec, path: &[GroupoidElement]) -> Result<GroupoidElement, GroupoidError> {
    let target = cov.target_spec()?;
    let source = cov.source_spec()?;
    let first = path
        .first()
        .ok_or_else(|| GroupoidError::Shape("path needs at least one sample".into()))?;
    for g in path {
        target.validate(g)?;
    }
    let start = target.distance_to_unit(first)?;
    if start > 1e-9 {
        return Err(GroupoidError::NotAtUnit { distance: start });
    }
    // Offset of each sample, defined mod 1 on the covered side.
    let offsets = |g: &GroupoidElement| -> Vec<f64> {
        match cov {
            CoveringSpec::ActionOverTorusPair { .. } => {
                let t = target.target(g);
                let s = target.source(g);
                t.iter().zip(&s).map(|(a, b)| a - b).collect()
            }
            CoveringSpec::VectorGroupOverTorus { .. } => target.offset(g).expect("torus group element"),
        }
    };
    let k = cov.dim();
    let mut lifted = vec![0.0; k];
    let mut prev = offsets(first);
    let mut prev_source = target.source(first);
    for (index, g) in path.iter().enumerate().skip(1) {
        let cur = offsets(g);
        let src = target.source(g);
        let mut jump: f64 = 0.0;
        for i in 0..k {
            let d = wrap_centered(cur[i] - prev[i]);
            jump = jump.max(d.abs());
            lifted[i] += d;
        }
        for (a, b) in src.iter().zip(&prev_source) {
            jump = jump.max(wrap_centered(a - b).abs());
        }
        if jump >= LIFT_MAX_JUMP {
            return Err(GroupoidError::CoarseSampling { index, jump });
        }
        prev = cur;
        prev_source = src;
    }
    let last = path.last().expect("non-empty");
    match cov {
        CoveringSpec::ActionOverTorusPair { .. } => source.vector_group_element(&lifted, &target.source(last)),
        CoveringSpec::VectorGroupOverTorus { .. } => source.vector_group_element(&lifted, &[]),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn wind(cov: &CoveringSpec, total: f64, samples: usize) -> Vec<GroupoidElement> {
        let t = cov.target_spec().unwrap();
        (0..=samples)
            .map(|i| {
                let v = total * i as f64 / samples as f64;
                match cov {
                    CoveringSpec::ActionOverTorusPair { .. } => t.pair_element(&[v.rem_euclid(1.0)], &[0.0]).unwrap(),
                    CoveringSpec::VectorGroupOverTorus { .. } => t.vector_group_element(&[v], &[]).unwrap(),
                }
            })
            .collect()
    }

    #[test]
    fn lifts_count_windings() {
        for cov in [
            CoveringSpec::ActionOverTorusPair { dim: 1 },
            CoveringSpec::VectorGroupOverTorus { dim: 1 },
        ] {
            let src = cov.source_spec().unwrap();
            for (total, expect) in [(1.0, 1.0), (0.5, 0.5), (-2.25, -2.25), (0.0, 0.0)] {
                let lift = covering_lift_path(&cov, &wind(&cov, total, 100)).unwrap();
                assert!((src.offset(&lift).unwrap()[0] - expect).abs() < 1e-12);
                let back = cov.project(&lift).unwrap();
                let end = wind(&cov, total, 100).pop().unwrap();
                assert!(cov.target_spec().unwrap().distance(&back, &end).unwrap() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_path_lifts_to_unit() {
        let cov = CoveringSpec::ActionOverTorusPair { dim: 1 };
        let u = cov.target_spec().unwrap().unit(&[0.3]).unwrap();
        let lift = covering_lift_path(&cov, &[u.clone(), u]).unwrap();
        assert_eq!(lift, cov.source_spec().unwrap().unit(&[0.3]).unwrap());
    }

    #[test]
    fn coarse_and_offset_paths_are_rejected() {
        let cov = CoveringSpec::ActionOverTorusPair { dim: 1 };
        assert!(matches!(
            covering_lift_path(&cov, &wind(&cov, 1.0, 3)),
            Err(GroupoidError::CoarseSampling { index: 1, .. })
        ));
        let t = cov.target_spec().unwrap();
        let off = t.pair_element(&[0.2], &[0.0]).unwrap();
        assert!(matches!(covering_lift_path(&cov, &[off]), Err(GroupoidError::NotAtUnit { .. })));
    }
}
