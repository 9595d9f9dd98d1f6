use std::sync::Arc;

use holonoid::algebroid::{
    leaf_classify, leaf_trace, so3_constants, AlgebroidMorphism, AlgebroidPresentation, InvolutivityVerdict,
    Section, SignedGenerator, SingularSubalgebroid,
};
use holonoid::poly::{rat, ratio, PolyVector, Polynomial, QMatrix, Rational};
use proptest::prelude::*;

fn sec(texts: &[&str], n: usize) -> Section {
    PolyVector::parse(texts, n).unwrap()
}

fn tangent(n: usize) -> Arc<AlgebroidPresentation> {
    Arc::new(AlgebroidPresentation::tangent(n))
}

fn rotation_fields() -> Vec<Section> {
    vec![
        sec(&["0", "-x2", "x1"], 3),
        sec(&["x2", "0", "-x0"], 3),
        sec(&["-x1", "x0", "0"], 3),
    ]
}

fn dxy() -> SingularSubalgebroid {
    let pi = QMatrix::from_rows(vec![vec![rat(0), rat(1)], vec![rat(-1), rat(0)]], 2).unwrap();
    let p = Arc::new(AlgebroidPresentation::cotangent_constant_poisson(&pi).unwrap());
    SingularSubalgebroid::new(p, vec![sec(&["x1", "x0"], 2)], 4).unwrap()
}

fn xy_dz() -> SingularSubalgebroid {
    SingularSubalgebroid::new(tangent(3), vec![sec(&["0", "0", "x0"], 3), sec(&["0", "0", "x1"], 3)], 4).unwrap()
}

fn q(v: &[i64]) -> Vec<Rational> {
    v.iter().map(|&x| rat(x)).collect()
}

#[test]
fn rotation_fields_certify_with_so3_constants() {
    let b = SingularSubalgebroid::new(tangent(3), rotation_fields(), 4).unwrap();
    let cert = b.involutivity_certificate().unwrap();
    assert_eq!(cert.verdict, InvolutivityVerdict::Certified);
    assert!(cert.reverify(&b));
    // [v_i, v_j] = -eps_ijk v_k, the right-invariant convention.
    let eps = so3_constants();
    assert_eq!(cert.coefficients.len(), 3);
    for pc in &cert.coefficients {
        for (k, f) in pc.coefficients.iter().enumerate() {
            assert!(f.is_constant(), "coefficient {f} is not constant");
            assert_eq!(f.constant_term(), eps[pc.i][pc.j][k]);
        }
    }
}

#[test]
fn single_generator_certifies_with_zero() {
    let b = SingularSubalgebroid::new(tangent(2), vec![sec(&["x1", "x0^2"], 2)], 4).unwrap();
    let cert = b.involutivity_certificate().unwrap();
    assert!(cert.is_certified());
    assert!(cert.coefficients.is_empty());
}

#[test]
fn dx_and_x_dy_is_not_involutive() {
    let b = SingularSubalgebroid::new(tangent(2), vec![sec(&["1", "0"], 2), sec(&["0", "x0"], 2)], 4).unwrap();
    let cert = b.involutivity_certificate().unwrap();
    match &cert.verdict {
        InvolutivityVerdict::NotInvolutive { pair, .. } => assert_eq!(*pair, (0, 1)),
        other => panic!("expected a witness, got {other:?}"),
    }
    let x = cert.witness_point.clone().unwrap();
    assert_eq!(x[0], rat(0));
    assert!(!cert.reverify(&b));
}

#[test]
fn syzygies_of_x_dz_y_dz() {
    let b = xy_dz();
    let syz = b.syzygy_basis_upto(1);
    assert_eq!(syz.relations, vec![sec(&["x1", "-x0"], 3)]);
    for d in 1..=3 {
        for s in &b.syzygy_basis_upto(d).relations {
            assert!(b.combine(s.entries()).unwrap().is_zero());
        }
    }
    let free = SingularSubalgebroid::new(tangent(2), vec![sec(&["1", "0"], 2), sec(&["1", "1"], 2)], 2).unwrap();
    assert!(free.syzygy_basis_upto(3).relations.is_empty());
    let single = SingularSubalgebroid::new(tangent(2), vec![sec(&["x0*x1", "x1"], 2)], 2).unwrap();
    assert!(single.syzygy_basis_upto(4).relations.is_empty());
}

#[test]
fn fiber_dimensions_and_minimal_generators() {
    let b = xy_dz();
    assert_eq!(b.fiber_dim_at(&q(&[0, 0, 0]), 1).unwrap().dim, 2);
    assert_eq!(b.fiber_dim_at(&q(&[1, 0, 0]), 1).unwrap().dim, 1);
    assert!(b.fiber_dim_at(&q(&[1, 0, 0]), 1).unwrap().upper_bound_only);
    assert_eq!(b.minimal_generators_at(&q(&[1, 0, 0]), 1).unwrap(), vec![0]);
    assert_eq!(b.minimal_generators_at(&q(&[0, 1, 0]), 1).unwrap(), vec![1]);
    assert_eq!(b.minimal_generators_at(&q(&[0, 0, 0]), 1).unwrap(), vec![0, 1]);

    let d = dxy();
    for x in [[0, 0], [1, 1], [0, 2]] {
        assert_eq!(d.fiber_dim_at(&q(&x), 4).unwrap().dim, 1);
    }
    let free = SingularSubalgebroid::new(tangent(3), (0..3).map(|i| PolyVector::unit(3, 3, i)).collect(), 2)
        .unwrap();
    assert_eq!(free.minimal_generators_at(&q(&[2, -1, 1]), 2).unwrap(), vec![0, 1, 2]);
}

#[test]
fn evaluation_ranks_examples() {
    let d = dxy();
    assert_eq!(d.evaluation_ranks(&q(&[0, 0])).unwrap(), (0, 0));
    assert_eq!(d.evaluation_ranks(&q(&[1, 1])).unwrap(), (1, 1));
    let full = SingularSubalgebroid::new(tangent(2), vec![sec(&["1", "0"], 2), sec(&["0", "1"], 2)], 1).unwrap();
    assert_eq!(full.evaluation_ranks(&q(&[0, 0])).unwrap(), (2, 2));
    let rot = SingularSubalgebroid::new(tangent(2), vec![sec(&["-x1", "x0"], 2)], 1).unwrap();
    assert_eq!(rot.evaluation_ranks(&q(&[0, 0])).unwrap(), (0, 0));
    // The Hamiltonian field of xy is y d/dy - x d/dx.
    let field = d.presentation().anchor_of(&d.generators()[0]).unwrap();
    assert_eq!(field, sec(&["-x0", "x1"], 2));
}

#[test]
fn dxy_leaf_traces() {
    let d = dxy();
    let xy = Polynomial::parse("x0*x1", 2).unwrap();
    let on_axis = leaf_trace(&d, &[1.0, 0.0], 10.0, 1e-3, &[SignedGenerator::forward(0)], &[]).unwrap();
    assert!(on_axis.exit.is_none());
    assert!(on_axis.samples.iter().all(|s| s[1].abs() < 1e-9 && s[0] > 0.0));

    let legs: Vec<SignedGenerator> = (0..10)
        .flat_map(|_| [SignedGenerator::forward(0), SignedGenerator::backward(0)])
        .collect();
    let hyper = leaf_trace(&d, &[1.0, 1.0], 10.0, 1e-3, &legs, &[xy]).unwrap();
    assert!(hyper.exit.is_none());
    assert!(hyper.invariant_drift[0] < 1e-6);

    let escape = leaf_trace(&d, &[1.0, 1.0], 10.0, 1e-3, &[SignedGenerator::forward(0)], &[]).unwrap();
    let exit = escape.exit.expect("leaves [-3, 3]^2");
    assert!(exit.sample[1] > 3.0);

    let zero = SingularSubalgebroid::new(tangent(2), vec![sec(&["0", "0"], 2)], 1).unwrap();
    let still = leaf_trace(&zero, &[0.5, -0.5], 1.0, 1e-2, &[SignedGenerator::forward(0)], &[]).unwrap();
    assert!(still.samples.iter().all(|s| s == &vec![0.5, -0.5]));
}

#[test]
fn dxy_zero_level_has_five_leaves() {
    let d = dxy();
    let xy = Polynomial::parse("x0*x1", 2).unwrap();
    let seeds = vec![
        vec![1.0, 0.0],
        vec![-1.0, 0.0],
        vec![0.0, 1.0],
        vec![0.0, -1.0],
        vec![0.0, 0.0],
        vec![1.0, 1.0],
        vec![-1.0, 1.0],
        vec![2.0, 0.5],
    ];
    let c = leaf_classify(&d, &seeds, &[xy], 10.0, 1e-3, 1e-2).unwrap();
    assert_eq!(c.distinct_labels_on_zero_level(1e-9), 5);
    assert_eq!(c.labels[5], c.labels[7]);
    assert_ne!(c.labels[5], c.labels[6]);
    assert_eq!(c.orbit_ranks[4], 0);
}

#[test]
fn pushforward_along_anchor() {
    // so(3) x R^3 transformation algebroid: anchor columns are rotation fields.
    let fields = rotation_fields();
    let anchor: Vec<Vec<Polynomial>> = (0..3)
        .map(|k| (0..3).map(|i| fields[i].get(k).clone()).collect())
        .collect();
    let mut structure = std::collections::BTreeMap::new();
    let eps = so3_constants();
    for i in 0..3 {
        for j in (i + 1)..3 {
            let c = (0..3).map(|k| Polynomial::constant(3, eps[i][j][k].clone())).collect();
            structure.insert((i, j), PolyVector::new(3, c).unwrap());
        }
    }
    let action = Arc::new(AlgebroidPresentation::new(3, 3, anchor, structure).unwrap());
    assert!(action.verify(1).is_valid());
    let constants = SingularSubalgebroid::new(action.clone(), (0..3).map(|i| PolyVector::unit(3, 3, i)).collect(), 2)
        .unwrap();
    let pushed = constants
        .pushforward_generators(&AlgebroidMorphism::anchor(&action), tangent(3))
        .unwrap();
    assert_eq!(pushed.generators(), fields.as_slice());
    let same = constants
        .pushforward_generators(&AlgebroidMorphism::identity(3, 3), action.clone())
        .unwrap();
    assert_eq!(same.generators(), constants.generators());
    let wrong = AlgebroidMorphism::identity(3, 2);
    assert!(constants.pushforward_generators(&wrong, tangent(3)).is_err());
}

#[test]
fn free_constant_generators_have_full_fiber_everywhere() {
    let b = SingularSubalgebroid::new(
        tangent(3),
        vec![sec(&["1", "2", "0"], 3), sec(&["0", "1", "-1"], 3)],
        2,
    )
    .unwrap();
    for x in b.patch().lattice(100) {
        assert_eq!(b.fiber_dim_at(&x, 2).unwrap().dim, 2);
    }
}

fn small_section() -> impl Strategy<Value = Section> {
    let coeff = prop::collection::vec((prop::collection::vec(0u32..=1, 2), -3i64..=3), 0..3)
        .prop_map(|t| Polynomial::from_terms(2, t.into_iter().map(|(e, c)| (e, rat(c)))).unwrap());
    prop::collection::vec(coeff, 2).prop_map(|e| PolyVector::new(2, e).unwrap())
}

fn small_function() -> impl Strategy<Value = Polynomial> {
    prop::collection::vec((prop::collection::vec(0u32..=2, 2), -3i64..=3, 1i64..=2), 0..3)
        .prop_map(|t| Polynomial::from_terms(2, t.into_iter().map(|(e, n, d)| (e, ratio(n, d)))).unwrap())
}

fn dxy_presentation() -> AlgebroidPresentation {
    dxy().presentation().clone()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn bracket_is_antisymmetric_and_bilinear(a in small_section(), b in small_section(), c in small_section()) {
        for p in [AlgebroidPresentation::tangent(2), dxy_presentation()] {
            let ab = p.bracket(&a, &b).unwrap();
            let ba = p.bracket(&b, &a).unwrap();
            prop_assert!(ab.add(&ba).unwrap().is_zero());
            let lhs = p.bracket(&a.add(&c).unwrap(), &b).unwrap();
            let rhs = ab.add(&p.bracket(&c, &b).unwrap()).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn bracket_obeys_leibniz(a in small_section(), b in small_section(), f in small_function()) {
        for p in [AlgebroidPresentation::tangent(2), dxy_presentation()] {
            let lhs = p.bracket(&a, &b.mul_poly(&f)).unwrap();
            let rho_a = p.anchor_of(&a).unwrap();
            let rhs = p.bracket(&a, &b).unwrap().mul_poly(&f)
                .add(&b.mul_poly(&holonoid::algebroid::derivation(&rho_a, &f))).unwrap();
            prop_assert_eq!(lhs, rhs);
        }
    }

    #[test]
    fn fiber_dim_dominates_evaluation_rank(x in prop::collection::vec(-3i64..=3, 3)) {
        let b = xy_dz();
        let x = q(&x);
        let fiber = b.fiber_dim_at(&x, 2).unwrap().dim;
        let (eval_rank, _) = b.evaluation_ranks(&x).unwrap();
        prop_assert!(fiber >= eval_rank);
    }
}
