//! Library results against independently computed references.

use commspec::criterion::{
    cesaro_bound_check, commutator_membership, minimal_condition4_witness, witness_cycle,
    CriterionInput, CriterionOptions, Verdict,
};
use commspec::cutoffs::CutoffPair;
use commspec::functionals::{chi, mu, nu};
use commspec::ideals::{cesaro_sequence, IdealSpec, SpectrumSource};
use commspec::io::{parse_input, to_json, CriterionDoc, Document, InputDocument};
use commspec::spectral::{eigenvalue_sequence, singular_sequence, EigenSequence};
use commspec::verify::{gen_matrix, MatrixKind};
use commspec::C64;
use proptest::prelude::*;

fn kind() -> impl Strategy<Value = MatrixKind> {
    prop::sample::select(MatrixKind::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eigenvalues_match_trace_and_lu_determinant(k in kind(), dim in 1usize..9, seed in any::<u64>()) {
        let m = gen_matrix(k, dim, seed);
        let lambda = eigenvalue_sequence(&m).unwrap();
        let a = m.as_dmatrix();
        let scale = 1.0 + m.frobenius_norm();
        let sum: C64 = lambda.values().iter().sum();
        prop_assert!((sum - a.trace()).norm() <= 1e-10 * scale * dim as f64);
        let product: C64 = lambda.values().iter().product();
        let det = a.clone().lu().determinant();
        prop_assert!((product - det).norm() <= 1e-9 * scale.powi(dim as i32));
        let moduli = lambda.moduli();
        prop_assert!(moduli.windows(2).all(|w| w[0] >= w[1] * (1.0 - 1e-11)));
    }

    #[test]
    fn singular_values_carry_the_frobenius_norm(k in kind(), dim in 1usize..9, seed in any::<u64>()) {
        let m = gen_matrix(k, dim, seed);
        let s = singular_sequence(&m).unwrap().prefix(dim);
        let lambda = eigenvalue_sequence(&m).unwrap();
        let frob2 = m.frobenius_norm().powi(2);
        let sq: f64 = s.iter().map(|x| x * x).sum();
        prop_assert!((sq - frob2).abs() <= 1e-10 * (1.0 + frob2));
        prop_assert!(lambda.get(1).norm() <= s[0] * (1.0 + 1e-10) + 1e-12);
    }

    #[test]
    fn functionals_of_a_dilated_spectrum(values in prop::collection::vec((-4.0f64..4.0, -4.0f64..4.0), 1..30), alpha in 0.05f64..5.0) {
        let lambda = EigenSequence::from_values(values.iter().map(|&(re, im)| C64::new(re, im)).collect()).unwrap();
        let scaled = lambda.scaled(C64::new(alpha, 0.0));
        let inside: Vec<C64> = values
            .iter()
            .map(|&(re, im)| C64::new(re, im) * alpha)
            .filter(|z| (z.norm() - 1.0).abs() > 1e-9)
            .collect();
        prop_assume!(inside.len() == values.len());
        let big: Vec<&C64> = inside.iter().filter(|z| z.norm() > 1.0).collect();
        prop_assert_eq!(nu(&scaled), big.len());
        let log_mass: f64 = big.iter().map(|z| z.norm().ln()).sum();
        prop_assert!((mu(&scaled) - log_mass).abs() <= 1e-12 * (1.0 + log_mass));
        let total: C64 = big.iter().copied().sum();
        prop_assert!((chi(&scaled) - total).norm() <= 1e-12 * (1.0 + total.norm()));
    }
}

#[test]
fn cesaro_means_of_a_finite_list() {
    let lambda = EigenSequence::from_real(&[4.0, -3.0, 2.0, -1.0]).unwrap();
    let c = cesaro_sequence(&SpectrumSource::Finite(lambda), 8).unwrap();
    let partial = [4.0, 1.0, 3.0, 2.0, 2.0, 2.0, 2.0, 2.0];
    for (n, s) in partial.iter().enumerate() {
        let expected = (s / (n + 1) as f64).abs();
        assert!(
            (c.value(n + 1).unwrap() - expected).abs() < 1e-15,
            "n = {}",
            n + 1
        );
    }
}

#[test]
fn minimal_witness_needs_the_factor_two() {
    let lambda = EigenSequence::from_real(&[1.998, 1.0, 1.0]).unwrap();
    let t = minimal_condition4_witness(&lambda);
    let tight = cesaro_bound_check(&lambda, &t, 1.0).unwrap();
    assert!(!tight.holds);
    assert_eq!(tight.failing_n, Some(3));
    assert!(cesaro_bound_check(&lambda, &t, 2.0).unwrap().holds);
}

#[test]
fn witness_cycle_on_a_mixed_spectrum() {
    let values = vec![
        C64::new(3.0, 1.0),
        C64::new(-2.0, 0.5),
        C64::new(0.0, -1.5),
        C64::new(0.25, 0.0),
    ];
    let lambda = EigenSequence::from_values(values).unwrap();
    let cycle = witness_cycle(&lambda, "mixed".into()).unwrap();
    assert!(cycle.condition3.holds);
    assert!(cycle.condition4.holds);
    assert!(cycle.condition5.holds);
    assert!(cycle.condition3_from_4.holds);
}

#[test]
fn parsed_spectrum_through_the_criterion_and_back() {
    let text =
        r#"{"schema": "commspec/v1", "kind": "finite", "values": [[1, 1], [-1, -1], 0.5, -0.5]}"#;
    let InputDocument::Spectrum(source) = parse_input(text).unwrap() else {
        panic!("expected a spectrum document");
    };
    let pair = CutoffPair::new().unwrap();
    let report = commutator_membership(
        &CriterionInput::Spectrum(source),
        &IdealSpec::schatten(0.5).unwrap(),
        &pair,
        CriterionOptions::default(),
    )
    .unwrap();
    assert_eq!(report.verdict, Verdict::InComJ);
    let json = to_json(&Document::new("criterion", CriterionDoc::from(&report))).unwrap();
    let back: Document<CriterionDoc> = serde_json::from_str(&json).unwrap();
    assert_eq!(back.body, CriterionDoc::from(&report));
}
