use proptest::prelude::*;
use sepprob_core::exact::{ParamValue, Rational};
use sepprob_core::moments::*;
use sepprob_core::reconstruct::*;

fn diff_sequence(a: (i64, i64), n_max: u32) -> MomentSequence {
    let spec = MomentSpec::new(Variable::Diff, DysonIndex::ratio(a.0, a.1).unwrap(), 0).unwrap();
    build_sequence(&spec, n_max).unwrap()
}

#[test]
fn beta_product_transform_keeps_positive_mass() {
    // X·Y with Y ∈ (0,1] has the sign of X; the reconstructed masses converge together
    let seq = diff_sequence((1, 1), 401);
    let transformed = transform_m(&seq, &ParamValue::int(2)).unwrap();
    let (a, b) = positive_window();
    let mut last = f64::INFINITY;
    for degree in [101, 201, 401] {
        let p = fit_density(&seq, degree, Precision::Exact)
            .unwrap()
            .prob_between(&a, &b)
            .unwrap();
        let q = fit_density(&transformed, degree, Precision::Exact)
            .unwrap()
            .prob_between(&a, &b)
            .unwrap();
        let gap = (p - q).abs().to_f64();
        assert!(
            gap < last,
            "degree {degree}: gap {gap} did not shrink from {last}"
        );
        last = gap;
    }
}

#[test]
fn sixty_moment_density_is_mostly_nonnegative_and_peaks_below_zero() {
    let seq = diff_sequence((1, 1), 50);
    let e = fit_density(&seq, 50, Precision::Exact).unwrap();
    let curve = e.density_curve(400);
    assert_eq!(curve.len(), 400);
    let (x_peak, _) =
        curve
            .iter()
            .cloned()
            .fold((0.0, f64::MIN), |acc, p| if p.1 > acc.1 { p } else { acc });
    assert!(x_peak < 0.0 && x_peak > -0.01, "peak at {x_peak}");
    let mut csv = Vec::new();
    e.write_curve_csv(5, &mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), 6);
}

#[test]
fn density_values_match_curve() {
    let seq = diff_sequence((1, 2), 30);
    let e = fit_density(&seq, 30, Precision::Exact).unwrap();
    let curve = e.density_curve(3);
    let mid = Rational::from(&seq.interval.lo + &seq.interval.hi) / 2u32;
    assert!((e.density(&mid).to_f64() - curve[1].1).abs() < 1e-9 * curve[1].1.abs().max(1.0));
}

#[test]
fn extended_window_includes_positive_window() {
    let r = separability_ratio(
        &DysonIndex::ratio(1, 1).unwrap(),
        Variable::Diff,
        101,
        Precision::Exact,
    )
    .unwrap();
    let ext = separability_ratio_over(
        &DysonIndex::ratio(1, 1).unwrap(),
        Variable::Diff,
        101,
        Precision::Exact,
        extended_window(),
    )
    .unwrap();
    assert!(ext.prob_positive.to_f64() > r.prob_positive.to_f64());
}

#[test]
fn faster_convergence_for_larger_alpha() {
    let err = |a: (i64, i64)| {
        separability_ratio(
            &DysonIndex::ratio(a.0, a.1).unwrap(),
            Variable::Diff,
            201,
            Precision::Exact,
        )
        .unwrap()
        .half_error()
    };
    assert!(err((2, 1)) < err((1, 2)));
}

#[test]
fn non_half_integer_pair_reconstructs_identically() {
    let report =
        equal_probability_check(&DysonIndex::ratio(7, 3).unwrap(), 60, Precision::Exact).unwrap();
    assert!(report.sequences_identical);
    assert_eq!(report.prob_u1, report.prob_u2);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn exact_fit_matches_moments_and_normalises(num in 1i64..12, den in 1i64..4, degree in 1usize..30) {
        let seq = diff_sequence((num, den), degree as u32);
        let e = fit_density(&seq, degree, Precision::Exact).unwrap();
        prop_assert_eq!(e.prob_between(&seq.interval.lo, &seq.interval.hi).unwrap(), ParamValue::one());
        for n in 0..=degree {
            prop_assert_eq!(e.moment(n), seq.values[n].clone());
        }
    }

    #[test]
    fn mixture_interpolates_between_identity_and_m(gamma_num in 1i64..20, delta_num in 1i64..8) {
        let seq = diff_sequence((1, 1), 8);
        let gamma = ParamValue::ratio(gamma_num, 3);
        let delta = ParamValue::ratio(delta_num, 8);
        let mixed = mixture_transform(&seq, &gamma, &delta).unwrap();
        let m = transform_m(&seq, &gamma).unwrap();
        for n in 0..=8 {
            let expected = &delta * &seq.values[n] + (ParamValue::one() - &delta) * &m.values[n];
            prop_assert_eq!(mixed.values[n].clone(), expected);
        }
    }

    #[test]
    fn masses_split_additively(cut in 1i64..67) {
        let seq = diff_sequence((1, 1), 20);
        let e = fit_density(&seq, 20, Precision::Exact).unwrap();
        let lo = seq.interval.lo.clone();
        let hi = seq.interval.hi.clone();
        let mid = &lo + seq.interval.width() * Rational::from((cut, 68)) ;
        let left = e.prob_between(&lo, &mid).unwrap();
        let right = e.prob_between(&mid, &hi).unwrap();
        prop_assert_eq!(left + right, ParamValue::one());
    }
}
