//! Worked examples checked against hand-rolled reference computations.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use stage_core::ahp::{combine_weights, compute_weights, importance_weights, WeightMethod};
use stage_core::consensus::{
    familiarity_coefficient, indicator_stats, judgment_coefficient, round_consensus,
    screen_indicators, screen_round, ConsensusOptions, Criterion, FamiliarityTable, JudgmentTable,
};
use stage_core::io::{
    load_response_set, parse_ratings, read_experts, read_importance, read_indicators,
    read_pairwise, RatingsOptions,
};
use stage_core::model::{
    load_default_instrument, BasisImpacts, ExpertProfile, Familiarity, IdentityGroup, Impact,
    ScreeningThresholds,
};
use stage_core::pipeline::run_pipeline;
use stage_core::psychometrics::{reliability_report, validity_report};
use stage_core::scoring::score_software;
use stage_core::Error;

fn demo(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("data/demo")
        .join(name)
}

#[test]
fn ca_and_cs_over_twenty_profiles() {
    // Judgment table rows (large, medium, small) and familiarity values, written out again here
    // rather than read from the library.
    let theory = [0.3, 0.2, 0.1];
    let practice = [0.5, 0.4, 0.3];
    let other = [0.1, 0.1, 0.1];
    let fam = [1.0, 0.8, 0.6, 0.4, 0.2];
    let impacts = [Impact::Large, Impact::Medium, Impact::Small];
    let levels = [
        Familiarity::VeryFamiliar,
        Familiarity::Familiar,
        Familiarity::Moderate,
        Familiarity::Unfamiliar,
        Familiarity::VeryUnfamiliar,
    ];

    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let mut profiles = Vec::new();
    let (mut ca_sum, mut cs_sum) = (0.0, 0.0);
    for i in 0..20 {
        let pick: [usize; 4] = std::array::from_fn(|_| rng.gen_range(0..3));
        let f = rng.gen_range(0..5);
        ca_sum += theory[pick[0]] + practice[pick[1]] + other[pick[2]] + other[pick[3]];
        cs_sum += fam[f];
        profiles.push(ExpertProfile {
            id: format!("e{i}"),
            group: IdentityGroup::Other,
            familiarity: levels[f],
            basis: BasisImpacts {
                theory: impacts[pick[0]],
                practice: impacts[pick[1]],
                peer: impacts[pick[2]],
                intuition: impacts[pick[3]],
            },
        });
    }
    let ca = judgment_coefficient(&profiles, &JudgmentTable::default()).unwrap();
    let cs = familiarity_coefficient(&profiles, &FamiliarityTable::default()).unwrap();
    assert!((ca - ca_sum / 20.0).abs() < 1e-12, "{ca}");
    assert!((cs - cs_sum / 20.0).abs() < 1e-12, "{cs}");
}

#[test]
fn ten_indicator_screening_by_hand() {
    let columns: [[u32; 10]; 10] = [
        [5, 5, 5, 5, 4, 4, 5, 5, 5, 4],
        [4, 4, 4, 5, 4, 4, 4, 5, 4, 4],
        [1, 2, 1, 3, 2, 1, 2, 1, 2, 1],
        [5, 4, 5, 4, 5, 4, 5, 4, 5, 4],
        [3, 4, 3, 4, 3, 4, 3, 4, 3, 4],
        [5, 5, 5, 5, 5, 5, 5, 5, 5, 4],
        [1, 5, 1, 5, 1, 5, 1, 5, 1, 5],
        [4, 4, 4, 4, 4, 4, 4, 4, 4, 4],
        [4, 5, 4, 3, 4, 5, 4, 3, 4, 5],
        [2, 3, 2, 3, 2, 3, 2, 3, 2, 3],
    ];
    let thresholds = ScreeningThresholds::new(3.5, 0.1, 0.25).unwrap();
    let stats: BTreeMap<String, _> = columns
        .iter()
        .enumerate()
        .map(|(i, c)| (format!("i{i}"), indicator_stats(c, 5).unwrap()))
        .collect();

    let mut want_retained = Vec::new();
    let mut want_dropped = BTreeMap::new();
    for (i, c) in columns.iter().enumerate() {
        let x: Vec<f64> = c.iter().map(|&v| v as f64).collect();
        let mean = x.iter().sum::<f64>() / 10.0;
        let sd = (x.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / 9.0).sqrt();
        let fsf = c.iter().filter(|&&v| v == 5).count() as f64 / 10.0;
        let mut reasons = Vec::new();
        if mean < 3.5 {
            reasons.push(Criterion::Mean);
        }
        if fsf < 0.1 {
            reasons.push(Criterion::Fsf);
        }
        if sd / mean > 0.25 {
            reasons.push(Criterion::Cv);
        }
        if reasons.is_empty() {
            want_retained.push(format!("i{i}"));
        } else {
            want_dropped.insert(format!("i{i}"), reasons);
        }
    }
    let outcome = screen_indicators(&stats, &thresholds);
    assert_eq!(outcome.retained, want_retained);
    let got: BTreeMap<String, Vec<Criterion>> = outcome
        .dropped
        .into_iter()
        .map(|d| (d.id, d.reasons))
        .collect();
    assert_eq!(got, want_dropped);
    assert!(got.contains_key("i7"), "no full scores");
    assert!(got.contains_key("i6"), "high dispersion");
}

#[test]
fn weighting_methods_by_hand() {
    let means = [4.5, 3.0, 1.5];
    assert_eq!(
        importance_weights(&means).unwrap(),
        vec![0.5, 1.0 / 3.0, 1.0 / 6.0]
    );
    let c = combine_weights(&[0.5, 0.5], &[0.8, 0.2]).unwrap();
    assert!((c[0] - 0.8).abs() < 1e-12 && (c[1] - 0.2).abs() < 1e-12);
}

/// Re-runs each stage from its inputs and checks the pipeline produced the same bundle.
#[test]
fn demo_pipeline_equals_stage_by_stage_run() {
    let bundle = run_pipeline(&demo("pipeline.toml")).unwrap();
    let experts = read_experts(&demo("experts.csv")).unwrap();
    let round1_ids = read_indicators(&demo("indicators_round1.csv")).unwrap();

    for (k, stats) in bundle.rounds.iter().enumerate() {
        let round_no = k as u32 + 1;
        let ratings = parse_ratings(
            &demo(&format!("ratings_round{round_no}.csv")),
            &RatingsOptions {
                round_no,
                scale_max: 5,
                ..Default::default()
            },
        )
        .unwrap();
        let direct = round_consensus(&ratings, &experts, &ConsensusOptions::default()).unwrap();
        assert_eq!(&direct, stats);
        assert_eq!(screen_round(&direct, None).unwrap(), bundle.screening[k]);
    }
    assert_eq!(bundle.rounds[2].returned, 20);
    assert_eq!(bundle.rounds[2].positivity, 0.8);
    // the round-one candidates are screened out
    let dropped: Vec<&str> = bundle.screening[0]
        .dropped
        .iter()
        .map(|d| d.id.as_str())
        .collect();
    assert_eq!(
        dropped,
        [
            "pq.innovation.gamification",
            "sp.ethics.data_sharing",
            "ux.availability.voice_only"
        ]
    );
    assert!(round1_ids.get("sp.ethics.data_sharing").is_some());

    let tree = read_indicators(&demo("indicators.csv")).unwrap();
    let mut matrices = Vec::new();
    for entry in std::fs::read_dir(demo("pairwise")).unwrap() {
        matrices.push(read_pairwise(&entry.unwrap().path()).unwrap());
    }
    let importance = bundle.rounds[2]
        .indicators
        .iter()
        .map(|(id, s)| (id.clone(), s.mean))
        .collect();
    let weights = compute_weights(&tree, &matrices, &importance, WeightMethod::Combined).unwrap();
    assert_eq!(Some(&weights), bundle.weights.as_ref());

    let inst = load_default_instrument();
    let responses = load_response_set(&demo("responses.csv"), None, &inst).unwrap();
    assert_eq!(
        Some(reliability_report(&responses, &inst).unwrap()),
        bundle.reliability
    );

    let (items, matrix) = read_importance(&demo("importance.csv")).unwrap();
    assert_eq!(
        Some(validity_report(&items, &matrix, 5).unwrap()),
        bundle.validity
    );

    let with_bonus = load_response_set(
        &demo("responses.csv"),
        Some(&demo("expert_bonus.csv")),
        &inst,
    )
    .unwrap();
    assert_eq!(
        Some(score_software(&with_bonus, &inst, &weights, 10.0).unwrap()),
        bundle.scorecard
    );
}

#[test]
fn errors_name_file_and_cell() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("experts.csv");
    std::fs::write(
        &path,
        "id,group,familiarity,basis_theory,basis_practice,basis_peer,basis_intuition\n\
         e1,other,familiar,large,large,small,small\n\
         e2,other,familiar,large,huge,small,small\n",
    )
    .unwrap();
    let err = read_experts(&path).unwrap_err();
    let msg = err.to_string();
    assert!(
        msg.contains("experts.csv") && msg.contains("e2") && msg.contains("basis_practice"),
        "{msg}"
    );
    assert!(matches!(err, Error::Cell { .. }));
}
