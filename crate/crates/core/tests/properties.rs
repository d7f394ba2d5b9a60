use std::collections::BTreeMap;

use proptest::prelude::*;

use stage_core::ahp::{compose_global, principal_weights, PairwiseMatrix};
use stage_core::consensus::{
    derive_thresholds, indicator_stats, kendalls_w, screen_indicators, IndicatorStats,
};
use stage_core::forms::{emit_round_form, parse_filled_forms};
use stage_core::io::read_indicators;
use stage_core::model::{
    default_tree, load_default_instrument, validate_tree, ConsumerResponse, ExpertBonusRating,
    IndicatorNode, IndicatorTree, Level, ResponseSet, ScreeningThresholds,
};
use stage_core::psychometrics::{alpha_if_deleted, corrected_item_total, cronbach_alpha};
use stage_core::scoring::score_software;

fn normalized(raw: &[f64]) -> Vec<f64> {
    let total: f64 = raw.iter().sum();
    raw.iter().map(|x| x / total).collect()
}

/// A well-formed three-level tree with weights, built from a shape and raw weight draws.
fn tree_from(shape: &[Vec<usize>], raw: &[f64]) -> IndicatorTree {
    let mut draws = raw.iter().cycle().copied();
    let mut nodes = Vec::new();
    let dim_w = normalized(
        &(0..shape.len())
            .map(|_| draws.next().unwrap())
            .collect::<Vec<_>>(),
    );
    for (d, indices) in shape.iter().enumerate() {
        let did = format!("d{d}");
        let mut n = IndicatorNode::new(&did, &format!("Dimension {d}"), Level::Dimension, None);
        n.local_weight = Some(dim_w[d]);
        nodes.push(n);
        let idx_w = normalized(
            &(0..indices.len())
                .map(|_| draws.next().unwrap())
                .collect::<Vec<_>>(),
        );
        for (i, &items) in indices.iter().enumerate() {
            let iid = format!("{did}.i{i}");
            let mut n =
                IndicatorNode::new(&iid, &format!("Index {d}.{i}"), Level::Index, Some(&did));
            n.local_weight = Some(idx_w[i]);
            nodes.push(n);
            let item_w = normalized(
                &(0..items)
                    .map(|_| draws.next().unwrap())
                    .collect::<Vec<_>>(),
            );
            for (k, w) in item_w.iter().enumerate() {
                let kid = format!("{iid}.k{k}");
                let mut n =
                    IndicatorNode::new(&kid, &format!("Item, {k}"), Level::Item, Some(&iid));
                n.local_weight = Some(*w);
                nodes.push(n);
            }
        }
    }
    IndicatorTree::new(nodes)
}

fn shapes() -> impl Strategy<Value = Vec<Vec<usize>>> {
    prop::collection::vec(prop::collection::vec(1usize..4, 1..4), 1..4)
}

fn raw_weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.01f64..10.0, 1..40)
}

fn matrix(rows: usize, cols: usize, lo: u32, hi: u32) -> impl Strategy<Value = Vec<Vec<f64>>> {
    prop::collection::vec(
        prop::collection::vec((lo..=hi).prop_map(f64::from), cols),
        rows,
    )
}

fn sample_var(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (v.len() - 1) as f64
}

fn col(x: &[Vec<f64>], j: usize) -> Vec<f64> {
    x.iter().map(|r| r[j]).collect()
}

fn alpha_oracle(x: &[Vec<f64>]) -> Option<f64> {
    let k = x[0].len() as f64;
    let items: f64 = (0..x[0].len()).map(|j| sample_var(&col(x, j))).sum();
    let total = sample_var(&x.iter().map(|r| r.iter().sum()).collect::<Vec<_>>());
    (total > 0.0).then(|| k / (k - 1.0) * (1.0 - items / total))
}

fn pearson_oracle(a: &[f64], b: &[f64]) -> Option<f64> {
    let n = a.len() as f64;
    let (ma, mb) = (a.iter().sum::<f64>() / n, b.iter().sum::<f64>() / n);
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    (va > 0.0 && vb > 0.0).then(|| cov / (va * vb).sqrt())
}

fn response_set(answers: &[Vec<u8>], bonus: &[Vec<u8>]) -> ResponseSet {
    let inst = load_default_instrument();
    ResponseSet::new(
        inst.question_ids().iter().map(|s| s.to_string()).collect(),
        answers
            .iter()
            .enumerate()
            .map(|(i, a)| ConsumerResponse {
                respondent_id: format!("r{i}"),
                answers: a.iter().copied().map(Some).collect(),
            })
            .collect(),
        inst.bonus_indicators.iter().map(|b| b.id.clone()).collect(),
        bonus
            .iter()
            .enumerate()
            .map(|(i, r)| ExpertBonusRating {
                expert_id: format!("x{i}"),
                ratings: r.clone(),
            })
            .collect(),
    )
    .unwrap()
}

fn default_weights(raw: &[f64]) -> stage_core::ahp::WeightTable {
    let tree = default_tree();
    let mut draws = raw.iter().cycle().copied();
    let mut local = BTreeMap::new();
    for (_, members) in tree.sibling_groups() {
        let w = normalized(
            &members
                .iter()
                .map(|_| draws.next().unwrap())
                .collect::<Vec<_>>(),
        );
        for (m, w) in members.iter().zip(w) {
            local.insert(m.id.clone(), w);
        }
    }
    compose_global(&tree.with_local_weights(&local)).unwrap()
}

fn answers() -> impl Strategy<Value = Vec<Vec<u8>>> {
    prop::collection::vec(prop::collection::vec(0u8..=4, 21), 1..12)
}

#[test]
fn default_instrument_is_constant() {
    assert_eq!(load_default_instrument(), load_default_instrument());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    // ---- indicator tree

    #[test]
    fn tree_survives_json_and_csv(shape in shapes(), raw in raw_weights()) {
        let tree = tree_from(&shape, &raw);
        prop_assert!(validate_tree(&tree).is_empty());

        let json = serde_json::to_string(&tree).unwrap();
        let back: IndicatorTree = serde_json::from_str(&json).unwrap();
        prop_assert_eq!(&back, &tree);

        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("indicators.csv");
        let mut w = csv::Writer::from_path(&path).unwrap();
        w.write_record(["id", "name", "level", "parent_id", "bonus", "local_weight"]).unwrap();
        for n in tree.nodes() {
            w.write_record([
                n.id.clone(),
                n.name.clone(),
                n.level.as_str().to_string(),
                n.parent_id.clone().unwrap_or_default(),
                n.bonus.to_string(),
                n.local_weight.unwrap().to_string(),
            ]).unwrap();
        }
        w.flush().unwrap();
        prop_assert_eq!(read_indicators(&path).unwrap(), tree);
    }

    #[test]
    fn valid_trees_have_unit_sibling_sums(shape in shapes(), raw in raw_weights()) {
        let tree = tree_from(&shape, &raw);
        prop_assert!(validate_tree(&tree).is_empty());
        for (_, members) in tree.sibling_groups() {
            let sum: f64 = members.iter().map(|m| m.local_weight.unwrap()).sum();
            prop_assert!((sum - 1.0).abs() <= 1e-9);
        }
    }

    #[test]
    fn children_globals_sum_to_parent(shape in shapes(), raw in raw_weights()) {
        let tree = tree_from(&shape, &raw);
        let table = compose_global(&tree).unwrap();
        for node in tree.nodes() {
            if tree.has_children(&node.id) {
                let sum: f64 = tree.children(&node.id).map(|c| table.global(&c.id).unwrap()).sum();
                prop_assert!((sum - table.global(&node.id).unwrap()).abs() <= 1e-12);
            }
        }
    }

    // ---- Kendall's W

    #[test]
    fn w_ignores_monotone_transforms(m in matrix(5, 6, 1, 5), scale in 0.1f64..10.0, shift in -5.0f64..5.0) {
        let Ok(w) = kendalls_w(&m, true) else { return Ok(()) };
        let cubed: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|x| x.powi(3) * scale + shift).collect()).collect();
        let logged: Vec<Vec<f64>> = m.iter().map(|r| r.iter().map(|x| x.ln()).collect()).collect();
        prop_assert!((kendalls_w(&cubed, true).unwrap() - w).abs() <= 1e-12);
        prop_assert!((kendalls_w(&logged, true).unwrap() - w).abs() <= 1e-12);
    }

    #[test]
    fn w_ignores_rater_and_indicator_order(m in matrix(6, 5, 1, 5), rot_r in 0usize..6, rot_c in 0usize..5) {
        let Ok(w) = kendalls_w(&m, true) else { return Ok(()) };
        let mut p = m.clone();
        p.rotate_left(rot_r);
        for row in &mut p {
            row.rotate_left(rot_c);
            row.swap(0, 4);
        }
        prop_assert!((kendalls_w(&p, true).unwrap() - w).abs() <= 1e-12);
    }

    #[test]
    fn w_is_bounded(m in (2usize..15, 2usize..10).prop_flat_map(|(r, c)| matrix(r, c, 1, 5))) {
        if let Ok(w) = kendalls_w(&m, true) {
            prop_assert!((0.0..=1.0).contains(&w));
        }
        if let Ok(w) = kendalls_w(&m, false) {
            prop_assert!((0.0..=1.0).contains(&w));
        }
    }

    // ---- screening

    #[test]
    fn screening_is_monotone(
        base in prop::collection::vec((1.0f64..5.0, 0.0f64..1.0, 0.0f64..0.6), 1..10),
        t in (2.0f64..4.5, 0.0f64..0.6, 0.05f64..0.5),
        pick in 0usize..10,
        bump in (0.0f64..1.0, 0.0f64..0.5, 0.0f64..0.3),
    ) {
        let thresholds = ScreeningThresholds::new(t.0, t.1, t.2).unwrap();
        let mk = |(mean, fsf, cv): (f64, f64, f64)| IndicatorStats { mean, sd: cv * mean, cv, full_score_freq: fsf, n: 20 };
        let pool: BTreeMap<String, IndicatorStats> =
            base.iter().enumerate().map(|(i, s)| (format!("i{i}"), mk(*s))).collect();
        let id = format!("i{}", pick % base.len());
        let s = pool[&id];
        let mut better = pool.clone();
        better.insert(id.clone(), mk((s.mean + bump.0, (s.full_score_freq + bump.1).min(1.0), (s.cv - bump.2).max(0.0))));
        let before = screen_indicators(&pool, &thresholds).retained.contains(&id);
        let after = screen_indicators(&better, &thresholds).retained.contains(&id);
        prop_assert!(!before || after);
    }

    #[test]
    fn average_indicator_survives_derived_thresholds(
        columns in prop::collection::vec(prop::collection::vec(1u32..=5, 8), 3..12),
    ) {
        let mut stats: BTreeMap<String, IndicatorStats> = columns
            .iter()
            .enumerate()
            .map(|(i, c)| (format!("i{i:02}"), indicator_stats(c, 5).unwrap()))
            .collect();
        let n = stats.len() as f64;
        let avg = IndicatorStats {
            mean: stats.values().map(|s| s.mean).sum::<f64>() / n,
            sd: 0.0,
            cv: stats.values().map(|s| s.cv).sum::<f64>() / n,
            full_score_freq: stats.values().map(|s| s.full_score_freq).sum::<f64>() / n,
            n: 8,
        };
        let t = derive_thresholds(&stats).unwrap();
        stats.insert("zz".into(), avg);
        prop_assert!(screen_indicators(&stats, &t).retained.contains(&"zz".to_string()));
    }

    // ---- AHP

    #[test]
    fn consistent_matrices_recover_weights(raw in prop::collection::vec(1.0f64..3.0, 2..10)) {
        let w = normalized(&raw);
        let ids: Vec<String> = (0..w.len()).map(|i| format!("c{i}")).collect();
        let e = principal_weights(&PairwiseMatrix::from_weights(ids, &w).unwrap()).unwrap();
        for (a, b) in e.weights.iter().zip(&w) {
            prop_assert!((a - b).abs() <= 1e-9);
        }
    }

    // ---- reliability

    #[test]
    fn reliability_matches_definitions(x in (3usize..7, 2usize..7).prop_flat_map(|(r, c)| matrix(r, c, 0, 4))) {
        let k = x[0].len();
        match (cronbach_alpha(&x), alpha_oracle(&x)) {
            (Ok(a), Some(o)) => prop_assert!((a - o).abs() <= 1e-10),
            (Err(_), None) => {}
            (a, o) => prop_assert!(false, "alpha {:?} vs oracle {:?}", a, o),
        }
        for j in 0..k {
            let rest: Vec<f64> = x.iter().map(|r| r.iter().sum::<f64>() - r[j]).collect();
            match (corrected_item_total(&x, j), pearson_oracle(&col(&x, j), &rest)) {
                (Ok(c), Some(o)) => prop_assert!((c - o).abs() <= 1e-10),
                (Err(_), None) => {}
                (c, o) => prop_assert!(false, "citc {:?} vs oracle {:?}", c, o),
            }
            if k >= 3 {
                let sub: Vec<Vec<f64>> = x.iter().map(|r| {
                    let mut r = r.clone();
                    r.remove(j);
                    r
                }).collect();
                match (alpha_if_deleted(&x, j), alpha_oracle(&sub)) {
                    (Ok(a), Some(o)) => prop_assert!((a - o).abs() <= 1e-10),
                    (Err(_), None) => {}
                    (a, o) => prop_assert!(false, "alpha if deleted {:?} vs oracle {:?}", a, o),
                }
            }
        }
    }

    // ---- scoring

    #[test]
    fn raising_an_answer_never_lowers_a_score(
        a in answers(),
        raw in raw_weights(),
        pick in (0usize..12, 0usize..21),
        bonus in prop::collection::vec(prop::collection::vec(0u8..=4, 2), 0..4),
    ) {
        let inst = load_default_instrument();
        let weights = default_weights(&raw);
        let (r, q) = (pick.0 % a.len(), pick.1);
        prop_assume!(a[r][q] < 4);
        let before = score_software(&response_set(&a, &bonus), &inst, &weights, 10.0).unwrap();
        let mut raised = a.clone();
        raised[r][q] += 1;
        let after = score_software(&response_set(&raised, &bonus), &inst, &weights, 10.0).unwrap();
        for (dim, s) in &before.dimension_scores {
            prop_assert!(after.dimension_scores[dim] >= s - 1e-12);
        }
        prop_assert!(after.core_score >= before.core_score - 1e-12);
        prop_assert!(after.final_score >= before.final_score - 1e-12);
        prop_assert!((0.0..=110.0 + 1e-9).contains(&after.final_score));
    }

    #[test]
    fn respondent_order_does_not_matter(a in answers(), raw in raw_weights(), rot in 0usize..12) {
        let inst = load_default_instrument();
        let weights = default_weights(&raw);
        let mut shuffled = a.clone();
        shuffled.rotate_left(rot % a.len());
        shuffled.reverse();
        let x = score_software(&response_set(&a, &[]), &inst, &weights, 10.0).unwrap();
        let y = score_software(&response_set(&shuffled, &[]), &inst, &weights, 10.0).unwrap();
        for (dim, s) in &x.dimension_scores {
            prop_assert!((y.dimension_scores[dim] - s).abs() <= 1e-9);
        }
        prop_assert!((x.final_score - y.final_score).abs() <= 1e-9);
    }

    #[test]
    fn final_score_is_bounded(
        a in answers(),
        raw in raw_weights(),
        bonus in prop::collection::vec(prop::collection::vec(0u8..=4, 2), 0..5),
        cap in 0.0f64..30.0,
    ) {
        let inst = load_default_instrument();
        let card = score_software(&response_set(&a, &bonus), &inst, &default_weights(&raw), cap).unwrap();
        prop_assert!(card.final_score >= -1e-12 && card.final_score <= 100.0 + cap + 1e-9);
    }

    // ---- forms

    #[test]
    fn filled_forms_parse_back_to_the_retained_set(
        means in prop::collection::vec(1.0f64..5.0, 1..15),
        keep in prop::collection::vec(any::<bool>(), 15),
        ratings in prop::collection::vec(prop::collection::vec(1u32..=5, 15), 1..5),
    ) {
        let ids: Vec<String> = (0..means.len()).map(|i| format!("ind.{i:02}")).collect();
        let mut retained: Vec<String> = ids.iter().zip(&keep).filter(|(_, k)| **k).map(|(id, _)| id.clone()).collect();
        if retained.is_empty() {
            retained.push(ids[0].clone());
        }
        let prev = stage_core::consensus::RoundConsensus {
            round_no: 1,
            scale_max: 5,
            distributed: 10,
            returned: 10,
            positivity: 1.0,
            ca: 0.9,
            cs: 0.8,
            cr: 0.85,
            kendall_w: 0.3,
            tie_corrected: true,
            indicators: ids.iter().zip(&means).map(|(id, m)| (id.clone(), IndicatorStats { mean: *m, sd: 0.5, cv: 0.5 / m, full_score_freq: 0.2, n: 10 })).collect(),
        };
        let blank = emit_round_form(&prev, &BTreeMap::new(), &retained, 2).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let mut forms = Vec::new();
        for (e, r) in ratings.iter().enumerate() {
            let filled: String = blank
                .lines()
                .enumerate()
                .map(|(i, line)| if i == 0 { format!("{line}\n") } else { format!("{line}{}\n", r[i - 1]) })
                .collect();
            let path = dir.path().join(format!("e{e}.csv"));
            std::fs::write(&path, filled).unwrap();
            forms.push((format!("e{e}"), path));
        }
        let round = parse_filled_forms(&forms, 2, 5).unwrap();
        prop_assert_eq!(round.indicator_ids(), retained.as_slice());
        prop_assert_eq!(round.returned(), ratings.len());
    }
}
