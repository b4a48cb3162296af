mod common;

use common::{grid_of, random_board, reference, rng};
use proptest::prelude::*;
use tetrislab::engine::{legal_placements, BoardState, PieceKind};
use tetrislab::features::{extract, grid, FeatureContext, FeatureSetId, GridFeatures};

fn check_against_reference(b: &BoardState) {
    let got = GridFeatures::compute(b);
    let want = reference(&grid_of(b));
    assert_eq!(got.holes, want.holes, "holes\n{b}");
    assert_eq!(got.connected_holes, want.connected_holes, "connected\n{b}");
    assert_eq!(got.column_heights, want.column_heights);
    assert_eq!(got.height_diffs, want.height_diffs);
    assert_eq!(got.sum_abs_height_diffs, want.sum_abs_height_diffs);
    assert_eq!(got.mean_height, want.mean_height);
    assert_eq!(got.pile_height, want.pile_height);
    assert_eq!(got.max_minus_min_height, want.max_minus_min_height);
    assert_eq!(
        got.row_transitions, want.row_transitions,
        "row transitions\n{b}"
    );
    assert_eq!(
        got.column_transitions, want.column_transitions,
        "col transitions\n{b}"
    );
    assert_eq!(got.cumulative_wells, want.cumulative_wells, "wells\n{b}");
    assert_eq!(got.max_well_depth, want.max_well_depth, "max well\n{b}");
    assert_eq!(got.sum_well_depths, want.sum_well_depths, "sum wells\n{b}");
    assert_eq!(got.hole_depth, want.hole_depth, "hole depth\n{b}");
    assert_eq!(got.rows_with_holes, want.rows_with_holes);
    assert_eq!(got.pattern_diversity, want.pattern_diversity);
    assert_eq!(got.occupied_cells, want.occupied_cells);
    assert_eq!(got.weighted_occupied_cells, want.weighted_occupied_cells);
    assert_eq!(got.rbf, want.rbf);
}

#[test]
fn primitives_match_reference_on_many_widths() {
    let mut r = rng(77);
    for i in 0..500 {
        let w = 4 + i % 13;
        let h = 4 + (i * 7) % 40;
        check_against_reference(&random_board(&mut r, w, h));
    }
}

#[test]
fn feature_sets_assemble_from_reference_values() {
    let mut r = rng(78);
    for _ in 0..100 {
        let pre = random_board(&mut r, 10, 20);
        for p in PieceKind::ALL {
            for pl in legal_placements(&pre, p) {
                let o = pre.drop(pl).unwrap();
                let ctx = FeatureContext::new(&pre, &o);
                let post = reference(&grid_of(&o.post));
                let before = reference(&grid_of(&pre));
                let lh = o.landing_height;
                let er = o.eroded_cells as f64;
                let cl = o.lines_cleared as f64;

                let della = vec![
                    post.holes as f64,
                    lh,
                    post.row_transitions as f64,
                    post.column_transitions as f64,
                    post.cumulative_wells as f64,
                    er,
                ];
                assert_eq!(extract(FeatureSetId::Dellacherie, ctx).values, della);

                let mut bcts = della.clone();
                bcts.push(post.hole_depth as f64);
                bcts.push(post.rows_with_holes as f64);
                assert_eq!(extract(FeatureSetId::Bcts, ctx).values, bcts);
                let mut dt = bcts.clone();
                dt.push(post.pattern_diversity as f64);
                assert_eq!(extract(FeatureSetId::Dt, ctx).values, dt);

                let mut bert: Vec<f64> = post.column_heights.iter().map(|&x| x as f64).collect();
                bert.extend(post.height_diffs.iter().map(|&x| x as f64));
                bert.push(post.holes as f64);
                bert.push(post.pile_height as f64);
                assert_eq!(extract(FeatureSetId::Bertsekas, ctx).values, bert);

                let lag = vec![
                    post.holes as f64,
                    post.pile_height as f64,
                    post.sum_abs_height_diffs as f64,
                    post.mean_height,
                    post.holes as f64 - before.holes as f64,
                    post.pile_height as f64 - before.pile_height as f64,
                    post.sum_abs_height_diffs as f64 - before.sum_abs_height_diffs as f64,
                    post.mean_height - before.mean_height,
                    cl,
                ];
                assert_eq!(extract(FeatureSetId::Lagoudakis, ctx).values, lag);

                let bohm = vec![
                    post.pile_height as f64,
                    post.connected_holes as f64,
                    cl,
                    post.max_minus_min_height as f64,
                    post.max_well_depth as f64,
                    post.sum_well_depths as f64,
                    lh,
                    post.occupied_cells as f64,
                    post.weighted_occupied_cells as f64,
                    post.row_transitions as f64,
                    post.column_transitions as f64,
                ];
                assert_eq!(extract(FeatureSetId::Bohm, ctx).values, bohm);
                assert_eq!(extract(FeatureSetId::Rbf, ctx).values, post.rbf.to_vec());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn structural_invariants(seed in any::<u64>()) {
        let mut r = rng(seed);
        let b = random_board(&mut r, 10, 20);
        let g = GridFeatures::compute(&b);
        prop_assert!(g.holes >= g.connected_holes);
        prop_assert!(g.rows_with_holes <= g.holes);
        prop_assert!(g.hole_depth >= g.holes);
        prop_assert!(g.pattern_diversity <= 5);
        for v in g.rbf {
            prop_assert!(v > 0.0 && v <= 1.0);
        }
        prop_assert_eq!(g.rbf[0] == 1.0, g.mean_height == 0.0);
    }

    #[test]
    fn empty_board_transitions_depend_only_on_size(w in 4usize..=16, h in 4usize..=64) {
        let b = BoardState::empty(w, h).unwrap();
        prop_assert_eq!(grid::row_transitions(&b) as usize, 2 * h);
        prop_assert_eq!(grid::column_transitions(&b) as usize, w);
    }
}

#[test]
fn pattern_diversity_with_three_distinct_small_steps() {
    assert_eq!(grid::pattern_diversity(&[10, 9, 9, 7, 7, 7, 7, 7, 7, 7]), 3);
}

#[test]
fn wells_reaching_the_floor_and_walls() {
    let b = BoardState::parse(".....\n.....\n.....\nXX...\nXX.X.\n").unwrap();
    let w = grid::well_stats(&b);
    assert_eq!((w.cumulative, w.max_depth, w.sum_depths), (2, 1, 2));
    let r = reference(&grid_of(&b));
    assert_eq!(
        (r.cumulative_wells, r.max_well_depth, r.sum_well_depths),
        (2, 1, 2)
    );
}
