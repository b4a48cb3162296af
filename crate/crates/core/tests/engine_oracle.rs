mod common;

use common::{brute_force_placement_count, grid_of, random_board, rng, simulate_drop};
use proptest::prelude::*;
use tetrislab::engine::{
    legal_placements, BoardState, EpisodeState, GameConfig, PieceKind, Placement,
};

#[test]
fn placement_counts_match_brute_force_on_random_boards() {
    let mut r = rng(1);
    for _ in 0..200 {
        let w = 4 + (rand::Rng::gen_range(&mut r, 0..13));
        let b = random_board(&mut r, w, 20);
        for p in PieceKind::ALL {
            assert_eq!(
                legal_placements(&b, p).len(),
                brute_force_placement_count(w, p)
            );
        }
    }
}

#[test]
fn sorted_empty_board_counts() {
    let b = BoardState::empty(10, 20).unwrap();
    let mut counts: Vec<usize> = PieceKind::ALL
        .iter()
        .map(|&p| legal_placements(&b, p).len())
        .collect();
    counts.sort();
    assert_eq!(counts, vec![9, 17, 17, 17, 34, 34, 34]);
    assert_eq!(counts[3], 17);
}

#[test]
fn drops_match_gravity_simulation() {
    let mut r = rng(2);
    for i in 0..400 {
        let height = if i % 2 == 0 { 20 } else { 10 };
        let b = random_board(&mut r, 10, height);
        let g = grid_of(&b);
        for p in PieceKind::ALL {
            for pl in legal_placements(&b, p) {
                let o = b.drop(pl).unwrap();
                let want = simulate_drop(&g, pl);
                assert_eq!(o.terminal, want.terminal, "{pl} on\n{b}");
                assert_eq!(o.landing_height, want.landing_height, "{pl} on\n{b}");
                assert_eq!(o.lines_cleared as u32, want.lines);
                assert_eq!(o.eroded_cells as u32, want.eroded);
                assert_eq!(grid_of(&o.post), want.grid, "{pl} on\n{b}");
            }
        }
    }
}

#[test]
fn hand_simulated_single_clear() {
    // Bottom row full except columns 0-3, something sitting on top of it.
    let mut text = "..........\n".repeat(18);
    text.push_str("....XX....\n");
    text.push_str("....XXXXXX\n");
    let b = BoardState::parse(&text).unwrap();
    let o = b.drop(Placement::new(PieceKind::I, 0, 0)).unwrap();
    assert_eq!(o.lines_cleared, 1);
    assert_eq!(o.eroded_cells, 4);
    let mut expect = "..........\n".repeat(19);
    expect.push_str("....XX....\n");
    assert_eq!(o.post.render(), expect);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn cell_conservation_and_no_full_rows(seed in any::<u64>(), piece in 0usize..7) {
        let mut r = rng(seed);
        let b = random_board(&mut r, 10, 20);
        let full = b.full_mask();
        for pl in legal_placements(&b, PieceKind::from_index(piece)) {
            let o = b.drop(pl).unwrap();
            if o.terminal {
                prop_assert_eq!(o.post, b);
                prop_assert_eq!(o.lines_cleared, 0);
                continue;
            }
            prop_assert_eq!(
                o.post.cell_count() as i64,
                b.cell_count() as i64 + 4 - 10 * o.lines_cleared as i64
            );
            prop_assert!(o.post.rows().iter().all(|&row| row != full));
            prop_assert!(o.lines_cleared <= 4);
            prop_assert!(o.eroded_cells <= 4 * o.lines_cleared);
        }
    }

    #[test]
    fn render_parse_round_trip(seed in any::<u64>(), w in 4usize..=16, h in 4usize..=30) {
        let mut r = rng(seed);
        let b = random_board(&mut r, w, h);
        let text = b.render();
        let back = BoardState::parse(&text).unwrap();
        prop_assert_eq!(back, b);
        prop_assert_eq!(back.render(), text);
    }

    #[test]
    fn heights_match_topmost_cell(seed in any::<u64>()) {
        let mut r = rng(seed);
        let b = random_board(&mut r, 10, 20);
        let g = grid_of(&b);
        let want = common::heights(&g);
        let got: Vec<u32> = b.heights().iter().map(|&h| h as u32).collect();
        prop_assert_eq!(got, want);
    }
}

#[test]
fn score_and_pieces_never_decrease() {
    let cfg = GameConfig::small();
    let mut ep = EpisodeState::new(cfg, 99).unwrap();
    let policy = tetrislab::policy::dellacherie_policy();
    let (mut score, mut pieces) = (0.0, 0);
    while !ep.is_finished() && ep.pieces_placed() < 3_000 {
        let p = policy.choose(ep.board(), ep.current_piece()).placement;
        ep.step(p).unwrap();
        assert!(ep.score() >= score && ep.pieces_placed() >= pieces);
        score = ep.score();
        pieces = ep.pieces_placed();
    }
}
