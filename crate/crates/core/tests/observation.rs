mod common;

use proptest::prelude::*;

use dyngrid::grid::observe;
use dyngrid::{AgentPose, Cell, Color, Direction, DynamicsMap, GridState, Object, ObjectKind, TileProperty};

#[derive(Clone, Copy, PartialEq)]
enum Slot {
    Outside,
    Wall,
    Open([u8; 3]),
}

fn encode_open(state: &GridState, dynamics: &DynamicsMap, x: i32, y: i32) -> [u8; 3] {
    match state.get(x, y) {
        Some(Cell::Object(o)) => {
            let t = match o.kind {
                ObjectKind::Key => 5,
                ObjectKind::Ball => 6,
                ObjectKind::Box => 7,
            };
            [t, o.color as u8, 0]
        }
        _ => match dynamics.tile_color(x, y) {
            Some(c) => [3, c as u8, 0],
            None => [1, 0, 0],
        },
    }
}

/// Slice, rotate and mask the way MiniGrid's `gen_obs_grid` does, with
/// x-major indexing `g[x][y]`. Out-of-grid cells are opaque and unseen; the
/// agent's cell keeps whatever floor lies beneath it.
fn reference(state: &GridState, dynamics: &DynamicsMap) -> [[[u8; 3]; 7]; 7] {
    let (x, y) = state.agent.pos();
    let (tx, ty) = match state.agent.dir {
        Direction::East => (x, y - 3),
        Direction::South => (x - 3, y),
        Direction::West => (x - 6, y - 3),
        Direction::North => (x - 3, y - 6),
    };
    let mut g = [[Slot::Outside; 7]; 7];
    for (i, col) in g.iter_mut().enumerate() {
        for (j, slot) in col.iter_mut().enumerate() {
            let (wx, wy) = (tx + i as i32, ty + j as i32);
            *slot = match state.get(wx, wy) {
                None => Slot::Outside,
                Some(Cell::Wall) => Slot::Wall,
                Some(_) => Slot::Open(encode_open(state, dynamics, wx, wy)),
            };
        }
    }
    for _ in 0..state.agent.dir as usize + 1 {
        let mut r = [[Slot::Outside; 7]; 7];
        for i in 0..7 {
            for j in 0..7 {
                r[j][6 - i] = g[i][j];
            }
        }
        g = r;
    }

    let see_behind = |s: Slot| matches!(s, Slot::Open(_));
    let mut mask = [[false; 7]; 7];
    mask[3][6] = true;
    for j in (0..7).rev() {
        for i in 0..6 {
            if !mask[i][j] || !see_behind(g[i][j]) {
                continue;
            }
            mask[i + 1][j] = true;
            if j > 0 {
                mask[i + 1][j - 1] = true;
                mask[i][j - 1] = true;
            }
        }
        for i in (1..7).rev() {
            if !mask[i][j] || !see_behind(g[i][j]) {
                continue;
            }
            mask[i - 1][j] = true;
            if j > 0 {
                mask[i - 1][j - 1] = true;
                mask[i][j - 1] = true;
            }
        }
    }

    let mut out = [[[0u8; 3]; 7]; 7];
    for i in 0..7 {
        for j in 0..7 {
            if mask[i][j] {
                out[j][i] = match g[i][j] {
                    Slot::Outside => [0, 0, 0],
                    Slot::Wall => [2, 5, 0],
                    Slot::Open(c) => c,
                };
            }
        }
    }
    out
}

/// 7x7 room with a hand-placed 5x5 interior.
fn hand_map() -> (GridState, DynamicsMap) {
    let rows = [
        ".....", //
        ".#.b.",
        "..#..",
        "g.k#.",
        "..g..",
    ];
    let mut g = GridState::room(7, 7, AgentPose::new(1, 1, Direction::East));
    let mut d = DynamicsMap::new(7, 7);
    d.mapping.insert(Color::Green, TileProperty::Slippery);
    for (y, row) in rows.iter().enumerate() {
        for (x, ch) in row.chars().enumerate() {
            let (x, y) = (x as i32 + 1, y as i32 + 1);
            match ch {
                '#' => g.set(x, y, Cell::Wall),
                'b' => g.set(x, y, Cell::Object(Object::new(ObjectKind::Ball, Color::Red))),
                'k' => g.set(x, y, Cell::Object(Object::new(ObjectKind::Key, Color::Yellow))),
                'g' => d.set_tile(x, y, Color::Green),
                _ => {}
            }
        }
    }
    (g, d)
}

#[test]
fn hand_map_matches_reference_at_every_pose() {
    let (mut g, d) = hand_map();
    let mut poses = 0;
    for y in 1..6 {
        for x in 1..6 {
            if g.get(x, y) != Some(Cell::Empty) {
                continue;
            }
            for dir in Direction::ALL {
                g.agent = AgentPose::new(x, y, dir);
                assert_eq!(observe(&g, &d).0, reference(&g, &d), "pose ({x},{y},{dir:?})");
                poses += 1;
            }
        }
    }
    assert_eq!(poses, 4 * 20);
}

#[test]
fn cell_behind_wall_is_unseen() {
    let mut g = GridState::room(8, 8, AgentPose::new(3, 5, Direction::North));
    for x in 1..7 {
        g.set(x, 3, Cell::Wall);
    }
    let d = DynamicsMap::new(8, 8);
    let obs = observe(&g, &d);
    assert_eq!(obs.0[5][3], [1, 0, 0]);
    assert_eq!(obs.0[4][3], [2, 5, 0]);
    assert_eq!(obs.0[3][3][0], 0);
    assert!(obs.0[..4].iter().flatten().all(|c| c[0] == 0));
    assert_eq!(obs.0, reference(&g, &d));
}

#[test]
fn short_wall_segments_leak_diagonally() {
    let (mut g, d) = hand_map();
    g.agent = AgentPose::new(3, 2, Direction::South);
    let obs = observe(&g, &d);
    assert_eq!(obs.0[5][3], [2, 5, 0]);
    // the key two cells ahead is lit around the single wall cell
    assert_eq!(obs.0[4][3], [5, 4, 0]);
    assert_eq!(obs.0, reference(&g, &d));
}

#[test]
fn blue_tile_two_ahead() {
    let mut g = GridState::room(8, 8, AgentPose::new(2, 3, Direction::East));
    let mut d = DynamicsMap::new(8, 8);
    d.set_tile(4, 3, Color::Blue);
    d.mapping.insert(Color::Blue, TileProperty::Trap);
    assert_eq!(observe(&g, &d).0[4][3], [3, 2, 0]);
    g.agent = AgentPose::new(4, 5, Direction::North);
    assert_eq!(observe(&g, &d).0[4][3], [3, 2, 0]);
}

#[test]
fn agent_cell_shows_floor_and_window_is_padded() {
    let mut g = GridState::room(8, 8, AgentPose::new(1, 1, Direction::North));
    let mut d = DynamicsMap::new(8, 8);
    d.set_tile(1, 1, Color::Orange);
    d.mapping.insert(Color::Orange, TileProperty::Magic);
    let obs = observe(&g, &d);
    assert_eq!(obs.0[6][3], [3, 6, 0]);
    // facing the top wall: one row of wall, everything beyond unseen
    assert_eq!(obs.0[5][3], [2, 5, 0]);
    assert!(obs.0[..5].iter().flatten().all(|c| *c == [0, 0, 0]));
    assert_eq!(obs.to_flat().len(), 147);
    g.agent.dir = Direction::East;
    assert_eq!(observe(&g, &d).0, reference(&g, &d));
}

fn build(size: usize, codes: &[u8], agent_slot: usize, dir: u8) -> Option<(GridState, DynamicsMap)> {
    let inner = size - 2;
    let mut g = GridState::room(size, size, AgentPose::new(1, 1, Direction::ALL[dir as usize]));
    let mut d = DynamicsMap::new(size, size);
    d.mapping.insert(Color::Green, TileProperty::Sticky);
    d.mapping.insert(Color::Blue, TileProperty::FlipUpDown);
    for idx in 0..inner * inner {
        let (x, y) = ((idx % inner) as i32 + 1, (idx / inner) as i32 + 1);
        match codes[idx] {
            0 | 1 => g.set(x, y, Cell::Wall),
            2 => g.set(x, y, Cell::Object(Object::new(ObjectKind::Ball, Color::Purple))),
            3 => g.set(x, y, Cell::Object(Object::new(ObjectKind::Box, Color::Grey))),
            4 => d.set_tile(x, y, Color::Green),
            5 => d.set_tile(x, y, Color::Blue),
            _ => {}
        }
    }
    let idx = agent_slot % (inner * inner);
    let (x, y) = ((idx % inner) as i32 + 1, (idx / inner) as i32 + 1);
    if g.get(x, y) != Some(Cell::Empty) {
        return None;
    }
    g.agent.x = x;
    g.agent.y = y;
    Some((g, d))
}

proptest! {
    #[test]
    fn random_maps_match_reference(
        size in 4usize..=10,
        codes in prop::collection::vec(0u8..10, 64),
        agent_slot in 0usize..64,
        dir in 0u8..4,
    ) {
        if let Some((g, d)) = build(size, &codes, agent_slot, dir) {
            prop_assert_eq!(observe(&g, &d).0, reference(&g, &d));
        }
    }
}
