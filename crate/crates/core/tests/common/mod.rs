#![allow(dead_code)]

use std::collections::HashMap;

use dyngrid::dynamics::resolve_action;
use dyngrid::level::{builtin_levels, MissionFamily};
use dyngrid::{
    Action, AgentPose, Color, DynamicsMap, EnvInstance, GridState, LevelSpec, Mission, Mode,
    TileProperty,
};

pub type Tile = ((i32, i32), Color, TileProperty);

/// A hand-built instance on a walled room of the grid's size.
pub fn instance(grid: GridState, tiles: &[Tile], mission: Mission) -> EnvInstance {
    let mut level = builtin_levels().remove(1);
    level.grid_size = grid.width;
    let mut dynamics = DynamicsMap::new(grid.width, grid.height);
    for &((x, y), c, p) in tiles {
        dynamics.set_tile(x, y, c);
        dynamics.mapping.insert(c, p);
    }
    EnvInstance {
        grid,
        dynamics,
        mission,
        level,
        mode: Mode::Test,
        seed: 0,
    }
}

pub fn room(size: usize, agent: AgentPose) -> GridState {
    GridState::room(size, size, agent)
}

/// A level where green and blue may take any of the six properties in
/// either mode.
pub fn open_level(name: &str, size: usize, n_tile_types: usize, family: MissionFamily, distractors: bool) -> LevelSpec {
    let all = TileProperty::DYNAMIC;
    LevelSpec::from_training_table(
        name,
        size,
        n_tile_types,
        family,
        distractors,
        false,
        &all,
        &[(Color::Green, &all), (Color::Blue, &all)],
    )
}

/// Minimum cost in half time units over every action sequence of length at
/// most `depth` that reaches the mission without stepping on a trap.
///
/// Layered expansion keeps, per depth, the cheapest way to reach each state;
/// that is exact for the bounded problem because the future only depends on
/// the state and the remaining length.
pub fn brute_force_min(start: &GridState, dynamics: &DynamicsMap, mission: &Mission, depth: usize) -> Option<u32> {
    if mission.is_satisfied(start) {
        return Some(0);
    }
    let mut best: Option<u32> = None;
    let mut layer: HashMap<GridState, u32> = HashMap::from([(start.clone(), 0)]);
    for _ in 0..depth {
        let mut next: HashMap<GridState, u32> = HashMap::new();
        for (state, &cost) in &layer {
            for a in Action::ALL {
                let t = resolve_action(state, a, dynamics);
                if t.terminated {
                    continue;
                }
                let c = cost + (t.time_delta * 2.0).round() as u32;
                if best.is_some_and(|b| c >= b) {
                    continue;
                }
                if mission.is_satisfied(&t.next_state) {
                    best = Some(c);
                    continue;
                }
                let slot = next.entry(t.next_state).or_insert(u32::MAX);
                *slot = (*slot).min(c);
            }
        }
        if next.is_empty() {
            break;
        }
        layer = next;
    }
    best
}

/// Sample standard error with the n-1 denominator, computed the long way.
pub fn naive_se(xs: &[f64]) -> f64 {
    let n = xs.len() as f64;
    if xs.len() < 2 {
        return 0.0;
    }
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0);
    (var / n).sqrt()
}
