//! A family of instances where the tile descriptions decide the route.
//!
//! The room is split by a wall at `x = 4` with two one-cell gaps: one in the
//! agent's row and one in the ball's row. Each gap holds a single tile. The
//! gap the dynamics-blind planner walks through gets color green, the other
//! gets blue. The primary mapping makes green harmful (trap or sticky) and
//! blue slippery; the swapped mapping exchanges the two properties while the
//! geometry and tile layout stay fixed.

use std::collections::BTreeMap;

use rand::Rng;

use crate::dynamics::{resolve_action, TileProperty};
use crate::grid::{Action, AgentPose, Cell, Color, Direction, GridState, Object, ObjectKind};
use crate::level::{DynamicsMap, EnvInstance, LevelSpec, Mission, MissionFamily, Mode};
use crate::oracle;
use crate::rng;

pub const WALL_X: i32 = 4;
const SIZE: usize = 8;

/// One witness geometry under the two mappings.
#[derive(Debug, Clone)]
pub struct WitnessPair {
    pub primary: EnvInstance,
    pub swapped: EnvInstance,
    /// Property on the gap the blind planner uses, under the primary mapping.
    pub harmful: TileProperty,
}

pub fn witness_level() -> LevelSpec {
    use TileProperty::{Slippery, Sticky, Trap};
    let props: &[TileProperty] = &[Trap, Slippery, Sticky];
    LevelSpec::from_training_table(
        "Witness",
        SIZE,
        2,
        MissionFamily::GoToRedBall,
        false,
        false,
        props,
        &[(Color::Green, props), (Color::Blue, props)],
    )
}

fn mapping(green: TileProperty, blue: TileProperty) -> BTreeMap<Color, TileProperty> {
    BTreeMap::from([(Color::Green, green), (Color::Blue, blue)])
}

/// Cells visited while executing `actions` from `start`.
fn visited(start: &GridState, dynamics: &DynamicsMap, actions: &[Action]) -> Vec<(i32, i32)> {
    let mut state = start.clone();
    let mut cells = vec![state.agent.pos()];
    for &a in actions {
        let t = resolve_action(&state, a, dynamics);
        state = t.next_state;
        cells.push(state.agent.pos());
        if t.terminated {
            break;
        }
    }
    cells
}

/// Builds witness instance `seed`. Even seeds use a trap as the harmful
/// property, odd seeds use sticky.
pub fn witness_instance(seed: u64) -> WitnessPair {
    let mut rng = rng::stream(seed, "witness");
    let harmful = if seed % 2 == 0 {
        TileProperty::Trap
    } else {
        TileProperty::Sticky
    };

    let (ay, by) = loop {
        let ay: i32 = rng.random_range(1..=6);
        let by: i32 = rng.random_range(1..=6);
        if (ay - by).abs() >= 2 {
            break (ay, by);
        }
    };
    let ax = rng.random_range(1..=3);
    // a ball right behind the gap would let the blind route stop on the
    // sticky tile, so sticky instances keep it one cell further
    let bx = if harmful == TileProperty::Sticky {
        6
    } else {
        rng.random_range(5..=6)
    };
    let dir = Direction::ALL[rng.random_range(0..4)];

    let mut grid = GridState::room(SIZE, SIZE, AgentPose::new(ax, ay, dir));
    for y in 1..SIZE as i32 - 1 {
        if y != ay && y != by {
            grid.set(WALL_X, y, Cell::Wall);
        }
    }
    let ball = Object::new(ObjectKind::Ball, Color::Red);
    grid.set(bx, by, Cell::Object(ball));
    let mission = Mission::GoTo { target: ball };
    let level = witness_level();

    let mut layout = DynamicsMap::new(SIZE, SIZE);
    layout.held_out = level.held_out.clone();
    layout.set_tile(WALL_X, ay, Color::Green);
    layout.set_tile(WALL_X, by, Color::Blue);
    layout.mapping = mapping(TileProperty::Normal, TileProperty::Normal);

    let blind = oracle::plan_from(&grid, &layout, &mission).expect("open room is solvable");
    if !visited(&grid, &layout, &blind.actions).contains(&(WALL_X, ay)) {
        layout.set_tile(WALL_X, ay, Color::Blue);
        layout.set_tile(WALL_X, by, Color::Green);
    }

    let make = |m| EnvInstance {
        grid: grid.clone(),
        dynamics: layout.with_mapping(m),
        mission,
        level: level.clone(),
        mode: Mode::Test,
        seed,
    };
    WitnessPair {
        primary: make(mapping(harmful, TileProperty::Slippery)),
        swapped: make(mapping(TileProperty::Slippery, harmful)),
        harmful,
    }
}

/// Reward obtained by running `actions` open loop; an unfinished episode
/// earns 0.
pub fn executed_reward(instance: &EnvInstance, actions: &[Action]) -> f64 {
    oracle::execute_plan(instance, actions).total_reward()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn blind_route_crosses_green() {
        for seed in 0..20 {
            let w = witness_instance(seed);
            let inst = &w.primary;
            let blind = oracle::plan_greedy_ignorant(inst).unwrap();
            let cells = visited(&inst.grid, &inst.dynamics.ignorant(), &blind);
            let green = cells
                .iter()
                .find(|&&(x, y)| inst.dynamics.tile_color(x, y).is_some())
                .copied()
                .unwrap();
            assert_eq!(inst.dynamics.tile_color(green.0, green.1), Some(Color::Green));
        }
    }
}
