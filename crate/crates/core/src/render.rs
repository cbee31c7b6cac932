//! Plain-text rendering of a full grid, optionally with a trajectory overlay.
//!
//! Each cell is two characters wide:
//!
//! ```text
//! ##  wall           .   empty floor
//! g   green tile     Br  red ball (kind letter, color letter)
//! >   agent facing east (second char is the tile under it, if any)
//! ```
//!
//! Cells the agent passed through are marked with `*` in the second column.

use std::collections::BTreeSet;
use std::fmt::Write;

use crate::grid::{Action, Cell, Color, Direction, GridState, ObjectKind};
use crate::level::{DynamicsMap, EnvInstance};
use crate::oracle;

fn color_letter(c: Color) -> char {
    match c {
        Color::Red => 'r',
        Color::Green => 'g',
        Color::Blue => 'b',
        Color::Purple => 'p',
        Color::Yellow => 'y',
        Color::Grey => 'e',
        Color::Orange => 'o',
    }
}

fn kind_letter(k: ObjectKind) -> char {
    match k {
        ObjectKind::Key => 'K',
        ObjectKind::Ball => 'B',
        ObjectKind::Box => 'X',
    }
}

fn arrow(d: Direction) -> char {
    match d {
        Direction::East => '>',
        Direction::South => 'v',
        Direction::West => '<',
        Direction::North => '^',
    }
}

fn render_with(state: &GridState, dynamics: &DynamicsMap, path: &BTreeSet<(i32, i32)>) -> String {
    let mut out = String::new();
    for y in 0..state.height as i32 {
        for x in 0..state.width as i32 {
            let tile = dynamics.tile_color(x, y).map(color_letter);
            let (a, b) = if state.agent.pos() == (x, y) {
                (arrow(state.agent.dir), tile.unwrap_or(' '))
            } else {
                match state.get(x, y) {
                    Some(Cell::Wall) | None => ('#', '#'),
                    Some(Cell::Object(o)) => (kind_letter(o.kind), color_letter(o.color)),
                    Some(Cell::Empty) => (tile.unwrap_or('.'), ' '),
                }
            };
            let b = if b == ' ' && path.contains(&(x, y)) { '*' } else { b };
            out.push(a);
            out.push(b);
        }
        out.push('\n');
    }
    out
}

fn legend(dynamics: &DynamicsMap) -> String {
    let mut out = String::new();
    for (color, prop) in &dynamics.mapping {
        let _ = writeln!(out, "{} = {} tiles: {}", color_letter(*color), color, prop.name());
    }
    out
}

/// The state as a character grid.
pub fn render_state(state: &GridState, dynamics: &DynamicsMap) -> String {
    render_with(state, dynamics, &BTreeSet::new())
}

/// The initial state followed by the color legend and the mission.
pub fn render_instance(instance: &EnvInstance) -> String {
    let mut out = render_state(&instance.grid, &instance.dynamics);
    out.push_str(&legend(&instance.dynamics));
    let _ = writeln!(out, "mission: {}", crate::text::instruction(&instance.mission));
    out
}

/// The initial state with every cell the agent occupied while executing
/// `actions` marked, then the final agent pose and the outcome.
pub fn render_trace(instance: &EnvInstance, actions: &[Action]) -> String {
    let mut episode = crate::episode::Episode::from_instance(instance.clone(), Default::default());
    let mut path = BTreeSet::from([instance.grid.agent.pos()]);
    for &a in actions {
        if episode.is_done() {
            break;
        }
        episode.step(a).expect("episode is running");
        path.insert(episode.grid().agent.pos());
    }
    let mut out = render_with(&instance.grid, &instance.dynamics, &path);
    out.push_str(&legend(&instance.dynamics));
    let _ = writeln!(
        out,
        "outcome: {}  time: {}  steps: {}  reward: {:.4}",
        episode.outcome(),
        episode.time(),
        episode.steps(),
        episode.total_reward()
    );
    out
}

/// Trace overlay for the optimal plan, or `None` if no plan exists.
pub fn render_optimal(instance: &EnvInstance) -> Option<String> {
    let plan = oracle::plan_optimal(instance).ok()?;
    Some(render_trace(instance, &plan.actions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::TileProperty;
    use crate::grid::{AgentPose, Object};

    #[test]
    fn small_room() {
        let mut g = GridState::room(4, 3, AgentPose::new(1, 1, Direction::East));
        g.set(2, 1, Cell::Object(Object::new(ObjectKind::Ball, Color::Red)));
        let mut d = DynamicsMap::new(4, 3);
        d.set_tile(1, 1, Color::Green);
        d.mapping.insert(Color::Green, TileProperty::Slippery);
        assert_eq!(render_state(&g, &d), "########\n##>gBr##\n########\n");
        assert!(legend(&d).contains("g = green tiles: slippery"));
    }

    #[test]
    fn path_marks() {
        let g = GridState::room(5, 3, AgentPose::new(1, 1, Direction::East));
        let d = DynamicsMap::new(5, 3);
        let s = render_with(&g, &d, &BTreeSet::from([(2, 1), (3, 1)]));
        assert_eq!(s.lines().nth(1).unwrap(), "##> .*.*##");
    }
}
