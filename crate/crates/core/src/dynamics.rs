//! Tile properties and the single-step transition function.
//!
//! Rules are applied in a fixed order: flips remap the action, sticky
//! suppresses displacement, collisions cancel blocked moves, traps end the
//! episode, magic pushes an idling agent south, and the step cost depends on
//! the tile the agent started on.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::grid::{geometric_move, Action, Cell, GridState, MoveDirection, TileTimers};
use crate::level::DynamicsMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum TileProperty {
    #[serde(rename = "trap")]
    Trap,
    #[serde(rename = "slippery")]
    Slippery,
    #[serde(rename = "flipLeftRight")]
    FlipLeftRight,
    #[serde(rename = "flipUpDown")]
    FlipUpDown,
    #[serde(rename = "sticky")]
    Sticky,
    #[serde(rename = "magic")]
    Magic,
    #[serde(rename = "normal")]
    Normal,
}

impl TileProperty {
    /// The six properties a colored tile can carry.
    pub const DYNAMIC: [TileProperty; 6] = [
        TileProperty::Trap,
        TileProperty::Slippery,
        TileProperty::FlipLeftRight,
        TileProperty::FlipUpDown,
        TileProperty::Sticky,
        TileProperty::Magic,
    ];

    /// Wire name.
    pub fn name(self) -> &'static str {
        match self {
            TileProperty::Trap => "trap",
            TileProperty::Slippery => "slippery",
            TileProperty::FlipLeftRight => "flipLeftRight",
            TileProperty::FlipUpDown => "flipUpDown",
            TileProperty::Sticky => "sticky",
            TileProperty::Magic => "magic",
            TileProperty::Normal => "normal",
        }
    }

    /// Lowercase single-token word used in descriptive sentences.
    pub fn word(self) -> &'static str {
        match self {
            TileProperty::Trap => "trap",
            TileProperty::Slippery => "slippery",
            TileProperty::FlipLeftRight => "flipleftright",
            TileProperty::FlipUpDown => "flipupdown",
            TileProperty::Sticky => "sticky",
            TileProperty::Magic => "magic",
            TileProperty::Normal => "normal",
        }
    }

    pub fn from_word(word: &str) -> Option<TileProperty> {
        TileProperty::DYNAMIC
            .into_iter()
            .chain([TileProperty::Normal])
            .find(|p| p.word() == word)
    }
}

impl fmt::Display for TileProperty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TileProperty {
    type Err = crate::Error;

    /// Accepts either the wire name or its lowercase form.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        TileProperty::from_word(&s.to_ascii_lowercase())
            .ok_or_else(|| crate::Error::Parse(format!("unknown tile property '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TerminationReason {
    None,
    Trap,
    Success,
    Timeout,
}

/// Result of applying one action to a state.
#[derive(Debug, Clone, PartialEq)]
pub struct Transition {
    pub next_state: GridState,
    /// 0.5 when the action was taken on a slippery tile, else 1.0.
    pub time_delta: f64,
    pub terminated: bool,
    pub termination_reason: TerminationReason,
}

impl Transition {
    /// Step cost in half time units (1 or 2).
    pub fn half_units(&self) -> u32 {
        (self.time_delta * 2.0) as u32
    }
}

/// Applies `action` under the episode's tile dynamics.
///
/// Only the trap rule can terminate here; success and timeout depend on the
/// mission and the horizon and are decided by the episode engine.
pub fn resolve_action(state: &GridState, action: Action, dynamics: &DynamicsMap) -> Transition {
    let start = state.agent.pos();
    let start_property = dynamics.property_at(start.0, start.1);
    let mut next = state.clone();

    let action = match (start_property, action) {
        (TileProperty::FlipLeftRight, Action::Left) => Action::Right,
        (TileProperty::FlipLeftRight, Action::Right) => Action::Left,
        (_, a) => a,
    };

    let mut displacement = None;
    match action {
        Action::Left => next.agent.dir = state.agent.dir.left(),
        Action::Right => next.agent.dir = state.agent.dir.right(),
        Action::Forward => {
            let direction = if start_property == TileProperty::FlipUpDown {
                MoveDirection::Backward
            } else {
                MoveDirection::Forward
            };
            displacement = Some(geometric_move(state.agent, direction));
        }
        Action::Pickup => {
            let (fx, fy) = state.agent.front();
            if let (None, Some(Cell::Object(object))) = (state.carrying, state.get(fx, fy)) {
                next.carrying = Some(object);
                next.set(fx, fy, Cell::Empty);
            }
        }
        Action::Drop => {
            let (fx, fy) = state.agent.front();
            if let (Some(object), Some(Cell::Empty)) = (state.carrying, state.get(fx, fy)) {
                next.carrying = None;
                next.set(fx, fy, Cell::Object(object));
            }
        }
        Action::Toggle | Action::Done => {}
    }

    if let Some(candidate) = displacement {
        let stuck = start_property == TileProperty::Sticky && state.timers.on_tile < 2;
        if !stuck && state.is_walkable(candidate.x, candidate.y) {
            next.agent.x = candidate.x;
            next.agent.y = candidate.y;
        }
    }

    let moved = next.agent.pos() != start;
    next.timers = if moved {
        TileTimers::default()
    } else {
        state.timers.tick()
    };

    let time_delta = if start_property == TileProperty::Slippery {
        0.5
    } else {
        1.0
    };

    let landed_on_trap =
        |s: &GridState| dynamics.property_at(s.agent.x, s.agent.y) == TileProperty::Trap;

    if moved && landed_on_trap(&next) {
        return Transition {
            next_state: next,
            time_delta,
            terminated: true,
            termination_reason: TerminationReason::Trap,
        };
    }

    if !moved && start_property == TileProperty::Magic && next.timers.on_tile >= 2 {
        let (sx, sy) = (next.agent.x, next.agent.y + 1);
        if next.is_walkable(sx, sy) {
            next.agent.y = sy;
            next.timers = TileTimers::default();
            if landed_on_trap(&next) {
                return Transition {
                    next_state: next,
                    time_delta,
                    terminated: true,
                    termination_reason: TerminationReason::Trap,
                };
            }
        }
    }

    Transition {
        next_state: next,
        time_delta,
        terminated: false,
        termination_reason: TerminationReason::None,
    }
}
