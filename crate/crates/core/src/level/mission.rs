use serde::{Deserialize, Serialize};

use crate::grid::{Cell, GridState, Object};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Mission {
    /// Face the target object from an adjacent cell.
    GoTo { target: Object },
    /// Have `moved` and `fixed` lie on 4-adjacent cells.
    PutNext { moved: Object, fixed: Object },
}

impl Mission {
    /// Objects the mission refers to.
    pub fn objects(&self) -> Vec<Object> {
        match *self {
            Mission::GoTo { target } => vec![target],
            Mission::PutNext { moved, fixed } => vec![moved, fixed],
        }
    }

    pub fn is_satisfied(&self, state: &GridState) -> bool {
        match *self {
            Mission::GoTo { target } => state.front_cell() == Some(Cell::Object(target)),
            Mission::PutNext { moved, fixed } => {
                match (state.find_object(moved), state.find_object(fixed)) {
                    (Some((ax, ay)), Some((bx, by))) => (ax - bx).abs() + (ay - by).abs() == 1,
                    _ => false,
                }
            }
        }
    }
}
