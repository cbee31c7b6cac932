//! World representation: cells, agent pose, the action vocabulary and the
//! agent-relative 7x7x3 symbolic observation.
//!
//! Floor tile colors are not stored in the cell array. They belong to the
//! episode's [`DynamicsMap`], which is why [`observe`] takes both.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::level::DynamicsMap;

/// Side length of the square observation window.
pub const VIEW_SIZE: usize = 7;

/// Number of integers in a flattened observation (7 * 7 * 3).
pub const OBS_LEN: usize = VIEW_SIZE * VIEW_SIZE * 3;

/// Cell type ids used in the symbolic encoding.
pub mod type_id {
    pub const UNSEEN: u8 = 0;
    pub const EMPTY: u8 = 1;
    pub const WALL: u8 = 2;
    pub const FLOOR: u8 = 3;
    pub const KEY: u8 = 5;
    pub const BALL: u8 = 6;
    pub const BOX: u8 = 7;
    pub const AGENT: u8 = 10;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Color {
    Red,
    Green,
    Blue,
    Purple,
    Yellow,
    Grey,
    Orange,
}

impl Color {
    pub const ALL: [Color; 7] = [
        Color::Red,
        Color::Green,
        Color::Blue,
        Color::Purple,
        Color::Yellow,
        Color::Grey,
        Color::Orange,
    ];

    /// Colors objects may take. Orange is reserved for floor tiles.
    pub const OBJECT_COLORS: [Color; 6] = [
        Color::Red,
        Color::Green,
        Color::Blue,
        Color::Purple,
        Color::Yellow,
        Color::Grey,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn from_id(id: u8) -> Option<Color> {
        Color::ALL.get(id as usize).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Color::Red => "red",
            Color::Green => "green",
            Color::Blue => "blue",
            Color::Purple => "purple",
            Color::Yellow => "yellow",
            Color::Grey => "grey",
            Color::Orange => "orange",
        }
    }

    pub fn from_name(name: &str) -> Option<Color> {
        Color::ALL.into_iter().find(|c| c.name() == name)
    }
}

impl fmt::Display for Color {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObjectKind {
    Key,
    Ball,
    Box,
}

impl ObjectKind {
    pub const ALL: [ObjectKind; 3] = [ObjectKind::Key, ObjectKind::Ball, ObjectKind::Box];

    pub fn type_id(self) -> u8 {
        match self {
            ObjectKind::Key => type_id::KEY,
            ObjectKind::Ball => type_id::BALL,
            ObjectKind::Box => type_id::BOX,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ObjectKind::Key => "key",
            ObjectKind::Ball => "ball",
            ObjectKind::Box => "box",
        }
    }
}

/// A pickable object, identified by its (kind, color) descriptor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Object {
    pub kind: ObjectKind,
    pub color: Color,
}

impl Object {
    pub fn new(kind: ObjectKind, color: Color) -> Self {
        Object { kind, color }
    }
}

impl fmt::Display for Object {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.color, self.kind.name())
    }
}

/// Contents of one grid cell, excluding the agent and the floor color.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Cell {
    Empty,
    Wall,
    Object(Object),
}

/// The (type, color, state) triple of the symbolic encoding.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct CellCode {
    pub type_id: u8,
    pub color_id: u8,
    pub state_id: u8,
}

impl CellCode {
    pub const UNSEEN: CellCode = CellCode::new(type_id::UNSEEN, 0);
    pub const EMPTY: CellCode = CellCode::new(type_id::EMPTY, 0);
    pub const WALL: CellCode = CellCode::new(type_id::WALL, 5);

    pub const fn new(type_id: u8, color_id: u8) -> Self {
        CellCode {
            type_id,
            color_id,
            state_id: 0,
        }
    }

    pub fn floor(color: Color) -> Self {
        CellCode::new(type_id::FLOOR, color.id())
    }

    pub fn object(object: Object) -> Self {
        CellCode::new(object.kind.type_id(), object.color.id())
    }

    pub fn as_array(self) -> [u8; 3] {
        [self.type_id, self.color_id, self.state_id]
    }

    /// Checks each channel against the encoding tables.
    pub fn is_valid(self) -> bool {
        let type_ok = matches!(
            self.type_id,
            type_id::UNSEEN
                | type_id::EMPTY
                | type_id::WALL
                | type_id::FLOOR
                | type_id::KEY
                | type_id::BALL
                | type_id::BOX
                | type_id::AGENT
        );
        type_ok && (self.color_id as usize) < Color::ALL.len() && self.state_id == 0
    }
}

/// Agent heading. Ids follow the usual east/south/west/north order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Direction {
    East = 0,
    South = 1,
    West = 2,
    North = 3,
}

impl Direction {
    pub const ALL: [Direction; 4] = [
        Direction::East,
        Direction::South,
        Direction::West,
        Direction::North,
    ];

    pub fn from_id(id: u8) -> Option<Direction> {
        Direction::ALL.get(id as usize).copied()
    }

    pub fn delta(self) -> (i32, i32) {
        match self {
            Direction::East => (1, 0),
            Direction::South => (0, 1),
            Direction::West => (-1, 0),
            Direction::North => (0, -1),
        }
    }

    /// Counter-clockwise quarter turn.
    pub fn left(self) -> Direction {
        Direction::ALL[(self as usize + 3) % 4]
    }

    /// Clockwise quarter turn.
    pub fn right(self) -> Direction {
        Direction::ALL[(self as usize + 1) % 4]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AgentPose {
    pub x: i32,
    pub y: i32,
    pub dir: Direction,
}

impl AgentPose {
    pub fn new(x: i32, y: i32, dir: Direction) -> Self {
        AgentPose { x, y, dir }
    }

    pub fn pos(&self) -> (i32, i32) {
        (self.x, self.y)
    }

    /// The cell directly ahead of the agent.
    pub fn front(&self) -> (i32, i32) {
        let (dx, dy) = self.dir.delta();
        (self.x + dx, self.y + dy)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MoveDirection {
    Forward,
    Backward,
}

/// Displaces the pose one cell along or against its heading. No collision
/// or bounds checking: the result is a candidate the caller validates.
pub fn geometric_move(pose: AgentPose, direction: MoveDirection) -> AgentPose {
    let (dx, dy) = pose.dir.delta();
    let sign = match direction {
        MoveDirection::Forward => 1,
        MoveDirection::Backward => -1,
    };
    AgentPose::new(pose.x + sign * dx, pose.y + sign * dy, pose.dir)
}

/// The fixed action vocabulary. Ids are part of the wire protocol.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(into = "u8", try_from = "u8")]
pub enum Action {
    Left = 0,
    Right = 1,
    Forward = 2,
    Pickup = 3,
    Drop = 4,
    Toggle = 5,
    Done = 6,
}

impl Action {
    pub const ALL: [Action; 7] = [
        Action::Left,
        Action::Right,
        Action::Forward,
        Action::Pickup,
        Action::Drop,
        Action::Toggle,
        Action::Done,
    ];

    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            Action::Left => "left",
            Action::Right => "right",
            Action::Forward => "forward",
            Action::Pickup => "pickup",
            Action::Drop => "drop",
            Action::Toggle => "toggle",
            Action::Done => "done",
        }
    }
}

impl From<Action> for u8 {
    fn from(a: Action) -> u8 {
        a.id()
    }
}

impl TryFrom<u8> for Action {
    type Error = crate::Error;

    fn try_from(id: u8) -> Result<Self, Self::Error> {
        Action::ALL
            .get(id as usize)
            .copied()
            .ok_or(crate::Error::InvalidAction(id as i64))
    }
}

impl TryFrom<i64> for Action {
    type Error = crate::Error;

    fn try_from(id: i64) -> Result<Self, Self::Error> {
        u8::try_from(id)
            .ok()
            .and_then(|id| Action::ALL.get(id as usize).copied())
            .ok_or(crate::Error::InvalidAction(id))
    }
}

/// Per-agent bookkeeping for the tile the agent currently stands on.
///
/// `on_tile` counts actions taken since the agent last changed cell. Every
/// such action began and ended on the current tile, so the same counter
/// serves both the "actions since entering" and the "consecutive steps on
/// this tile" rules. It saturates at [`TileTimers::CAP`]; no rule reads
/// beyond that.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub struct TileTimers {
    pub on_tile: u8,
}

impl TileTimers {
    pub const CAP: u8 = 2;

    pub fn tick(self) -> Self {
        TileTimers {
            on_tile: (self.on_tile + 1).min(Self::CAP),
        }
    }
}

/// Full world state for one episode.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct GridState {
    pub width: usize,
    pub height: usize,
    cells: Vec<Cell>,
    pub agent: AgentPose,
    pub carrying: Option<Object>,
    pub timers: TileTimers,
}

impl GridState {
    /// An empty walled room with the agent at the given pose.
    pub fn room(width: usize, height: usize, agent: AgentPose) -> Self {
        let mut cells = vec![Cell::Empty; width * height];
        for y in 0..height {
            for x in 0..width {
                if x == 0 || y == 0 || x + 1 == width || y + 1 == height {
                    cells[y * width + x] = Cell::Wall;
                }
            }
        }
        GridState {
            width,
            height,
            cells,
            agent,
            carrying: None,
            timers: TileTimers::default(),
        }
    }

    pub fn in_bounds(&self, x: i32, y: i32) -> bool {
        x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height
    }

    pub fn get(&self, x: i32, y: i32) -> Option<Cell> {
        self.in_bounds(x, y)
            .then(|| self.cells[y as usize * self.width + x as usize])
    }

    /// Panics if the coordinates are out of bounds.
    pub fn set(&mut self, x: i32, y: i32, cell: Cell) {
        assert!(self.in_bounds(x, y), "cell ({x}, {y}) out of bounds");
        self.cells[y as usize * self.width + x as usize] = cell;
    }

    /// True for in-bounds cells with nothing on them. Floor tiles of any
    /// color are walkable.
    pub fn is_walkable(&self, x: i32, y: i32) -> bool {
        matches!(self.get(x, y), Some(Cell::Empty))
    }

    pub fn front_cell(&self) -> Option<Cell> {
        let (x, y) = self.agent.front();
        self.get(x, y)
    }

    /// Position of the first object matching the descriptor.
    pub fn find_object(&self, object: Object) -> Option<(i32, i32)> {
        self.cells
            .iter()
            .position(|c| *c == Cell::Object(object))
            .map(|i| ((i % self.width) as i32, (i / self.width) as i32))
    }

    /// All objects lying on the grid with their positions, in row-major order.
    pub fn objects(&self) -> impl Iterator<Item = ((i32, i32), Object)> + '_ {
        self.cells.iter().enumerate().filter_map(|(i, c)| match c {
            Cell::Object(o) => Some((((i % self.width) as i32, (i / self.width) as i32), *o)),
            _ => None,
        })
    }

    /// Checks the structural invariants: walled boundary and an agent
    /// standing on a walkable interior cell.
    pub fn validate(&self) -> Result<(), crate::Error> {
        if self.width < 3 || self.height < 3 || self.cells.len() != self.width * self.height {
            return Err(crate::Error::InvalidState("bad grid dimensions".into()));
        }
        for y in 0..self.height as i32 {
            for x in 0..self.width as i32 {
                let border = x == 0 || y == 0 || x + 1 == self.width as i32 || y + 1 == self.height as i32;
                if border && self.get(x, y) != Some(Cell::Wall) {
                    return Err(crate::Error::InvalidState(format!(
                        "boundary cell ({x}, {y}) is not a wall"
                    )));
                }
            }
        }
        if !self.is_walkable(self.agent.x, self.agent.y) {
            return Err(crate::Error::InvalidState(format!(
                "agent at ({}, {}) is not on a walkable cell",
                self.agent.x, self.agent.y
            )));
        }
        Ok(())
    }

    /// Encoding of what lies at (x, y), ignoring the agent.
    pub fn encode_cell(&self, x: i32, y: i32, dynamics: &DynamicsMap) -> CellCode {
        match self.get(x, y) {
            None => CellCode::UNSEEN,
            Some(Cell::Wall) => CellCode::WALL,
            Some(Cell::Object(o)) => CellCode::object(o),
            Some(Cell::Empty) => match dynamics.tile_color(x, y) {
                Some(color) => CellCode::floor(color),
                None => CellCode::EMPTY,
            },
        }
    }
}

/// The 7x7x3 agent-relative view, indexed `[row][col][channel]`.
///
/// The agent sits at row 6, column 3 and faces toward row 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct SymbolicGrid(pub [[[u8; 3]; VIEW_SIZE]; VIEW_SIZE]);

impl SymbolicGrid {
    pub const AGENT_ROW: usize = VIEW_SIZE - 1;
    pub const AGENT_COL: usize = VIEW_SIZE / 2;

    pub fn get(&self, row: usize, col: usize) -> CellCode {
        let [t, c, s] = self.0[row][col];
        CellCode {
            type_id: t,
            color_id: c,
            state_id: s,
        }
    }

    /// Row-major flattening: index `(row * 7 + col) * 3 + channel`.
    pub fn to_flat(&self) -> Vec<u8> {
        self.0.iter().flatten().flatten().copied().collect()
    }

    pub fn from_flat(values: &[u8]) -> Option<SymbolicGrid> {
        if values.len() != OBS_LEN {
            return None;
        }
        let mut grid = [[[0u8; 3]; VIEW_SIZE]; VIEW_SIZE];
        for (i, v) in values.iter().enumerate() {
            grid[i / (VIEW_SIZE * 3)][(i / 3) % VIEW_SIZE][i % 3] = *v;
        }
        Some(SymbolicGrid(grid))
    }
}

/// World coordinates of window cell (row, col) for the given pose.
pub fn window_to_world(pose: AgentPose, row: usize, col: usize) -> (i32, i32) {
    let forward = (SymbolicGrid::AGENT_ROW - row) as i32;
    let lateral = col as i32 - SymbolicGrid::AGENT_COL as i32;
    let (fx, fy) = pose.dir.delta();
    // agent's right-hand side: heading rotated clockwise
    let (rx, ry) = (-fy, fx);
    (pose.x + forward * fx + lateral * rx, pose.y + forward * fy + lateral * ry)
}

/// Shadow-casting visibility over the window. Visibility spreads sideways
/// and forward out of see-through cells; walls and out-of-bounds cells are
/// opaque.
fn visibility_mask(state: &GridState) -> [[bool; VIEW_SIZE]; VIEW_SIZE] {
    let opaque = |row: usize, col: usize| {
        let (x, y) = window_to_world(state.agent, row, col);
        !matches!(state.get(x, y), Some(Cell::Empty | Cell::Object(_)))
    };
    let mut mask = [[false; VIEW_SIZE]; VIEW_SIZE];
    mask[SymbolicGrid::AGENT_ROW][SymbolicGrid::AGENT_COL] = true;
    for row in (0..VIEW_SIZE).rev() {
        for col in 0..VIEW_SIZE - 1 {
            if !mask[row][col] || opaque(row, col) {
                continue;
            }
            mask[row][col + 1] = true;
            if row > 0 {
                mask[row - 1][col + 1] = true;
                mask[row - 1][col] = true;
            }
        }
        for col in (1..VIEW_SIZE).rev() {
            if !mask[row][col] || opaque(row, col) {
                continue;
            }
            mask[row][col - 1] = true;
            if row > 0 {
                mask[row - 1][col - 1] = true;
                mask[row - 1][col] = true;
            }
        }
    }
    mask
}

/// The agent-relative partial observation. Cells outside the grid or in
/// shadow encode as unseen. The agent's own cell shows the floor beneath it.
pub fn observe(state: &GridState, dynamics: &DynamicsMap) -> SymbolicGrid {
    let mask = visibility_mask(state);
    let mut grid = [[[0u8; 3]; VIEW_SIZE]; VIEW_SIZE];
    for (row, cells) in grid.iter_mut().enumerate() {
        for (col, cell) in cells.iter_mut().enumerate() {
            if !mask[row][col] {
                continue;
            }
            let (x, y) = window_to_world(state.agent, row, col);
            *cell = state.encode_cell(x, y, dynamics).as_array();
        }
    }
    SymbolicGrid(grid)
}
