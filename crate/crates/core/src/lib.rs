//! Grid-world engine where floor tiles carry per-episode dynamics that are
//! revealed only through short text descriptions.
//!
//! The crate covers the simulator (`grid`, `dynamics`), level sampling
//! (`level`), text generation (`text`), the episode API (`episode`),
//! privileged planners (`oracle`), evaluation (`eval`) and a JSON-lines
//! stepping service (`service`).

pub mod dynamics;
pub mod episode;
mod error;
pub mod eval;
pub mod grid;
pub mod level;
pub mod oracle;
pub mod render;
pub mod rng;
pub mod service;
pub mod text;
pub mod witness;

pub use dynamics::{resolve_action, TileProperty, Transition};
pub use episode::{Episode, EpisodeTrace, Observation, Outcome, StepInfo, StepResult};
pub use error::{Error, Result};
pub use grid::{Action, AgentPose, Cell, Color, Direction, GridState, Object, ObjectKind, SymbolicGrid};
pub use level::{DynamicsMap, EnvInstance, LevelRegistry, LevelSpec, Mission, Mode};
pub use text::{TextMode, Vocabulary};
