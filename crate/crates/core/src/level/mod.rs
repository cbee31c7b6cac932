//! Level registry, procedural instance generation and the train/test
//! partition over (color, property) pairs.

mod dynamics_map;
mod mission;
mod sample;
mod spec;

pub use dynamics_map::{DynamicsMap, TilePlacement};
pub use mission::Mission;
pub use sample::{mission_satisfied, sample_instance, EnvInstance, DISTRACTOR_COUNT, MAX_ATTEMPTS};
pub use spec::{builtin_levels, LevelRegistry, LevelSpec, MissionFamily, Mode, DEFAULT_TILE_DENSITY};
