use std::collections::BTreeSet;
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dynamics::TileProperty;
use crate::grid::Color;
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MissionFamily {
    GoToRedBall,
    GoToObj,
    PutNextLocal,
}

impl MissionFamily {
    /// Horizon multiplier applied to the grid area.
    fn horizon_factor(self) -> u32 {
        match self {
            MissionFamily::GoToRedBall | MissionFamily::GoToObj => 4,
            MissionFamily::PutNextLocal => 8,
        }
    }
}

/// Train instances respect the held-out set; test instances draw from the
/// full color x property product.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Train,
    Test,
}

impl Mode {
    pub fn name(self) -> &'static str {
        match self {
            Mode::Train => "train",
            Mode::Test => "test",
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "train" => Ok(Mode::Train),
            "test" => Ok(Mode::Test),
            other => Err(Error::Parse(format!("unknown mode '{other}' (expected train or test)"))),
        }
    }
}

pub const DEFAULT_TILE_DENSITY: f64 = 0.3;

fn default_density() -> f64 {
    DEFAULT_TILE_DENSITY
}

/// Static definition of a level.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelSpec {
    pub name: String,
    /// Cells per side, boundary walls included.
    pub grid_size: usize,
    /// Number of distinct tile colors placed per episode.
    pub n_tile_types: usize,
    pub allowed_properties: Vec<TileProperty>,
    pub colors: Vec<Color>,
    /// (color, property) pairs never sampled in train mode.
    #[serde(default)]
    pub held_out: BTreeSet<(Color, TileProperty)>,
    #[serde(default)]
    pub distractors: bool,
    /// Fraction of free floor cells turned into colored tiles.
    #[serde(default = "default_density")]
    pub tile_density: f64,
    #[serde(default)]
    pub partial_text: bool,
    pub mission_family: MissionFamily,
    /// Time horizon; an episode times out once its time counter reaches it.
    pub max_steps: u32,
}

impl LevelSpec {
    /// Builds a level from the properties each color may take in training.
    /// The held-out set is everything else in colors x allowed_properties.
    pub fn from_training_table(
        name: &str,
        grid_size: usize,
        n_tile_types: usize,
        mission_family: MissionFamily,
        distractors: bool,
        partial_text: bool,
        allowed_properties: &[TileProperty],
        training: &[(Color, &[TileProperty])],
    ) -> LevelSpec {
        let colors: Vec<Color> = training.iter().map(|(c, _)| *c).collect();
        let mut held_out = BTreeSet::new();
        for (color, allowed) in training {
            for p in allowed_properties {
                if !allowed.contains(p) {
                    held_out.insert((*color, *p));
                }
            }
        }
        LevelSpec {
            name: name.to_string(),
            grid_size,
            n_tile_types,
            allowed_properties: allowed_properties.to_vec(),
            colors,
            held_out,
            distractors,
            tile_density: DEFAULT_TILE_DENSITY,
            partial_text,
            mission_family,
            max_steps: mission_family.horizon_factor() * (grid_size * grid_size) as u32,
        }
    }

    /// Properties `color` may take in the given mode.
    pub fn properties_for(&self, color: Color, mode: Mode) -> Vec<TileProperty> {
        self.allowed_properties
            .iter()
            .copied()
            .filter(|p| mode == Mode::Test || !self.held_out.contains(&(color, *p)))
            .collect()
    }

    pub fn validate(&self) -> Result<(), Error> {
        let fail = |msg: String| Err(Error::InvalidLevel(format!("{}: {msg}", self.name)));
        if self.grid_size < 5 {
            return fail(format!("grid_size {} is too small", self.grid_size));
        }
        if self.allowed_properties.is_empty() {
            return fail("no allowed properties".into());
        }
        if self.allowed_properties.contains(&TileProperty::Normal) {
            return fail("'normal' is not a tile property".into());
        }
        let distinct: BTreeSet<_> = self.colors.iter().collect();
        if distinct.len() != self.colors.len() {
            return fail("duplicate colors".into());
        }
        if self.n_tile_types == 0 || self.n_tile_types > self.colors.len() {
            return fail(format!(
                "n_tile_types {} must be in 1..={}",
                self.n_tile_types,
                self.colors.len()
            ));
        }
        if !(0.0..=1.0).contains(&self.tile_density) {
            return fail(format!("tile_density {} outside [0, 1]", self.tile_density));
        }
        if self.max_steps == 0 {
            return fail("max_steps must be positive".into());
        }
        for (c, p) in &self.held_out {
            if !self.colors.contains(c) || !self.allowed_properties.contains(p) {
                return fail(format!("held-out pair ({c}, {p}) is outside colors x properties"));
            }
        }
        for c in &self.colors {
            if self.properties_for(*c, Mode::Train).is_empty() {
                return fail(format!("held-out set leaves color {c} without a training property"));
            }
        }
        Ok(())
    }
}

/// The five built-in levels, with held-out sets encoding which
/// (color, property) pairs each level allows in training.
pub fn builtin_levels() -> Vec<LevelSpec> {
    use Color::{Blue, Green, Orange};
    use TileProperty::*;

    let all_six = TileProperty::DYNAMIC;
    let six_colors: [(Color, &[TileProperty]); 3] = [
        (Green, &[Slippery, FlipLeftRight, Sticky, Magic]),
        (Blue, &[Trap, Slippery, FlipLeftRight, FlipUpDown]),
        (Orange, &[Trap, FlipUpDown, Sticky, Magic]),
    ];

    vec![
        LevelSpec::from_training_table(
            "GoToRedBall-v1",
            8,
            2,
            MissionFamily::GoToRedBall,
            false,
            false,
            &[Trap, Slippery, Sticky],
            &[(Green, &[Slippery, Sticky]), (Blue, &[Trap, Sticky])],
        ),
        LevelSpec::from_training_table(
            "GoToRedBall-v2",
            8,
            3,
            MissionFamily::GoToRedBall,
            false,
            false,
            &all_six,
            &six_colors,
        ),
        LevelSpec::from_training_table(
            "PutNextLocal",
            8,
            2,
            MissionFamily::PutNextLocal,
            true,
            false,
            &[Trap, Slippery, FlipLeftRight],
            &[(Green, &[Slippery, FlipLeftRight]), (Blue, &[Trap, FlipLeftRight])],
        ),
        LevelSpec::from_training_table(
            "GoToObj",
            8,
            3,
            MissionFamily::GoToObj,
            true,
            false,
            &all_six,
            &six_colors,
        ),
        LevelSpec::from_training_table(
            "GoToObj-Partial",
            8,
            3,
            MissionFamily::GoToObj,
            true,
            true,
            &[Slippery, FlipLeftRight, FlipUpDown, Sticky, Magic],
            &[
                (Green, &[Slippery, FlipLeftRight, FlipUpDown, Magic]),
                (Blue, &[FlipLeftRight, FlipUpDown, Sticky, Magic]),
                (Orange, &[Slippery, FlipLeftRight, Sticky, Magic]),
            ],
        ),
    ]
}

/// A named collection of levels, loadable from a JSON registry file of the
/// form `{"levels": [LevelSpec, ...]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelRegistry {
    pub levels: Vec<LevelSpec>,
}

impl Default for LevelRegistry {
    fn default() -> Self {
        LevelRegistry {
            levels: builtin_levels(),
        }
    }
}

impl LevelRegistry {
    pub fn new(levels: Vec<LevelSpec>) -> Result<Self, Error> {
        let mut seen = BTreeSet::new();
        for level in &levels {
            level.validate()?;
            if !seen.insert(level.name.as_str()) {
                return Err(Error::InvalidLevel(format!("duplicate level name {}", level.name)));
            }
        }
        Ok(LevelRegistry { levels })
    }

    pub fn from_json(text: &str) -> Result<Self, Error> {
        let raw: LevelRegistry = serde_json::from_str(text)?;
        LevelRegistry::new(raw.levels)
    }

    pub fn load(path: &Path) -> Result<Self, Error> {
        LevelRegistry::from_json(&std::fs::read_to_string(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("level registry serializes")
    }

    pub fn get(&self, name: &str) -> Result<&LevelSpec, Error> {
        self.levels
            .iter()
            .find(|l| l.name == name)
            .ok_or_else(|| Error::UnknownLevel(name.to_string()))
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.levels.iter().map(|l| l.name.as_str())
    }
}
