use std::collections::BTreeMap;

use rand::seq::{IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{DynamicsMap, LevelSpec, Mission, MissionFamily, Mode};
use crate::grid::{AgentPose, Cell, Color, Direction, GridState, Object, ObjectKind};
use crate::oracle;
use crate::{rng, Error};

/// Resampling budget before a level is declared unsatisfiable.
pub const MAX_ATTEMPTS: usize = 100;

/// Number of distractor objects placed on levels that use them.
pub const DISTRACTOR_COUNT: usize = 3;

/// A concrete, solvable episode start.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnvInstance {
    pub grid: GridState,
    pub dynamics: DynamicsMap,
    pub mission: Mission,
    pub level: LevelSpec,
    pub mode: Mode,
    pub seed: u64,
}

impl EnvInstance {
    pub fn mission_satisfied(&self, state: &GridState) -> bool {
        self.mission.is_satisfied(state)
    }

    /// Canonical JSON encoding.
    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("instance serializes")
    }
}

/// Free function form of [`EnvInstance::mission_satisfied`].
pub fn mission_satisfied(instance: &EnvInstance, state: &GridState) -> bool {
    instance.mission_satisfied(state)
}

fn random_object(rng: &mut ChaCha8Rng) -> Object {
    Object::new(
        *ObjectKind::ALL.choose(rng).unwrap(),
        *Color::OBJECT_COLORS.choose(rng).unwrap(),
    )
}

fn sample_mission(family: MissionFamily, rng: &mut ChaCha8Rng) -> Mission {
    match family {
        MissionFamily::GoToRedBall => Mission::GoTo {
            target: Object::new(ObjectKind::Ball, Color::Red),
        },
        MissionFamily::GoToObj => Mission::GoTo {
            target: random_object(rng),
        },
        MissionFamily::PutNextLocal => {
            let moved = random_object(rng);
            let fixed = loop {
                let o = random_object(rng);
                if o != moved {
                    break o;
                }
            };
            Mission::PutNext { moved, fixed }
        }
    }
}

fn sample_mapping(
    level: &LevelSpec,
    mode: Mode,
    rng: &mut ChaCha8Rng,
) -> BTreeMap<Color, crate::dynamics::TileProperty> {
    let mut colors = level.colors.clone();
    colors.shuffle(rng);
    colors
        .into_iter()
        .take(level.n_tile_types)
        .map(|c| {
            let options = level.properties_for(c, mode);
            (c, *options.choose(rng).expect("validated level"))
        })
        .collect()
}

fn interior_cells(size: usize) -> Vec<(i32, i32)> {
    let mut cells = Vec::new();
    for y in 1..size as i32 - 1 {
        for x in 1..size as i32 - 1 {
            cells.push((x, y));
        }
    }
    cells
}

/// One unchecked draw of an instance.
fn draw(level: &LevelSpec, mode: Mode, seed: u64, rng: &mut ChaCha8Rng) -> Option<EnvInstance> {
    let size = level.grid_size;
    let mut free = interior_cells(size);
    free.shuffle(rng);

    let mission = sample_mission(level.mission_family, rng);
    let mut objects = mission.objects();
    if level.distractors {
        while objects.len() < mission.objects().len() + DISTRACTOR_COUNT {
            let o = random_object(rng);
            if !objects.contains(&o) {
                objects.push(o);
            }
        }
    }
    if free.len() < objects.len() + 2 {
        return None;
    }

    let agent_cell = free.pop()?;
    let dir = Direction::ALL[rng.random_range(0..4)];
    let mut grid = GridState::room(size, size, AgentPose::new(agent_cell.0, agent_cell.1, dir));
    for o in objects {
        let (x, y) = free.pop()?;
        grid.set(x, y, Cell::Object(o));
    }
    if mission.is_satisfied(&grid) {
        return None;
    }

    let mapping = sample_mapping(level, mode, rng);
    let placed: Vec<Color> = mapping.keys().copied().collect();
    let mut dynamics = DynamicsMap::new(size, size);
    dynamics.mapping = mapping;
    dynamics.held_out = level.held_out.clone();

    let n_tiles = (level.tile_density * free.len() as f64).round() as usize;
    for (i, &(x, y)) in free.iter().take(n_tiles).enumerate() {
        let color = if i < placed.len() {
            placed[i]
        } else {
            *placed.choose(rng).unwrap()
        };
        dynamics.set_tile(x, y, color);
    }

    Some(EnvInstance {
        grid,
        dynamics,
        mission,
        level: level.clone(),
        mode,
        seed,
    })
}

/// Samples a solvable instance. Deterministic in (level, mode, seed).
pub fn sample_instance(level: &LevelSpec, mode: Mode, seed: u64) -> Result<EnvInstance, Error> {
    level.validate()?;
    let mut rng = rng::stream(seed, &format!("instance/{}/{}", level.name, mode));
    for _ in 0..MAX_ATTEMPTS {
        let Some(instance) = draw(level, mode, seed, &mut rng) else {
            continue;
        };
        match oracle::plan_in_place(&instance) {
            Ok(plan) if plan.total_time < level.max_steps as f64 => return Ok(instance),
            _ => continue,
        }
    }
    Err(Error::UnsatisfiableLevel {
        level: level.name.clone(),
        attempts: MAX_ATTEMPTS,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::TileProperty;
    use crate::level::builtin_levels;

    fn level(name: &str) -> LevelSpec {
        builtin_levels().into_iter().find(|l| l.name == name).unwrap()
    }

    #[test]
    fn same_seed_same_instance() {
        for l in builtin_levels() {
            let a = sample_instance(&l, Mode::Train, 42).unwrap();
            let b = sample_instance(&l, Mode::Train, 42).unwrap();
            assert_eq!(a.to_json(), b.to_json());
        }
    }

    #[test]
    fn train_mapping_respects_table() {
        let l = level("GoToRedBall-v1");
        for seed in 0..200 {
            let inst = sample_instance(&l, Mode::Train, seed).unwrap();
            let m = &inst.dynamics.mapping;
            assert_eq!(m.len(), 2);
            assert!(matches!(m[&Color::Blue], TileProperty::Trap | TileProperty::Sticky));
            assert!(matches!(m[&Color::Green], TileProperty::Slippery | TileProperty::Sticky));
        }
    }

    #[test]
    fn instances_are_well_formed() {
        for l in builtin_levels() {
            for seed in 0..20 {
                let inst = sample_instance(&l, Mode::Test, seed).unwrap();
                inst.grid.validate().unwrap();
                inst.dynamics.validate().unwrap();
                assert!(!inst.mission_satisfied(&inst.grid));
                let (ax, ay) = inst.grid.agent.pos();
                assert_eq!(inst.dynamics.tile_color(ax, ay), None);
                for ((x, y), _) in inst.grid.objects() {
                    assert_eq!(inst.dynamics.tile_color(x, y), None);
                }
                let expected = if l.distractors { DISTRACTOR_COUNT } else { 0 }
                    + inst.mission.objects().len();
                assert_eq!(inst.grid.objects().count(), expected);
                // every placed color has at least one tile
                for c in inst.dynamics.placed_colors() {
                    assert!(inst.dynamics.tiles().any(|t| t.color == c));
                }
            }
        }
    }

    #[test]
    fn distractors_never_duplicate_mission_objects() {
        let l = level("GoToObj");
        for seed in 0..50 {
            let inst = sample_instance(&l, Mode::Train, seed).unwrap();
            let objs: Vec<_> = inst.grid.objects().map(|(_, o)| o).collect();
            let mut dedup = objs.clone();
            dedup.sort();
            dedup.dedup();
            assert_eq!(dedup.len(), objs.len());
        }
    }

    #[test]
    fn impossible_level_is_unsatisfiable() {
        let mut l = level("GoToRedBall-v1");
        // no plan can finish in under one time unit
        l.max_steps = 1;
        assert!(matches!(
            sample_instance(&l, Mode::Test, 0),
            Err(Error::UnsatisfiableLevel { .. })
        ));
    }
}
