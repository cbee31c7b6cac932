mod common;

use std::collections::BTreeSet;

use dyngrid::level::{builtin_levels, sample_instance, MissionFamily, DISTRACTOR_COUNT};
use dyngrid::oracle::plan_optimal;
use dyngrid::{Cell, Color, Error, LevelRegistry, Mission, Mode, TileProperty};

#[test]
fn builtin_levels_match_table() {
    use TileProperty::*;
    let levels = builtin_levels();
    let names: Vec<_> = levels.iter().map(|l| l.name.as_str()).collect();
    assert_eq!(
        names,
        ["GoToRedBall-v1", "GoToRedBall-v2", "PutNextLocal", "GoToObj", "GoToObj-Partial"]
    );
    let get = |n: &str| levels.iter().find(|l| l.name == n).unwrap();

    let v1 = get("GoToRedBall-v1");
    assert_eq!((v1.grid_size, v1.n_tile_types, v1.distractors), (8, 2, false));
    assert_eq!(v1.allowed_properties, [Trap, Slippery, Sticky]);
    assert_eq!(
        v1.held_out,
        BTreeSet::from([(Color::Green, Trap), (Color::Blue, Slippery)])
    );
    assert_eq!(v1.max_steps, 256);

    let put = get("PutNextLocal");
    assert!(put.distractors);
    assert_eq!(put.n_tile_types, 2);
    assert_eq!(put.mission_family, MissionFamily::PutNextLocal);
    assert_eq!(
        put.held_out,
        BTreeSet::from([(Color::Green, Trap), (Color::Blue, Slippery)])
    );

    let obj = get("GoToObj");
    assert_eq!(obj.n_tile_types, 3);
    assert_eq!(obj.allowed_properties.len(), 6);
    // each color keeps four of six properties for training
    assert_eq!(obj.held_out.len(), 6);

    let partial = get("GoToObj-Partial");
    assert!(partial.partial_text && !partial.allowed_properties.contains(&Trap));
    for l in &levels {
        l.validate().unwrap();
        for c in &l.colors {
            assert!(!l.properties_for(*c, Mode::Train).is_empty());
        }
    }
}

#[test]
fn sampled_instances_respect_invariants() {
    for level in builtin_levels() {
        for mode in [Mode::Train, Mode::Test] {
            for seed in 0..60 {
                let inst = sample_instance(&level, mode, seed).unwrap();
                let g = &inst.grid;
                let d = &inst.dynamics;
                g.validate().unwrap();
                d.validate().unwrap();
                assert_eq!((g.width, g.height), (level.grid_size, level.grid_size));

                // deterministic in (level, mode, seed)
                assert_eq!(inst, sample_instance(&level, mode, seed).unwrap());

                // tile colors: n distinct, each placed at least once, all from the level
                let colors: BTreeSet<Color> = d.tiles().map(|t| t.color).collect();
                assert_eq!(colors.len(), level.n_tile_types);
                assert_eq!(d.mapping.len(), level.n_tile_types);
                for (c, p) in &d.mapping {
                    assert!(level.colors.contains(c));
                    assert!(level.allowed_properties.contains(p));
                    if mode == Mode::Train {
                        assert!(!level.held_out.contains(&(*c, *p)));
                    }
                }

                // nothing sits on a tile
                for t in d.tiles() {
                    assert_eq!(g.get(t.x, t.y), Some(Cell::Empty));
                    assert_ne!(g.agent.pos(), (t.x, t.y));
                }

                // mission objects exist, distractors never duplicate them
                let objects: Vec<_> = g.objects().map(|(_, o)| o).collect();
                for o in inst.mission.objects() {
                    assert_eq!(objects.iter().filter(|&&x| x == o).count(), 1);
                }
                let expected = inst.mission.objects().len() + if level.distractors { DISTRACTOR_COUNT } else { 0 };
                assert_eq!(objects.len(), expected);
                if let Mission::GoTo { target } = inst.mission {
                    if level.mission_family == MissionFamily::GoToRedBall {
                        assert_eq!(target.to_string(), "red ball");
                    }
                }

                assert!(!inst.mission_satisfied(g));
                assert!(plan_optimal(&inst).unwrap().total_time < level.max_steps as f64);
            }
        }
    }
}

#[test]
fn different_seeds_give_different_instances() {
    let level = &builtin_levels()[1];
    let set: BTreeSet<String> = (0..50).map(|s| sample_instance(level, Mode::Test, s).unwrap().to_json()).collect();
    assert_eq!(set.len(), 50);
}

#[test]
fn registry_round_trip_and_custom_file() {
    let reg = LevelRegistry::default();
    let again = LevelRegistry::from_json(&reg.to_json()).unwrap();
    assert_eq!(reg, again);

    let mut small = builtin_levels().remove(0);
    small.name = "Tiny".into();
    small.grid_size = 6;
    small.max_steps = 144;
    let custom = LevelRegistry::new(vec![small]).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("levels.json");
    std::fs::write(&path, custom.to_json()).unwrap();
    let loaded = LevelRegistry::load(&path).unwrap();
    let inst = sample_instance(loaded.get("Tiny").unwrap(), Mode::Train, 3).unwrap();
    assert_eq!(inst.grid.width, 6);
    assert!(matches!(loaded.get("GoToObj"), Err(Error::UnknownLevel(_))));
}

#[test]
fn invalid_levels_are_rejected() {
    let mut bad = builtin_levels().remove(0);
    bad.n_tile_types = 5;
    assert!(matches!(bad.validate(), Err(Error::InvalidLevel(_))));
    assert!(LevelRegistry::new(vec![bad]).is_err());

    let mut dup = builtin_levels();
    dup.push(dup[0].clone());
    assert!(LevelRegistry::new(dup).is_err());

    let mut impossible = builtin_levels().remove(0);
    impossible.max_steps = 1;
    assert!(matches!(
        sample_instance(&impossible, Mode::Train, 0),
        Err(Error::UnsatisfiableLevel { .. })
    ));
}
