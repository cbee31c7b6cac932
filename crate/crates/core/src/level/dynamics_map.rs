use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::dynamics::TileProperty;
use crate::grid::Color;
use crate::Error;

/// A tile at a grid position, as stored in serialized dynamics maps.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TilePlacement {
    pub x: i32,
    pub y: i32,
    pub color: Color,
}

/// The episode's color-to-property mapping, tile color layout and the
/// level's held-out pairs.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "SerializedDynamics", try_from = "SerializedDynamics")]
pub struct DynamicsMap {
    pub mapping: BTreeMap<Color, TileProperty>,
    width: usize,
    height: usize,
    tile_colors: Vec<Option<Color>>,
    pub held_out: BTreeSet<(Color, TileProperty)>,
}

impl DynamicsMap {
    /// A map with no tiles and an empty mapping.
    pub fn new(width: usize, height: usize) -> Self {
        DynamicsMap {
            mapping: BTreeMap::new(),
            width,
            height,
            tile_colors: vec![None; width * height],
            held_out: BTreeSet::new(),
        }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    fn index(&self, x: i32, y: i32) -> Option<usize> {
        (x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height)
            .then(|| y as usize * self.width + x as usize)
    }

    /// Panics if the coordinates are out of bounds.
    pub fn set_tile(&mut self, x: i32, y: i32, color: Color) {
        let i = self.index(x, y).expect("tile out of bounds");
        self.tile_colors[i] = Some(color);
    }

    pub fn clear_tile(&mut self, x: i32, y: i32) {
        if let Some(i) = self.index(x, y) {
            self.tile_colors[i] = None;
        }
    }

    pub fn tile_color(&self, x: i32, y: i32) -> Option<Color> {
        self.index(x, y).and_then(|i| self.tile_colors[i])
    }

    /// Property of the tile at (x, y); uncolored cells are normal.
    pub fn property_at(&self, x: i32, y: i32) -> TileProperty {
        self.tile_color(x, y)
            .and_then(|c| self.mapping.get(&c).copied())
            .unwrap_or(TileProperty::Normal)
    }

    pub fn tiles(&self) -> impl Iterator<Item = TilePlacement> + '_ {
        self.tile_colors.iter().enumerate().filter_map(|(i, c)| {
            c.map(|color| TilePlacement {
                x: (i % self.width) as i32,
                y: (i / self.width) as i32,
                color,
            })
        })
    }

    /// Colors present in the mapping, in color-id order.
    pub fn placed_colors(&self) -> Vec<Color> {
        self.mapping.keys().copied().collect()
    }

    /// (color, property) pairs in use this episode.
    pub fn pairs(&self) -> Vec<(Color, TileProperty)> {
        self.mapping.iter().map(|(c, p)| (*c, *p)).collect()
    }

    /// True if any mapped pair is in the held-out set.
    pub fn uses_held_out_pair(&self) -> bool {
        self.pairs().iter().any(|pair| self.held_out.contains(pair))
    }

    /// Same layout with every color mapped to `normal`: the view of an agent
    /// that ignores tile dynamics.
    pub fn ignorant(&self) -> DynamicsMap {
        let mut map = self.clone();
        for p in map.mapping.values_mut() {
            *p = TileProperty::Normal;
        }
        map
    }

    /// Same layout and held-out set under a different mapping.
    pub fn with_mapping(&self, mapping: BTreeMap<Color, TileProperty>) -> DynamicsMap {
        DynamicsMap {
            mapping,
            ..self.clone()
        }
    }

    /// Every tile color must be mapped.
    pub fn validate(&self) -> Result<(), Error> {
        for tile in self.tiles() {
            if !self.mapping.contains_key(&tile.color) {
                return Err(Error::InvalidState(format!(
                    "tile at ({}, {}) has unmapped color {}",
                    tile.x, tile.y, tile.color
                )));
            }
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct SerializedDynamics {
    width: usize,
    height: usize,
    mapping: BTreeMap<Color, TileProperty>,
    tiles: Vec<TilePlacement>,
    held_out: Vec<(Color, TileProperty)>,
}

impl From<DynamicsMap> for SerializedDynamics {
    fn from(map: DynamicsMap) -> Self {
        SerializedDynamics {
            width: map.width,
            height: map.height,
            tiles: map.tiles().collect(),
            held_out: map.held_out.iter().copied().collect(),
            mapping: map.mapping,
        }
    }
}

impl TryFrom<SerializedDynamics> for DynamicsMap {
    type Error = Error;

    fn try_from(raw: SerializedDynamics) -> Result<Self, Error> {
        let mut map = DynamicsMap::new(raw.width, raw.height);
        for tile in raw.tiles {
            if map.index(tile.x, tile.y).is_none() {
                return Err(Error::Parse(format!("tile ({}, {}) out of bounds", tile.x, tile.y)));
            }
            map.set_tile(tile.x, tile.y, tile.color);
        }
        map.mapping = raw.mapping;
        map.held_out = raw.held_out.into_iter().collect();
        map.validate()?;
        Ok(map)
    }
}
