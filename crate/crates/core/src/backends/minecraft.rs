//! Minecraft voxel backend: cuboid placement and deletion on an integer grid.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use super::BackendError;
use crate::dsl::Program;
use crate::interp::{execute, ExecOptions, LeafMode};
use crate::math::{Matrix4, Vector3};
use crate::scene::{flatten, FlatPrimitive, Geometry, PrimitiveSpec, Word};

pub type Cell = [i64; 3];

/// Block used when a program names a type missing from the palette.
pub const DEFAULT_BLOCK: &str = "minecraft:stone";
const POSE_TOLERANCE: f64 = 1e-9;

/// Occupied cells keyed by integer coordinates, ordered by (x, y, z).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VoxelGrid {
    cells: BTreeMap<Cell, String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Bounds {
    pub min: Cell,
    pub max: Cell,
}

#[derive(Serialize, Deserialize)]
struct BlockRecord {
    x: i64,
    y: i64,
    z: i64,
    #[serde(rename = "type")]
    block: String,
}

#[derive(Serialize, Deserialize)]
struct GridFile {
    bounds: Option<Bounds>,
    blocks: Vec<BlockRecord>,
}

fn check_size(size: [i64; 3]) -> Result<(), BackendError> {
    if size.iter().any(|&s| s < 1) {
        return Err(BackendError::InvalidArgument(format!("cuboid size must be at least 1 in every axis, got {size:?}")));
    }
    Ok(())
}

fn region(size: [i64; 3], origin: Cell) -> impl Iterator<Item = Cell> {
    (0..size[0]).flat_map(move |x| {
        (0..size[1]).flat_map(move |y| (0..size[2]).map(move |z| [origin[0] + x, origin[1] + y, origin[2] + z]))
    })
}

impl VoxelGrid {
    pub fn new() -> Self {
        VoxelGrid::default()
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn get(&self, cell: Cell) -> Option<&str> {
        self.cells.get(&cell).map(String::as_str)
    }

    pub fn cells(&self) -> impl Iterator<Item = (&Cell, &str)> {
        self.cells.iter().map(|(c, b)| (c, b.as_str()))
    }

    /// Inclusive min and max occupied coordinates.
    pub fn bounds(&self) -> Option<Bounds> {
        let mut it = self.cells.keys();
        let first = *it.next()?;
        let (mut min, mut max) = (first, first);
        for c in it {
            for a in 0..3 {
                min[a] = min[a].min(c[a]);
                max[a] = max[a].max(c[a]);
            }
        }
        Some(Bounds { min, max })
    }

    /// Places a cuboid whose front-left-bottom cell is `origin`. Hollow
    /// cuboids set only their boundary shell. Existing cells are overwritten.
    pub fn set_cuboid(&mut self, block: &str, size: [i64; 3], fill: bool, origin: Cell) -> Result<(), BackendError> {
        check_size(size)?;
        if block.is_empty() {
            return Err(BackendError::InvalidArgument("block type must be non-empty".into()));
        }
        for c in region(size, origin) {
            let shell = (0..3).any(|a| c[a] == origin[a] || c[a] == origin[a] + size[a] - 1);
            if fill || shell {
                self.cells.insert(c, block.to_string());
            }
        }
        Ok(())
    }

    /// Clears every cell of the region.
    pub fn delete_blocks(&mut self, size: [i64; 3], origin: Cell) -> Result<(), BackendError> {
        check_size(size)?;
        if (size[0] * size[1] * size[2]) as usize > self.cells.len() {
            self.cells.retain(|c, _| (0..3).any(|a| c[a] < origin[a] || c[a] >= origin[a] + size[a]));
        } else {
            for c in region(size, origin) {
                self.cells.remove(&c);
            }
        }
        Ok(())
    }

    /// `{bounds, blocks: [{x, y, z, type}]}` sorted by (x, y, z).
    pub fn to_json(&self) -> String {
        let file = GridFile {
            bounds: self.bounds(),
            blocks: self
                .cells
                .iter()
                .map(|(c, b)| BlockRecord {
                    x: c[0],
                    y: c[1],
                    z: c[2],
                    block: b.clone(),
                })
                .collect(),
        };
        serde_json::to_string_pretty(&file).expect("voxel grid serializes")
    }

    pub fn from_json(text: &str) -> Result<VoxelGrid, serde_json::Error> {
        let file: GridFile = serde_json::from_str(text)?;
        Ok(VoxelGrid {
            cells: file.blocks.into_iter().map(|b| ([b.x, b.y, b.z], b.block)).collect(),
        })
    }
}

/// Average block colors.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockPalette {
    colors: HashMap<String, [f64; 3]>,
    pub default_color: [f64; 3],
}

impl Default for BlockPalette {
    fn default() -> Self {
        BlockPalette::builtin()
    }
}

impl BlockPalette {
    pub fn builtin() -> Self {
        let table: [(&str, [f64; 3]); 20] = [
            ("minecraft:stone", [0.49, 0.49, 0.49]),
            ("minecraft:cobblestone", [0.48, 0.48, 0.48]),
            ("minecraft:stone_bricks", [0.48, 0.47, 0.48]),
            ("minecraft:bricks", [0.59, 0.38, 0.33]),
            ("minecraft:dirt", [0.53, 0.38, 0.26]),
            ("minecraft:grass_block", [0.37, 0.55, 0.23]),
            ("minecraft:sand", [0.86, 0.81, 0.64]),
            ("minecraft:gravel", [0.51, 0.49, 0.49]),
            ("minecraft:oak_planks", [0.64, 0.51, 0.31]),
            ("minecraft:oak_log", [0.40, 0.32, 0.19]),
            ("minecraft:oak_leaves", [0.28, 0.45, 0.16]),
            ("minecraft:spruce_planks", [0.45, 0.34, 0.21]),
            ("minecraft:birch_planks", [0.75, 0.69, 0.48]),
            ("minecraft:glass", [0.69, 0.84, 0.86]),
            ("minecraft:white_wool", [0.91, 0.93, 0.93]),
            ("minecraft:red_wool", [0.63, 0.15, 0.14]),
            ("minecraft:water", [0.25, 0.36, 0.79]),
            ("minecraft:snow_block", [0.97, 0.99, 0.99]),
            ("minecraft:terracotta", [0.60, 0.37, 0.26]),
            ("minecraft:quartz_block", [0.93, 0.90, 0.86]),
        ];
        BlockPalette {
            colors: table.iter().map(|(k, c)| (k.to_string(), *c)).collect(),
            default_color: [0.49, 0.49, 0.49],
        }
    }

    pub fn contains(&self, block: &str) -> bool {
        self.colors.contains_key(block)
    }

    pub fn color(&self, block: &str) -> [f64; 3] {
        self.colors.get(block).copied().unwrap_or(self.default_color)
    }

    pub fn insert(&mut self, block: impl Into<String>, color: [f64; 3]) {
        self.colors.insert(block.into(), color);
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinecraftOutput {
    pub grid: VoxelGrid,
    pub warnings: Vec<String>,
}

/// Accepts an affine pose with positive integer diagonal and integer
/// translation; returns (scale, translation).
fn integer_pose(m: &Matrix4) -> Result<([i64; 3], Cell), bool> {
    let near_int = |v: f64| (v - v.round()).abs() <= POSE_TOLERANCE;
    let l = m.linear();
    for (r, row) in l.iter().enumerate() {
        for (c, v) in row.iter().enumerate() {
            if r != c && v.abs() > POSE_TOLERANCE {
                return Err(true);
            }
        }
        if row[r] < 0.0 {
            return Err(true);
        }
    }
    let t = m.translation();
    let diag = [l[0][0], l[1][1], l[2][2]];
    if diag.iter().any(|&d| !near_int(d) || d.round() < 1.0) || [t.x, t.y, t.z].iter().any(|&v| !near_int(v)) {
        return Err(false);
    }
    Ok((
        diag.map(|d| d.round() as i64),
        [t.x.round() as i64, t.y.round() as i64, t.z.round() as i64],
    ))
}

/// Executes `program` with Minecraft leaves and rasterizes each cuboid in
/// flatten order.
pub fn compile_minecraft(program: &Program, options: &ExecOptions) -> Result<MinecraftOutput, BackendError> {
    let options = ExecOptions {
        mode: LeafMode::Minecraft,
        ..options.clone()
    };
    let (entity, report) = execute(program, &options)?;
    let palette = BlockPalette::builtin();
    let mut grid = VoxelGrid::new();
    let mut warnings = report.warnings;
    for p in flatten(&entity) {
        let Geometry::Cuboid { block, size, fill, delete } = &p.spec.geometry else {
            continue;
        };
        let (k, origin) = integer_pose(&p.world).map_err(|rotation| {
            let (word, path) = (p.word.clone(), p.path.clone());
            if rotation {
                BackendError::RotationForbidden { word, path }
            } else {
                BackendError::NonIntegerPose { word, path }
            }
        })?;
        let cells = [size[0] as i64 * k[0], size[1] as i64 * k[1], size[2] as i64 * k[2]];
        if *delete {
            grid.delete_blocks(cells, origin)?;
            continue;
        }
        let block = if palette.contains(block) {
            block.as_str()
        } else {
            warnings.push(format!("unknown block type \"{block}\" in \"{}\"; using {DEFAULT_BLOCK}", p.word));
            DEFAULT_BLOCK
        };
        grid.set_cuboid(block, cells, *fill, origin)?;
    }
    Ok(MinecraftOutput { grid, warnings })
}

/// One unit cube per occupied cell, centered in the cell and colored from
/// the palette. Cells of the same block type share a group id.
pub fn voxels_to_primitives(grid: &VoxelGrid, palette: &BlockPalette) -> Vec<FlatPrimitive> {
    let mut groups: HashMap<&str, u32> = HashMap::new();
    grid.cells()
        .enumerate()
        .map(|(i, (c, block))| {
            let next = groups.len() as u32 + 1;
            let group_id = *groups.entry(block).or_insert(next);
            let center = Vector3::new(c[0] as f64 + 0.5, c[1] as f64 + 0.5, c[2] as f64 + 0.5);
            FlatPrimitive {
                spec: PrimitiveSpec::cube(Vector3::ONE).with_color(palette.color(block)),
                world: crate::math::translate(center).expect("finite cell"),
                path: vec![i],
                word: Word::new(block).unwrap_or_else(|_| Word::new(DEFAULT_BLOCK).expect("valid word")),
                embedding_id: i as u32 + 1,
                group_id,
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    fn count_oracle(size: [i64; 3], fill: bool) -> usize {
        let mut n = 0;
        for x in 0..size[0] {
            for y in 0..size[1] {
                for z in 0..size[2] {
                    let on_edge = [x, y, z].iter().zip(size).any(|(&v, s)| v == 0 || v == s - 1);
                    if fill || on_edge {
                        n += 1;
                    }
                }
            }
        }
        n
    }

    #[test]
    fn cuboid_counts() {
        for (size, fill, expect) in [([2, 3, 4], true, 24), ([3, 3, 3], false, 26), ([1, 5, 5], false, 25), ([4, 4, 4], false, 56)] {
            let mut g = VoxelGrid::new();
            g.set_cuboid("minecraft:stone", size, fill, [0, 0, 0]).unwrap();
            assert_eq!(g.len(), expect, "{size:?}");
            assert_eq!(g.len(), count_oracle(size, fill));
        }
        assert!(VoxelGrid::new().set_cuboid("minecraft:stone", [0, 1, 1], true, [0, 0, 0]).is_err());
    }

    #[test]
    fn delete_regions() {
        let mut g = VoxelGrid::new();
        g.set_cuboid("minecraft:stone", [4, 4, 4], true, [0, 0, 0]).unwrap();
        g.delete_blocks([2, 2, 2], [0, 0, 0]).unwrap();
        assert_eq!(g.len(), 56);
        g.delete_blocks([4, 4, 4], [0, 0, 0]).unwrap();
        assert!(g.is_empty());
        let before = g.clone();
        g.delete_blocks([3, 3, 3], [10, 10, 10]).unwrap();
        assert_eq!(g, before);
    }

    #[test]
    fn json_is_sorted_and_round_trips() {
        let mut g = VoxelGrid::new();
        g.set_cuboid("minecraft:glass", [1, 1, 2], true, [1, 0, 0]).unwrap();
        g.set_cuboid("minecraft:dirt", [1, 1, 1], true, [-1, 5, 0]).unwrap();
        let json = g.to_json();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        let xs: Vec<i64> = v["blocks"].as_array().unwrap().iter().map(|b| b["x"].as_i64().unwrap()).collect();
        assert_eq!(xs, vec![-1, 1, 1]);
        assert_eq!(v["bounds"]["min"], serde_json::json!([-1, 0, 0]));
        assert_eq!(VoxelGrid::from_json(&json).unwrap(), g);
    }

    #[test]
    fn compile_single_leaf() {
        let p = parse(
            r#"(bind "house" (lambda (z zs) (union (transform (call "wall" (embed (block "minecraft:stone") (size 2 2 2) (fill 1))) (identity)))))"#,
        )
        .unwrap();
        let out = compile_minecraft(&p, &ExecOptions::default()).unwrap();
        assert_eq!(out.grid.len(), 8);
        assert!(out.grid.cells().all(|(_, b)| b == "minecraft:stone"));
        assert!(out.warnings.is_empty());
    }

    #[test]
    fn compile_applies_translation_scale_and_delete() {
        let p = parse(
            r#"(bind "room" (lambda (z zs) (union
                 (transform (call "shell" (embed (block "minecraft:oak_planks") (size 2 2 2))) (@ (translate (vec 1 0 -2)) (scale (vec 2 1 1) (vec 0 0 0))))
                 (transform (call "door" (embed (size 1 1 1) (delete 1))) (translate (vec 1 0 -2))))))"#,
        )
        .unwrap();
        let out = compile_minecraft(&p, &ExecOptions::default()).unwrap();
        assert_eq!(out.grid.len(), 4 * 2 * 2 - 1);
        assert_eq!(out.grid.get([1, 0, -2]), None);
        assert_eq!(out.grid.get([4, 1, -1]), Some("minecraft:oak_planks"));
    }

    #[test]
    fn rotation_and_fractional_poses_rejected() {
        let rot = parse(
            r#"(bind "a" (lambda (z zs) (union (transform (call "b" (embed (block "minecraft:stone") (size 1 1 1))) (rotate 1.5 (vec 0 1 0) (vec 0 0 0))))))"#,
        )
        .unwrap();
        let err = compile_minecraft(&rot, &ExecOptions::default()).unwrap_err();
        assert!(err.to_string().contains("rotation"), "{err}");
        let frac = parse(
            r#"(bind "a" (lambda (z zs) (union (transform (call "b" (embed (block "minecraft:stone") (size 1 1 1))) (translate (vec 0.5 0 0))))))"#,
        )
        .unwrap();
        assert!(matches!(compile_minecraft(&frac, &ExecOptions::default()).unwrap_err(), BackendError::NonIntegerPose { .. }));
        assert!(matches!(integer_pose(&crate::math::reflect(Vector3::X, Vector3::ZERO).unwrap()), Err(true)));
    }

    #[test]
    fn unknown_block_falls_back() {
        let p = parse(
            r#"(bind "a" (lambda (z zs) (union (transform (call "b" (embed (block "minecraft:unobtanium") (size 1 1 1))) (identity)))))"#,
        )
        .unwrap();
        let out = compile_minecraft(&p, &ExecOptions::default()).unwrap();
        assert_eq!(out.grid.get([0, 0, 0]), Some(DEFAULT_BLOCK));
        assert_eq!(out.warnings.len(), 1);
    }

    #[test]
    fn voxels_become_unit_cubes() {
        let palette = BlockPalette::builtin();
        assert!(voxels_to_primitives(&VoxelGrid::new(), &palette).is_empty());
        let mut g = VoxelGrid::new();
        g.set_cuboid("minecraft:sand", [1, 1, 1], true, [0, 0, 0]).unwrap();
        g.set_cuboid("minecraft:glass", [1, 1, 1], true, [0, 1, 0]).unwrap();
        g.set_cuboid("minecraft:unobtanium", [1, 1, 1], true, [0, 2, 0]).unwrap();
        let prims = voxels_to_primitives(&g, &palette);
        let colors: Vec<_> = prims.iter().map(|p| p.spec.color).collect();
        assert_eq!(colors, vec![palette.color("minecraft:sand"), palette.color("minecraft:glass"), palette.default_color]);
        assert_eq!(prims[1].world.translation(), Vector3::new(0.5, 1.5, 0.5));
    }
}
