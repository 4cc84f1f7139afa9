//! Compiles the cottage to a voxel grid, prints block counts, and renders
//! the voxels as unit cubes.

use std::collections::BTreeMap;

use scenelang::backends::{compile_minecraft, voxels_to_primitives, BlockPalette};
use scenelang::dsl;
use scenelang::interp::ExecOptions;
use scenelang::render::{primitives_bounds, render, Camera, RenderMode};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenes/minecraft_house.sl");
    let program = dsl::parse(&std::fs::read_to_string(path)?)?;
    let out = compile_minecraft(&program, &ExecOptions::default())?;
    for w in &out.warnings {
        eprintln!("warning: {w}");
    }

    let mut counts: BTreeMap<&str, usize> = BTreeMap::new();
    for (_, block) in out.grid.cells() {
        *counts.entry(block).or_default() += 1;
    }
    println!("{} blocks, bounds {:?}", out.grid.len(), out.grid.bounds());
    for (block, n) in counts {
        println!("  {block}: {n}");
    }

    let prims = voxels_to_primitives(&out.grid, &BlockPalette::builtin());
    let image = render(&prims, &Camera::auto_frame(primitives_bounds(&prims), 320, 320), RenderMode::Shaded);
    let file = std::env::temp_dir().join("cottage.ppm");
    std::fs::write(&file, image.to_ppm())?;
    println!("wrote {}", file.display());
    Ok(())
}
