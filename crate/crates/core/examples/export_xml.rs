//! Exports the moai row as Mitsuba scene XML on standard output.

use scenelang::backends::export_scene_xml;
use scenelang::dsl;
use scenelang::interp::{execute, ExecOptions};
use scenelang::render::{primitives_bounds, Camera};
use scenelang::scene::flatten;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenes/moai.sl");
    let program = dsl::parse(&std::fs::read_to_string(path)?)?;
    let (scene, _) = execute(&program, &ExecOptions::default())?;
    let prims = flatten(&scene);
    let camera = Camera::auto_frame(primitives_bounds(&prims), 640, 480);
    print!("{}", export_scene_xml(&prims, &camera));
    Ok(())
}
