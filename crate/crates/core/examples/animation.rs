//! Executes the 12-frame rotating arm and writes one PPM per frame.

use scenelang::backends::{animation::frames_bounds, export_animation};
use scenelang::dsl;
use scenelang::interp::{execute_temporal, ExecOptions};
use scenelang::render::{Camera, RenderMode};
use scenelang::scene::flatten;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = std::env::args().nth(1).map(Into::into).unwrap_or_else(|| std::env::temp_dir().join("scenelang-arm"));
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenes/rotating_arm.sl");
    let program = dsl::parse(&std::fs::read_to_string(path)?)?;
    let (frames, _) = execute_temporal(&program, &ExecOptions::default())?;

    for (t, frame) in frames.iter().enumerate() {
        let gripper = flatten(frame).into_iter().find(|p| p.word.as_str() == "gripper").unwrap();
        println!("frame {t:2}: gripper at {}", gripper.world.translation());
    }

    let camera = Camera::auto_frame(frames_bounds(&frames), 200, 200);
    let files = export_animation(&frames, &camera, RenderMode::Shaded, &out_dir)?;
    println!("wrote {} frames to {}", files.len(), out_dir.display());
    Ok(())
}
