//! Renders the still life in every mode and writes PPM files plus a label
//! map and a 2D layout. Pass an output directory or use the temp dir.

use scenelang::dsl;
use scenelang::interp::{execute, ExecOptions};
use scenelang::render::{layout_json, primitives_bounds, project_layout, render, Camera, RenderMode};
use scenelang::scene::flatten;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let out_dir = std::env::args().nth(1).map(Into::into).unwrap_or_else(|| std::env::temp_dir().join("scenelang-maps"));
    std::fs::create_dir_all(&out_dir)?;

    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenes/still_life.sl");
    let program = dsl::parse(&std::fs::read_to_string(path)?)?;
    let (scene, _) = execute(&program, &ExecOptions::default())?;
    let prims = flatten(&scene);
    let camera = Camera::auto_frame(primitives_bounds(&prims), 320, 240);

    for mode in RenderMode::ALL {
        let image = render(&prims, &camera, mode);
        let file = out_dir.join(format!("still_life_{}.ppm", mode.name()));
        std::fs::write(&file, image.to_ppm())?;
        if let Some(json) = image.labels_json() {
            std::fs::write(out_dir.join(format!("still_life_{}.json", mode.name())), json)?;
        }
        println!("wrote {}", file.display());
    }

    let (boxes, _) = project_layout(&prims, &camera);
    std::fs::write(out_dir.join("still_life_layout.json"), layout_json(&boxes))?;
    for b in &boxes {
        println!("{:>8} #{}: {:.3?}", b.label.as_str(), b.embedding_id, b.rect);
    }
    Ok(())
}
