//! Edits the chessboard without touching its structure: recolors the pawns,
//! changes the board palette through the root embedding, and rebinds the
//! square to a taller block. Each step reports what changed.

use scenelang::dsl;
use scenelang::edit::{apply_overrides, diff_entities, rebind, OverrideSpec, Selector};
use scenelang::interp::{execute, ExecOptions};
use scenelang::scene::Word;
use serde_json::json;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenes/chessboard.sl");
    let program = dsl::parse_named(path, &std::fs::read_to_string(path)?)?;
    let opts = ExecOptions::default();
    let (before, _) = execute(&program, &opts)?;

    let pawns = OverrideSpec::set(Selector::ByWord(Word::new("pawn")?), "color", json!([0.7, 0.1, 0.1]));
    let palette = OverrideSpec::set(Selector::ByEmbeddingId(1), "dark", json!([0.1, 0.3, 0.15]));
    let edited = apply_overrides(&program, &[pawns, palette], &opts)?;
    let (after, _) = execute(&edited, &opts)?;
    let diff = diff_entities(&before, &after);
    println!("override changed {} entities", diff.entries.len());

    let taller = r#"(lambda (z zs)
      (union (transform (call "tall-square" (embed (shape "cube") (size 1 0.6 1) (color (get z "color"))))
                        (translate (vec 0 -0.2 0)))))"#;
    let rebound = rebind(&program, &Word::new("square")?, taller)?;
    let (after, _) = execute(&rebound, &opts)?;
    let diff = diff_entities(&before, &after);
    println!("rebind changed {} entities, e.g. {:?}", diff.entries.len(), diff.entries.first());

    print!("{}", dsl::pretty_print(&rebound).lines().take(12).collect::<Vec<_>>().join("\n"));
    println!();
    Ok(())
}
