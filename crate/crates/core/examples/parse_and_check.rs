//! Parses a program, validates it, and prints it back in canonical form.
//! Also shows the diagnostics produced for a broken program.

use scenelang::dsl;

const BROKEN: &str = r#"
(bind "table" (lambda (z zs)
  (union
    (transform (translate (vec 0 1 0)) (call "top" (embed (shape "cube") (size 2 0.1 1))))
    (transform (call "leg" (embed (shape "cylinder") (radius 0.05))) (identity)))))
"#;

fn main() {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenes/still_life.sl");
    let text = std::fs::read_to_string(path).expect("fixture exists");
    match dsl::load(path, &text) {
        Ok(program) => {
            println!("{} binds: {:?}", program.binds.len(), program.words());
            print!("{}", dsl::pretty_print(&program));
        }
        Err(diags) => {
            let source = dsl::SourceMap::new(path, text);
            for d in diags {
                eprintln!("{}", d.render(&source));
            }
        }
    }

    println!("\ndiagnostics for a broken program:");
    let source = dsl::SourceMap::new("broken.sl", BROKEN);
    if let Err(diags) = dsl::load("broken.sl", BROKEN) {
        for d in diags {
            println!("  {}", d.render(&source));
        }
    }
}
