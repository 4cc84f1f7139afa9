//! The `scenelang` command line.
//!
//! Exit codes: 0 success, 1 usage error, 2 parse or validation error,
//! 3 execution error, 4 I/O error.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::backends::{self, minecraft, BackendError};
use crate::dsl::{self, Program};
use crate::edit::{self, EditError};
use crate::interp::{self, ExecError, ExecOptions, ExecutionReport, LeafMode, DEFAULT_DEPTH_LIMIT};
use crate::math::Vector3;
use crate::render::{self, Camera, RenderMode};
use crate::scene::{computation_graph, flatten, Entity, FlatPrimitive, Word};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID: i32 = 2;
pub const EXIT_EXEC: i32 = 3;
pub const EXIT_IO: i32 = 4;

#[derive(Parser, Debug)]
#[command(name = "scenelang", version, about = "Check, execute, render, export and edit Scene Language programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and validate a program.
    Check {
        file: PathBuf,
    },
    /// Execute a program and write the entity tree as JSON.
    Run {
        #[command(flatten)]
        scene: SceneArgs,
        #[arg(long, default_value = "-")]
        out: String,
        /// Print the execution report to standard error.
        #[arg(long)]
        report: bool,
    },
    /// Render an image or a discriminative map (binary PPM).
    Render {
        #[command(flatten)]
        scene: SceneArgs,
        #[command(flatten)]
        view: ViewArgs,
        #[arg(long, default_value = "shaded")]
        mode: RenderMode,
        /// Output image; defaults to `<input stem>.ppm`.
        #[arg(long)]
        out: Option<String>,
        /// Also write the label map as JSON (map modes only).
        #[arg(long)]
        labels: Option<String>,
    },
    /// Export to scene XML, a voxel grid or a 2D layout.
    Export {
        #[command(flatten)]
        scene: SceneArgs,
        #[command(flatten)]
        view: ViewArgs,
        #[arg(long)]
        format: ExportFormat,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Render every frame of a 4D program.
    Animate {
        #[command(flatten)]
        scene: SceneArgs,
        #[command(flatten)]
        view: ViewArgs,
        #[arg(long, default_value = "shaded")]
        mode: RenderMode,
        #[arg(long, default_value = "frames")]
        out_dir: PathBuf,
    },
    /// Write the computation graph in DOT format.
    Graph {
        #[command(flatten)]
        scene: SceneArgs,
        #[arg(long, default_value = "-")]
        out: String,
    },
    /// Apply attribute overrides and rebinds, writing the edited program.
    Edit {
        file: PathBuf,
        /// JSON array of `{selector, set, unset}`.
        #[arg(long)]
        overrides: Option<PathBuf>,
        /// Replace the function bound to WORD with the one in PATH.
        #[arg(long, value_name = "WORD=PATH")]
        rebind: Vec<String>,
        #[arg(long)]
        entry: Option<String>,
        #[arg(long)]
        out: String,
    },
}

#[derive(Args, Debug)]
struct SceneArgs {
    file: PathBuf,
    /// Root word; required when several binds are uncalled.
    #[arg(long)]
    entry: Option<String>,
    #[arg(long, default_value_t = DEFAULT_DEPTH_LIMIT)]
    max_depth: usize,
    /// Treat leaves as Minecraft cuboids.
    #[arg(long)]
    minecraft: bool,
    /// Frame of a 4D program to use.
    #[arg(long, default_value_t = 0)]
    frame: usize,
}

#[derive(Args, Debug)]
struct ViewArgs {
    /// Image size as WxH.
    #[arg(long, default_value = "512x512", value_parser = parse_size)]
    size: (u32, u32),
    /// px,py,pz,lx,ly,lz,ux,uy,uz,fov_degrees
    #[arg(long, value_parser = parse_camera)]
    camera: Option<[f64; 10]>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum ExportFormat {
    Xml,
    Minecraft,
    Layout,
}

fn parse_size(s: &str) -> Result<(u32, u32), String> {
    let (w, h) = s.split_once(['x', 'X']).ok_or("expected WxH, e.g. 512x512")?;
    let w: u32 = w.trim().parse().map_err(|_| format!("bad width `{w}`"))?;
    let h: u32 = h.trim().parse().map_err(|_| format!("bad height `{h}`"))?;
    if w == 0 || h == 0 {
        return Err("width and height must be at least 1".into());
    }
    Ok((w, h))
}

fn parse_camera(s: &str) -> Result<[f64; 10], String> {
    let v = s
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| format!("bad number `{x}`")))
        .collect::<Result<Vec<_>, _>>()?;
    v.try_into()
        .map_err(|v: Vec<f64>| format!("expected 10 comma-separated numbers (position, look_at, up, fov), found {}", v.len()))
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn new(code: i32, message: impl Into<String>) -> Self {
        Failure {
            code,
            message: message.into(),
        }
    }
}

type CliResult<T> = Result<T, Failure>;

struct Ctx<'a> {
    stdout: &'a mut dyn Write,
    stderr: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn warn(&mut self, file: &Path, warnings: &[String]) {
        for w in warnings {
            let _ = writeln!(self.stderr, "{}: warning: {w}", file.display());
        }
    }

    fn emit(&mut self, out: &str, bytes: &[u8]) -> CliResult<()> {
        if out == "-" {
            self.stdout
                .write_all(bytes)
                .and_then(|_| self.stdout.flush())
                .map_err(|e| Failure::new(EXIT_IO, format!("cannot write standard output: {e}")))
        } else {
            write_file(Path::new(out), bytes)
        }
    }
}

fn write_file(path: &Path, bytes: &[u8]) -> CliResult<()> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(|e| Failure::new(EXIT_IO, format!("cannot create {}: {e}", dir.display())))?;
    }
    fs::write(path, bytes).map_err(|e| Failure::new(EXIT_IO, format!("cannot write {}: {e}", path.display())))
}

fn read_file(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::new(EXIT_IO, format!("cannot read {}: {e}", path.display())))
}

fn load_program(path: &Path) -> CliResult<Program> {
    let text = read_file(path)?;
    let name = path.display().to_string();
    dsl::load(&name, &text).map_err(|diags| {
        let source = dsl::SourceMap::new(name, text);
        Failure::new(
            EXIT_INVALID,
            diags.iter().map(|d| d.render(&source)).collect::<Vec<_>>().join("\n"),
        )
    })
}

fn word_arg(entry: &Option<String>) -> CliResult<Option<Word>> {
    entry
        .as_deref()
        .map(Word::new)
        .transpose()
        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))
}

fn exec_failure(program: &Program, e: &ExecError) -> Failure {
    Failure::new(EXIT_EXEC, e.render(program))
}

fn exec_options(scene: &SceneArgs) -> CliResult<ExecOptions> {
    Ok(ExecOptions {
        entry: word_arg(&scene.entry)?,
        depth_limit: scene.max_depth,
        mode: if scene.minecraft { LeafMode::Minecraft } else { LeafMode::Shapes },
    })
}

enum Executed {
    Static(Box<Entity>, ExecutionReport),
    Frames(Vec<Entity>, ExecutionReport),
}

fn execute_any(program: &Program, options: &ExecOptions) -> Result<Executed, ExecError> {
    if interp::root_is_temporal(program, options.entry.as_ref())? {
        let (frames, report) = interp::execute_temporal(program, options)?;
        Ok(Executed::Frames(frames, report))
    } else {
        let (e, report) = interp::execute(program, options)?;
        Ok(Executed::Static(Box::new(e), report))
    }
}

/// The entity to work on: the static scene, or the chosen frame.
fn scene_entity(ctx: &mut Ctx<'_>, scene: &SceneArgs) -> CliResult<(Program, Entity)> {
    let program = load_program(&scene.file)?;
    let options = exec_options(scene)?;
    let executed = execute_any(&program, &options).map_err(|e| exec_failure(&program, &e))?;
    let entity = match executed {
        Executed::Static(e, report) => {
            ctx.warn(&scene.file, &report.warnings);
            *e
        }
        Executed::Frames(mut frames, report) => {
            ctx.warn(&scene.file, &report.warnings);
            if scene.frame >= frames.len() {
                return Err(Failure::new(
                    EXIT_EXEC,
                    format!("frame {} requested but the program has {} frames", scene.frame, frames.len()),
                ));
            }
            frames.swap_remove(scene.frame)
        }
    };
    Ok((program, entity))
}

/// Flattened primitives; Minecraft programs are compiled to voxels first.
fn scene_primitives(ctx: &mut Ctx<'_>, scene: &SceneArgs) -> CliResult<Vec<FlatPrimitive>> {
    if scene.minecraft {
        let program = load_program(&scene.file)?;
        let out = compile(&program, scene)?;
        ctx.warn(&scene.file, &out.warnings);
        return Ok(backends::voxels_to_primitives(&out.grid, &minecraft::BlockPalette::builtin()));
    }
    let (_, entity) = scene_entity(ctx, scene)?;
    Ok(flatten(&entity))
}

fn compile(program: &Program, scene: &SceneArgs) -> CliResult<minecraft::MinecraftOutput> {
    let options = exec_options(scene)?;
    backends::compile_minecraft(program, &options).map_err(|e| match e {
        BackendError::Exec(e) => exec_failure(program, &e),
        other => Failure::new(EXIT_EXEC, format!("{}: error: {other}", scene.file.display())),
    })
}

fn camera(view: &ViewArgs, bounds: Option<crate::scene::Aabb>) -> CliResult<Camera> {
    let (w, h) = view.size;
    match view.camera {
        None => Ok(Camera::auto_frame(bounds, w, h)),
        Some(c) => Camera::perspective(
            Vector3::new(c[0], c[1], c[2]),
            Vector3::new(c[3], c[4], c[5]),
            Vector3::new(c[6], c[7], c[8]),
            c[9].to_radians(),
            w,
            h,
        )
        .map_err(|e| Failure::new(EXIT_USAGE, e.to_string())),
    }
}

fn dispatch(ctx: &mut Ctx<'_>, command: Command) -> CliResult<()> {
    match command {
        Command::Check { file } => {
            load_program(&file)?;
            Ok(())
        }
        Command::Run { scene, out, report } => {
            let program = load_program(&scene.file)?;
            let options = exec_options(&scene)?;
            if scene.minecraft {
                let compiled = compile(&program, &scene)?;
                ctx.warn(&scene.file, &compiled.warnings);
                return ctx.emit(&out, compiled.grid.to_json().as_bytes());
            }
            let executed = execute_any(&program, &options).map_err(|e| exec_failure(&program, &e))?;
            let (json, rep) = match &executed {
                Executed::Static(e, r) => (e.to_json(), r),
                Executed::Frames(f, r) => (serde_json::to_string_pretty(f).expect("frames serialize"), r),
            };
            ctx.warn(&scene.file, &rep.warnings);
            if report {
                let _ = writeln!(ctx.stderr, "{}", serde_json::to_string_pretty(rep).expect("report serializes"));
            }
            ctx.emit(&out, format!("{json}\n").as_bytes())
        }
        Command::Render {
            scene,
            view,
            mode,
            out,
            labels,
        } => {
            let prims = scene_primitives(ctx, &scene)?;
            let cam = camera(&view, render::primitives_bounds(&prims))?;
            let image = render::render(&prims, &cam, mode);
            let out = out.unwrap_or_else(|| {
                let stem = scene.file.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or("scene".into());
                format!("{stem}.ppm")
            });
            ctx.emit(&out, &image.to_ppm())?;
            if let Some(path) = labels {
                let json = image
                    .labels_json()
                    .ok_or_else(|| Failure::new(EXIT_USAGE, format!("--labels needs a map mode, not {}", mode.name())))?;
                ctx.emit(&path, json.as_bytes())?;
            }
            Ok(())
        }
        Command::Export { scene, view, format, out } => match format {
            ExportFormat::Minecraft => {
                let program = load_program(&scene.file)?;
                let compiled = compile(&program, &scene)?;
                ctx.warn(&scene.file, &compiled.warnings);
                ctx.emit(&out, format!("{}\n", compiled.grid.to_json()).as_bytes())
            }
            ExportFormat::Xml | ExportFormat::Layout => {
                let prims = scene_primitives(ctx, &scene)?;
                let cam = camera(&view, render::primitives_bounds(&prims))?;
                let text = if matches!(format, ExportFormat::Xml) {
                    backends::export_scene_xml(&prims, &cam)
                } else {
                    let (boxes, warnings) = render::project_layout(&prims, &cam);
                    ctx.warn(&scene.file, &warnings);
                    format!("{}\n", render::layout_json(&boxes))
                };
                ctx.emit(&out, text.as_bytes())
            }
        },
        Command::Animate {
            scene,
            view,
            mode,
            out_dir,
        } => {
            let program = load_program(&scene.file)?;
            let options = exec_options(&scene)?;
            let (frames, report) = interp::execute_temporal(&program, &options).map_err(|e| exec_failure(&program, &e))?;
            ctx.warn(&scene.file, &report.warnings);
            let cam = camera(&view, backends::animation::frames_bounds(&frames))?;
            let paths = backends::export_animation(&frames, &cam, mode, &out_dir).map_err(|e| match e {
                BackendError::Io { .. } => Failure::new(EXIT_IO, e.to_string()),
                other => Failure::new(EXIT_EXEC, format!("{}: error: {other}", scene.file.display())),
            })?;
            for p in paths {
                let _ = writeln!(ctx.stdout, "{}", p.display());
            }
            Ok(())
        }
        Command::Graph { scene, out } => {
            let (_, entity) = scene_entity(ctx, &scene)?;
            ctx.emit(&out, computation_graph(&entity).to_dot().as_bytes())
        }
        Command::Edit {
            file,
            overrides,
            rebind,
            entry,
            out,
        } => {
            let mut program = load_program(&file)?;
            let edit_failure = |program: &Program, e: EditError| match e {
                EditError::Exec(e) => exec_failure(program, &e),
                EditError::Invalid(diags) => Failure::new(
                    EXIT_INVALID,
                    diags.iter().map(|d| d.message.clone()).collect::<Vec<_>>().join("\n"),
                ),
                other => Failure::new(EXIT_EXEC, format!("{}: error: {other}", file.display())),
            };
            for spec in &rebind {
                let (word, path) = spec
                    .split_once('=')
                    .ok_or_else(|| Failure::new(EXIT_USAGE, format!("--rebind expects WORD=PATH, got `{spec}`")))?;
                let word = Word::new(word).map_err(|e| Failure::new(EXIT_USAGE, e.to_string()))?;
                let src = read_file(Path::new(path))?;
                program = edit::rebind(&program, &word, &src).map_err(|e| edit_failure(&program, e))?;
            }
            if let Some(path) = overrides {
                let specs = edit::parse_overrides(&read_file(&path)?)
                    .map_err(|e| Failure::new(EXIT_INVALID, format!("{}: error: {e}", path.display())))?;
                let options = ExecOptions::default().with_entry(word_arg(&entry)?);
                program = edit::apply_overrides(&program, &specs, &options).map_err(|e| edit_failure(&program, e))?;
            }
            ctx.emit(&out, dsl::pretty_print(&program).as_bytes())
        }
    }
}

/// Runs the command line with explicit streams; returns the exit code.
pub fn run_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{text}")
            } else {
                write!(stdout, "{text}")
            };
            return code;
        }
    };
    let mut ctx = Ctx { stdout, stderr };
    match dispatch(&mut ctx, cli.command) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(ctx.stderr, "{}", f.message);
            f.code
        }
    }
}

/// Entry point for the binary.
pub fn main() -> i32 {
    let stdout = std::io::stdout();
    let stderr = std::io::stderr();
    run_with(std::env::args_os(), &mut stdout.lock(), &mut stderr.lock())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run(args: &[&str]) -> (i32, Vec<u8>, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let code = run_with(std::iter::once("scenelang").chain(args.iter().copied()), &mut out, &mut err);
        (code, out, String::from_utf8(err).unwrap())
    }

    fn file(dir: &Path, name: &str, text: &str) -> String {
        let p = dir.join(name);
        fs::write(&p, text).unwrap();
        p.display().to_string()
    }

    const TWO_CUBES: &str = r#"
        (bind "pair" (lambda (z zs) (union
          (transform (call "cube" (embed (shape "cube") (size 1 1 1))) (translate (vec -1 0 0)))
          (transform (call "cube" (embed (shape "cube") (size 1 1 1))) (translate (vec 1 0 0))))))"#;

    #[test]
    fn usage_errors() {
        assert_eq!(run(&["frobnicate"]).0, EXIT_USAGE);
        assert_eq!(run(&["check", "x.sl", "--bogus"]).0, EXIT_USAGE);
        assert_eq!(run(&["--help"]).0, EXIT_OK);
        assert_eq!(run(&["render", "x.sl", "--size", "0x4"]).0, EXIT_USAGE);
        assert_eq!(run(&["render", "x.sl", "--camera", "1,2,3"]).0, EXIT_USAGE);
    }

    #[test]
    fn check_and_error_codes() {
        let dir = tempfile::tempdir().unwrap();
        let good = file(dir.path(), "good.sl", TWO_CUBES);
        assert_eq!(run(&["check", &good]), (EXIT_OK, vec![], String::new()));
        let bad = file(dir.path(), "bad.sl", "(bind \"a\" (lambda (z zs) (union (transform (identity) (call \"b\" z)))))");
        let (code, _, err) = run(&["check", &bad]);
        assert_eq!(code, EXIT_INVALID);
        assert!(err.contains("bad.sl:1:"), "{err}");
        let two_roots = file(dir.path(), "roots.sl", "(bind \"a\" (lambda (z zs) (union))) (bind \"b\" (lambda (z zs) (union)))");
        let (code, _, err) = run(&["run", &two_roots]);
        assert_eq!(code, EXIT_EXEC);
        assert!(err.contains("ambiguous root"), "{err}");
        assert_eq!(run(&["run", &two_roots, "--entry", "b"]).0, EXIT_OK);
        assert_eq!(run(&["check", &dir.path().join("missing.sl").display().to_string()]).0, EXIT_IO);
    }

    #[test]
    fn render_instance_has_three_colors() {
        let dir = tempfile::tempdir().unwrap();
        let src = file(dir.path(), "two.sl", TWO_CUBES);
        let (code, out, err) = run(&["render", &src, "--mode", "instance", "--size", "64x48", "--out", "-"]);
        assert_eq!(code, EXIT_OK, "{err}");
        let img = render::read_ppm(&out).unwrap();
        assert_eq!((img.width, img.height), (64, 48));
        let colors: std::collections::HashSet<_> = img.rgb.chunks(3).collect();
        assert_eq!(colors.len(), 3);
    }

    #[test]
    fn exports_and_graph() {
        let dir = tempfile::tempdir().unwrap();
        let src = file(dir.path(), "two.sl", TWO_CUBES);
        let (code, out, _) = run(&["export", &src, "--format", "xml"]);
        assert_eq!(code, EXIT_OK);
        assert_eq!(String::from_utf8(out).unwrap().matches("<shape ").count(), 2);
        let (code, out, _) = run(&["export", &src, "--format", "layout"]);
        assert_eq!(code, EXIT_OK);
        let boxes: serde_json::Value = serde_json::from_slice(&out).unwrap();
        assert_eq!(boxes.as_array().unwrap().len(), 2);
        let (code, out, _) = run(&["graph", &src]);
        assert_eq!(code, EXIT_OK);
        assert!(String::from_utf8(out).unwrap().contains("\"pair#1\" -> \"cube#2\";"));
    }

    #[test]
    fn edit_writes_program() {
        let dir = tempfile::tempdir().unwrap();
        let src = file(dir.path(), "two.sl", TWO_CUBES);
        let o = file(dir.path(), "o.json", r#"[{"selector": {"by_word": "cube"}, "set": {"color": [0.1, 0.2, 0.3]}}]"#);
        let out = dir.path().join("edited.sl").display().to_string();
        assert_eq!(run(&["edit", &src, "--overrides", &o, "--out", &out]).0, EXIT_OK);
        assert!(fs::read_to_string(&out).unwrap().contains("(color 0.1 0.2 0.3)"));
        let none = file(dir.path(), "n.json", r#"[{"selector": {"by_word": "ghost"}, "set": {"color": [0.1, 0.2, 0.3]}}]"#);
        assert_eq!(run(&["edit", &src, "--overrides", &none, "--out", &out]).0, EXIT_EXEC);
        let junk = file(dir.path(), "j.json", "not json");
        assert_eq!(run(&["edit", &src, "--overrides", &junk, "--out", &out]).0, EXIT_INVALID);
    }
}
