//! Executes the chessboard, then walks the result: preorder ids, world
//! poses, the computation graph and repeated-instance groups.

use scenelang::dsl;
use scenelang::interp::{execute, ExecOptions};
use scenelang::scene::{computation_graph, correspondence_groups, flatten};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/examples/scenes/chessboard.sl");
    let program = dsl::parse_named(path, &std::fs::read_to_string(path)?)?;
    let (scene, report) = execute(&program, &ExecOptions::default())?;
    println!(
        "root {:?}: {} entities, {} leaves, depth {}",
        report.root_word.as_str(),
        report.entity_count,
        report.leaf_count,
        report.max_depth_reached
    );

    let prims = flatten(&scene);
    for p in prims.iter().filter(|p| p.word.as_str() == "square").take(3) {
        println!("square #{} at {}", p.embedding_id, p.world.translation());
    }

    let graph = computation_graph(&scene);
    let board = graph.nodes.iter().position(|n| n.word.as_str() == "board").unwrap();
    println!("board has {} children in the computation graph", graph.out_degree(board));

    let groups = correspondence_groups(&scene);
    let mut repeated: Vec<_> = groups.repeated().map(|(id, members)| (members.len(), *id)).collect();
    repeated.sort_unstable_by(|a, b| b.cmp(a));
    for (count, id) in repeated.iter().take(4) {
        let word = scene.get(&groups.groups[id][0]).unwrap().word.as_str();
        println!("group {id}: {count} copies of {word:?}");
    }
    Ok(())
}
