mod common;

use std::collections::BTreeMap;

use common::*;
use proptest::prelude::*;
use scenelang::backends::VoxelGrid;
use scenelang::dsl::{self, pretty_print};
use scenelang::edit::{apply_overrides, diff_entities, OverrideSpec, Selector};
use scenelang::interp::{execute, ExecOptions};
use scenelang::math::{self, Vector3};
use scenelang::render::{project_layout, render, Camera, RenderMode};
use scenelang::scene::{assign_ids_in_place, computation_graph, correspondence_groups, flatten, Entity, Word};

fn root_opts() -> ExecOptions {
    ExecOptions::default().with_entry(Some(Word::new("root").unwrap()))
}

/// Structural key by serialization: ids dropped, signed zeros merged, the
/// node's own pose not part of the entity.
fn structure_key(e: &Entity) -> String {
    fn scrub(v: &mut serde_json::Value) {
        match v {
            serde_json::Value::Object(m) => {
                if let Some(emb) = m.get_mut("embedding").and_then(|e| e.as_object_mut()) {
                    emb.remove("id");
                }
                m.values_mut().for_each(scrub);
            }
            serde_json::Value::Array(a) => a.iter_mut().for_each(scrub),
            serde_json::Value::Number(n) if n.as_f64() == Some(0.0) => *v = serde_json::json!(0),
            _ => {}
        }
    }
    let mut v = serde_json::to_value(e).unwrap();
    scrub(&mut v);
    v.to_string()
}

fn check_groups(root: &Entity) -> Result<(), TestCaseError> {
    let groups = correspondence_groups(root);
    let mut by_key: BTreeMap<String, u32> = BTreeMap::new();
    let mut count = 0;
    for (id, paths) in &groups.groups {
        for path in paths {
            count += 1;
            let key = structure_key(root.get(path).unwrap());
            let prev = *by_key.entry(key).or_insert(*id);
            prop_assert_eq!(prev, *id, "structurally equal nodes split across groups at {:?}", path);
        }
    }
    prop_assert_eq!(count, root.node_count());
    prop_assert_eq!(by_key.len(), groups.groups.len());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn matmul_matches_naive_product(a in affine(), b in affine()) {
        prop_assert!(max_abs_diff((a * b).as_row_major(), &naive_mul(a.as_row_major(), b.as_row_major())) <= 1e-12);
    }

    #[test]
    fn rotation_composes_additively(a in angle(), b in angle(), axis in unit_axis(), pivot in vec3(-2.0..2.0)) {
        let ab = math::rotate(a, axis, pivot).unwrap() * math::rotate(b, axis, pivot).unwrap();
        prop_assert!(ab.approx_eq(&math::rotate(a + b, axis, pivot).unwrap(), 1e-9));
    }

    #[test]
    fn scale_fixes_origin(s in vec3(0.2..3.0), o in vec3(-3.0..3.0)) {
        let m = math::scale(s, o).unwrap();
        prop_assert!(m.apply_point(o).max_abs_diff(o) <= 1e-12);
        prop_assert!((m.linear_determinant() - s.x * s.y * s.z).abs() <= 1e-9);
    }

    #[test]
    fn reflect_fixes_plane_and_flips_normal(n in unit_axis(), p in vec3(-2.0..2.0), q in unit_axis()) {
        let f = math::reflect(n, p).unwrap();
        let in_plane = p + q.cross(n);
        prop_assert!(f.apply_point(in_plane).max_abs_diff(in_plane) <= 1e-9);
        prop_assert!(f.apply_vector(n).max_abs_diff(-n) <= 1e-12);
        prop_assert!((f.linear_determinant() + 1.0).abs() <= 1e-12);
    }

    #[test]
    fn flatten_agrees_with_fold(mut root in tree()) {
        assign_ids_in_place(&mut root);
        let flat = flatten(&root);
        let oracle = world_poses_oracle(&root);
        prop_assert_eq!(flat.len(), root.leaf_count());
        for (f, o) in flat.iter().zip(&oracle) {
            prop_assert!(max_abs_diff(f.world.as_row_major(), o) <= 1e-12);
            prop_assert_eq!(Some(f.embedding_id), root.get(&f.path).unwrap().embedding.id);
        }
    }

    #[test]
    fn preorder_ids_match_stack_traversal(mut root in tree()) {
        assign_ids_in_place(&mut root);
        for (want, got) in preorder_oracle(&root) {
            prop_assert_eq!(Some(want), got);
        }
    }

    #[test]
    fn correspondence_matches_structural_key(mut root in tree()) {
        assign_ids_in_place(&mut root);
        check_groups(&root)?;
    }

    #[test]
    fn graph_has_one_edge_per_child(mut root in tree()) {
        assign_ids_in_place(&mut root);
        let g = computation_graph(&root);
        prop_assert_eq!(g.nodes.len(), root.node_count());
        prop_assert_eq!(g.edges.len(), root.node_count() - 1);
    }

    #[test]
    fn union_loop_expands(case in loop_case()) {
        let a = dsl::load("a", &case.looped()).unwrap();
        let b = dsl::load("b", &case.expanded()).unwrap();
        prop_assert_eq!(execute(&a, &root_opts()).unwrap().0, execute(&b, &root_opts()).unwrap().0);
    }

    #[test]
    fn pretty_print_round_trips(case in loop_case()) {
        for src in [case.looped(), case.expanded()] {
            let p = dsl::parse(&src).unwrap();
            let printed = pretty_print(&p);
            let q = dsl::parse(&printed).unwrap();
            prop_assert_eq!(q.without_spans(), p.without_spans());
            prop_assert_eq!(pretty_print(&q), printed);
        }
    }

    #[test]
    fn color_override_is_local_and_idempotent(case in loop_case(), c in prop::array::uniform3(0.0..1.0f64)) {
        let p = dsl::load("p", &case.looped()).unwrap();
        let before = execute(&p, &root_opts()).unwrap().0;
        let target = ["ball", "block", "bolt"].into_iter().find(|w| case.body.contains(&format!("\"{w}\""))).unwrap_or("bolt");
        let o = [OverrideSpec::set(Selector::ByWord(Word::new(target).unwrap()), "color", serde_json::json!(c))];
        let q = match apply_overrides(&p, &o, &root_opts()) {
            Ok(q) => q,
            Err(_) => {
                prop_assert_eq!(case.count, 0);
                return Ok(());
            }
        };
        let after = execute(&q, &root_opts()).unwrap().0;
        for entry in &diff_entities(&before, &after).entries {
            prop_assert_eq!(after.get(&entry.path).unwrap().word.as_str(), target);
        }
        for (x, y) in flatten(&before).iter().zip(flatten(&after)) {
            prop_assert_eq!(x.world.as_row_major().map(f64::to_bits), y.world.as_row_major().map(f64::to_bits));
            prop_assert_eq!(&x.path, &y.path);
        }
        let twice = apply_overrides(&q, &o, &root_opts()).unwrap();
        prop_assert_eq!(twice.without_spans(), q.without_spans());
    }

    #[test]
    fn cuboid_cell_count(size in prop::array::uniform3(1..6i64), fill: bool, origin in prop::array::uniform3(-4..4i64)) {
        let mut g = VoxelGrid::new();
        g.set_cuboid("minecraft:stone", size, fill, origin).unwrap();
        let volume = size.iter().product::<i64>();
        let inner = size.iter().map(|s| (s - 2).max(0)).product::<i64>();
        prop_assert_eq!(g.len() as i64, if fill { volume } else { volume - inner });
        let b = g.bounds().unwrap();
        prop_assert_eq!(b.min, origin);
        g.delete_blocks(size, origin).unwrap();
        prop_assert!(g.is_empty());
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn render_is_independent_of_thread_count(mut root in tree(), mode in prop::sample::select(RenderMode::ALL.to_vec())) {
        assign_ids_in_place(&mut root);
        let prims = flatten(&root);
        let cam = Camera::auto_frame(root.bounding_box().ok(), 40, 30);
        let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
        let many = rayon::ThreadPoolBuilder::new().num_threads(6).build().unwrap();
        let a = one.install(|| render(&prims, &cam, mode));
        let b = many.install(|| render(&prims, &cam, mode));
        prop_assert_eq!(a, b);
    }

    #[test]
    fn layout_boxes_are_ordered(mut root in tree()) {
        assign_ids_in_place(&mut root);
        let prims = flatten(&root);
        let cam = Camera::auto_frame(root.bounding_box().ok(), 64, 48);
        let (boxes, _) = project_layout(&prims, &cam);
        for b in boxes {
            prop_assert!(b.rect[0] <= b.rect[2] && b.rect[1] <= b.rect[3]);
        }
    }
}

#[test]
fn fixture_correspondence_groups() {
    for name in STATIC_FIXTURES {
        let root = execute(&fixture(name), &ExecOptions::default()).unwrap().0;
        check_groups(&root).unwrap();
    }
}

#[test]
fn chessboard_repeats_pieces() {
    let root = execute(&fixture("chessboard.sl"), &ExecOptions::default()).unwrap().0;
    let groups = correspondence_groups(&root);
    let sizes: Vec<usize> = groups.repeated().map(|(_, m)| m.len()).collect();
    assert!(sizes.contains(&8), "each set of eight pawns shares a group: {sizes:?}");
    assert!(sizes.iter().all(|&n| n >= 2));
}

#[test]
fn fixtures_round_trip_through_printer() {
    for name in STATIC_FIXTURES.iter().chain(&TEMPORAL_FIXTURES).chain(&["minecraft_house.sl"]) {
        let p = fixture(name);
        let q = dsl::parse(&pretty_print(&p)).unwrap();
        assert_eq!(q.without_spans(), p.without_spans(), "{name}");
    }
}

#[test]
fn inverse_round_trip_on_fixture_poses() {
    let root = execute(&fixture("fractal_tree.sl"), &ExecOptions::default()).unwrap().0;
    for p in flatten(&root) {
        let inv = p.world.invert().unwrap();
        let origin = Vector3::new(0.3, -0.2, 0.7);
        assert!(inv.apply_point(p.world.apply_point(origin)).max_abs_diff(origin) <= 1e-9);
    }
}
