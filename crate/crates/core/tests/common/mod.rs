//! Shared generators and independent oracles for the integration tests.
#![allow(dead_code)]

use std::path::PathBuf;

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestRng, TestRunner};
use scenelang::dsl::{self, Program};
use scenelang::math::{self, Matrix4, Vector3};
use scenelang::scene::{Child, Embedding, Entity, PrimitiveSpec, Word};

pub fn runner(cases: u32) -> TestRunner {
    let config = Config {
        cases,
        failure_persistence: None,
        ..Config::default()
    };
    TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha))
}

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/scenes").join(name)
}

pub fn fixture(name: &str) -> Program {
    let path = fixture_path(name);
    let text = std::fs::read_to_string(&path).unwrap();
    dsl::load(&path.display().to_string(), &text).unwrap_or_else(|d| panic!("{name}: {d:?}"))
}

pub const STATIC_FIXTURES: [&str; 7] = [
    "chessboard.sl",
    "two_cubes.sl",
    "sphere.sl",
    "still_life.sl",
    "three_objects.sl",
    "fractal_tree.sl",
    "moai.sl",
];

pub const TEMPORAL_FIXTURES: [&str; 2] = ["rotating_arm.sl", "still_frames.sl"];

/// Row-by-column 4x4 product over plain arrays.
pub fn naive_mul(a: &[f64; 16], b: &[f64; 16]) -> [f64; 16] {
    let mut out = [0.0; 16];
    for r in 0..4 {
        for c in 0..4 {
            let mut s = 0.0;
            for k in 0..4 {
                s += a[r * 4 + k] * b[k * 4 + c];
            }
            out[r * 4 + c] = s;
        }
    }
    out
}

pub const IDENTITY: [f64; 16] = [
    1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0,
];

pub fn max_abs_diff(a: &[f64; 16], b: &[f64; 16]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// World poses of leaves, in depth-first left-to-right order, computed by
/// folding naive products down each root path.
pub fn world_poses_oracle(root: &Entity) -> Vec<[f64; 16]> {
    fn go(e: &Entity, acc: [f64; 16], out: &mut Vec<[f64; 16]>) {
        if e.primitive.is_some() {
            out.push(acc);
        }
        for c in &e.children {
            go(&c.entity, naive_mul(&acc, c.pose.as_row_major()), out);
        }
    }
    let mut out = Vec::new();
    go(root, IDENTITY, &mut out);
    out
}

/// Preorder positions computed with an explicit stack, compared against the
/// ids stored in each embedding.
pub fn preorder_oracle(root: &Entity) -> Vec<(u32, Option<u32>)> {
    let mut out = Vec::new();
    let mut stack = vec![root];
    let mut next = 1;
    while let Some(e) = stack.pop() {
        out.push((next, e.embedding.id));
        next += 1;
        for c in e.children.iter().rev() {
            stack.push(&c.entity);
        }
    }
    out
}

pub fn vec3(range: std::ops::Range<f64>) -> impl Strategy<Value = Vector3> {
    (range.clone(), range.clone(), range).prop_map(|(x, y, z)| Vector3::new(x, y, z))
}

pub fn unit_axis() -> impl Strategy<Value = Vector3> {
    vec3(-1.0..1.0).prop_filter_map("axis too short", |v| (v.norm() > 0.1).then(|| v.normalized().unwrap()))
}

pub fn angle() -> impl Strategy<Value = f64> {
    -7.0..7.0f64
}

/// Well-conditioned similarity-like poses: translate · rotate · scale.
pub fn pose() -> impl Strategy<Value = Matrix4> {
    (vec3(-3.0..3.0), angle(), unit_axis(), vec3(-1.0..1.0), vec3(0.5..1.5)).prop_map(|(t, a, axis, pivot, s)| {
        math::translate(t).unwrap() * math::rotate(a, axis, pivot).unwrap() * math::scale(s, Vector3::ZERO).unwrap()
    })
}

/// Arbitrary affine matrices with entries in [-2, 2].
pub fn affine() -> impl Strategy<Value = Matrix4> {
    prop::array::uniform12(-2.0..2.0f64).prop_map(|v| {
        let mut m = [0.0; 16];
        m[..12].copy_from_slice(&v);
        m[15] = 1.0;
        Matrix4::from_row_major(m).unwrap()
    })
}

pub fn primitive() -> impl Strategy<Value = PrimitiveSpec> {
    prop_oneof![
        vec3(0.1..2.0).prop_map(PrimitiveSpec::cube),
        (0.1..2.0f64).prop_map(PrimitiveSpec::sphere),
        (0.1..1.0f64, vec3(-1.0..1.0)).prop_map(|(r, p1)| PrimitiveSpec::cylinder(r, Vector3::new(0.0, -1.0, 0.0), p1 + Vector3::new(0.0, 2.5, 0.0))),
    ]
}

fn word() -> impl Strategy<Value = Word> {
    prop::sample::select(vec!["wheel", "axle", "body", "door", "lamp"]).prop_map(|w| Word::new(w).unwrap())
}

/// Random entity trees: at most 6 levels of composites, fan-out at most 4.
pub fn tree() -> impl Strategy<Value = Entity> {
    let leaf = (word(), primitive()).prop_map(|(w, p)| Entity::leaf(w, Embedding::default(), p));
    leaf.prop_recursive(6, 256, 4, |inner| {
        (word(), prop::collection::vec((pose(), inner), 0..=4)).prop_map(|(w, kids)| {
            Entity::composite(
                w,
                Embedding::default(),
                kids.into_iter().map(|(pose, entity)| Child { pose, entity }).collect(),
            )
        })
    })
}

/// A union-loop body with `{i}` standing for the loop index.
#[derive(Debug, Clone)]
pub struct LoopCase {
    pub count: usize,
    pub body: String,
}

impl LoopCase {
    pub fn looped(&self) -> String {
        format!(
            "{PART}(bind \"root\" (lambda (z zs) (union-loop {} (lambda (i) {}))))",
            self.count,
            self.body.replace("{i}", "i")
        )
    }

    pub fn expanded(&self) -> String {
        let items: Vec<String> = (0..self.count)
            .map(|k| self.body.replace("{i}", &format!("{:?}", k as f64)))
            .collect();
        format!("{PART}(bind \"root\" (lambda (z zs) (union {})))", items.join(" "))
    }
}

const PART: &str = r#"(bind "part" (lambda (z zs) (union
  (transform (call "bolt" (embed (shape "cube") (size 0.2 (+ 0.1 (get z "k")) 0.2))) (identity))
  (transform (call "nut" (embed (shape "sphere") (radius 0.1))) (translate (vec 0 (get z "k") 0))))))
"#;

pub fn loop_case() -> impl Strategy<Value = LoopCase> {
    let entity = prop_oneof![
        (0.05..1.0f64, 0.0..0.2f64).prop_map(|(r, a)| format!(
            "(call \"ball\" (embed (shape \"sphere\") (radius (+ {r:?} (* {{i}} {a:?}))) (tag {{i}})))"
        )),
        (0.0..1.0f64).prop_map(|a| format!("(call \"part\" (embed (k (* {a:?} (mod {{i}} 3)))))")),
        (0.1..1.0f64).prop_map(|s| format!(
            "(call \"block\" (embed (shape \"cube\") (size {s:?} (+ {s:?} {{i}}) {s:?}) (color (/ {{i}} 16) 0.5 0.5)))"
        )),
    ];
    let pose = prop_oneof![
        (-2.0..2.0f64, -2.0..2.0f64).prop_map(|(a, b)| format!("(translate (vec (* {{i}} {a:?}) {b:?} (- {{i}})))")),
        (-1.0..1.0f64, unit_axis()).prop_map(|(a, ax)| format!(
            "(rotate (* {{i}} {a:?}) (vec {:?} {:?} {:?}) (vec 0 1 0))",
            ax.x, ax.y, ax.z
        )),
        (0.0..0.5f64, -1.0..1.0f64).prop_map(|(a, b)| format!(
            "(@ (translate (vec {b:?} (floor (/ {{i}} 4)) 0)) (scale (vec (+ 1 (* {{i}} {a:?})) 1 1) (vec 0 0 0)))"
        )),
        Just("(identity)".to_string()),
    ];
    (0..=16usize, entity, pose).prop_map(|(count, e, p)| LoopCase {
        count,
        body: format!("(transform {e} {p})"),
    })
}
