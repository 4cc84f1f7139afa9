//! Structured edits: attribute overrides on embedding literals, function
//! rebinding, and structural diffs of executed scenes.
//!
//! Overrides patch the `embed` literals of the source program. A selector
//! is resolved by executing the program and collecting the literals that
//! produced the selected entities' embeddings, so a literal inside a loop
//! changes every iteration at once.

use std::collections::BTreeSet;
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dsl::ast::{EmbedField, Expr, ExprKind, FuncDef, Program, Span};
use crate::dsl::parser::parse_entity_func;
use crate::dsl::{load, pretty_print, Diagnostic, SourceMap};
use crate::interp::{execute, ExecError, ExecOptions};
use crate::scene::{Entity, Path, Word};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Selector {
    ByWord(Word),
    ByPath(Vec<usize>),
    ByEmbeddingId(u32),
}

impl fmt::Display for Selector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Selector::ByWord(w) => write!(f, "by_word \"{w}\""),
            Selector::ByPath(p) => write!(f, "by_path {p:?}"),
            Selector::ByEmbeddingId(i) => write!(f, "by_embedding_id {i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OverrideSpec {
    pub selector: Selector,
    #[serde(default)]
    pub set: IndexMap<String, serde_json::Value>,
    #[serde(default)]
    pub unset: Vec<String>,
}

impl OverrideSpec {
    pub fn set(selector: Selector, key: &str, value: serde_json::Value) -> Self {
        OverrideSpec {
            selector,
            set: IndexMap::from([(key.to_string(), value)]),
            unset: Vec::new(),
        }
    }
}

/// Parses an overrides file: a JSON array of `{selector, set, unset}`.
pub fn parse_overrides(text: &str) -> Result<Vec<OverrideSpec>, serde_json::Error> {
    serde_json::from_str(text)
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EditError {
    #[error("override {index}: selector {selector} matches no embedding literal")]
    NoTarget { index: usize, selector: Selector },
    #[error("override {index}: value for `{key}` {message}")]
    Type { index: usize, key: String, message: String },
    #[error(transparent)]
    Exec(#[from] ExecError),
    #[error("{}", .0.iter().map(|d| d.message.as_str()).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<Diagnostic>),
}

enum Patch {
    Number(f64),
    Text(String),
    Vector(Vec<f64>),
}

impl Patch {
    fn values(&self) -> Vec<Expr> {
        let e = |kind| Expr::new(kind, Span::default());
        match self {
            Patch::Number(n) => vec![e(ExprKind::Number(*n))],
            Patch::Text(s) => vec![e(ExprKind::Str(s.clone()))],
            Patch::Vector(v) => v.iter().map(|n| e(ExprKind::Number(*n))).collect(),
        }
    }
}

fn to_patch(key: &str, v: &serde_json::Value) -> Result<Patch, String> {
    let patch = match v {
        serde_json::Value::Number(n) => Patch::Number(n.as_f64().ok_or("is not a finite number")?),
        serde_json::Value::String(s) => Patch::Text(s.clone()),
        serde_json::Value::Array(xs) => {
            let v = xs
                .iter()
                .map(|x| x.as_f64().ok_or("must be an array of numbers"))
                .collect::<Result<Vec<_>, _>>()?;
            if v.is_empty() || v.len() > 4 {
                return Err(format!("must have 1 to 4 components, found {}", v.len()));
            }
            if v.len() == 1 {
                Patch::Number(v[0])
            } else {
                Patch::Vector(v)
            }
        }
        other => return Err(format!("must be a number, string or numeric array, found {other}")),
    };
    let three = |p: &Patch| matches!(p, Patch::Vector(v) if v.len() == 3);
    match key {
        "color" if !three(&patch) => Err("must be an RGB triple".into()),
        "color" => match &patch {
            Patch::Vector(v) if v.iter().all(|c| (0.0..=1.0).contains(c)) => Ok(patch),
            _ => Err("must have components in [0, 1]".into()),
        },
        "size" | "p0" | "p1" if !three(&patch) => Err("must be a 3-vector".into()),
        "radius" | "fill" | "delete" if !matches!(patch, Patch::Number(_)) => Err("must be a number".into()),
        "shape" | "block" if !matches!(patch, Patch::Text(_)) => Err("must be a string".into()),
        _ => Ok(patch),
    }
}

/// Byte offsets of the embedding literals behind the selected entities.
fn resolve(root: &Entity, selector: &Selector) -> BTreeSet<usize> {
    let mut out = BTreeSet::new();
    match selector {
        Selector::ByWord(w) => root.visit_preorder(&mut |e, _| {
            if &e.word == w {
                out.extend(e.embedding.origin);
            }
        }),
        Selector::ByPath(p) => {
            if let Some(e) = root.get(p) {
                out.extend(e.embedding.origin);
            }
        }
        Selector::ByEmbeddingId(id) => root.visit_preorder(&mut |e, _| {
            if e.embedding.id == Some(*id) {
                out.extend(e.embedding.origin);
            }
        }),
    }
    out
}

/// Re-prints and re-parses so spans match the new source text.
fn reload(program: &Program) -> Result<Program, EditError> {
    load(&program.source.name, &pretty_print(program)).map_err(EditError::Invalid)
}

/// Applies overrides in order. Every selector is resolved against the
/// unedited program before anything changes.
pub fn apply_overrides(program: &Program, overrides: &[OverrideSpec], options: &ExecOptions) -> Result<Program, EditError> {
    if overrides.is_empty() {
        return Ok(program.clone());
    }
    let (root, _) = execute(program, options)?;
    let mut plans = Vec::with_capacity(overrides.len());
    for (index, o) in overrides.iter().enumerate() {
        let targets = resolve(&root, &o.selector);
        if targets.is_empty() {
            return Err(EditError::NoTarget {
                index,
                selector: o.selector.clone(),
            });
        }
        let mut set = Vec::with_capacity(o.set.len());
        for (key, v) in &o.set {
            let patch = to_patch(key, v).map_err(|message| EditError::Type {
                index,
                key: key.clone(),
                message,
            })?;
            set.push((key.clone(), patch));
        }
        plans.push((targets, set, &o.unset));
    }

    let mut edited = program.clone();
    for b in &mut edited.binds {
        b.visit_exprs_mut(&mut |e| {
            let start = e.span.start;
            let ExprKind::Embed(fields) = &mut e.kind else { return };
            for (targets, set, unset) in &plans {
                if !targets.contains(&start) {
                    continue;
                }
                fields.retain(|f| !unset.contains(&f.key));
                for (key, patch) in set {
                    match fields.iter_mut().find(|f| &f.key == key) {
                        Some(f) => f.values = patch.values(),
                        None => fields.push(EmbedField {
                            key: key.clone(),
                            key_span: Span::default(),
                            values: patch.values(),
                        }),
                    }
                }
            }
        });
    }
    reload(&edited)
}

/// Replaces the entity function bound to `word`, or adds a bind when the
/// word was a primitive, keeping any root default embeddings.
pub fn rebind(program: &Program, word: &Word, new_func_source: &str) -> Result<Program, EditError> {
    let map = SourceMap::new(format!("<rebind {word}>"), new_func_source);
    let func: FuncDef = parse_entity_func(&map).map_err(|e| EditError::Invalid(vec![e.to_diagnostic()]))?;
    let mut edited = program.clone();
    match edited.binds.iter_mut().find(|b| &b.word == word) {
        // Spans of the new function refer to its own text; reload reprints.
        Some(b) => b.func = func,
        None => {
            let text = format!("(bind \"{}\" {new_func_source})", word.as_str().replace('\\', "\\\\").replace('"', "\\\""));
            let extra = crate::dsl::parse(&text).map_err(|e| EditError::Invalid(vec![e.to_diagnostic()]))?;
            edited.binds.extend(extra.binds);
        }
    }
    reload(&edited)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffKind {
    Word,
    Attributes,
    Primitive,
    Pose,
    ChildCount,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct DiffEntry {
    pub path: Path,
    pub kinds: Vec<DiffKind>,
}

/// Paths where two entity trees differ. Poses are reported at the child
/// they place. Ids are ignored.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize)]
pub struct DiffReport {
    pub entries: Vec<DiffEntry>,
}

impl DiffReport {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn paths(&self) -> Vec<&Path> {
        self.entries.iter().map(|e| &e.path).collect()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("diff serializes")
    }
}

pub fn diff_entities(a: &Entity, b: &Entity) -> DiffReport {
    let mut report = DiffReport::default();
    let mut path = Vec::new();
    diff_rec(a, b, None, &mut path, &mut report);
    report
}

fn diff_rec(a: &Entity, b: &Entity, pose_differs: Option<bool>, path: &mut Vec<usize>, out: &mut DiffReport) {
    let mut kinds = Vec::new();
    if pose_differs == Some(true) {
        kinds.push(DiffKind::Pose);
    }
    if a.word != b.word {
        kinds.push(DiffKind::Word);
    }
    if a.embedding.attrs != b.embedding.attrs {
        kinds.push(DiffKind::Attributes);
    }
    if a.primitive != b.primitive {
        kinds.push(DiffKind::Primitive);
    }
    if a.children.len() != b.children.len() {
        kinds.push(DiffKind::ChildCount);
    }
    if !kinds.is_empty() {
        kinds.sort();
        out.entries.push(DiffEntry {
            path: path.clone(),
            kinds,
        });
    }
    for (i, (ca, cb)) in a.children.iter().zip(&b.children).enumerate() {
        path.push(i);
        let pose = ca.pose.as_row_major().map(f64::to_bits) != cb.pose.as_row_major().map(f64::to_bits);
        diff_rec(&ca.entity, &cb.entity, Some(pose), path, out);
        path.pop();
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;
    use crate::scene::{flatten, AttributeValue};
    use serde_json::json;

    const SRC: &str = r#"
        (bind "row" (lambda (z zs)
          (union-loop 3 (lambda (i)
            (transform (call "ball" (embed (shape "sphere") (radius 0.4) (color (get z "tone") 0.2 0.2)))
                       (translate (vec i 0 0))))))
          (embed (tone 0.9)))
    "#;

    fn run(p: &Program) -> Entity {
        execute(p, &ExecOptions::default()).unwrap().0
    }

    #[test]
    fn empty_overrides_keep_program() {
        let p = parse(SRC).unwrap();
        assert_eq!(apply_overrides(&p, &[], &ExecOptions::default()).unwrap(), p);
    }

    #[test]
    fn by_word_changes_every_instance_and_is_idempotent() {
        let p = parse(SRC).unwrap();
        let o = [OverrideSpec::set(
            Selector::ByWord(Word::new("ball").unwrap()),
            "color",
            json!([0.1, 0.1, 0.1]),
        )];
        let q = apply_overrides(&p, &o, &ExecOptions::default()).unwrap();
        let (before, after) = (run(&p), run(&q));
        let diff = diff_entities(&before, &after);
        assert_eq!(diff.paths(), vec![&vec![0], &vec![1], &vec![2]]);
        assert!(diff.entries.iter().all(|e| e.kinds == vec![DiffKind::Attributes, DiffKind::Primitive]));
        for (x, y) in flatten(&before).iter().zip(flatten(&after)) {
            assert_eq!(x.world.as_row_major().map(f64::to_bits), y.world.as_row_major().map(f64::to_bits));
            assert_eq!(y.spec.color, [0.1, 0.1, 0.1]);
        }
        let twice = apply_overrides(&q, &o, &ExecOptions::default()).unwrap();
        assert_eq!(twice.without_spans(), q.without_spans());
    }

    #[test]
    fn root_default_attribute_reaches_leaves() {
        let p = parse(SRC).unwrap();
        let o = [OverrideSpec::set(Selector::ByEmbeddingId(1), "tone", json!(0.3))];
        let q = apply_overrides(&p, &o, &ExecOptions::default()).unwrap();
        let after = run(&q);
        assert_eq!(after.embedding.attrs["tone"], AttributeValue::Number(0.3));
        for f in flatten(&after) {
            assert_eq!(f.spec.color, [0.3, 0.2, 0.2]);
        }
    }

    #[test]
    fn unset_and_errors() {
        let p = parse(SRC).unwrap();
        let mut o = OverrideSpec::set(Selector::ByPath(vec![0]), "label", json!("x"));
        o.unset.push("color".into());
        let q = apply_overrides(&p, &[o], &ExecOptions::default()).unwrap();
        let e = run(&q);
        assert!(!e.children[2].entity.embedding.attrs.contains_key("color"));
        assert_eq!(e.children[1].entity.embedding.attrs["label"], AttributeValue::Text("x".into()));

        let missing = [
            OverrideSpec::set(Selector::ByWord(Word::new("ball").unwrap()), "radius", json!(1)),
            OverrideSpec::set(Selector::ByWord(Word::new("ghost").unwrap()), "radius", json!(1)),
        ];
        assert!(matches!(
            apply_overrides(&p, &missing, &ExecOptions::default()).unwrap_err(),
            EditError::NoTarget { index: 1, .. }
        ));
        assert!(matches!(
            apply_overrides(&p, &[OverrideSpec::set(Selector::ByPath(vec![7]), "radius", json!(1))], &ExecOptions::default()).unwrap_err(),
            EditError::NoTarget { .. }
        ));
        for bad in [json!("big"), json!([1, 2]), json!({"a": 1}), json!([1, 2, 3, 4, 5])] {
            let o = OverrideSpec::set(Selector::ByWord(Word::new("ball").unwrap()), "size", bad);
            assert!(matches!(apply_overrides(&p, &[o], &ExecOptions::default()).unwrap_err(), EditError::Type { .. }));
        }
        let o = OverrideSpec::set(Selector::ByWord(Word::new("ball").unwrap()), "color", json!([2, 0, 0]));
        assert!(matches!(apply_overrides(&p, &[o], &ExecOptions::default()).unwrap_err(), EditError::Type { .. }));
    }

    #[test]
    fn overrides_file_format() {
        let text = r#"[{"selector": {"by_word": "pawn"}, "set": {"color": [0.1, 0.1, 0.1]}},
                       {"selector": {"by_path": [0, 2]}, "unset": ["size"]},
                       {"selector": {"by_embedding_id": 1}, "set": {"style": "wood"}}]"#;
        let o = parse_overrides(text).unwrap();
        assert_eq!(o.len(), 3);
        assert_eq!(o[1].selector, Selector::ByPath(vec![0, 2]));
        assert!(parse_overrides(r#"[{"selector": {"by_word": "a"}, "bogus": 1}]"#).is_err());
    }

    #[test]
    fn rebind_replaces_or_adds() {
        let p = parse(SRC).unwrap();
        let unused = rebind(&p, &Word::new("nobody").unwrap(), "(lambda (z zs) (union))").unwrap();
        // The new bind is uncalled, so it becomes a second root candidate.
        let pinned = ExecOptions::default().with_entry(Some(Word::new("row").unwrap()));
        assert_eq!(execute(&unused, &pinned).unwrap().0, run(&p));

        let q = rebind(
            &p,
            &Word::new("ball").unwrap(),
            r#"(lambda (z zs) (union (transform (call "core" (embed (shape "cube") (size 0.5 0.5 0.5))) (identity))))"#,
        )
        .unwrap();
        let after = run(&q);
        assert_eq!(after.leaf_count(), 3);
        assert_eq!(after.node_count(), 7);
        assert_eq!(after.children[0].entity.children[0].entity.word.as_str(), "core");

        let root = rebind(&p, &Word::new("row").unwrap(), r#"(lambda (z zs) (union))"#).unwrap();
        let e = run(&root);
        assert!(e.children.is_empty());
        assert_eq!(e.embedding.attrs["tone"], AttributeValue::Number(0.9));

        assert!(matches!(rebind(&p, &Word::new("row").unwrap(), "(lambda (z) (union))").unwrap_err(), EditError::Invalid(_)));
    }

    #[test]
    fn diff_reports() {
        let p = parse(SRC).unwrap();
        let a = run(&p);
        assert!(diff_entities(&a, &a).is_empty());
        let mut b = a.clone();
        b.children[1].pose = crate::math::translate(crate::math::Vector3::new(5.0, 0.0, 0.0)).unwrap();
        let d = diff_entities(&a, &b);
        assert_eq!(d.entries, vec![DiffEntry { path: vec![1], kinds: vec![DiffKind::Pose] }]);
        let mut c = a.clone();
        c.children.pop();
        assert_eq!(diff_entities(&a, &c).entries[0].kinds, vec![DiffKind::ChildCount]);
    }
}
