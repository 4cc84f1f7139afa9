//! Executed scenes: entity trees, flattening to world-posed primitives,
//! bounding boxes, preorder embedding ids, computation graphs and
//! repetition correspondence.

use std::collections::{BTreeMap, HashMap};
use std::fmt;

use indexmap::IndexMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::math::{Matrix4, Vector3};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SceneError {
    #[error("entity `{0}` has no leaf primitives")]
    EmptyEntity(String),
    #[error("invalid word {0:?}: words must be non-empty without surrounding whitespace")]
    InvalidWord(String),
    #[error("invalid primitive: {0}")]
    InvalidPrimitive(String),
}

/// A natural-language phrase naming a semantic class of entities.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Word(String);

impl Word {
    pub fn new(text: impl Into<String>) -> Result<Self, SceneError> {
        let text = text.into();
        if text.is_empty() || text.trim() != text {
            return Err(SceneError::InvalidWord(text));
        }
        Ok(Word(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for Word {
    type Error = SceneError;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        Word::new(s)
    }
}

impl From<Word> for String {
    fn from(w: Word) -> String {
        w.0
    }
}

impl fmt::Display for Word {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum AttributeValue {
    Number(f64),
    Vector(Vec<f64>),
    Text(String),
}

impl AttributeValue {
    pub fn as_number(&self) -> Option<f64> {
        match self {
            AttributeValue::Number(n) => Some(*n),
            _ => None,
        }
    }

    pub fn as_vector3(&self) -> Option<Vector3> {
        match self {
            AttributeValue::Vector(v) if v.len() == 3 => Some(Vector3::new(v[0], v[1], v[2])),
            _ => None,
        }
    }

    pub fn as_text(&self) -> Option<&str> {
        match self {
            AttributeValue::Text(s) => Some(s),
            _ => None,
        }
    }

    pub fn type_name(&self) -> &'static str {
        match self {
            AttributeValue::Number(_) => "number",
            AttributeValue::Vector(_) => "vector",
            AttributeValue::Text(_) => "string",
        }
    }
}

impl fmt::Display for AttributeValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AttributeValue::Number(n) => write!(f, "{n}"),
            AttributeValue::Vector(v) => {
                let parts: Vec<String> = v.iter().map(|x| x.to_string()).collect();
                write!(f, "({})", parts.join(", "))
            }
            AttributeValue::Text(s) => write!(f, "{s:?}"),
        }
    }
}

pub type Attributes = IndexMap<String, AttributeValue>;

/// Per-instance identity data: an ordered attribute record plus the
/// preorder id assigned after execution.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct Embedding {
    pub id: Option<u32>,
    pub attrs: Attributes,
    /// Byte offset of the `embed` literal that produced this record, when
    /// it came from program source.
    #[serde(skip)]
    pub origin: Option<usize>,
}

impl PartialEq for Embedding {
    fn eq(&self, other: &Self) -> bool {
        self.id == other.id && self.attrs == other.attrs
    }
}

impl Embedding {
    pub fn new(attrs: Attributes) -> Self {
        Embedding {
            id: None,
            attrs,
            origin: None,
        }
    }

    pub fn get(&self, key: &str) -> Option<&AttributeValue> {
        self.attrs.get(key)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "geometry", rename_all = "lowercase")]
pub enum Geometry {
    /// Axis-aligned box centered at the local origin.
    Cube { size: Vector3 },
    /// Sphere centered at the local origin.
    Sphere { radius: f64 },
    /// Capped cylinder between two endpoints.
    Cylinder { radius: f64, p0: Vector3, p1: Vector3 },
    /// Minecraft cuboid spanning `[0, size]` with its front-left-bottom
    /// vertex at the local origin.
    Cuboid {
        block: String,
        size: [u32; 3],
        fill: bool,
        delete: bool,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveSpec {
    #[serde(flatten)]
    pub geometry: Geometry,
    pub color: [f64; 3],
}

pub const DEFAULT_COLOR: [f64; 3] = [0.8, 0.8, 0.8];

impl PrimitiveSpec {
    pub fn new(geometry: Geometry, color: [f64; 3]) -> Result<Self, SceneError> {
        let spec = PrimitiveSpec { geometry, color };
        spec.validate()?;
        Ok(spec)
    }

    pub fn cube(size: Vector3) -> Self {
        PrimitiveSpec {
            geometry: Geometry::Cube { size },
            color: DEFAULT_COLOR,
        }
    }

    pub fn sphere(radius: f64) -> Self {
        PrimitiveSpec {
            geometry: Geometry::Sphere { radius },
            color: DEFAULT_COLOR,
        }
    }

    pub fn cylinder(radius: f64, p0: Vector3, p1: Vector3) -> Self {
        PrimitiveSpec {
            geometry: Geometry::Cylinder { radius, p0, p1 },
            color: DEFAULT_COLOR,
        }
    }

    pub fn with_color(mut self, color: [f64; 3]) -> Self {
        self.color = color;
        self
    }

    pub fn kind(&self) -> &'static str {
        match self.geometry {
            Geometry::Cube { .. } => "cube",
            Geometry::Sphere { .. } => "sphere",
            Geometry::Cylinder { .. } => "cylinder",
            Geometry::Cuboid { .. } => "cuboid",
        }
    }

    pub fn validate(&self) -> Result<(), SceneError> {
        let bad = |msg: String| Err(SceneError::InvalidPrimitive(msg));
        if self.color.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return bad(format!("color components must lie in [0, 1], got {:?}", self.color));
        }
        match &self.geometry {
            Geometry::Cube { size } => {
                if !(size.is_finite() && size.x > 0.0 && size.y > 0.0 && size.z > 0.0) {
                    return bad(format!("cube size must be strictly positive, got {size}"));
                }
            }
            Geometry::Sphere { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return bad(format!("sphere radius must be strictly positive, got {radius}"));
                }
            }
            Geometry::Cylinder { radius, p0, p1 } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return bad(format!("cylinder radius must be strictly positive, got {radius}"));
                }
                if !p0.is_finite() || !p1.is_finite() || p0 == p1 {
                    return bad("cylinder endpoints must be finite and distinct".into());
                }
            }
            Geometry::Cuboid { block, size, .. } => {
                if size.contains(&0) {
                    return bad(format!("cuboid size must be at least 1, got {size:?}"));
                }
                if block.is_empty() {
                    return bad("cuboid block type must be non-empty".into());
                }
            }
        }
        Ok(())
    }

    /// Axis-aligned bounds in the primitive's own frame.
    pub fn local_aabb(&self) -> Aabb {
        match &self.geometry {
            Geometry::Cube { size } => Aabb::new(-*size / 2.0, *size / 2.0),
            Geometry::Sphere { radius } => Aabb::new(Vector3::splat(-radius), Vector3::splat(*radius)),
            Geometry::Cylinder { radius, p0, p1 } => {
                let axis = (*p1 - *p0).normalized().unwrap_or(Vector3::Y);
                let ext = |a: f64| radius * (1.0 - a * a).max(0.0).sqrt();
                let e = Vector3::new(ext(axis.x), ext(axis.y), ext(axis.z));
                Aabb::new(p0.min_elem(*p1) - e, p0.max_elem(*p1) + e)
            }
            Geometry::Cuboid { size, .. } => Aabb::new(
                Vector3::ZERO,
                Vector3::new(size[0] as f64, size[1] as f64, size[2] as f64),
            ),
        }
    }

    /// World-frame bounds: exact for spheres, 8-corner image otherwise.
    pub fn world_aabb(&self, world: &Matrix4) -> Aabb {
        match &self.geometry {
            Geometry::Sphere { radius } => {
                let c = world.translation();
                let half = Vector3::new(
                    radius * world.linear_row(0).norm(),
                    radius * world.linear_row(1).norm(),
                    radius * world.linear_row(2).norm(),
                );
                Aabb::new(c - half, c + half)
            }
            _ => self.local_aabb().transformed(world),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Aabb {
    pub min: Vector3,
    pub max: Vector3,
}

impl Aabb {
    pub fn new(min: Vector3, max: Vector3) -> Self {
        Aabb { min, max }
    }

    pub fn union(&self, o: &Aabb) -> Aabb {
        Aabb::new(self.min.min_elem(o.min), self.max.max_elem(o.max))
    }

    pub fn center(&self) -> Vector3 {
        (self.min + self.max) / 2.0
    }

    pub fn sizes(&self) -> Vector3 {
        self.max - self.min
    }

    pub fn corners(&self) -> [Vector3; 8] {
        let (a, b) = (self.min, self.max);
        [
            Vector3::new(a.x, a.y, a.z),
            Vector3::new(b.x, a.y, a.z),
            Vector3::new(a.x, b.y, a.z),
            Vector3::new(b.x, b.y, a.z),
            Vector3::new(a.x, a.y, b.z),
            Vector3::new(b.x, a.y, b.z),
            Vector3::new(a.x, b.y, b.z),
            Vector3::new(b.x, b.y, b.z),
        ]
    }

    /// Bounds of the eight transformed corners.
    pub fn transformed(&self, m: &Matrix4) -> Aabb {
        let cs = self.corners();
        let first = m.apply_point(cs[0]);
        cs[1..].iter().fold(Aabb::new(first, first), |acc, c| {
            let p = m.apply_point(*c);
            Aabb::new(acc.min.min_elem(p), acc.max.max_elem(p))
        })
    }

    pub fn contains(&self, o: &Aabb, tol: f64) -> bool {
        let lo = o.min - self.min;
        let hi = self.max - o.max;
        lo.x >= -tol && lo.y >= -tol && lo.z >= -tol && hi.x >= -tol && hi.y >= -tol && hi.z >= -tol
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Child {
    pub pose: Matrix4,
    pub entity: Entity,
}

/// A node of the executed scene. Leaves carry a primitive; composites carry
/// posed children. A composite with zero children is legal but has no
/// geometry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entity {
    pub word: Word,
    pub embedding: Embedding,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub primitive: Option<PrimitiveSpec>,
    #[serde(default)]
    pub children: Vec<Child>,
}

pub type Path = Vec<usize>;

impl Entity {
    pub fn leaf(word: Word, embedding: Embedding, primitive: PrimitiveSpec) -> Self {
        Entity {
            word,
            embedding,
            primitive: Some(primitive),
            children: Vec::new(),
        }
    }

    pub fn composite(word: Word, embedding: Embedding, children: Vec<Child>) -> Self {
        Entity {
            word,
            embedding,
            primitive: None,
            children,
        }
    }

    pub fn is_leaf(&self) -> bool {
        self.primitive.is_some()
    }

    pub fn node_count(&self) -> usize {
        1 + self.children.iter().map(|c| c.entity.node_count()).sum::<usize>()
    }

    pub fn leaf_count(&self) -> usize {
        usize::from(self.is_leaf()) + self.children.iter().map(|c| c.entity.leaf_count()).sum::<usize>()
    }

    /// Tree height counted in nodes (a single node has depth 1).
    pub fn depth(&self) -> usize {
        1 + self.children.iter().map(|c| c.entity.depth()).max().unwrap_or(0)
    }

    pub fn get(&self, path: &[usize]) -> Option<&Entity> {
        path.iter()
            .try_fold(self, |e, &i| e.children.get(i).map(|c| &c.entity))
    }

    /// Product of the poses along `path`, root first.
    pub fn pose_along(&self, path: &[usize]) -> Option<Matrix4> {
        let mut e = self;
        let mut m = Matrix4::IDENTITY;
        for &i in path {
            let c = e.children.get(i)?;
            m = m * c.pose;
            e = &c.entity;
        }
        Some(m)
    }

    /// Visits every node in preorder with its path.
    pub fn visit_preorder<'a>(&'a self, f: &mut impl FnMut(&'a Entity, &[usize])) {
        fn go<'a>(e: &'a Entity, path: &mut Vec<usize>, f: &mut impl FnMut(&'a Entity, &[usize])) {
            f(e, path);
            for (i, c) in e.children.iter().enumerate() {
                path.push(i);
                go(&c.entity, path, f);
                path.pop();
            }
        }
        go(self, &mut Vec::new(), f);
    }

    pub fn bounding_box(&self) -> Result<Aabb, SceneError> {
        flatten(self)
            .iter()
            .map(|p| p.spec.world_aabb(&p.world))
            .reduce(|a, b| a.union(&b))
            .ok_or_else(|| SceneError::EmptyEntity(self.word.to_string()))
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("entity serialization is infallible")
    }
}

pub fn compute_shape_min(e: &Entity) -> Result<Vector3, SceneError> {
    Ok(e.bounding_box()?.min)
}

pub fn compute_shape_max(e: &Entity) -> Result<Vector3, SceneError> {
    Ok(e.bounding_box()?.max)
}

pub fn compute_shape_center(e: &Entity) -> Result<Vector3, SceneError> {
    Ok(e.bounding_box()?.center())
}

pub fn compute_shape_sizes(e: &Entity) -> Result<Vector3, SceneError> {
    Ok(e.bounding_box()?.sizes())
}

/// Numbers each node with its 1-based preorder position.
pub fn assign_embedding_ids(mut root: Entity) -> Entity {
    assign_ids_in_place(&mut root);
    root
}

pub fn assign_ids_in_place(root: &mut Entity) {
    fn go(e: &mut Entity, next: &mut u32) {
        e.embedding.id = Some(*next);
        *next += 1;
        for c in &mut e.children {
            go(&mut c.entity, next);
        }
    }
    let mut next = 1;
    go(root, &mut next);
}

/// A leaf primitive with its world pose and provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlatPrimitive {
    pub spec: PrimitiveSpec,
    pub world: Matrix4,
    pub path: Path,
    pub word: Word,
    pub embedding_id: u32,
    pub group_id: u32,
}

/// Depth-first, left-to-right enumeration of leaves with world poses.
/// `embedding_id` is the leaf's preorder position and `group_id` its
/// correspondence group.
pub fn flatten(root: &Entity) -> Vec<FlatPrimitive> {
    let groups = group_ids_preorder(root);
    let mut out = Vec::new();
    let mut counter = 0usize;
    let mut path = Vec::new();
    flatten_rec(root, Matrix4::IDENTITY, &mut path, &mut counter, &groups, &mut out);
    out
}

fn flatten_rec(
    e: &Entity,
    world: Matrix4,
    path: &mut Vec<usize>,
    counter: &mut usize,
    groups: &[u32],
    out: &mut Vec<FlatPrimitive>,
) {
    let index = *counter;
    *counter += 1;
    if let Some(spec) = &e.primitive {
        out.push(FlatPrimitive {
            spec: spec.clone(),
            world,
            path: path.clone(),
            word: e.word.clone(),
            embedding_id: index as u32 + 1,
            group_id: groups[index],
        });
    }
    for (i, c) in e.children.iter().enumerate() {
        path.push(i);
        flatten_rec(&c.entity, world * c.pose, path, counter, groups, out);
        path.pop();
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphNode {
    pub label: String,
    pub word: Word,
    pub embedding_id: u32,
}

/// Computation graph of an executed scene: one node per entity instance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Graph {
    pub nodes: Vec<GraphNode>,
    pub edges: Vec<(usize, usize)>,
}

impl Graph {
    pub fn out_degree(&self, node: usize) -> usize {
        self.edges.iter().filter(|(a, _)| *a == node).count()
    }

    pub fn to_dot(&self) -> String {
        let q = |s: &str| format!("\"{}\"", s.replace('\\', "\\\\").replace('"', "\\\""));
        let mut out = String::from("digraph scene {\n");
        for n in &self.nodes {
            out.push_str(&format!("  {};\n", q(&n.label)));
        }
        for (a, b) in &self.edges {
            out.push_str(&format!(
                "  {} -> {};\n",
                q(&self.nodes[*a].label),
                q(&self.nodes[*b].label)
            ));
        }
        out.push_str("}\n");
        out
    }
}

pub fn computation_graph(root: &Entity) -> Graph {
    let mut nodes = Vec::new();
    let mut edges = Vec::new();
    // preorder index of the most recent node at each depth
    let mut stack: Vec<usize> = Vec::new();
    root.visit_preorder(&mut |e, path| {
        let idx = nodes.len();
        let id = idx as u32 + 1;
        nodes.push(GraphNode {
            label: format!("{}#{}", e.word, id),
            word: e.word.clone(),
            embedding_id: id,
        });
        stack.truncate(path.len());
        if let Some(&parent) = stack.last() {
            edges.push((parent, idx));
        }
        stack.push(idx);
    });
    Graph { nodes, edges }
}

/// Repeated-instance groups keyed by 1-based group id (first occurrence in
/// preorder). Singleton groups are included.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CorrespondenceGroups {
    pub groups: BTreeMap<u32, Vec<Path>>,
}

impl CorrespondenceGroups {
    /// Groups with at least two members.
    pub fn repeated(&self) -> impl Iterator<Item = (&u32, &Vec<Path>)> {
        self.groups.iter().filter(|(_, m)| m.len() >= 2)
    }
}

pub fn correspondence_groups(root: &Entity) -> CorrespondenceGroups {
    let ids = group_ids_preorder(root);
    let mut groups: BTreeMap<u32, Vec<Path>> = BTreeMap::new();
    let mut i = 0;
    root.visit_preorder(&mut |_, path| {
        groups.entry(ids[i]).or_default().push(path.to_vec());
        i += 1;
    });
    CorrespondenceGroups { groups }
}

fn canon(v: f64) -> u64 {
    if v == 0.0 {
        0
    } else {
        v.to_bits()
    }
}

#[derive(PartialEq, Eq, Hash)]
enum AttrKey {
    Number(u64),
    Vector(Vec<u64>),
    Text(String),
}

#[derive(PartialEq, Eq, Hash)]
struct NodeKey {
    word: String,
    attrs: Vec<(String, AttrKey)>,
    primitive: Option<(String, Vec<u64>, bool, bool)>,
    children: Vec<(Vec<u64>, u32)>,
}

fn primitive_key(p: &PrimitiveSpec) -> (String, Vec<u64>, bool, bool) {
    let mut nums: Vec<f64> = p.color.to_vec();
    let (tag, flags) = match &p.geometry {
        Geometry::Cube { size } => {
            nums.extend(size.to_array());
            ("cube".to_string(), (false, false))
        }
        Geometry::Sphere { radius } => {
            nums.push(*radius);
            ("sphere".to_string(), (false, false))
        }
        Geometry::Cylinder { radius, p0, p1 } => {
            nums.push(*radius);
            nums.extend(p0.to_array());
            nums.extend(p1.to_array());
            ("cylinder".to_string(), (false, false))
        }
        Geometry::Cuboid {
            block,
            size,
            fill,
            delete,
        } => {
            nums.extend(size.iter().map(|&s| s as f64));
            (format!("cuboid:{block}"), (*fill, *delete))
        }
    };
    (tag, nums.into_iter().map(canon).collect(), flags.0, flags.1)
}

/// Structural class of every node, bottom-up interned, then renumbered by
/// first preorder occurrence. The node's own pose is not part of its class;
/// poses of its children are.
fn group_ids_preorder(root: &Entity) -> Vec<u32> {
    fn class_of(
        e: &Entity,
        interner: &mut HashMap<NodeKey, u32>,
        classes: &mut Vec<(usize, u32)>,
        counter: &mut usize,
    ) -> u32 {
        let index = *counter;
        *counter += 1;
        let children = e
            .children
            .iter()
            .map(|c| {
                let pose = c.pose.as_row_major().iter().map(|v| canon(*v)).collect();
                (pose, class_of(&c.entity, interner, classes, counter))
            })
            .collect();
        let attrs = e
            .embedding
            .attrs
            .iter()
            .map(|(k, v)| {
                let key = match v {
                    AttributeValue::Number(n) => AttrKey::Number(canon(*n)),
                    AttributeValue::Vector(xs) => AttrKey::Vector(xs.iter().map(|x| canon(*x)).collect()),
                    AttributeValue::Text(s) => AttrKey::Text(s.clone()),
                };
                (k.clone(), key)
            })
            .collect();
        let key = NodeKey {
            word: e.word.to_string(),
            attrs,
            primitive: e.primitive.as_ref().map(primitive_key),
            children,
        };
        let next = interner.len() as u32;
        let class = *interner.entry(key).or_insert(next);
        classes.push((index, class));
        class
    }

    let mut interner = HashMap::new();
    let mut classes = Vec::new();
    let mut counter = 0;
    class_of(root, &mut interner, &mut classes, &mut counter);
    classes.sort_by_key(|(i, _)| *i);

    let mut renumber: HashMap<u32, u32> = HashMap::new();
    classes
        .into_iter()
        .map(|(_, class)| {
            let next = renumber.len() as u32 + 1;
            *renumber.entry(class).or_insert(next)
        })
        .collect()
}
