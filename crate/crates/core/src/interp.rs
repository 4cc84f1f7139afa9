//! Tree-walking execution of Scene Language programs.
//!
//! `call` of a bound word evaluates its entity function with the first
//! embedding as `z` and the rest as `γ`; `call` of an unbound word builds a
//! primitive leaf from the embedding's attributes. After construction every
//! entity gets its preorder embedding id.

use std::collections::HashMap;
use std::fmt;

use indexmap::IndexMap;
use serde::Serialize;
use thiserror::Error;

use crate::dsl::ast::*;
use crate::dsl::validate::root_candidates;
use crate::math::{self, Matrix4, TransformError, Vector3};
use crate::scene::{
    assign_ids_in_place, AttributeValue, Child, Embedding, Entity, Geometry, PrimitiveSpec, SceneError, Word,
    DEFAULT_COLOR,
};

pub const DEFAULT_DEPTH_LIMIT: usize = 64;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExecErrorKind {
    #[error("no root entity function: every bound word is called by another bind")]
    NoRoot,
    #[error("ambiguous root: candidates are {}; pass an entry word", quote_words(.0))]
    AmbiguousRoot(Vec<Word>),
    #[error("entry word \"{0}\" is not bound")]
    UnknownEntry(Word),
    #[error("\"{0}\" is not a 4D (temporal) entity function")]
    NotTemporal(Word),
    #[error("\"{0}\" is a 4D entity function; execute it as a temporal scene")]
    TemporalRoot(Word),
    #[error("recursion depth limit {limit} exceeded: {}", .cycle.iter().map(|w| w.as_str()).collect::<Vec<_>>().join(" -> "))]
    DepthLimit { limit: usize, cycle: Vec<Word> },
    #[error("primitive \"{word}\": {message}")]
    PrimitiveSpec { word: Word, message: String },
    #[error("invalid loop count {0}: must be a non-negative integer")]
    InvalidLoop(f64),
    #[error("arithmetic error: {0}")]
    Arithmetic(String),
    #[error("index {index} out of range for length {len}")]
    Index { index: f64, len: usize },
    #[error("type error: expected {expected}, found {found}")]
    Type { expected: String, found: String },
    #[error("missing attribute \"{0}\"")]
    MissingAttribute(String),
    #[error(transparent)]
    Transform(#[from] TransformError),
    #[error(transparent)]
    Scene(#[from] SceneError),
    #[error("rotation and reflection transforms are not allowed in Minecraft mode")]
    RotationForbidden,
}

fn quote_words(ws: &[Word]) -> String {
    ws.iter().map(|w| format!("\"{w}\"")).collect::<Vec<_>>().join(", ")
}

#[derive(Debug, Clone, PartialEq, Error)]
pub struct ExecError {
    pub kind: ExecErrorKind,
    pub span: Option<Span>,
}

impl fmt::Display for ExecError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.kind.fmt(f)
    }
}

impl ExecError {
    fn at(kind: impl Into<ExecErrorKind>, span: Span) -> Self {
        ExecError {
            kind: kind.into(),
            span: Some(span),
        }
    }

    /// `file:line:col: error: message`, or just the message without a span.
    pub fn render(&self, program: &Program) -> String {
        match self.span {
            Some(s) => crate::dsl::Diagnostic::error(self.to_string(), s).render(&program.source),
            None => format!("{}: error: {}", program.source.name, self),
        }
    }
}

impl From<ExecErrorKind> for ExecError {
    fn from(kind: ExecErrorKind) -> Self {
        ExecError { kind, span: None }
    }
}

type Result<T> = std::result::Result<T, ExecError>;

/// How unbound words are turned into leaves.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LeafMode {
    /// `shape` in {cube, sphere, cylinder}.
    #[default]
    Shapes,
    /// Minecraft cuboids (`block`, `size`, `fill`, `delete`); rotations and
    /// reflections are rejected.
    Minecraft,
}

#[derive(Debug, Clone)]
pub struct ExecOptions {
    pub entry: Option<Word>,
    pub depth_limit: usize,
    pub mode: LeafMode,
}

impl Default for ExecOptions {
    fn default() -> Self {
        ExecOptions {
            entry: None,
            depth_limit: DEFAULT_DEPTH_LIMIT,
            mode: LeafMode::Shapes,
        }
    }
}

impl ExecOptions {
    pub fn with_entry(mut self, entry: Option<Word>) -> Self {
        self.entry = entry;
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExecutionReport {
    pub root_word: Word,
    pub entity_count: usize,
    pub leaf_count: usize,
    pub max_depth_reached: usize,
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, PartialEq)]
enum Value {
    Num(f64),
    Bool(bool),
    Str(String),
    Vector(Vec<f64>),
    Matrix(Matrix4),
    Embedding(Embedding),
    EmbeddingList(Vec<Embedding>),
    Entity(Entity),
    Posed(Box<Child>),
    SubEntities(Vec<Child>),
}

impl Value {
    fn type_name(&self) -> &'static str {
        match self {
            Value::Num(_) => "Float",
            Value::Bool(_) => "Bool",
            Value::Str(_) => "String",
            Value::Vector(_) => "Vector",
            Value::Matrix(_) => "Matrix",
            Value::Embedding(_) => "Embedding",
            Value::EmbeddingList(_) => "List[Embedding]",
            Value::Entity(_) => "Entity",
            Value::Posed(_) => "Tuple[Entity, Matrix]",
            Value::SubEntities(_) => "List[Tuple[Entity, Matrix]]",
        }
    }
}

fn type_err(expected: &str, found: &Value, span: Span) -> ExecError {
    ExecError::at(
        ExecErrorKind::Type {
            expected: expected.to_string(),
            found: found.type_name().to_string(),
        },
        span,
    )
}

/// Picks the root word: the override if given, otherwise the unique bound
/// word that no other bind calls.
pub fn select_root(program: &Program, entry: Option<&Word>) -> Result<Word> {
    if let Some(w) = entry {
        return match program.find_bind(w.as_str()) {
            Some(b) => Ok(b.word.clone()),
            None => Err(ExecErrorKind::UnknownEntry(w.clone()).into()),
        };
    }
    let candidates = root_candidates(program);
    match candidates.as_slice() {
        [] => Err(ExecErrorKind::NoRoot.into()),
        [one] => Ok(one.word.clone()),
        many => Err(ExecErrorKind::AmbiguousRoot(many.iter().map(|b| b.word.clone()).collect()).into()),
    }
}

/// Executes a static (3D) program to its scene entity.
pub fn execute(program: &Program, options: &ExecOptions) -> Result<(Entity, ExecutionReport)> {
    let root = select_root(program, options.entry.as_ref())?;
    let bind = program.find_bind(root.as_str()).expect("root is bound");
    if bind.func.is_temporal() {
        return Err(ExecErrorKind::TemporalRoot(root).into());
    }
    let mut it = Interpreter::new(program, options);
    let mut embeddings = Vec::new();
    for d in &bind.defaults {
        it.collect_embeddings(d, &[], &mut embeddings)?;
    }
    let mut embeddings = embeddings.into_iter();
    let z = embeddings.next().unwrap_or_default();
    let mut entity = it.call(&root, z, embeddings.collect(), bind.span)?;
    assign_ids_in_place(&mut entity);
    let report = ExecutionReport {
        root_word: root,
        entity_count: entity.node_count(),
        leaf_count: entity.leaf_count(),
        max_depth_reached: it.max_depth,
        warnings: it.warnings,
    };
    Ok((entity, report))
}

/// Executes a 4D program: the root must be `(lambda () (list <entity>*))`.
/// Each frame gets its own preorder ids.
pub fn execute_temporal(program: &Program, options: &ExecOptions) -> Result<(Vec<Entity>, ExecutionReport)> {
    let root = select_root(program, options.entry.as_ref())?;
    let bind = program.find_bind(root.as_str()).expect("root is bound");
    let FuncDef::Temporal { frames, .. } = &bind.func else {
        return Err(ExecErrorKind::NotTemporal(root).into());
    };
    let mut it = Interpreter::new(program, options);
    it.enter(&root, bind.span)?;
    let mut out = Vec::with_capacity(frames.len());
    for f in frames {
        match it.eval(f, &[])? {
            Value::Entity(mut e) => {
                assign_ids_in_place(&mut e);
                out.push(e);
            }
            other => return Err(type_err("Entity", &other, f.span)),
        }
    }
    it.leave();
    if out.is_empty() {
        it.warnings.push(format!("4D function \"{root}\" produced no frames"));
    }
    let report = ExecutionReport {
        root_word: root,
        entity_count: out.iter().map(Entity::node_count).sum(),
        leaf_count: out.iter().map(Entity::leaf_count).sum(),
        max_depth_reached: it.max_depth,
        warnings: it.warnings,
    };
    Ok((out, report))
}

/// True when the selected root is a 4D entity function.
pub fn root_is_temporal(program: &Program, entry: Option<&Word>) -> Result<bool> {
    let root = select_root(program, entry)?;
    Ok(program.find_bind(root.as_str()).is_some_and(|b| b.func.is_temporal()))
}

type Scope<'s> = [(&'s str, Value)];

struct Interpreter<'p> {
    binds: HashMap<&'p str, &'p BindExpr>,
    depth_limit: usize,
    mode: LeafMode,
    stack: Vec<Word>,
    max_depth: usize,
    warnings: Vec<String>,
}

impl<'p> Interpreter<'p> {
    fn new(program: &'p Program, options: &ExecOptions) -> Self {
        // First bind wins; duplicates are a validation error.
        let mut binds = HashMap::new();
        for b in &program.binds {
            binds.entry(b.word.as_str()).or_insert(b);
        }
        Interpreter {
            binds,
            depth_limit: options.depth_limit.max(1),
            mode: options.mode,
            stack: Vec::new(),
            max_depth: 0,
            warnings: Vec::new(),
        }
    }

    fn enter(&mut self, word: &Word, span: Span) -> Result<()> {
        if self.stack.len() >= self.depth_limit {
            let start = self.stack.iter().rposition(|w| w == word).unwrap_or(0);
            let mut cycle: Vec<Word> = self.stack[start..].to_vec();
            cycle.push(word.clone());
            return Err(ExecError::at(
                ExecErrorKind::DepthLimit {
                    limit: self.depth_limit,
                    cycle,
                },
                span,
            ));
        }
        self.stack.push(word.clone());
        self.max_depth = self.max_depth.max(self.stack.len());
        Ok(())
    }

    fn leave(&mut self) {
        self.stack.pop();
    }

    fn call(&mut self, word: &Word, z: Embedding, rest: Vec<Embedding>, span: Span) -> Result<Entity> {
        let bind = self.binds.get(word.as_str()).copied();
        match bind.map(|b| &b.func) {
            Some(FuncDef::Entity { own, rest: rest_name, body, .. }) => {
                self.enter(word, span)?;
                let scope = [
                    (own.text.as_str(), Value::Embedding(z.clone())),
                    (rest_name.text.as_str(), Value::EmbeddingList(rest)),
                ];
                let children = match self.eval(body, &scope)? {
                    Value::SubEntities(c) => c,
                    other => return Err(type_err("List[Tuple[Entity, Matrix]]", &other, body.span)),
                };
                self.leave();
                Ok(Entity::composite(word.clone(), z, children))
            }
            Some(FuncDef::Temporal { .. }) => Err(ExecError::at(
                ExecErrorKind::Type {
                    expected: "entity function".into(),
                    found: format!("4D entity function \"{word}\""),
                },
                span,
            )),
            None => {
                // Leaves count toward depth so reports reflect tree height.
                self.enter(word, span)?;
                self.leave();
                let primitive = self
                    .leaf_primitive(&z)
                    .map_err(|message| ExecError::at(ExecErrorKind::PrimitiveSpec { word: word.clone(), message }, span))?;
                Ok(Entity::leaf(word.clone(), z, primitive))
            }
        }
    }

    fn leaf_primitive(&self, z: &Embedding) -> std::result::Result<PrimitiveSpec, String> {
        match self.mode {
            LeafMode::Shapes => shape_primitive(z),
            LeafMode::Minecraft => cuboid_primitive(z),
        }
    }

    fn lookup(scope: &Scope<'_>, name: &str, span: Span) -> Result<Value> {
        scope
            .iter()
            .rev()
            .find(|(n, _)| *n == name)
            .map(|(_, v)| v.clone())
            .ok_or_else(|| {
                ExecError::at(
                    ExecErrorKind::Type {
                        expected: "bound variable".into(),
                        found: format!("unbound `{name}`"),
                    },
                    span,
                )
            })
    }

    fn collect_embeddings(&mut self, e: &Expr, scope: &Scope<'_>, out: &mut Vec<Embedding>) -> Result<()> {
        match self.eval(e, scope)? {
            Value::Embedding(z) => out.push(z),
            Value::EmbeddingList(zs) => out.extend(zs),
            other => return Err(type_err("Embedding", &other, e.span)),
        }
        Ok(())
    }

    fn eval(&mut self, e: &Expr, scope: &Scope<'_>) -> Result<Value> {
        let span = e.span;
        match &e.kind {
            ExprKind::Number(n) => Ok(Value::Num(*n)),
            ExprKind::Str(s) => Ok(Value::Str(s.clone())),
            ExprKind::Var(name) => Self::lookup(scope, name, span),
            ExprKind::Vector(xs) => {
                let v = xs.iter().map(|x| self.num(x, scope)).collect::<Result<Vec<_>>>()?;
                if !(2..=4).contains(&v.len()) {
                    return Err(ExecError::at(
                        ExecErrorKind::Type {
                            expected: "2 to 4 vector components".into(),
                            found: v.len().to_string(),
                        },
                        span,
                    ));
                }
                Ok(Value::Vector(v))
            }
            ExprKind::Embed(fields) => {
                let mut attrs = IndexMap::new();
                for f in fields {
                    let value = if f.values.len() == 1 {
                        match self.eval(&f.values[0], scope)? {
                            Value::Num(n) => AttributeValue::Number(n),
                            Value::Str(s) => AttributeValue::Text(s),
                            Value::Vector(v) => AttributeValue::Vector(v),
                            other => return Err(type_err("number, vector or string attribute", &other, f.values[0].span)),
                        }
                    } else {
                        let v = f.values.iter().map(|x| self.num(x, scope)).collect::<Result<Vec<_>>>()?;
                        if v.len() > 4 {
                            return Err(ExecError::at(
                                ExecErrorKind::Type {
                                    expected: "at most 4 vector components".into(),
                                    found: v.len().to_string(),
                                },
                                f.key_span,
                            ));
                        }
                        AttributeValue::Vector(v)
                    };
                    attrs.insert(f.key.clone(), value);
                }
                Ok(Value::Embedding(Embedding {
                    id: None,
                    attrs,
                    origin: Some(span.start),
                }))
            }
            ExprKind::If(c, a, b) => {
                let cond = match self.eval(c, scope)? {
                    Value::Bool(b) => b,
                    other => return Err(type_err("Bool", &other, c.span)),
                };
                self.eval(if cond { a } else { b }, scope)
            }
            ExprKind::Call { word, args, .. } => {
                let mut embeddings = Vec::new();
                for a in args {
                    self.collect_embeddings(a, scope, &mut embeddings)?;
                }
                let mut it = embeddings.into_iter();
                let z = it.next().unwrap_or_else(|| {
                    self.warnings
                        .push(format!("call of \"{word}\" without embeddings; using empty attributes"));
                    Embedding::default()
                });
                Ok(Value::Entity(self.call(word, z, it.collect(), span)?))
            }
            ExprKind::Transform { entity, pose } => {
                let entity = match self.eval(entity, scope)? {
                    Value::Entity(e) => e,
                    other => return Err(type_err("Entity", &other, entity.span)),
                };
                let pose = self.matrix(pose, scope)?;
                Ok(Value::Posed(Box::new(Child { pose, entity })))
            }
            ExprKind::Union(xs) => {
                let mut children = Vec::with_capacity(xs.len());
                for x in xs {
                    children.push(self.posed(x, scope)?);
                }
                Ok(Value::SubEntities(children))
            }
            ExprKind::UnionLoop { count, index, body } => {
                let n = self.num(count, scope)?;
                if n < 0.0 || n.fract() != 0.0 {
                    return Err(ExecError::at(ExecErrorKind::InvalidLoop(n), count.span));
                }
                let mut inner: Vec<(&str, Value)> = scope.to_vec();
                inner.push((index.text.as_str(), Value::Num(0.0)));
                let last = inner.len() - 1;
                let mut children = Vec::with_capacity(n as usize);
                for i in 0..n as u64 {
                    inner[last].1 = Value::Num(i as f64);
                    children.push(self.posed(body, &inner)?);
                }
                Ok(Value::SubEntities(children))
            }
            ExprKind::Builtin(b, args) => self.builtin(*b, args, scope, span),
        }
    }

    fn num(&mut self, e: &Expr, scope: &Scope<'_>) -> Result<f64> {
        match self.eval(e, scope)? {
            Value::Num(n) => Ok(n),
            other => Err(type_err("Float", &other, e.span)),
        }
    }

    fn int(&mut self, e: &Expr, scope: &Scope<'_>) -> Result<usize> {
        let n = self.num(e, scope)?;
        if n < 0.0 || n.fract() != 0.0 {
            return Err(ExecError::at(
                ExecErrorKind::Type {
                    expected: "non-negative integer".into(),
                    found: n.to_string(),
                },
                e.span,
            ));
        }
        Ok(n as usize)
    }

    fn vector3(&mut self, e: &Expr, scope: &Scope<'_>) -> Result<Vector3> {
        match self.eval(e, scope)? {
            Value::Vector(v) if v.len() == 3 => Ok(Vector3::new(v[0], v[1], v[2])),
            other => Err(type_err("3-component Vector", &other, e.span)),
        }
    }

    fn matrix(&mut self, e: &Expr, scope: &Scope<'_>) -> Result<Matrix4> {
        match self.eval(e, scope)? {
            Value::Matrix(m) => Ok(m),
            other => Err(type_err("Matrix", &other, e.span)),
        }
    }

    fn posed(&mut self, e: &Expr, scope: &Scope<'_>) -> Result<Child> {
        match self.eval(e, scope)? {
            Value::Posed(c) => Ok(*c),
            other => Err(type_err("Tuple[Entity, Matrix]", &other, e.span)),
        }
    }

    fn embedding_list(&mut self, e: &Expr, scope: &Scope<'_>) -> Result<Vec<Embedding>> {
        match self.eval(e, scope)? {
            Value::EmbeddingList(l) => Ok(l),
            other => Err(type_err("List[Embedding]", &other, e.span)),
        }
    }

    fn bool(&mut self, e: &Expr, scope: &Scope<'_>) -> Result<bool> {
        match self.eval(e, scope)? {
            Value::Bool(b) => Ok(b),
            other => Err(type_err("Bool", &other, e.span)),
        }
    }

    fn entity(&mut self, e: &Expr, scope: &Scope<'_>) -> Result<Entity> {
        match self.eval(e, scope)? {
            Value::Entity(x) => Ok(x),
            other => Err(type_err("Entity", &other, e.span)),
        }
    }

    fn no_rotation(&self, span: Span) -> Result<()> {
        if self.mode == LeafMode::Minecraft {
            Err(ExecError::at(ExecErrorKind::RotationForbidden, span))
        } else {
            Ok(())
        }
    }

    fn builtin(&mut self, b: Builtin, args: &[Expr], scope: &Scope<'_>, span: Span) -> Result<Value> {
        use Builtin::*;
        let tf = |r: std::result::Result<Matrix4, TransformError>| r.map(Value::Matrix).map_err(|e| ExecError::at(e, span));
        match b {
            Add | Sub => {
                let vals = args.iter().map(|a| self.eval(a, scope)).collect::<Result<Vec<_>>>()?;
                let sign = if b == Add { 1.0 } else { -1.0 };
                if vals.len() == 1 && b == Sub {
                    return match &vals[0] {
                        Value::Num(n) => Ok(Value::Num(-n)),
                        Value::Vector(v) => Ok(Value::Vector(v.iter().map(|x| -x).collect())),
                        other => Err(type_err("Float or Vector", other, args[0].span)),
                    };
                }
                let mut acc = vals[0].clone();
                for (v, a) in vals[1..].iter().zip(&args[1..]) {
                    acc = match (acc, v) {
                        (Value::Num(x), Value::Num(y)) => Value::Num(x + sign * y),
                        (Value::Vector(x), Value::Vector(y)) if x.len() == y.len() => {
                            Value::Vector(x.iter().zip(y).map(|(p, q)| p + sign * q).collect())
                        }
                        (Value::Num(_) | Value::Vector(_), other) => {
                            return Err(type_err("operand matching the first argument", other, a.span))
                        }
                        (other, _) => return Err(type_err("Float or Vector", &other, args[0].span)),
                    };
                }
                Ok(acc)
            }
            Mul => {
                let mut scalar = 1.0;
                let mut vector: Option<Vec<f64>> = None;
                for a in args {
                    match self.eval(a, scope)? {
                        Value::Num(n) => scalar *= n,
                        Value::Vector(v) if vector.is_none() => vector = Some(v),
                        other => return Err(type_err("Float (or a single Vector)", &other, a.span)),
                    }
                }
                Ok(match vector {
                    Some(v) => Value::Vector(v.into_iter().map(|x| x * scalar).collect()),
                    None => Value::Num(scalar),
                })
            }
            Div => {
                let lhs = self.eval(&args[0], scope)?;
                let d = self.num(&args[1], scope)?;
                if d == 0.0 {
                    return Err(ExecError::at(ExecErrorKind::Arithmetic("division by zero".into()), span));
                }
                match lhs {
                    Value::Num(n) => Ok(Value::Num(n / d)),
                    Value::Vector(v) => Ok(Value::Vector(v.into_iter().map(|x| x / d).collect())),
                    other => Err(type_err("Float or Vector", &other, args[0].span)),
                }
            }
            Mod => {
                let a = self.num(&args[0], scope)?;
                let m = self.num(&args[1], scope)?;
                if m == 0.0 {
                    return Err(ExecError::at(ExecErrorKind::Arithmetic("modulo by zero".into()), span));
                }
                Ok(Value::Num(a.rem_euclid(m)))
            }
            Floor | Abs | Sqrt | Sin | Cos => {
                let x = self.num(&args[0], scope)?;
                let y = match b {
                    Floor => x.floor(),
                    Abs => x.abs(),
                    Sin => x.sin(),
                    Cos => x.cos(),
                    _ => {
                        if x < 0.0 {
                            return Err(ExecError::at(
                                ExecErrorKind::Arithmetic(format!("square root of negative number {x}")),
                                span,
                            ));
                        }
                        x.sqrt()
                    }
                };
                Ok(Value::Num(y))
            }
            Min | Max => {
                let xs = args.iter().map(|a| self.num(a, scope)).collect::<Result<Vec<_>>>()?;
                let f = if b == Min { f64::min } else { f64::max };
                Ok(Value::Num(xs[1..].iter().fold(xs[0], |acc, x| f(acc, *x))))
            }
            Pi => Ok(Value::Num(std::f64::consts::PI)),
            Lt | Le | Ge | Gt => {
                let x = self.num(&args[0], scope)?;
                let y = self.num(&args[1], scope)?;
                Ok(Value::Bool(match b {
                    Lt => x < y,
                    Le => x <= y,
                    Ge => x >= y,
                    _ => x > y,
                }))
            }
            NumEq => {
                let x = self.eval(&args[0], scope)?;
                let y = self.eval(&args[1], scope)?;
                match (&x, &y) {
                    (Value::Num(p), Value::Num(q)) => Ok(Value::Bool(p == q)),
                    (Value::Str(p), Value::Str(q)) => Ok(Value::Bool(p == q)),
                    (Value::Num(_) | Value::Str(_), other) => Err(type_err(x.type_name(), other, args[1].span)),
                    (other, _) => Err(type_err("Float or String", other, args[0].span)),
                }
            }
            And => {
                for a in args {
                    if !self.bool(a, scope)? {
                        return Ok(Value::Bool(false));
                    }
                }
                Ok(Value::Bool(true))
            }
            Or => {
                for a in args {
                    if self.bool(a, scope)? {
                        return Ok(Value::Bool(true));
                    }
                }
                Ok(Value::Bool(false))
            }
            Not => Ok(Value::Bool(!self.bool(&args[0], scope)?)),
            Nth | Car => {
                let (k, seq) = if b == Car {
                    (0.0, self.eval(&args[0], scope)?)
                } else {
                    (self.num(&args[0], scope)?, self.eval(&args[1], scope)?)
                };
                let seq_span = args.last().expect("arity checked").span;
                let len = match &seq {
                    Value::EmbeddingList(l) => l.len(),
                    Value::Vector(v) => v.len(),
                    other => return Err(type_err("List[Embedding] or Vector", other, seq_span)),
                };
                if k < 0.0 || k.fract() != 0.0 || k as usize >= len {
                    return Err(ExecError::at(ExecErrorKind::Index { index: k, len }, span));
                }
                Ok(match seq {
                    Value::EmbeddingList(mut l) => Value::Embedding(l.swap_remove(k as usize)),
                    Value::Vector(v) => Value::Num(v[k as usize]),
                    _ => unreachable!(),
                })
            }
            Drop | Cdr => {
                let (k, list) = if b == Cdr {
                    (1, self.embedding_list(&args[0], scope)?)
                } else {
                    (self.int(&args[0], scope)?, self.embedding_list(&args[1], scope)?)
                };
                if k > list.len() {
                    return Err(ExecError::at(
                        ExecErrorKind::Index {
                            index: k as f64,
                            len: list.len(),
                        },
                        span,
                    ));
                }
                Ok(Value::EmbeddingList(list.into_iter().skip(k).collect()))
            }
            Length => match self.eval(&args[0], scope)? {
                Value::EmbeddingList(l) => Ok(Value::Num(l.len() as f64)),
                Value::Vector(v) => Ok(Value::Num(v.len() as f64)),
                other => Err(type_err("List[Embedding] or Vector", &other, args[0].span)),
            },
            Get => {
                let z = match self.eval(&args[0], scope)? {
                    Value::Embedding(z) => z,
                    other => return Err(type_err("Embedding", &other, args[0].span)),
                };
                let key = match self.eval(&args[1], scope)? {
                    Value::Str(s) => s,
                    other => return Err(type_err("String", &other, args[1].span)),
                };
                match z.attrs.get(&key) {
                    Some(AttributeValue::Number(n)) => Ok(Value::Num(*n)),
                    Some(AttributeValue::Vector(v)) => Ok(Value::Vector(v.clone())),
                    Some(AttributeValue::Text(s)) => Ok(Value::Str(s.clone())),
                    None => match args.get(2) {
                        Some(d) => self.eval(d, scope),
                        None => Err(ExecError::at(ExecErrorKind::MissingAttribute(key), span)),
                    },
                }
            }
            Translate => {
                let v = self.vector3(&args[0], scope)?;
                tf(math::translate(v))
            }
            Rotate => {
                self.no_rotation(span)?;
                let angle = self.num(&args[0], scope)?;
                let dir = self.vector3(&args[1], scope)?;
                let point = self.vector3(&args[2], scope)?;
                tf(math::rotate(angle, dir, point))
            }
            Scale => {
                let f = self.vector3(&args[0], scope)?;
                let o = self.vector3(&args[1], scope)?;
                tf(math::scale(f, o))
            }
            Reflect => {
                self.no_rotation(span)?;
                let n = self.vector3(&args[0], scope)?;
                let p = self.vector3(&args[1], scope)?;
                tf(math::reflect(n, p))
            }
            MatMul => {
                let mut acc = self.matrix(&args[0], scope)?;
                for a in &args[1..] {
                    acc = acc * self.matrix(a, scope)?;
                }
                Ok(Value::Matrix(acc))
            }
            Identity => Ok(Value::Matrix(Matrix4::IDENTITY)),
            ShapeMin | ShapeMax | ShapeCenter | ShapeSizes => {
                let e = self.entity(&args[0], scope)?;
                let bb = e.bounding_box().map_err(|err| ExecError::at(err, span))?;
                let v = match b {
                    ShapeMin => bb.min,
                    ShapeMax => bb.max,
                    ShapeCenter => bb.center(),
                    _ => bb.sizes(),
                };
                Ok(Value::Vector(v.to_array().to_vec()))
            }
        }
    }
}

fn attr_vec3(z: &Embedding, key: &str) -> std::result::Result<Vector3, String> {
    match z.get(key) {
        Some(v) => v
            .as_vector3()
            .ok_or_else(|| format!("attribute `{key}` must be a 3-vector, found {}", v.type_name())),
        None => Err(format!("missing attribute `{key}`")),
    }
}

fn attr_num(z: &Embedding, key: &str) -> std::result::Result<f64, String> {
    match z.get(key) {
        Some(v) => v
            .as_number()
            .ok_or_else(|| format!("attribute `{key}` must be a number, found {}", v.type_name())),
        None => Err(format!("missing attribute `{key}`")),
    }
}

fn attr_color(z: &Embedding) -> std::result::Result<[f64; 3], String> {
    match z.get("color") {
        None => Ok(DEFAULT_COLOR),
        Some(_) => attr_vec3(z, "color").map(|c| c.to_array()),
    }
}

/// Leaf contract: `shape` is "cube" (needs `size`), "sphere" (`radius`) or
/// "cylinder" (`radius`, `p0`, `p1`); `color` is optional.
fn shape_primitive(z: &Embedding) -> std::result::Result<PrimitiveSpec, String> {
    let shape = match z.get("shape") {
        Some(AttributeValue::Text(s)) => s.as_str(),
        Some(other) => return Err(format!("attribute `shape` must be a string, found {}", other.type_name())),
        None => return Err("missing attribute `shape` (expected \"cube\", \"sphere\" or \"cylinder\")".into()),
    };
    let geometry = match shape {
        "cube" => Geometry::Cube {
            size: attr_vec3(z, "size")?,
        },
        "sphere" => Geometry::Sphere {
            radius: attr_num(z, "radius")?,
        },
        "cylinder" => Geometry::Cylinder {
            radius: attr_num(z, "radius")?,
            p0: attr_vec3(z, "p0")?,
            p1: attr_vec3(z, "p1")?,
        },
        other => return Err(format!("unknown shape \"{other}\" (expected \"cube\", \"sphere\" or \"cylinder\")")),
    };
    PrimitiveSpec::new(geometry, attr_color(z)?).map_err(|e| e.to_string())
}

fn flag(z: &Embedding, key: &str, default: bool) -> std::result::Result<bool, String> {
    match z.get(key) {
        None => Ok(default),
        Some(_) => attr_num(z, key).map(|n| n != 0.0),
    }
}

/// Minecraft leaf: `block`, integer `size`, optional `fill` (default 1) and
/// `delete` (default 0).
fn cuboid_primitive(z: &Embedding) -> std::result::Result<PrimitiveSpec, String> {
    let delete = flag(z, "delete", false)?;
    let fill = flag(z, "fill", true)?;
    let block = match z.get("block") {
        Some(AttributeValue::Text(s)) => s.clone(),
        Some(other) => return Err(format!("attribute `block` must be a string, found {}", other.type_name())),
        None if delete => "minecraft:air".to_string(),
        None => return Err("missing attribute `block`".into()),
    };
    let s = attr_vec3(z, "size")?;
    let mut size = [0u32; 3];
    for (i, slot) in size.iter_mut().enumerate() {
        let v = s[i];
        if v < 1.0 || v.fract() != 0.0 || v > u32::MAX as f64 {
            return Err(format!("cuboid size components must be positive integers, found {s}"));
        }
        *slot = v as u32;
    }
    PrimitiveSpec::new(
        Geometry::Cuboid {
            block,
            size,
            fill,
            delete,
        },
        DEFAULT_COLOR,
    )
    .map_err(|e| e.to_string())
}
