//! Static checks: unique binds, variable resolution, argument types and
//! root availability.

use std::collections::HashMap;
use std::fmt;

use super::ast::*;
use super::Diagnostic;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ty {
    Num,
    Bool,
    Str,
    Vector,
    Matrix,
    Embedding,
    EmbeddingList,
    Entity,
    /// `(transform <entity> <matrix>)`
    Posed,
    /// `union` / `union-loop` output
    SubEntities,
    /// An attribute read with `get`: number, vector or string.
    Attr,
    Any,
}

impl fmt::Display for Ty {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Ty::Num => "Float",
            Ty::Bool => "Bool",
            Ty::Str => "String",
            Ty::Vector => "Vector",
            Ty::Matrix => "Matrix",
            Ty::Embedding => "Embedding",
            Ty::EmbeddingList => "List[Embedding]",
            Ty::Entity => "Entity",
            Ty::Posed => "Tuple[Entity, Matrix]",
            Ty::SubEntities => "List[Tuple[Entity, Matrix]]",
            Ty::Attr => "attribute value",
            Ty::Any => "any",
        })
    }
}

fn fits(found: Ty, expected: Ty) -> bool {
    found == expected
        || found == Ty::Any
        || (found == Ty::Attr && matches!(expected, Ty::Num | Ty::Vector | Ty::Str))
}

fn join(a: Ty, b: Ty) -> Ty {
    if a == b {
        a
    } else {
        Ty::Any
    }
}

struct Checker {
    diags: Vec<Diagnostic>,
    scope: Vec<(String, Ty)>,
}

impl Checker {
    fn report(&mut self, span: Span, msg: impl Into<String>) {
        self.diags.push(Diagnostic::error(msg, span));
    }

    fn expect(&mut self, e: &Expr, expected: Ty, context: &str) -> Ty {
        let found = self.infer(e);
        if !fits(found, expected) {
            self.report(e.span, format!("type mismatch in {context}: expected {expected}, found {found}"));
        }
        found
    }

    fn expect_one_of(&mut self, e: &Expr, options: &[Ty], context: &str) -> Ty {
        let found = self.infer(e);
        if !options.iter().any(|t| fits(found, *t)) {
            let names: Vec<String> = options.iter().map(|t| t.to_string()).collect();
            self.report(
                e.span,
                format!("type mismatch in {context}: expected {}, found {found}", names.join(" or ")),
            );
        }
        found
    }

    fn with_var<T>(&mut self, name: &str, ty: Ty, f: impl FnOnce(&mut Self) -> T) -> T {
        self.scope.push((name.to_string(), ty));
        let out = f(self);
        self.scope.pop();
        out
    }

    fn infer(&mut self, e: &Expr) -> Ty {
        match &e.kind {
            ExprKind::Number(_) => Ty::Num,
            ExprKind::Str(_) => Ty::Str,
            ExprKind::Var(name) => match self.scope.iter().rev().find(|(n, _)| n == name) {
                Some((_, t)) => *t,
                None => {
                    self.report(e.span, format!("unbound variable `{name}`"));
                    Ty::Any
                }
            },
            ExprKind::Vector(xs) => {
                if !(2..=4).contains(&xs.len()) {
                    self.report(e.span, format!("vec takes 2 to 4 components, found {}", xs.len()));
                }
                for x in xs {
                    self.expect(x, Ty::Num, "vec component");
                }
                Ty::Vector
            }
            ExprKind::Embed(fields) => {
                let mut seen: Vec<&str> = Vec::new();
                for f in fields {
                    if seen.contains(&f.key.as_str()) {
                        self.report(f.key_span, format!("duplicate embedding key `{}`", f.key));
                    }
                    seen.push(&f.key);
                    if f.values.len() == 1 {
                        self.expect_one_of(&f.values[0], &[Ty::Num, Ty::Vector, Ty::Str], "embedding value");
                    } else {
                        if f.values.len() > 4 {
                            self.report(f.key_span, format!("attribute `{}` has more than 4 components", f.key));
                        }
                        for v in &f.values {
                            self.expect(v, Ty::Num, "vector attribute component");
                        }
                    }
                }
                Ty::Embedding
            }
            ExprKind::If(c, a, b) => {
                self.expect(c, Ty::Bool, "if condition");
                let ta = self.infer(a);
                let tb = self.infer(b);
                join(ta, tb)
            }
            ExprKind::Call { args, .. } => {
                for a in args {
                    self.expect_one_of(a, &[Ty::Embedding, Ty::EmbeddingList], "call argument");
                }
                Ty::Entity
            }
            ExprKind::Transform { entity, pose } => {
                self.expect(entity, Ty::Entity, "transform entity (first argument)");
                self.expect(pose, Ty::Matrix, "transform matrix (second argument)");
                Ty::Posed
            }
            ExprKind::Union(xs) => {
                for x in xs {
                    self.expect(x, Ty::Posed, "union element");
                }
                Ty::SubEntities
            }
            ExprKind::UnionLoop { count, index, body } => {
                self.expect(count, Ty::Num, "loop count");
                if let ExprKind::Number(n) = count.kind {
                    if n.fract() != 0.0 || n < 0.0 {
                        self.report(count.span, format!("loop count must be a non-negative integer, found {n}"));
                    }
                }
                self.with_var(&index.text, Ty::Num, |c| c.expect(body, Ty::Posed, "union-loop body"));
                Ty::SubEntities
            }
            ExprKind::Builtin(b, args) => self.builtin(*b, args, e.span),
        }
    }

    fn builtin(&mut self, b: Builtin, args: &[Expr], span: Span) -> Ty {
        use Builtin::*;
        let name = b.name();
        match b {
            Add | Sub => {
                let tys: Vec<Ty> = args.iter().map(|a| self.infer(a)).collect();
                self.arith(&tys, args, name)
            }
            Mul => {
                let tys: Vec<Ty> = args.iter().map(|a| self.infer(a)).collect();
                let vectors = tys.iter().filter(|t| **t == Ty::Vector).count();
                for (t, a) in tys.iter().zip(args) {
                    if !fits(*t, Ty::Num) && !fits(*t, Ty::Vector) {
                        self.report(a.span, format!("type mismatch in `*`: expected Float or Vector, found {t}"));
                    }
                }
                if vectors > 1 {
                    self.report(span, "`*` multiplies at most one vector by scalars");
                }
                if vectors == 1 {
                    Ty::Vector
                } else if tys.iter().all(|t| *t == Ty::Num) {
                    Ty::Num
                } else {
                    Ty::Any
                }
            }
            Div => {
                let t = self.expect_one_of(&args[0], &[Ty::Num, Ty::Vector], "`/` dividend");
                self.expect(&args[1], Ty::Num, "`/` divisor");
                if t == Ty::Vector {
                    Ty::Vector
                } else if t == Ty::Num {
                    Ty::Num
                } else {
                    Ty::Any
                }
            }
            Mod | Floor | Abs | Min | Max | Sqrt | Sin | Cos => {
                for a in args {
                    self.expect(a, Ty::Num, &format!("`{name}` argument"));
                }
                Ty::Num
            }
            Pi => Ty::Num,
            Lt | Le | Ge | Gt => {
                for a in args {
                    self.expect(a, Ty::Num, &format!("`{name}` argument"));
                }
                Ty::Bool
            }
            NumEq => {
                for a in args {
                    self.expect_one_of(a, &[Ty::Num, Ty::Str], "`=` argument");
                }
                Ty::Bool
            }
            And | Or | Not => {
                for a in args {
                    self.expect(a, Ty::Bool, &format!("`{name}` argument"));
                }
                Ty::Bool
            }
            Nth => {
                self.expect(&args[0], Ty::Num, "`nth` index");
                match self.expect_one_of(&args[1], &[Ty::EmbeddingList, Ty::Vector], "`nth` sequence") {
                    Ty::EmbeddingList => Ty::Embedding,
                    Ty::Vector => Ty::Num,
                    _ => Ty::Any,
                }
            }
            Drop => {
                self.expect(&args[0], Ty::Num, "`drop` count");
                self.expect(&args[1], Ty::EmbeddingList, "`drop` list");
                Ty::EmbeddingList
            }
            Car => {
                self.expect(&args[0], Ty::EmbeddingList, "`car` argument");
                Ty::Embedding
            }
            Cdr => {
                self.expect(&args[0], Ty::EmbeddingList, "`cdr` argument");
                Ty::EmbeddingList
            }
            Length => {
                self.expect_one_of(&args[0], &[Ty::EmbeddingList, Ty::Vector], "`length` argument");
                Ty::Num
            }
            Get => {
                self.expect(&args[0], Ty::Embedding, "`get` embedding");
                self.expect(&args[1], Ty::Str, "`get` key");
                if let Some(d) = args.get(2) {
                    self.expect_one_of(d, &[Ty::Num, Ty::Vector, Ty::Str], "`get` default");
                }
                Ty::Attr
            }
            Translate => {
                self.expect(&args[0], Ty::Vector, "`translate` offset");
                Ty::Matrix
            }
            Rotate => {
                self.expect(&args[0], Ty::Num, "`rotate` angle");
                self.expect(&args[1], Ty::Vector, "`rotate` axis direction");
                self.expect(&args[2], Ty::Vector, "`rotate` pivot point");
                Ty::Matrix
            }
            Scale => {
                self.expect(&args[0], Ty::Vector, "`scale` factors");
                self.expect(&args[1], Ty::Vector, "`scale` origin");
                Ty::Matrix
            }
            Reflect => {
                self.expect(&args[0], Ty::Vector, "`reflect` normal");
                self.expect(&args[1], Ty::Vector, "`reflect` point");
                Ty::Matrix
            }
            MatMul => {
                for a in args {
                    self.expect(a, Ty::Matrix, "`@` operand");
                }
                Ty::Matrix
            }
            Identity => Ty::Matrix,
            ShapeMin | ShapeMax | ShapeCenter | ShapeSizes => {
                self.expect(&args[0], Ty::Entity, &format!("`{name}` argument"));
                Ty::Vector
            }
        }
    }

    fn arith(&mut self, tys: &[Ty], args: &[Expr], name: &str) -> Ty {
        let mut result = None;
        for (t, a) in tys.iter().zip(args) {
            let t = match t {
                Ty::Num | Ty::Vector => *t,
                Ty::Any | Ty::Attr => continue,
                other => {
                    self.report(a.span, format!("type mismatch in `{name}`: expected Float or Vector, found {other}"));
                    continue;
                }
            };
            match result {
                None => result = Some(t),
                Some(r) if r != t => {
                    self.report(a.span, format!("`{name}` mixes numbers and vectors"));
                }
                _ => {}
            }
        }
        if tys.iter().any(|t| matches!(t, Ty::Any | Ty::Attr)) {
            Ty::Any
        } else {
            result.unwrap_or(Ty::Any)
        }
    }
}

/// Words bound in the program that no other bind calls. The root must be
/// one of these.
pub fn root_candidates(p: &Program) -> Vec<&BindExpr> {
    p.binds
        .iter()
        .filter(|candidate| {
            !p.binds.iter().any(|other| {
                if std::ptr::eq(*candidate, other) {
                    return false;
                }
                let mut referenced = false;
                other.visit_exprs(&mut |e| {
                    if let ExprKind::Call { word, .. } = &e.kind {
                        referenced |= *word == candidate.word;
                    }
                });
                referenced
            })
        })
        .collect()
}

/// Returns every static error in the program; empty means valid.
pub fn validate(p: &Program) -> Vec<Diagnostic> {
    let mut c = Checker {
        diags: Vec::new(),
        scope: Vec::new(),
    };
    let mut first_seen: HashMap<&str, Span> = HashMap::new();
    for b in &p.binds {
        if let Some(prev) = first_seen.get(b.word.as_str()) {
            let (line, col) = p.source.line_col(prev.start);
            c.report(
                b.word_span,
                format!("duplicate bind for word \"{}\" (first bound at {line}:{col})", b.word),
            );
        } else {
            first_seen.insert(b.word.as_str(), b.word_span);
        }
        match &b.func {
            FuncDef::Entity { own, rest, body, .. } => {
                c.with_var(&own.text, Ty::Embedding, |c| {
                    c.with_var(&rest.text, Ty::EmbeddingList, |c| {
                        check_sub_entities(c, body);
                    })
                });
            }
            FuncDef::Temporal { frames, .. } => {
                for f in frames {
                    c.expect(f, Ty::Entity, "4D entity list element");
                }
            }
        }
        for d in &b.defaults {
            c.expect_one_of(d, &[Ty::Embedding, Ty::EmbeddingList], "root embedding");
        }
    }
    if root_candidates(p).is_empty() {
        let span = p.binds.first().map(|b| b.span).unwrap_or_default();
        c.report(span, "no root entity function: every bound word is called by another bind");
    }
    c.diags
}

/// The body of an entity function must be a `<sub-entities>` form.
fn check_sub_entities(c: &mut Checker, body: &Expr) {
    match &body.kind {
        ExprKind::Union(_) | ExprKind::UnionLoop { .. } => {
            c.infer(body);
        }
        ExprKind::If(cond, a, b) => {
            c.expect(cond, Ty::Bool, "if condition");
            check_sub_entities(c, a);
            check_sub_entities(c, b);
        }
        _ => {
            let found = c.infer(body);
            c.report(
                body.span,
                format!("entity function body must be `union` or `union-loop` (<sub-entities>), found {found}"),
            );
        }
    }
}
