//! Syntax tree for Scene Language programs.

use crate::scene::Word;

use super::SourceMap;

/// Byte range into the program source.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub const fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn join(self, other: Span) -> Span {
        Span::new(self.start.min(other.start), self.end.max(other.end))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub binds: Vec<BindExpr>,
    pub source: SourceMap,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Name {
    pub text: String,
    pub span: Span,
}

/// `(bind <word> <entity-func> <embedding>*)`. The trailing embeddings are
/// used as `z` and `γ` when this bind is executed as the root.
#[derive(Debug, Clone, PartialEq)]
pub struct BindExpr {
    pub word: Word,
    pub word_span: Span,
    pub func: FuncDef,
    pub defaults: Vec<Expr>,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub enum FuncDef {
    /// `(lambda (embedding embedding-list) <sub-entities>)`
    Entity {
        own: Name,
        rest: Name,
        body: Expr,
        span: Span,
    },
    /// `(lambda () (list <entity>*))`
    Temporal { frames: Vec<Expr>, span: Span },
}

impl FuncDef {
    pub fn is_temporal(&self) -> bool {
        matches!(self, FuncDef::Temporal { .. })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedField {
    pub key: String,
    pub key_span: Span,
    pub values: Vec<Expr>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Number(f64),
    Str(String),
    Var(String),
    /// `(vec x y z)`
    Vector(Vec<Expr>),
    /// `(embed (key value+)*)`
    Embed(Vec<EmbedField>),
    Builtin(Builtin, Vec<Expr>),
    If(Box<Expr>, Box<Expr>, Box<Expr>),
    Call {
        word: Word,
        word_span: Span,
        args: Vec<Expr>,
    },
    Transform {
        entity: Box<Expr>,
        pose: Box<Expr>,
    },
    Union(Vec<Expr>),
    UnionLoop {
        count: Box<Expr>,
        index: Name,
        body: Box<Expr>,
    },
}

macro_rules! builtins {
    ($($variant:ident => $name:literal, $min:expr, $max:expr;)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
        pub enum Builtin {
            $($variant,)*
        }

        impl Builtin {
            pub const ALL: &'static [Builtin] = &[$(Builtin::$variant,)*];

            pub fn name(self) -> &'static str {
                match self {
                    $(Builtin::$variant => $name,)*
                }
            }

            /// Accepted argument counts; `None` upper bound means variadic.
            pub fn arity(self) -> (usize, Option<usize>) {
                match self {
                    $(Builtin::$variant => ($min, $max),)*
                }
            }

            pub fn from_name(name: &str) -> Option<Builtin> {
                match name {
                    $($name => Some(Builtin::$variant),)*
                    _ => None,
                }
            }
        }
    };
}

builtins! {
    Add => "+", 1, None;
    Sub => "-", 1, None;
    Mul => "*", 1, None;
    Div => "/", 2, Some(2);
    Mod => "mod", 2, Some(2);
    Floor => "floor", 1, Some(1);
    Abs => "abs", 1, Some(1);
    Min => "min", 1, None;
    Max => "max", 1, None;
    Sqrt => "sqrt", 1, Some(1);
    Sin => "sin", 1, Some(1);
    Cos => "cos", 1, Some(1);
    Pi => "pi", 0, Some(0);
    Lt => "<", 2, Some(2);
    Le => "<=", 2, Some(2);
    NumEq => "=", 2, Some(2);
    Ge => ">=", 2, Some(2);
    Gt => ">", 2, Some(2);
    And => "and", 1, None;
    Or => "or", 1, None;
    Not => "not", 1, Some(1);
    Nth => "nth", 2, Some(2);
    Drop => "drop", 2, Some(2);
    Car => "car", 1, Some(1);
    Cdr => "cdr", 1, Some(1);
    Length => "length", 1, Some(1);
    Get => "get", 2, Some(3);
    Translate => "translate", 1, Some(1);
    Rotate => "rotate", 3, Some(3);
    Scale => "scale", 2, Some(2);
    Reflect => "reflect", 2, Some(2);
    MatMul => "@", 2, None;
    Identity => "identity", 0, Some(0);
    ShapeMin => "compute-shape-min", 1, Some(1);
    ShapeMax => "compute-shape-max", 1, Some(1);
    ShapeCenter => "compute-shape-center", 1, Some(1);
    ShapeSizes => "compute-shape-sizes", 1, Some(1);
}

impl Program {
    pub fn find_bind(&self, word: &str) -> Option<&BindExpr> {
        self.binds.iter().find(|b| b.word.as_str() == word)
    }

    /// The bound words, in declaration order.
    pub fn words(&self) -> Vec<&Word> {
        self.binds.iter().map(|b| &b.word).collect()
    }

    /// Words referenced by `call` anywhere in the program, bound or not.
    pub fn referenced_words(&self) -> Vec<Word> {
        let mut out: Vec<Word> = Vec::new();
        for b in &self.binds {
            b.visit_exprs(&mut |e| {
                if let ExprKind::Call { word, .. } = &e.kind {
                    if !out.contains(word) {
                        out.push(word.clone());
                    }
                }
            });
        }
        out
    }

    /// Returns a copy with every span zeroed, for structural comparison.
    pub fn without_spans(&self) -> Program {
        let mut p = self.clone();
        for b in &mut p.binds {
            b.span = Span::default();
            b.word_span = Span::default();
            match &mut b.func {
                FuncDef::Entity {
                    own,
                    rest,
                    body,
                    span,
                } => {
                    *span = Span::default();
                    own.span = Span::default();
                    rest.span = Span::default();
                    body.erase_spans();
                }
                FuncDef::Temporal { frames, span } => {
                    *span = Span::default();
                    frames.iter_mut().for_each(Expr::erase_spans);
                }
            }
            b.defaults.iter_mut().for_each(Expr::erase_spans);
        }
        p.source = SourceMap::default();
        p
    }
}

impl BindExpr {
    /// Visits every expression of this bind in preorder.
    pub fn visit_exprs<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        match &self.func {
            FuncDef::Entity { body, .. } => body.visit(f),
            FuncDef::Temporal { frames, .. } => frames.iter().for_each(|e| e.visit(f)),
        }
        self.defaults.iter().for_each(|e| e.visit(f));
    }

    pub fn visit_exprs_mut(&mut self, f: &mut impl FnMut(&mut Expr)) {
        match &mut self.func {
            FuncDef::Entity { body, .. } => body.visit_mut(f),
            FuncDef::Temporal { frames, .. } => frames.iter_mut().for_each(|e| e.visit_mut(f)),
        }
        self.defaults.iter_mut().for_each(|e| e.visit_mut(f));
    }
}

impl Expr {
    pub fn new(kind: ExprKind, span: Span) -> Self {
        Expr { kind, span }
    }

    pub fn children(&self) -> Vec<&Expr> {
        match &self.kind {
            ExprKind::Number(_) | ExprKind::Str(_) | ExprKind::Var(_) => vec![],
            ExprKind::Vector(xs) | ExprKind::Builtin(_, xs) | ExprKind::Union(xs) => xs.iter().collect(),
            ExprKind::Call { args, .. } => args.iter().collect(),
            ExprKind::Embed(fields) => fields.iter().flat_map(|f| f.values.iter()).collect(),
            ExprKind::If(c, a, b) => vec![c, a, b],
            ExprKind::Transform { entity, pose } => vec![entity, pose],
            ExprKind::UnionLoop { count, body, .. } => vec![count, body],
        }
    }

    fn children_mut(&mut self) -> Vec<&mut Expr> {
        match &mut self.kind {
            ExprKind::Number(_) | ExprKind::Str(_) | ExprKind::Var(_) => vec![],
            ExprKind::Vector(xs) | ExprKind::Builtin(_, xs) | ExprKind::Union(xs) => xs.iter_mut().collect(),
            ExprKind::Call { args, .. } => args.iter_mut().collect(),
            ExprKind::Embed(fields) => fields.iter_mut().flat_map(|f| f.values.iter_mut()).collect(),
            ExprKind::If(c, a, b) => vec![c, a, b],
            ExprKind::Transform { entity, pose } => vec![entity, pose],
            ExprKind::UnionLoop { count, body, .. } => vec![count, body],
        }
    }

    pub fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn visit_mut(&mut self, f: &mut impl FnMut(&mut Expr)) {
        f(self);
        for c in self.children_mut() {
            c.visit_mut(f);
        }
    }

    fn erase_spans(&mut self) {
        self.visit_mut(&mut |e| {
            e.span = Span::default();
            match &mut e.kind {
                ExprKind::Call { word_span, .. } => *word_span = Span::default(),
                ExprKind::Embed(fields) => fields.iter_mut().for_each(|f| f.key_span = Span::default()),
                ExprKind::UnionLoop { index, .. } => index.span = Span::default(),
                _ => {}
            }
        });
    }
}
