use crate::scene::Word;

use super::ast::*;
use super::lexer::{tokenize, Token, TokenKind};
use super::{ParseError, SourceMap};

/// Reader output: atoms and parenthesized lists, with spans.
#[derive(Debug, Clone, PartialEq)]
pub enum Sexp {
    Atom(Token),
    List(Vec<Sexp>, Span),
}

impl Sexp {
    pub fn span(&self) -> Span {
        match self {
            Sexp::Atom(t) => t.span,
            Sexp::List(_, s) => *s,
        }
    }

    fn symbol(&self) -> Option<&str> {
        match self {
            Sexp::Atom(Token {
                kind: TokenKind::Symbol(s),
                ..
            }) => Some(s),
            _ => None,
        }
    }

    fn string(&self) -> Option<&str> {
        match self {
            Sexp::Atom(Token {
                kind: TokenKind::Str(s),
                ..
            }) => Some(s),
            _ => None,
        }
    }

    fn head(&self) -> Option<&str> {
        match self {
            Sexp::List(items, _) => items.first().and_then(Sexp::symbol),
            _ => None,
        }
    }
}

pub fn read(map: &SourceMap) -> Result<Vec<Sexp>, ParseError> {
    let tokens = tokenize(&map.text).map_err(|e| map.error(e.message, e.span))?;
    let mut pos = 0;
    let mut out = Vec::new();
    while pos < tokens.len() {
        out.push(read_one(map, &tokens, &mut pos)?);
    }
    Ok(out)
}

fn read_one(map: &SourceMap, tokens: &[Token], pos: &mut usize) -> Result<Sexp, ParseError> {
    let tok = &tokens[*pos];
    *pos += 1;
    match tok.kind {
        TokenKind::LParen => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos) {
                    None => return Err(map.error("unbalanced `(`: missing `)`", tok.span)),
                    Some(Token {
                        kind: TokenKind::RParen,
                        span,
                    }) => {
                        *pos += 1;
                        return Ok(Sexp::List(items, tok.span.join(*span)));
                    }
                    Some(_) => items.push(read_one(map, tokens, pos)?),
                }
            }
        }
        TokenKind::RParen => Err(map.error("unexpected `)`", tok.span)),
        _ => Ok(Sexp::Atom(tok.clone())),
    }
}

/// Parses a whole program: `<START> ::= <bind-expr>*`.
pub fn parse_program(map: SourceMap) -> Result<Program, ParseError> {
    let forms = read(&map)?;
    let p = Parser { map: &map };
    let binds = forms.iter().map(|f| p.bind(f)).collect::<Result<Vec<_>, _>>()?;
    Ok(Program { binds, source: map })
}

/// Parses a single `<entity-func>` lambda, e.g. for rebinding.
pub fn parse_entity_func(map: &SourceMap) -> Result<FuncDef, ParseError> {
    let forms = read(map)?;
    let p = Parser { map };
    match forms.as_slice() {
        [one] => p.entity_func(one),
        _ => Err(map.error(
            "expected exactly one <entity-func> `(lambda (embedding embedding-list) <sub-entities>)`",
            Span::new(0, map.text.len()),
        )),
    }
}

struct Parser<'a> {
    map: &'a SourceMap,
}

const BIND: &str = "<bind-expr> `(bind <word> <entity-func>)`";
const ENTITY_FUNC: &str =
    "<entity-func> `(lambda (embedding embedding-list) <sub-entities>)` or `(lambda () (list <entity>*))`";

impl Parser<'_> {
    fn err(&self, production: &str, what: impl std::fmt::Display, span: Span) -> ParseError {
        self.map.error(format!("{what}; expected {production}"), span)
    }

    fn word(&self, s: &Sexp, production: &str) -> Result<(Word, Span), ParseError> {
        let text = s
            .string()
            .ok_or_else(|| self.err(production, "word must be a quoted string", s.span()))?;
        let w = Word::new(text).map_err(|e| self.err(production, e, s.span()))?;
        Ok((w, s.span()))
    }

    fn name(&self, s: &Sexp, production: &str) -> Result<Name, ParseError> {
        let sym = s
            .symbol()
            .ok_or_else(|| self.err(production, "formal parameter must be a symbol", s.span()))?;
        // `embedding::Embedding` style annotations are accepted and dropped.
        let text = sym.split("::").next().unwrap_or(sym);
        if text.is_empty() || Builtin::from_name(text).is_some() || is_keyword(text) {
            return Err(self.err(production, format!("`{sym}` cannot be a parameter name"), s.span()));
        }
        Ok(Name {
            text: text.to_string(),
            span: s.span(),
        })
    }

    fn bind(&self, form: &Sexp) -> Result<BindExpr, ParseError> {
        let Sexp::List(items, span) = form else {
            return Err(self.err(BIND, "top-level forms must be lists", form.span()));
        };
        if form.head() != Some("bind") {
            return Err(self.err(BIND, "top-level form is not a bind", *span));
        }
        match items.len() {
            1 => return Err(self.err(BIND, "bind-expr requires a word", *span)),
            2 => return Err(self.err(BIND, "bind-expr requires an entity function", *span)),
            _ => {}
        }
        let (word, word_span) = self.word(&items[1], BIND)?;
        let func = self.entity_func(&items[2])?;
        if func.is_temporal() && items.len() > 3 {
            return Err(self.err(BIND, "a 4D entity function takes no root embeddings", items[3].span()));
        }
        let defaults = items[3..].iter().map(|e| self.expr(e)).collect::<Result<_, _>>()?;
        Ok(BindExpr {
            word,
            word_span,
            func,
            defaults,
            span: *span,
        })
    }

    fn entity_func(&self, s: &Sexp) -> Result<FuncDef, ParseError> {
        let Sexp::List(items, span) = s else {
            return Err(self.err(ENTITY_FUNC, "not a lambda", s.span()));
        };
        if s.head() != Some("lambda") {
            return Err(self.err(ENTITY_FUNC, "not a lambda", *span));
        }
        if items.len() != 3 {
            return Err(self.err(ENTITY_FUNC, "lambda takes a parameter list and one body", *span));
        }
        let Sexp::List(params, pspan) = &items[1] else {
            return Err(self.err(ENTITY_FUNC, "lambda parameters must be a list", items[1].span()));
        };
        match params.len() {
            0 => {
                let body = &items[2];
                let Sexp::List(elems, _) = body else {
                    return Err(self.err("<create-entity-list> `(list <entity>*)`", "not a list form", body.span()));
                };
                if body.head() != Some("list") {
                    return Err(self.err("<create-entity-list> `(list <entity>*)`", "not a list form", body.span()));
                }
                let frames = elems[1..].iter().map(|e| self.expr(e)).collect::<Result<_, _>>()?;
                Ok(FuncDef::Temporal { frames, span: *span })
            }
            2 => {
                let own = self.name(&params[0], ENTITY_FUNC)?;
                let rest = self.name(&params[1], ENTITY_FUNC)?;
                if own.text == rest.text {
                    return Err(self.err(ENTITY_FUNC, "parameter names must differ", *pspan));
                }
                let body = self.expr(&items[2])?;
                Ok(FuncDef::Entity {
                    own,
                    rest,
                    body,
                    span: *span,
                })
            }
            n => Err(self.err(
                ENTITY_FUNC,
                format!("entity functions take 2 parameters (or 0 for 4D), found {n}"),
                *pspan,
            )),
        }
    }

    fn expr(&self, s: &Sexp) -> Result<Expr, ParseError> {
        let span = s.span();
        let items = match s {
            Sexp::Atom(tok) => {
                let kind = match &tok.kind {
                    TokenKind::Number(n) => ExprKind::Number(*n),
                    TokenKind::Str(s) => ExprKind::Str(s.clone()),
                    TokenKind::Symbol(sym) => {
                        if is_keyword(sym) || Builtin::from_name(sym).is_some() {
                            return Err(self.err(
                                "an expression",
                                format!("`{sym}` is a form and must appear at the head of a list"),
                                span,
                            ));
                        }
                        ExprKind::Var(sym.clone())
                    }
                    TokenKind::LParen | TokenKind::RParen => unreachable!("reader emits lists"),
                };
                return Ok(Expr::new(kind, span));
            }
            Sexp::List(items, _) => items,
        };
        let Some(head) = s.head() else {
            return Err(self.err("an expression", "list form must start with a symbol", span));
        };
        let args = &items[1..];
        let exprs = |xs: &[Sexp]| xs.iter().map(|x| self.expr(x)).collect::<Result<Vec<_>, _>>();
        let boxed = |x: &Sexp| self.expr(x).map(Box::new);
        let kind = match head {
            "call" => {
                const P: &str = "<entity> `(call <word> <embedding>*)`";
                let first = args
                    .first()
                    .ok_or_else(|| self.err(P, "call requires a word", span))?;
                let (word, word_span) = self.word(first, P)?;
                ExprKind::Call {
                    word,
                    word_span,
                    args: exprs(&args[1..])?,
                }
            }
            "transform" => {
                const P: &str = "<entity-transform> `(transform <entity> <matrix>)`";
                if args.len() != 2 {
                    return Err(self.err(P, format!("transform takes 2 arguments, found {}", args.len()), span));
                }
                ExprKind::Transform {
                    entity: boxed(&args[0])?,
                    pose: boxed(&args[1])?,
                }
            }
            "union" => ExprKind::Union(exprs(args)?),
            "union-loop" => {
                const P: &str = "<sub-entities> `(union-loop <loop-count> (lambda (i) <entity-transform>))`";
                if args.len() != 2 {
                    return Err(self.err(P, format!("union-loop takes 2 arguments, found {}", args.len()), span));
                }
                let lambda = &args[1];
                let Sexp::List(litems, lspan) = lambda else {
                    return Err(self.err(P, "loop body must be a lambda", lambda.span()));
                };
                if lambda.head() != Some("lambda") || litems.len() != 3 {
                    return Err(self.err(P, "loop body must be a one-argument lambda", *lspan));
                }
                let index = match &litems[1] {
                    Sexp::List(ps, _) if ps.len() == 1 => self.name(&ps[0], P)?,
                    other => return Err(self.err(P, "loop lambda takes exactly one parameter", other.span())),
                };
                ExprKind::UnionLoop {
                    count: boxed(&args[0])?,
                    index,
                    body: boxed(&litems[2])?,
                }
            }
            "if" => {
                if args.len() != 3 {
                    return Err(self.err(
                        "`(if <condition> <then> <else>)`",
                        format!("if takes 3 arguments, found {}", args.len()),
                        span,
                    ));
                }
                ExprKind::If(boxed(&args[0])?, boxed(&args[1])?, boxed(&args[2])?)
            }
            "vec" => ExprKind::Vector(exprs(args)?),
            "embed" => {
                const P: &str = "<embedding> `(embed (<key> <value>+)*)`";
                let mut fields = Vec::new();
                for f in args {
                    let Sexp::List(parts, fspan) = f else {
                        return Err(self.err(P, "embedding field must be a list", f.span()));
                    };
                    let key = parts
                        .first()
                        .and_then(Sexp::symbol)
                        .ok_or_else(|| self.err(P, "embedding field must start with a key symbol", *fspan))?;
                    if parts.len() < 2 {
                        return Err(self.err(P, format!("embedding field `{key}` has no value"), *fspan));
                    }
                    fields.push(EmbedField {
                        key: key.to_string(),
                        key_span: parts[0].span(),
                        values: exprs(&parts[1..])?,
                    });
                }
                ExprKind::Embed(fields)
            }
            "lambda" => {
                return Err(self.err(
                    "an expression",
                    "lambda is only allowed in bind and union-loop",
                    span,
                ))
            }
            "bind" => return Err(self.err("an expression", "bind is only allowed at top level", span)),
            "list" => return Err(self.err("an expression", "list is only allowed in a 4D entity function", span)),
            "retrieve" => {
                return Err(self.err(
                    "an expression",
                    "retrieve is implicit; use `(call <word> <embedding>*)`",
                    span,
                ))
            }
            other => {
                let b = Builtin::from_name(other)
                    .ok_or_else(|| self.err("an expression", format!("unknown form `{other}`"), span))?;
                let (min, max) = b.arity();
                let n = args.len();
                if n < min || max.is_some_and(|m| n > m) {
                    let want = match max {
                        Some(m) if m == min => format!("{min}"),
                        Some(m) => format!("{min} to {m}"),
                        None => format!("at least {min}"),
                    };
                    return Err(self.err(
                        &format!("`({other} ...)` with {want} arguments"),
                        format!("found {n} arguments"),
                        span,
                    ));
                }
                ExprKind::Builtin(b, exprs(args)?)
            }
        };
        Ok(Expr::new(kind, span))
    }
}

fn is_keyword(s: &str) -> bool {
    matches!(
        s,
        "call" | "transform" | "union" | "union-loop" | "if" | "vec" | "embed" | "lambda" | "bind" | "list" | "retrieve"
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dsl::parse;

    #[test]
    fn binds_define_words() {
        let src = r#"
            (bind "board" (lambda (z zs) (union)))
            (bind "pawn" (lambda (z zs) (union)))
        "#;
        let p = parse(src).unwrap();
        let words: Vec<&str> = p.words().iter().map(|w| w.as_str()).collect();
        assert_eq!(words, vec!["board", "pawn"]);
    }

    #[test]
    fn bind_without_function_is_error() {
        let err = parse("(bind \"x\")").unwrap_err();
        assert!(err.message.contains("bind-expr requires an entity function"), "{}", err.message);
        assert!(err.message.contains("<bind-expr>"));
    }

    #[test]
    fn union_loop_ast() {
        let src = r#"(bind "g" (lambda (z zs) (union-loop 4 (lambda (i) (transform (call "leaf" z) (translate (vec (* i 1.0) 0 0)))))))"#;
        let p = parse(src).unwrap().without_spans();
        let n = |v: f64| Expr::new(ExprKind::Number(v), Span::default());
        let var = |s: &str| Expr::new(ExprKind::Var(s.into()), Span::default());
        let expected_body = Expr::new(
            ExprKind::UnionLoop {
                count: Box::new(n(4.0)),
                index: Name {
                    text: "i".into(),
                    span: Span::default(),
                },
                body: Box::new(Expr::new(
                    ExprKind::Transform {
                        entity: Box::new(Expr::new(
                            ExprKind::Call {
                                word: Word::new("leaf").unwrap(),
                                word_span: Span::default(),
                                args: vec![var("z")],
                            },
                            Span::default(),
                        )),
                        pose: Box::new(Expr::new(
                            ExprKind::Builtin(
                                Builtin::Translate,
                                vec![Expr::new(
                                    ExprKind::Vector(vec![
                                        Expr::new(ExprKind::Builtin(Builtin::Mul, vec![var("i"), n(1.0)]), Span::default()),
                                        n(0.0),
                                        n(0.0),
                                    ]),
                                    Span::default(),
                                )],
                            ),
                            Span::default(),
                        )),
                    },
                    Span::default(),
                )),
            },
            Span::default(),
        );
        match &p.binds[0].func {
            FuncDef::Entity { own, rest, body, .. } => {
                assert_eq!(own.text, "z");
                assert_eq!(rest.text, "zs");
                assert_eq!(body, &expected_body);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn type_annotations_on_params() {
        let p = parse(r#"(bind "a" (lambda (embedding::Embedding embedding-list::List[Embedding]) (union)))"#).unwrap();
        match &p.binds[0].func {
            FuncDef::Entity { own, rest, .. } => {
                assert_eq!(own.text, "embedding");
                assert_eq!(rest.text, "embedding-list");
            }
            _ => panic!(),
        }
    }

    #[test]
    fn temporal_function() {
        let p = parse(r#"(bind "anim" (lambda () (list (call "a") (call "b"))))"#).unwrap();
        match &p.binds[0].func {
            FuncDef::Temporal { frames, .. } => assert_eq!(frames.len(), 2),
            _ => panic!(),
        }
    }

    #[test]
    fn spans_point_at_forms() {
        let src = r#"(bind "a" (lambda (z zs) (union (transform (call "b" z) (identity)))))"#;
        let p = parse(src).unwrap();
        assert_eq!(p.binds[0].span, Span::new(0, src.len()));
        let mut seen = Vec::new();
        p.binds[0].visit_exprs(&mut |e| {
            if let ExprKind::Call { .. } = e.kind {
                seen.push(&src[e.span.start..e.span.end]);
            }
        });
        assert_eq!(seen, vec![r#"(call "b" z)"#]);
    }

    #[test]
    fn grammar_violations() {
        for (src, needle) in [
            ("(foo)", "top-level form is not a bind"),
            ("(bind x (lambda (z zs) (union)))", "word must be a quoted string"),
            ("(bind \"a\" (lambda (z) (union)))", "found 1"),
            ("(bind \"a\" (lambda (z zs) (union-loop 3 (transform (call \"b\") (identity)))))", "loop body"),
            ("(bind \"a\" (lambda (z zs) (transform (call \"b\"))))", "transform takes 2"),
            ("(bind \"a\" (lambda (z zs) (frobnicate 1)))", "unknown form"),
            ("(bind \"a\" (lambda (z zs) (translate)))", "found 0 arguments"),
            ("(bind \"a\" (lambda (z zs) (union))", "missing `)`"),
            ("(bind \"\" (lambda (z zs) (union)))", "invalid word"),
            ("(bind \"a\" (lambda () (call \"x\")))", "list"),
            ("(bind \"a\" (lambda (z zs) (union (embed (color)))))", "has no value"),
        ] {
            let err = parse(src).unwrap_err();
            assert!(err.message.contains(needle), "{src}: {}", err.message);
            assert!(err.span.end <= src.len());
        }
    }
}
