//! Canonical source printer. Re-parsing its output yields the same tree.

use super::ast::*;

const WIDTH: usize = 88;

enum Doc {
    Atom(String),
    List(Vec<Doc>),
}

fn atom(s: impl Into<String>) -> Doc {
    Doc::Atom(s.into())
}

fn number(v: f64) -> String {
    // `{:?}` is the shortest representation that round-trips exactly.
    format!("{v:?}")
}

fn string(s: &str) -> String {
    let mut out = String::with_capacity(s.len() + 2);
    out.push('"');
    for c in s.chars() {
        match c {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            '\t' => out.push_str("\\t"),
            _ => out.push(c),
        }
    }
    out.push('"');
    out
}

fn expr_doc(e: &Expr) -> Doc {
    let list = |head: &str, rest: Vec<Doc>| {
        let mut v = vec![atom(head)];
        v.extend(rest);
        Doc::List(v)
    };
    let all = |xs: &[Expr]| xs.iter().map(expr_doc).collect::<Vec<_>>();
    match &e.kind {
        ExprKind::Number(v) => atom(number(*v)),
        ExprKind::Str(s) => atom(string(s)),
        ExprKind::Var(v) => atom(v.clone()),
        ExprKind::Vector(xs) => list("vec", all(xs)),
        ExprKind::Embed(fields) => list(
            "embed",
            fields
                .iter()
                .map(|f| {
                    let mut v = vec![atom(f.key.clone())];
                    v.extend(all(&f.values));
                    Doc::List(v)
                })
                .collect(),
        ),
        ExprKind::Builtin(b, xs) => list(b.name(), all(xs)),
        ExprKind::If(c, a, b) => list("if", vec![expr_doc(c), expr_doc(a), expr_doc(b)]),
        ExprKind::Call { word, args, .. } => {
            let mut v = vec![atom(string(word.as_str()))];
            v.extend(all(args));
            list("call", v)
        }
        ExprKind::Transform { entity, pose } => list("transform", vec![expr_doc(entity), expr_doc(pose)]),
        ExprKind::Union(xs) => list("union", all(xs)),
        ExprKind::UnionLoop { count, index, body } => list(
            "union-loop",
            vec![
                expr_doc(count),
                list("lambda", vec![Doc::List(vec![atom(index.text.clone())]), expr_doc(body)]),
            ],
        ),
    }
}

/// Canonical text for one entity function.
pub fn func_doc_string(f: &FuncDef) -> String {
    let mut out = String::new();
    write_doc(&func_doc(f), 0, &mut out);
    out
}

fn func_doc(f: &FuncDef) -> Doc {
    match f {
        FuncDef::Entity { own, rest, body, .. } => Doc::List(vec![
            atom("lambda"),
            Doc::List(vec![atom(own.text.clone()), atom(rest.text.clone())]),
            expr_doc(body),
        ]),
        FuncDef::Temporal { frames, .. } => {
            let mut l = vec![atom("list")];
            l.extend(frames.iter().map(expr_doc));
            Doc::List(vec![atom("lambda"), Doc::List(vec![]), Doc::List(l)])
        }
    }
}

fn bind_doc(b: &BindExpr) -> Doc {
    let mut v = vec![atom("bind"), atom(string(b.word.as_str())), func_doc(&b.func)];
    v.extend(b.defaults.iter().map(expr_doc));
    Doc::List(v)
}

fn flat(d: &Doc, out: &mut String) {
    match d {
        Doc::Atom(s) => out.push_str(s),
        Doc::List(items) => {
            out.push('(');
            for (i, it) in items.iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                flat(it, out);
            }
            out.push(')');
        }
    }
}

fn write_doc(d: &Doc, indent: usize, out: &mut String) {
    let mut one_line = String::new();
    flat(d, &mut one_line);
    let items = match d {
        Doc::List(items) if indent + one_line.len() > WIDTH && items.len() > 1 => items,
        _ => {
            out.push_str(&one_line);
            return;
        }
    };
    // Keep the head (and a short first argument) on the opening line.
    out.push('(');
    flat(&items[0], out);
    let mut rest = &items[1..];
    if let Some(first) = rest.first() {
        let mut f = String::new();
        flat(first, &mut f);
        if matches!(first, Doc::Atom(_)) || f.len() <= 24 {
            out.push(' ');
            out.push_str(&f);
            rest = &rest[1..];
        }
    }
    for it in rest {
        out.push('\n');
        out.push_str(&" ".repeat(indent + 2));
        write_doc(it, indent + 2, out);
    }
    out.push(')');
}

/// Pretty-prints a whole program, one bind per paragraph.
pub fn pretty_print(p: &Program) -> String {
    let mut out = String::new();
    for (i, b) in p.binds.iter().enumerate() {
        if i > 0 {
            out.push('\n');
        }
        write_doc(&bind_doc(b), 0, &mut out);
        out.push('\n');
    }
    out
}
