//! Text and JSON forms of [`BasisExpr`].
//!
//! The text form is the grammar documented in `parser.rs`; [`print`] emits
//! the canonical spelling (lowercase keywords, `", "` separators, children in
//! their stored order), so `parse(print(e), Some(e.arity())) == e`.

mod json;
mod parser;

pub use json::{from_json, from_json_str, to_json, to_json_string, JsonError};
pub use parser::{parse, parse_num, ParseError, ParseErrorKind, Position};

use std::fmt::Write;

use crate::expr::{BasisExpr, Node};

/// Canonical text of an expression.
pub fn print(e: &BasisExpr) -> String {
    let mut out = String::new();
    write_expr(&mut out, e);
    out
}

fn write_expr(out: &mut String, e: &BasisExpr) {
    match e.node() {
        Node::Proj { index } => {
            let _ = write!(out, "x{index}");
        }
        Node::Chi { threshold, arg } => {
            let _ = write!(out, "chi({threshold}, ");
            write_expr(out, arg);
            out.push(')');
        }
        Node::Med { bias, left, right } => {
            let _ = write!(out, "med({bias}, ");
            write_expr(out, left);
            out.push_str(", ");
            write_expr(out, right);
            out.push(')');
        }
        Node::Join(cs) => write_list(out, "join", cs),
        Node::Meet(cs) => write_list(out, "meet", cs),
    }
}

fn write_list(out: &mut String, keyword: &str, cs: &[BasisExpr]) {
    out.push_str(keyword);
    out.push('(');
    for (i, c) in cs.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        write_expr(out, c);
    }
    out.push(')');
}
