//! JSON document form.
//!
//! ```text
//! {"proj": {"i": 0, "n": 2}}
//! {"chi":  {"a": PARAM, "arg": EXPR}}
//! {"med":  {"b": PARAM, "left": EXPR, "right": EXPR}}
//! {"join": [EXPR, ...]}
//! {"meet": [EXPR, ...]}
//! PARAM = {"num": 1, "den": 3} | 0.25
//! ```

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::expr::{BasisExpr, ExprError, Node};
use crate::types::{DomainError, GridPoint, Param, UnitValue};

#[derive(Debug, Error)]
pub enum JsonError {
    #[error("malformed JSON: {0}")]
    Malformed(serde_json::Error),
    #[error("schema violation: {0}")]
    Schema(String),
}

impl From<serde_json::Error> for JsonError {
    fn from(e: serde_json::Error) -> Self {
        match e.classify() {
            serde_json::error::Category::Data => JsonError::Schema(e.to_string()),
            _ => JsonError::Malformed(e),
        }
    }
}

impl From<ExprError> for JsonError {
    fn from(e: ExprError) -> Self {
        JsonError::Schema(e.to_string())
    }
}

impl From<DomainError> for JsonError {
    fn from(e: DomainError) -> Self {
        JsonError::Schema(e.to_string())
    }
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum JsonParam {
    Ratio { num: u64, den: u64 },
    Real(f64),
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum JsonExpr {
    Proj {
        i: usize,
        n: usize,
    },
    Chi {
        a: JsonParam,
        arg: Box<JsonExpr>,
    },
    Med {
        b: JsonParam,
        left: Box<JsonExpr>,
        right: Box<JsonExpr>,
    },
    Join(Vec<JsonExpr>),
    Meet(Vec<JsonExpr>),
}

fn param_out(p: Param) -> JsonParam {
    match p {
        Param::Ratio(q) => JsonParam::Ratio {
            num: q.numerator(),
            den: q.denominator(),
        },
        Param::Real(v) => JsonParam::Real(v.get()),
    }
}

fn param_in(p: JsonParam) -> Result<Param, JsonError> {
    Ok(match p {
        JsonParam::Ratio { num, den } => Param::Ratio(GridPoint::new(num, den)?),
        JsonParam::Real(v) => Param::Real(UnitValue::new(v)?),
    })
}

fn lift(e: &BasisExpr) -> JsonExpr {
    match e.node() {
        Node::Proj { index } => JsonExpr::Proj {
            i: *index,
            n: e.arity(),
        },
        Node::Chi { threshold, arg } => JsonExpr::Chi {
            a: param_out(*threshold),
            arg: Box::new(lift(arg)),
        },
        Node::Med { bias, left, right } => JsonExpr::Med {
            b: param_out(*bias),
            left: Box::new(lift(left)),
            right: Box::new(lift(right)),
        },
        Node::Join(cs) => JsonExpr::Join(cs.iter().map(lift).collect()),
        Node::Meet(cs) => JsonExpr::Meet(cs.iter().map(lift).collect()),
    }
}

fn lower(doc: JsonExpr) -> Result<BasisExpr, JsonError> {
    Ok(match doc {
        JsonExpr::Proj { i, n } => BasisExpr::proj(i, n)?,
        JsonExpr::Chi { a, arg } => BasisExpr::chi(param_in(a)?, lower(*arg)?),
        JsonExpr::Med { b, left, right } => BasisExpr::med(param_in(b)?, lower(*left)?, lower(*right)?)?,
        JsonExpr::Join(cs) => BasisExpr::join(cs.into_iter().map(lower).collect::<Result<_, _>>()?)?,
        JsonExpr::Meet(cs) => BasisExpr::meet(cs.into_iter().map(lower).collect::<Result<_, _>>()?)?,
    })
}

pub fn to_json(e: &BasisExpr) -> Value {
    serde_json::to_value(lift(e)).expect("expression documents always serialize")
}

pub fn to_json_string(e: &BasisExpr) -> String {
    serde_json::to_string(&lift(e)).expect("expression documents always serialize")
}

pub fn from_json(doc: &Value) -> Result<BasisExpr, JsonError> {
    lower(JsonExpr::deserialize(doc).map_err(JsonError::from)?)
}

pub fn from_json_str(text: &str) -> Result<BasisExpr, JsonError> {
    let mut de = serde_json::Deserializer::from_str(text);
    let doc = JsonExpr::deserialize(&mut de)?;
    de.end()?;
    lower(doc)
}
