//! JSON form of programs: `{"kind": "activity", "name": "a"}` for leaves and
//! `{"kind": "<seq|opt|choice|plus|star|par>", "children": [...]}` otherwise.

use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::Program;
use crate::event_log::Activity;

#[derive(Serialize, Deserialize)]
struct Node {
    kind: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    name: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    children: Vec<Node>,
}

fn to_node(p: &Program) -> Node {
    match p {
        Program::Leaf(a) => Node { kind: "activity".into(), name: Some(a.name().into()), children: vec![] },
        _ => Node {
            kind: p.kind().name().into(),
            name: None,
            children: p.children().iter().map(to_node).collect(),
        },
    }
}

fn from_node(n: Node) -> Result<Program, String> {
    let arity = n.children.len();
    let mut kids = n.children.into_iter().map(from_node).collect::<Result<Vec<_>, _>>()?;
    let unary = |mut kids: Vec<Program>, f: fn(Program) -> Program| {
        if arity == 1 {
            Ok(f(kids.pop().unwrap()))
        } else {
            Err(format!("`{}` node needs exactly one child, got {arity}", n.kind))
        }
    };
    let nary = |kids: Vec<Program>, f: fn(Vec<Program>) -> Program| {
        if arity >= 2 {
            Ok(f(kids))
        } else {
            Err(format!("`{}` node needs at least two children, got {arity}", n.kind))
        }
    };
    match n.kind.as_str() {
        "activity" => {
            if !kids.is_empty() {
                return Err("activity node cannot have children".into());
            }
            let name = n.name.ok_or("activity node without a name")?;
            Activity::new(&name).map(Program::Leaf).map_err(|e| e.to_string())
        }
        "seq" => nary(kids, Program::Seq),
        "choice" => nary(kids, Program::Choice),
        "par" => nary(kids, Program::Par),
        "opt" => unary(std::mem::take(&mut kids), Program::opt),
        "plus" => unary(std::mem::take(&mut kids), Program::plus),
        "star" => unary(std::mem::take(&mut kids), Program::star),
        other => Err(format!("unknown node kind `{other}`")),
    }
}

impl Serialize for Program {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        to_node(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Program {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        from_node(Node::deserialize(d)?).map_err(D::Error::custom)
    }
}
