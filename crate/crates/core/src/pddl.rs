//! The PDDL subset used as the parse-and-solve interlingua: one fixed
//! stacking domain, per-problem documents, and plan fragments.
//!
//! The parser is lenient on whitespace and keyword case but strict on
//! structure. Emitted documents re-parse to structurally equal symbols, and
//! re-emitting a parsed emission is byte-identical.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::domain::{canonicalize, DomainError, Fact, Goal, GroundAction, ObjectId, Plan, Problem};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PddlError {
    #[error("syntax error at byte {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("unknown action: {0}")]
    UnknownAction(String),
    #[error("unknown object: {0}")]
    UnknownObject(String),
    #[error("malformed document: {0}")]
    Structure(String),
    #[error(transparent)]
    Inconsistent(#[from] DomainError),
}

/// Maps an object name to its PDDL identifier. Vocabulary names contain no
/// hyphens, so the space/hyphen swap is a bijection.
pub fn hyphenate(name: &str) -> String {
    name.replace(' ', "-")
}

pub fn dehyphenate(token: &str) -> String {
    token.replace('-', " ")
}

// ---------------------------------------------------------------------------
// s-expressions

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Sexp {
    Atom(String),
    List(Vec<Sexp>),
}

impl Sexp {
    fn atom(&self) -> Option<&str> {
        match self {
            Sexp::Atom(a) => Some(a),
            Sexp::List(_) => None,
        }
    }

    fn list(&self) -> Option<&[Sexp]> {
        match self {
            Sexp::List(items) => Some(items),
            Sexp::Atom(_) => None,
        }
    }
}

/// Parses all top-level s-expressions in `text`. Comment lines starting with
/// ';' are ignored to end of line.
pub fn parse_sexps(text: &str) -> Result<Vec<Sexp>, PddlError> {
    let bytes = text.as_bytes();
    let mut pos = 0usize;
    let mut out = Vec::new();
    while let Some(sexp) = parse_one(bytes, &mut pos)? {
        out.push(sexp);
    }
    Ok(out)
}

fn skip_ws(bytes: &[u8], pos: &mut usize) {
    loop {
        while *pos < bytes.len() && bytes[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
        if *pos < bytes.len() && bytes[*pos] == b';' {
            while *pos < bytes.len() && bytes[*pos] != b'\n' {
                *pos += 1;
            }
        } else {
            return;
        }
    }
}

fn parse_one(bytes: &[u8], pos: &mut usize) -> Result<Option<Sexp>, PddlError> {
    skip_ws(bytes, pos);
    if *pos >= bytes.len() {
        return Ok(None);
    }
    match bytes[*pos] {
        b'(' => {
            *pos += 1;
            let mut items = Vec::new();
            loop {
                skip_ws(bytes, pos);
                if *pos >= bytes.len() {
                    return Err(PddlError::Syntax {
                        pos: bytes.len(),
                        msg: "unbalanced parenthesis".into(),
                    });
                }
                if bytes[*pos] == b')' {
                    *pos += 1;
                    return Ok(Some(Sexp::List(items)));
                }
                match parse_one(bytes, pos)? {
                    Some(item) => items.push(item),
                    None => {
                        return Err(PddlError::Syntax {
                            pos: *pos,
                            msg: "unbalanced parenthesis".into(),
                        })
                    }
                }
            }
        }
        b')' => Err(PddlError::Syntax {
            pos: *pos,
            msg: "unexpected ')'".into(),
        }),
        _ => {
            let start = *pos;
            while *pos < bytes.len()
                && !bytes[*pos].is_ascii_whitespace()
                && bytes[*pos] != b'('
                && bytes[*pos] != b')'
                && bytes[*pos] != b';'
            {
                *pos += 1;
            }
            let token = std::str::from_utf8(&bytes[start..*pos])
                .map_err(|_| PddlError::Syntax {
                    pos: start,
                    msg: "invalid utf-8 token".into(),
                })?
                .to_string();
            Ok(Some(Sexp::Atom(token)))
        }
    }
}

// ---------------------------------------------------------------------------
// domain definition

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaAtom {
    pub pred: String,
    pub args: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<String>,
    pub precondition: Vec<SchemaAtom>,
    /// Ordered effect literals: (positive, atom).
    pub effects: Vec<(bool, SchemaAtom)>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DomainDef {
    pub name: String,
    pub requirements: Vec<String>,
    pub predicates: Vec<SchemaAtom>,
    pub actions: Vec<ActionSchema>,
}

fn atom(pred: &str, args: &[&str]) -> SchemaAtom {
    SchemaAtom {
        pred: pred.to_string(),
        args: args.iter().map(|a| a.to_string()).collect(),
    }
}

/// The fixed stacking domain, with the three schemas the planner shares with
/// [`crate::domain::apply`].
pub fn stacking_domain() -> DomainDef {
    DomainDef {
        name: "stacking".into(),
        requirements: vec![":strips".into(), ":typing".into()],
        predicates: vec![
            atom("on", &["?x", "?y"]),
            atom("on-table", &["?x"]),
            atom("clear", &["?x"]),
        ],
        actions: vec![
            ActionSchema {
                name: "stack".into(),
                params: vec!["?x".into(), "?y".into(), "?z".into()],
                precondition: vec![
                    atom("on", &["?x", "?y"]),
                    atom("clear", &["?x"]),
                    atom("clear", &["?z"]),
                ],
                effects: vec![
                    (true, atom("on", &["?x", "?z"])),
                    (true, atom("clear", &["?y"])),
                    (false, atom("on", &["?x", "?y"])),
                    (false, atom("clear", &["?z"])),
                ],
            },
            ActionSchema {
                name: "unstack".into(),
                params: vec!["?x".into(), "?y".into()],
                precondition: vec![atom("on", &["?x", "?y"]), atom("clear", &["?x"])],
                effects: vec![
                    (true, atom("on-table", &["?x"])),
                    (true, atom("clear", &["?y"])),
                    (false, atom("on", &["?x", "?y"])),
                ],
            },
            ActionSchema {
                name: "stackfromtable".into(),
                params: vec!["?x".into(), "?y".into()],
                precondition: vec![
                    atom("on-table", &["?x"]),
                    atom("clear", &["?x"]),
                    atom("clear", &["?y"]),
                ],
                effects: vec![
                    (true, atom("on", &["?x", "?y"])),
                    (false, atom("on-table", &["?x"])),
                    (false, atom("clear", &["?y"])),
                ],
            },
        ],
    }
}

fn fmt_atom(a: &SchemaAtom) -> String {
    if a.args.is_empty() {
        format!("({})", a.pred)
    } else {
        format!("({} {})", a.pred, a.args.join(" "))
    }
}

fn fmt_typed_params(params: &[String]) -> String {
    params
        .iter()
        .map(|p| format!("{p} - object"))
        .collect::<Vec<_>>()
        .join(" ")
}

fn fmt_conj(atoms: &[String]) -> String {
    format!("(and {})", atoms.join(" "))
}

/// Pretty-prints a domain. [`parse_pddl_domain`] followed by this function is
/// byte-identity on anything this function emitted.
pub fn emit_domain_def(d: &DomainDef) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "(define (domain {})", d.name);
    let _ = writeln!(s, "  (:requirements {})", d.requirements.join(" "));
    let _ = writeln!(s, "  (:types object)");
    let _ = writeln!(s, "  (:predicates");
    for (i, p) in d.predicates.iter().enumerate() {
        let _ = write!(s, "    ({} {})", p.pred, fmt_typed_params(&p.args));
        let _ = writeln!(s, "{}", if i + 1 == d.predicates.len() { ")" } else { "" });
    }
    for (i, a) in d.actions.iter().enumerate() {
        let _ = writeln!(s, "  (:action {}", a.name);
        let _ = writeln!(s, "    :parameters ({})", fmt_typed_params(&a.params));
        let pre: Vec<String> = a.precondition.iter().map(fmt_atom).collect();
        let _ = writeln!(s, "    :precondition {}", fmt_conj(&pre));
        let eff: Vec<String> = a
            .effects
            .iter()
            .map(|(pos, at)| {
                if *pos {
                    fmt_atom(at)
                } else {
                    format!("(not {})", fmt_atom(at))
                }
            })
            .collect();
        let close = if i + 1 == d.actions.len() { "))" } else { ")" };
        let _ = writeln!(s, "    :effect {}{close}", fmt_conj(&eff));
    }
    s
}

/// The fixed stacking domain document.
pub fn emit_domain() -> String {
    emit_domain_def(&stacking_domain())
}

fn lc(s: &str) -> String {
    s.to_ascii_lowercase()
}

fn parse_schema_atom(sexp: &Sexp) -> Result<SchemaAtom, PddlError> {
    let items = sexp
        .list()
        .ok_or_else(|| PddlError::Structure("expected an atom list".into()))?;
    let mut names = Vec::new();
    for it in items {
        match it.atom() {
            Some(a) => names.push(a.to_string()),
            None => return Err(PddlError::Structure("nested list in atom".into())),
        }
    }
    if names.is_empty() {
        return Err(PddlError::Structure("empty atom".into()));
    }
    // drop PDDL typing markers: "?x - object"
    let pred = lc(&names[0]);
    let mut args = Vec::new();
    let mut i = 1;
    while i < names.len() {
        if names[i] == "-" {
            i += 2; // skip the type name
            continue;
        }
        args.push(names[i].clone());
        i += 1;
    }
    Ok(SchemaAtom { pred, args })
}

fn parse_conj(sexp: &Sexp) -> Result<Vec<Sexp>, PddlError> {
    let items = sexp
        .list()
        .ok_or_else(|| PddlError::Structure("expected a condition".into()))?;
    match items.first().and_then(Sexp::atom) {
        Some(head) if lc(head) == "and" => Ok(items[1..].to_vec()),
        _ => Ok(vec![sexp.clone()]),
    }
}

/// Parses a domain document back into its definition.
pub fn parse_pddl_domain(text: &str) -> Result<DomainDef, PddlError> {
    let sexps = parse_sexps(text)?;
    let top = match sexps.as_slice() {
        [one] => one
            .list()
            .ok_or_else(|| PddlError::Structure("expected (define ...)".into()))?,
        _ => return Err(PddlError::Structure("expected one (define ...) form".into())),
    };
    if top.first().and_then(Sexp::atom).map(lc).as_deref() != Some("define") {
        return Err(PddlError::Structure("expected (define ...)".into()));
    }
    let mut name = None;
    let mut requirements = Vec::new();
    let mut predicates = Vec::new();
    let mut actions = Vec::new();
    for section in &top[1..] {
        let items = section
            .list()
            .ok_or_else(|| PddlError::Structure("stray atom in define".into()))?;
        let head = items
            .first()
            .and_then(Sexp::atom)
            .map(lc)
            .ok_or_else(|| PddlError::Structure("empty section".into()))?;
        match head.as_str() {
            "domain" => {
                name = items.get(1).and_then(Sexp::atom).map(lc);
            }
            ":requirements" => {
                for r in &items[1..] {
                    requirements.push(lc(r.atom().ok_or_else(|| {
                        PddlError::Structure("bad requirement".into())
                    })?));
                }
            }
            ":types" => {}
            ":predicates" => {
                for p in &items[1..] {
                    predicates.push(parse_schema_atom(p)?);
                }
            }
            ":action" => {
                let aname = items
                    .get(1)
                    .and_then(Sexp::atom)
                    .map(lc)
                    .ok_or_else(|| PddlError::Structure("action without a name".into()))?;
                let mut params = Vec::new();
                let mut precondition = Vec::new();
                let mut effects = Vec::new();
                let mut i = 2;
                while i + 1 < items.len() {
                    let key = items[i]
                        .atom()
                        .map(lc)
                        .ok_or_else(|| PddlError::Structure("expected a keyword".into()))?;
                    let val = &items[i + 1];
                    match key.as_str() {
                        ":parameters" => {
                            params = parse_schema_atom(&Sexp::List(
                                std::iter::once(Sexp::Atom("params".into()))
                                    .chain(val.list().unwrap_or_default().iter().cloned())
                                    .collect(),
                            ))?
                            .args;
                        }
                        ":precondition" => {
                            for a in parse_conj(val)? {
                                precondition.push(parse_schema_atom(&a)?);
                            }
                        }
                        ":effect" => {
                            for a in parse_conj(val)? {
                                let items = a
                                    .list()
                                    .ok_or_else(|| PddlError::Structure("bad effect".into()))?;
                                match items.first().and_then(Sexp::atom).map(lc).as_deref() {
                                    Some("not") => {
                                        let inner = items.get(1).ok_or_else(|| {
                                            PddlError::Structure("empty (not)".into())
                                        })?;
                                        effects.push((false, parse_schema_atom(inner)?));
                                    }
                                    _ => effects.push((true, parse_schema_atom(&a)?)),
                                }
                            }
                        }
                        other => {
                            return Err(PddlError::Structure(format!(
                                "unknown action keyword {other}"
                            )))
                        }
                    }
                    i += 2;
                }
                actions.push(ActionSchema {
                    name: aname,
                    params,
                    precondition,
                    effects,
                });
            }
            other => return Err(PddlError::Structure(format!("unknown section {other}"))),
        }
    }
    Ok(DomainDef {
        name: name.ok_or_else(|| PddlError::Structure("missing (domain ...)".into()))?,
        requirements,
        predicates,
        actions,
    })
}

// ---------------------------------------------------------------------------
// generic STRIPS interpretation of a schema (test oracle for apply)

fn ground_atom(a: &SchemaAtom, bind: &dyn Fn(&str) -> Option<ObjectId>) -> Result<Fact, PddlError> {
    let args: Vec<ObjectId> = a
        .args
        .iter()
        .map(|p| bind(p).ok_or_else(|| PddlError::Structure(format!("unbound parameter {p}"))))
        .collect::<Result<_, _>>()?;
    match (a.pred.as_str(), args.as_slice()) {
        ("on", [x, y]) => Ok(Fact::on(x.clone(), y.clone())),
        ("on-table", [x]) => Ok(Fact::OnTable(x.clone())),
        ("clear", [x]) => Ok(Fact::Clear(x.clone())),
        _ => Err(PddlError::Structure(format!(
            "unknown predicate {} with arity {}",
            a.pred,
            a.args.len()
        ))),
    }
}

/// Applies an action schema literally (delete then add), without any of the
/// hand-coded semantics in [`crate::domain::apply`]. Returns `None` when a
/// precondition does not hold.
pub fn interpret_schema(
    schema: &ActionSchema,
    args: &[ObjectId],
    state: &crate::domain::WorldState,
) -> Result<Option<BTreeSet<Fact>>, PddlError> {
    if args.len() != schema.params.len() {
        return Err(PddlError::Structure(format!(
            "action {} expects {} arguments",
            schema.name,
            schema.params.len()
        )));
    }
    let bind = |p: &str| -> Option<ObjectId> {
        schema
            .params
            .iter()
            .position(|q| q == p)
            .map(|i| args[i].clone())
    };
    for pre in &schema.precondition {
        if !state.contains(&ground_atom(pre, &bind)?) {
            return Ok(None);
        }
    }
    let mut facts = state.facts().clone();
    for (positive, a) in &schema.effects {
        let f = ground_atom(a, &bind)?;
        if *positive {
            facts.insert(f);
        } else {
            facts.remove(&f);
        }
    }
    Ok(Some(facts))
}

// ---------------------------------------------------------------------------
// problems

/// Emits the per-problem document, objects in problem order and init facts in
/// the same canonical order as the NL rendering.
pub fn emit_problem(problem: &Problem) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "(define (problem {})", problem.id);
    let _ = writeln!(s, "  (:domain stacking)");
    let objs: Vec<String> = problem.objects.iter().map(|o| hyphenate(&o.name)).collect();
    let _ = writeln!(s, "  (:objects {})", objs.join(" "));
    let init: Vec<String> = problem
        .init
        .canonical_facts(&problem.objects)
        .iter()
        .map(fact_sexp)
        .collect();
    let _ = writeln!(s, "  (:init {})", init.join(" "));
    let goal: Vec<String> = problem.goal.atoms.iter().map(fact_sexp).collect();
    let _ = writeln!(s, "  (:goal (and {})))", goal.join(" "));
    s
}

/// The goal-predicate fragment form, e.g. `(and (clear notebook))`.
pub fn emit_goal(goal: &Goal) -> String {
    let atoms: Vec<String> = goal.atoms.iter().map(fact_sexp).collect();
    format!("(and {})", atoms.join(" "))
}

pub fn fact_sexp(fact: &Fact) -> String {
    match fact {
        Fact::On { above, below } => {
            format!("(on {} {})", hyphenate(&above.name), hyphenate(&below.name))
        }
        Fact::OnTable(x) => format!("(on-table {})", hyphenate(&x.name)),
        Fact::Clear(x) => format!("(clear {})", hyphenate(&x.name)),
    }
}

fn fact_from_atom(a: &SchemaAtom, lookup: &dyn Fn(&str) -> Result<ObjectId, PddlError>) -> Result<Fact, PddlError> {
    match (a.pred.as_str(), a.args.as_slice()) {
        ("on", [x, y]) => Ok(Fact::on(lookup(x)?, lookup(y)?)),
        ("on-table", [x]) => Ok(Fact::OnTable(lookup(x)?)),
        ("clear", [x]) => Ok(Fact::Clear(lookup(x)?)),
        _ => Err(PddlError::Structure(format!(
            "unknown predicate {} with arity {}",
            a.pred,
            a.args.len()
        ))),
    }
}

/// Parses a problem document. Missing `clear` facts are recomputed (an LLM
/// parser may omit them); a bare single goal atom is accepted without the
/// `(and ...)` wrapper.
pub fn parse_pddl_problem(
    text: &str,
    vocab: &crate::grammar::Vocabulary,
) -> Result<Problem, PddlError> {
    let sexps = parse_sexps(text)?;
    let top = match sexps.as_slice() {
        [one] => one
            .list()
            .ok_or_else(|| PddlError::Structure("expected (define ...)".into()))?,
        _ => return Err(PddlError::Structure("expected one (define ...) form".into())),
    };
    if top.first().and_then(Sexp::atom).map(lc).as_deref() != Some("define") {
        return Err(PddlError::Structure("expected (define ...)".into()));
    }
    let mut id = None;
    let mut objects: Vec<ObjectId> = Vec::new();
    let mut init_atoms = Vec::new();
    let mut goal_atoms = Vec::new();
    for section in &top[1..] {
        let items = section
            .list()
            .ok_or_else(|| PddlError::Structure("stray atom in define".into()))?;
        let head = items
            .first()
            .and_then(Sexp::atom)
            .map(lc)
            .ok_or_else(|| PddlError::Structure("empty section".into()))?;
        match head.as_str() {
            "problem" => id = items.get(1).and_then(Sexp::atom).map(|s| s.to_string()),
            ":domain" => {}
            ":objects" => {
                for o in &items[1..] {
                    let tok = o
                        .atom()
                        .ok_or_else(|| PddlError::Structure("bad object token".into()))?;
                    if tok == "-" || tok == "object" {
                        continue; // typed object list
                    }
                    objects.push(vocab.object(&dehyphenate(&lc(tok))));
                }
            }
            ":init" => {
                for a in &items[1..] {
                    init_atoms.push(parse_schema_atom(a)?);
                }
            }
            ":goal" => {
                let body = items
                    .get(1)
                    .ok_or_else(|| PddlError::Structure("empty :goal".into()))?;
                for a in parse_conj(body)? {
                    goal_atoms.push(parse_schema_atom(&a)?);
                }
            }
            other => return Err(PddlError::Structure(format!("unknown section {other}"))),
        }
    }
    let declared: BTreeSet<ObjectId> = objects.iter().cloned().collect();
    let lookup = |tok: &str| -> Result<ObjectId, PddlError> {
        let name = dehyphenate(&lc(tok));
        declared
            .iter()
            .find(|o| o.name == name)
            .cloned()
            .ok_or(PddlError::UnknownObject(name))
    };
    let mut init_facts: BTreeSet<Fact> = BTreeSet::new();
    for a in &init_atoms {
        init_facts.insert(fact_from_atom(a, &lookup)?);
    }
    let init = canonicalize(&init_facts, &declared)?;
    let goal = Goal::new(
        goal_atoms
            .iter()
            .map(|a| fact_from_atom(a, &lookup))
            .collect::<Result<_, _>>()?,
    )?;
    let problem = Problem::new(
        id.ok_or_else(|| PddlError::Structure("missing (problem ...)".into()))?,
        objects,
        init,
        goal,
    )?;
    Ok(problem)
}

/// Parses a goal fragment such as `(and (clear notebook))` or a bare atom,
/// resolving object tokens against the given object set.
pub fn parse_goal_fragment(text: &str, objects: &[ObjectId]) -> Result<Goal, PddlError> {
    let sexps = parse_sexps(text)?;
    let top = match sexps.as_slice() {
        [one] => one,
        _ => return Err(PddlError::Structure("expected one goal form".into())),
    };
    let lookup = |tok: &str| -> Result<ObjectId, PddlError> {
        let name = dehyphenate(&lc(tok));
        objects
            .iter()
            .find(|o| o.name == name)
            .cloned()
            .ok_or(PddlError::UnknownObject(name))
    };
    let mut atoms = Vec::new();
    for a in parse_conj(top)? {
        atoms.push(fact_from_atom(&parse_schema_atom(&a)?, &lookup)?);
    }
    Ok(Goal::new(atoms)?)
}

// ---------------------------------------------------------------------------
// plans

/// Emits a plan document: one ground action s-expression per line.
pub fn emit_plan(plan: &Plan) -> String {
    let mut s = String::new();
    for a in &plan.actions {
        let line = match a {
            GroundAction::Unstack { x, y } => {
                format!("(unstack {} {})", hyphenate(&x.name), hyphenate(&y.name))
            }
            GroundAction::StackFromTable { x, y } => format!(
                "(stackfromtable {} {})",
                hyphenate(&x.name),
                hyphenate(&y.name)
            ),
            GroundAction::Stack { x, y, z } => format!(
                "(stack {} {} {})",
                hyphenate(&x.name),
                hyphenate(&y.name),
                hyphenate(&z.name)
            ),
        };
        let _ = writeln!(s, "{line}");
    }
    s
}

/// Parses a sequence of ground action s-expressions into a plan. Unknown
/// action names, wrong arities, and unknown objects are errors.
pub fn parse_pddl_plan(text: &str, problem: &Problem) -> Result<Plan, PddlError> {
    let lookup = |tok: &str| -> Result<ObjectId, PddlError> {
        let name = dehyphenate(&lc(tok));
        problem
            .objects
            .iter()
            .find(|o| o.name == name)
            .cloned()
            .ok_or(PddlError::UnknownObject(name))
    };
    let mut actions = Vec::new();
    for sexp in parse_sexps(text)? {
        let items = sexp
            .list()
            .ok_or_else(|| PddlError::Structure("expected an action list".into()))?;
        let mut toks = Vec::new();
        for it in items {
            toks.push(
                it.atom()
                    .ok_or_else(|| PddlError::Structure("nested list in action".into()))?,
            );
        }
        let action = match toks.split_first() {
            Some((&name, args)) => match (lc(name).as_str(), args) {
                ("unstack", [x, y]) => GroundAction::Unstack {
                    x: lookup(x)?,
                    y: lookup(y)?,
                },
                ("stackfromtable", [x, y]) => GroundAction::StackFromTable {
                    x: lookup(x)?,
                    y: lookup(y)?,
                },
                ("stack", [x, y, z]) => GroundAction::Stack {
                    x: lookup(x)?,
                    y: lookup(y)?,
                    z: lookup(z)?,
                },
                ("unstack" | "stackfromtable" | "stack", _) => {
                    return Err(PddlError::Structure(format!(
                        "wrong arity for action {}",
                        lc(name)
                    )))
                }
                (other, _) => return Err(PddlError::UnknownAction(other.to_string())),
            },
            None => return Err(PddlError::Structure("empty action".into())),
        };
        actions.push(action);
    }
    Ok(Plan::new(actions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::{apply, WorldState};
    use crate::fixtures;
    use crate::grammar::Vocabulary;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn domain_has_three_actions_in_order() {
        let d = stacking_domain();
        let names: Vec<&str> = d.actions.iter().map(|a| a.name.as_str()).collect();
        assert_eq!(names, ["stack", "unstack", "stackfromtable"]);
        assert_eq!(d.predicates.len(), 3);
    }

    #[test]
    fn domain_emit_parse_is_byte_fixpoint() {
        let text = emit_domain();
        let parsed = parse_pddl_domain(&text).unwrap();
        assert_eq!(parsed, stacking_domain());
        assert_eq!(emit_domain_def(&parsed), text);
    }

    #[test]
    fn problem_round_trip_on_fixture() {
        let vocab = Vocabulary::default_vocabulary();
        let p = fixtures::problem();
        let text = emit_problem(&p);
        assert!(text.contains("(:objects writing-pad notebook tissue-box tablet)"));
        assert!(text.contains("(:goal (and (clear notebook))))"));
        let back = parse_pddl_problem(&text, &vocab).unwrap();
        assert_eq!(back, p);
        assert_eq!(emit_problem(&back), text);
    }

    #[test]
    fn problem_parse_tolerates_case_typing_and_omitted_clear() {
        let vocab = Vocabulary::default_vocabulary();
        let text = "(define (problem Q)\n  (:domain stacking)\n  (:objects PLATE mug - object)\n  (:init (ON-TABLE plate) (on mug plate))\n  (:goal (clear plate)))";
        let p = parse_pddl_problem(text, &vocab).unwrap();
        assert_eq!(p.id, "Q");
        assert!(p.init.is_clear(&ObjectId::household("mug")));
        assert_eq!(p.goal.atoms, vec![Fact::Clear(ObjectId::household("plate"))]);
    }

    #[test]
    fn problem_parse_rejects_cycles_and_unknowns() {
        let vocab = Vocabulary::default_vocabulary();
        let cyclic = "(define (problem q) (:objects plate mug) (:init (on plate mug) (on mug plate)) (:goal (clear plate)))";
        assert!(matches!(
            parse_pddl_problem(cyclic, &vocab),
            Err(PddlError::Inconsistent(_))
        ));
        let unknown = "(define (problem q) (:objects plate) (:init (on-table plate)) (:goal (clear mug)))";
        assert!(matches!(
            parse_pddl_problem(unknown, &vocab),
            Err(PddlError::UnknownObject(_))
        ));
    }

    #[test]
    fn unbalanced_parenthesis_is_a_syntax_error() {
        assert!(matches!(
            parse_sexps("(define (problem q)"),
            Err(PddlError::Syntax { .. })
        ));
        assert!(matches!(parse_sexps(")"), Err(PddlError::Syntax { .. })));
    }

    #[test]
    fn comments_are_ignored() {
        let sexps = parse_sexps("; header\n(a b) ; trailing\n(c)").unwrap();
        assert_eq!(sexps.len(), 2);
    }

    #[test]
    fn goal_fragment_forms() {
        let objs = fixtures::objects();
        let g = parse_goal_fragment("(and (clear notebook))", &objs).unwrap();
        assert_eq!(g.atoms, vec![Fact::Clear(ObjectId::household("notebook"))]);
        let g = parse_goal_fragment("(on tissue-box tablet)", &objs).unwrap();
        assert_eq!(
            g.atoms,
            vec![Fact::on(
                ObjectId::household("tissue box"),
                ObjectId::household("tablet")
            )]
        );
        assert!(parse_goal_fragment("(and)", &objs).is_err());
        assert!(parse_goal_fragment("(clear spaceship)", &objs).is_err());
    }

    #[test]
    fn plan_round_trip_and_errors() {
        let p = fixtures::problem();
        let plan = Plan::new(vec![GroundAction::Unstack {
            x: ObjectId::household("tissue box"),
            y: ObjectId::household("notebook"),
        }]);
        let text = emit_plan(&plan);
        assert_eq!(text, "(unstack tissue-box notebook)\n");
        assert_eq!(parse_pddl_plan(&text, &p).unwrap(), plan);
        assert!(matches!(
            parse_pddl_plan("(fly tablet)", &p),
            Err(PddlError::UnknownAction(_))
        ));
        assert!(matches!(
            parse_pddl_plan("(unstack tablet)", &p),
            Err(PddlError::Structure(_))
        ));
        assert!(matches!(
            parse_pddl_plan("(unstack tablet spaceship)", &p),
            Err(PddlError::UnknownObject(_))
        ));
    }

    // interpret_schema on the parsed domain must agree with apply everywhere.
    #[test]
    fn schema_interpretation_matches_apply() {
        let domain = parse_pddl_domain(&emit_domain()).unwrap();
        let schema = |name: &str| domain.actions.iter().find(|a| a.name == name).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let objects: Vec<ObjectId> = ["plate", "mug", "bowl", "fork"]
            .into_iter()
            .map(ObjectId::household)
            .collect();
        let states =
            crate::domain::enumerate_configurations(&objects.iter().cloned().collect()).unwrap();
        for _ in 0..200 {
            let state: &WorldState = &states[rng.gen_range(0..states.len())];
            let pick = |rng: &mut ChaCha8Rng| objects[rng.gen_range(0..objects.len())].clone();
            let (schema, args, action) = match rng.gen_range(0..3u8) {
                0 => {
                    let (x, y) = (pick(&mut rng), pick(&mut rng));
                    (
                        schema("unstack"),
                        vec![x.clone(), y.clone()],
                        GroundAction::Unstack { x, y },
                    )
                }
                1 => {
                    let (x, y) = (pick(&mut rng), pick(&mut rng));
                    (
                        schema("stackfromtable"),
                        vec![x.clone(), y.clone()],
                        GroundAction::StackFromTable { x, y },
                    )
                }
                _ => {
                    let (x, y, z) = (pick(&mut rng), pick(&mut rng), pick(&mut rng));
                    (
                        schema("stack"),
                        vec![x.clone(), y.clone(), z.clone()],
                        GroundAction::Stack { x, y, z },
                    )
                }
            };
            // repeated-object bindings are rejected by apply but not by raw
            // STRIPS, so only well-formed groundings are comparable
            if !action.is_well_formed() {
                assert!(apply(state, &action).is_err());
                continue;
            }
            let via_schema = interpret_schema(schema, &args, state).unwrap();
            match (via_schema, apply(state, &action)) {
                (Some(facts), Ok(next)) => assert_eq!(&facts, next.facts()),
                (None, Err(_)) => {}
                (schema_out, apply_out) => {
                    panic!("disagreement: schema {schema_out:?} apply {apply_out:?}")
                }
            }
        }
    }
}
