//! The synthetic grammar: renders problems and plans as natural language and
//! inverts the same templates back into symbols.
//!
//! Five sentence forms exist:
//!   "The {x} rests on the table."   <-> on-table(x)
//!   "The {x} is on the {y}."        <-> on(x, y)
//!   "There is nothing on the {x}."  <-> clear(x)
//!   "Move the {x} onto the {y}."    <-> resolved move with object destination
//!   "Move the {x} onto the table."  <-> resolved move to the table
//!
//! Move sentences underdetermine the action schema, so plan parsing tracks
//! the simulated state sentence by sentence; only a template mismatch is a
//! parse error, and invalid moves are left for the simulator to fail.

use std::collections::BTreeSet;
use std::path::Path;

use thiserror::Error;

use crate::domain::{
    apply, DomainError, Fact, Goal, GroundAction, ObjectId, Plan, Problem, WorldState,
};

const DEFAULT_VOCABULARY: &str = include_str!("../assets/vocabulary.txt");

/// Phrases that delimit template slots; object names must not contain them.
const RESERVED_PHRASES: &[&str] = &[" is on the ", " rests on the table", " onto the "];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GrammarError {
    #[error("unparseable sentence: {0:?}")]
    UnparseableSentence(String),
    #[error("unparseable plan sentence: {0:?}")]
    UnparseablePlan(String),
    #[error(transparent)]
    Inconsistent(#[from] DomainError),
    #[error("invalid vocabulary: {0}")]
    InvalidVocabulary(String),
    #[error("io error: {0}")]
    Io(String),
}

/// The object-name vocabulary: everyday household items plus the
/// out-of-distribution list used for the heavier constraint condition.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocabulary {
    pub household: Vec<String>,
    pub ood: Vec<String>,
}

impl Vocabulary {
    pub fn new(household: Vec<String>, ood: Vec<String>) -> Result<Vocabulary, GrammarError> {
        let v = Vocabulary { household, ood };
        v.validate()?;
        Ok(v)
    }

    /// The shipped default list (attested items plus extensions).
    pub fn default_vocabulary() -> Vocabulary {
        Vocabulary::parse(DEFAULT_VOCABULARY).expect("default vocabulary is valid")
    }

    /// Loads the plain-text config format: two sections "[household]" and
    /// "[ood]", one name per line, blank lines ignored.
    pub fn parse(text: &str) -> Result<Vocabulary, GrammarError> {
        let mut household = Vec::new();
        let mut ood = Vec::new();
        let mut section: Option<&mut Vec<String>> = None;
        for line in text.lines() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            match line {
                "[household]" => section = Some(&mut household),
                "[ood]" => section = Some(&mut ood),
                name => match section {
                    Some(ref mut s) => s.push(name.to_string()),
                    None => {
                        return Err(GrammarError::InvalidVocabulary(format!(
                            "name {name:?} before any section header"
                        )))
                    }
                },
            }
        }
        Vocabulary::new(household, ood)
    }

    pub fn load(path: &Path) -> Result<Vocabulary, GrammarError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| GrammarError::Io(e.to_string()))?;
        Vocabulary::parse(&text)
    }

    fn validate(&self) -> Result<(), GrammarError> {
        let mut seen = BTreeSet::new();
        for name in self.household.iter().chain(&self.ood) {
            valid_name(name)?;
            if !seen.insert(name.clone()) {
                return Err(GrammarError::InvalidVocabulary(format!(
                    "duplicate name {name:?}"
                )));
            }
        }
        Ok(())
    }

    /// Classifies a parsed surface name. Names absent from both lists default
    /// to household (the NL surface does not encode typicality).
    pub fn object(&self, name: &str) -> ObjectId {
        ObjectId {
            name: name.to_string(),
            ood: self.ood.iter().any(|n| n == name),
        }
    }
}

fn valid_name(name: &str) -> Result<(), GrammarError> {
    let ok = !name.is_empty()
        && !name.starts_with(' ')
        && !name.ends_with(' ')
        && !name.contains("  ")
        && name.chars().all(|c| c.is_ascii_lowercase() || c == ' ');
    if !ok {
        return Err(GrammarError::InvalidVocabulary(format!(
            "name {name:?} must be non-empty lower-case words"
        )));
    }
    if name == "table" || name.split(' ').any(|w| w == "table") {
        return Err(GrammarError::InvalidVocabulary(format!(
            "name {name:?} collides with the table destination"
        )));
    }
    for phrase in RESERVED_PHRASES {
        if format!(" {name} ").contains(phrase) {
            return Err(GrammarError::InvalidVocabulary(format!(
                "name {name:?} contains the reserved phrase {phrase:?}"
            )));
        }
    }
    Ok(())
}

pub fn render_fact(fact: &Fact) -> String {
    match fact {
        Fact::OnTable(x) => format!("The {x} rests on the table."),
        Fact::On { above, below } => format!("The {above} is on the {below}."),
        Fact::Clear(x) => format!("There is nothing on the {x}."),
    }
}

fn parse_fact_sentence(line: &str, vocab: &Vocabulary) -> Result<Fact, GrammarError> {
    let err = || GrammarError::UnparseableSentence(line.to_string());
    if let Some(rest) = line.strip_prefix("There is nothing on the ") {
        let name = rest.strip_suffix('.').ok_or_else(err)?;
        valid_name(name).map_err(|_| err())?;
        return Ok(Fact::Clear(vocab.object(name)));
    }
    if let Some(rest) = line.strip_prefix("The ") {
        if let Some(name) = rest.strip_suffix(" rests on the table.") {
            valid_name(name).map_err(|_| err())?;
            return Ok(Fact::OnTable(vocab.object(name)));
        }
        if let Some(body) = rest.strip_suffix('.') {
            let mut parts = body.splitn(2, " is on the ");
            let above = parts.next().ok_or_else(err)?;
            let below = parts.next().ok_or_else(err)?;
            valid_name(above).map_err(|_| err())?;
            valid_name(below).map_err(|_| err())?;
            return Ok(Fact::on(vocab.object(above), vocab.object(below)));
        }
    }
    Err(err())
}

/// Renders the "Initially:" / "Goal:" block, one sentence per line, init
/// facts in canonical order and goal atoms in goal order. No trailing newline.
pub fn render_problem(problem: &Problem) -> String {
    let mut lines = vec!["Initially:".to_string()];
    for fact in problem.init.canonical_facts(&problem.objects) {
        lines.push(render_fact(&fact));
    }
    lines.push("Goal:".to_string());
    for atom in &problem.goal.atoms {
        lines.push(render_fact(atom));
    }
    lines.join("\n")
}

/// Inverts [`render_problem`]. The object set is inferred from the names
/// mentioned; the init facts are canonicalized, so inconsistent or incomplete
/// blocks are rejected.
pub fn parse_problem_nl(
    text: &str,
    vocab: &Vocabulary,
    id: impl Into<String>,
) -> Result<Problem, GrammarError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty());
    if lines.next() != Some("Initially:") {
        return Err(GrammarError::UnparseableSentence(
            "missing \"Initially:\" header".to_string(),
        ));
    }
    let mut init_facts: BTreeSet<Fact> = BTreeSet::new();
    let mut order: Vec<ObjectId> = Vec::new();
    let note = |fact: &Fact, order: &mut Vec<ObjectId>| {
        for o in fact.objects() {
            if !order.contains(o) {
                order.push(o.clone());
            }
        }
    };
    let mut saw_goal = false;
    let mut goal_atoms = Vec::new();
    for line in &mut lines {
        if line == "Goal:" {
            saw_goal = true;
            continue;
        }
        let fact = parse_fact_sentence(line, vocab)?;
        note(&fact, &mut order);
        if saw_goal {
            goal_atoms.push(fact);
        } else {
            init_facts.insert(fact);
        }
    }
    if !saw_goal {
        return Err(GrammarError::UnparseableSentence(
            "missing \"Goal:\" header".to_string(),
        ));
    }
    if init_facts.is_empty() {
        return Err(GrammarError::UnparseableSentence(
            "empty initial state".to_string(),
        ));
    }
    let objects: BTreeSet<ObjectId> = order.iter().cloned().collect();
    let init = crate::domain::canonicalize(&init_facts, &objects)?;
    let goal = Goal::new(goal_atoms)?;
    Ok(Problem::new(id, order, init, goal)?)
}

/// The NL surface form of a single move.
pub fn render_action(action: &GroundAction) -> String {
    match action {
        GroundAction::Unstack { x, .. } => format!("Move the {x} onto the table."),
        GroundAction::StackFromTable { x, y } => format!("Move the {x} onto the {y}."),
        GroundAction::Stack { x, z, .. } => format!("Move the {x} onto the {z}."),
    }
}

pub fn render_plan(plan: &Plan) -> String {
    plan.actions
        .iter()
        .map(render_action)
        .collect::<Vec<_>>()
        .join("\n")
}

enum MoveSentence {
    ToTable(String),
    Onto(String, String),
}

fn parse_move_sentence(line: &str) -> Result<MoveSentence, GrammarError> {
    let err = || GrammarError::UnparseablePlan(line.to_string());
    let rest = line.strip_prefix("Move the ").ok_or_else(err)?;
    if let Some(name) = rest.strip_suffix(" onto the table.") {
        valid_name(name).map_err(|_| err())?;
        return Ok(MoveSentence::ToTable(name.to_string()));
    }
    let body = rest.strip_suffix('.').ok_or_else(err)?;
    let mut parts = body.splitn(2, " onto the ");
    let x = parts.next().ok_or_else(err)?;
    let y = parts.next().ok_or_else(err)?;
    valid_name(x).map_err(|_| err())?;
    valid_name(y).map_err(|_| err())?;
    Ok(MoveSentence::Onto(x.to_string(), y.to_string()))
}

/// Parses an NL plan against a running simulation of the initial state.
///
/// A table destination with current support on(x, y) resolves to unstack;
/// an object destination resolves to stackfromtable when x is on the table
/// and to stack otherwise. Sentences naming unknown objects do not belong to
/// the grammar's language and are parse errors. When a resolved action's
/// preconditions fail, the plan is still returned (the simulator fails it)
/// and resolution continues from the unchanged state.
pub fn parse_plan_nl(
    text: &str,
    init: &WorldState,
    objects: &[ObjectId],
) -> Result<Plan, GrammarError> {
    let find = |name: &str| objects.iter().find(|o| o.name == name).cloned();
    let mut state = init.clone();
    let mut actions = Vec::new();
    for line in text.lines().map(str::trim).filter(|l| !l.is_empty()) {
        let sentence = parse_move_sentence(line)?;
        let action = match sentence {
            MoveSentence::ToTable(xn) => {
                let x = find(&xn).ok_or_else(|| GrammarError::UnparseablePlan(line.to_string()))?;
                match state.support_of(&x) {
                    Some(y) => GroundAction::Unstack { x, y: y.clone() },
                    // Already on the table: no schema moves an object from the
                    // table to the table; emit an unstack off an arbitrary
                    // other object, which necessarily fails simulation.
                    None => {
                        let y = objects
                            .iter()
                            .find(|o| **o != x)
                            .cloned()
                            .ok_or_else(|| GrammarError::UnparseablePlan(line.to_string()))?;
                        GroundAction::Unstack { x, y }
                    }
                }
            }
            MoveSentence::Onto(xn, dn) => {
                let x = find(&xn).ok_or_else(|| GrammarError::UnparseablePlan(line.to_string()))?;
                let d = find(&dn).ok_or_else(|| GrammarError::UnparseablePlan(line.to_string()))?;
                match state.support_of(&x) {
                    None => GroundAction::StackFromTable { x, y: d },
                    Some(y) => GroundAction::Stack {
                        x,
                        y: y.clone(),
                        z: d,
                    },
                }
            }
        };
        if let Ok(next) = apply(&state, &action) {
            state = next;
        }
        actions.push(action);
    }
    Ok(Plan::new(actions))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::canonicalize;
    use crate::fixtures;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    const FIXTURE_BLOCK: &str = "Initially:\n\
        The writing pad rests on the table.\n\
        The notebook is on the writing pad.\n\
        The tissue box is on the notebook.\n\
        There is nothing on the tissue box.\n\
        The tablet rests on the table.\n\
        There is nothing on the tablet.\n\
        Goal:\n\
        There is nothing on the notebook.";

    #[test]
    fn renders_fixture_block_verbatim() {
        assert_eq!(render_problem(&fixtures::problem()), FIXTURE_BLOCK);
    }

    #[test]
    fn parses_fixture_block() {
        let vocab = Vocabulary::default_vocabulary();
        let parsed = parse_problem_nl(FIXTURE_BLOCK, &vocab, "qualitative-example").unwrap();
        assert_eq!(parsed, fixtures::problem());
    }

    #[test]
    fn renders_single_object_problem() {
        let a = ObjectId::household("plate");
        let facts = [Fact::OnTable(a.clone())].into();
        let init = canonicalize(&facts, &[a.clone()].into()).unwrap();
        let goal = Goal::new(vec![Fact::OnTable(a.clone())]).unwrap();
        let p = Problem::new("p", vec![a], init, goal).unwrap();
        assert_eq!(
            render_problem(&p),
            "Initially:\nThe plate rests on the table.\nThere is nothing on the plate.\nGoal:\nThe plate rests on the table."
        );
    }

    #[test]
    fn rejects_unknown_template() {
        let vocab = Vocabulary::default_vocabulary();
        let text = "Initially:\nThe plate sits near the mug.\nGoal:\nThere is nothing on the plate.";
        assert!(matches!(
            parse_problem_nl(text, &vocab, "x"),
            Err(GrammarError::UnparseableSentence(_))
        ));
    }

    #[test]
    fn rejects_empty_init() {
        let vocab = Vocabulary::default_vocabulary();
        let text = "Initially:\nGoal:\nThere is nothing on the plate.";
        assert!(matches!(
            parse_problem_nl(text, &vocab, "x"),
            Err(GrammarError::UnparseableSentence(_))
        ));
    }

    #[test]
    fn rejects_inconsistent_init() {
        let vocab = Vocabulary::default_vocabulary();
        let text = "Initially:\nThe plate is on the mug.\nThe mug is on the plate.\nGoal:\nThere is nothing on the plate.";
        assert!(matches!(
            parse_problem_nl(text, &vocab, "x"),
            Err(GrammarError::Inconsistent(_))
        ));
    }

    #[test]
    fn renders_actions() {
        let h = ObjectId::household;
        assert_eq!(
            render_action(&GroundAction::Unstack { x: h("tissue box"), y: h("notebook") }),
            "Move the tissue box onto the table."
        );
        assert_eq!(
            render_action(&GroundAction::StackFromTable { x: h("tablet"), y: h("notebook") }),
            "Move the tablet onto the notebook."
        );
        assert_eq!(
            render_action(&GroundAction::Stack { x: h("plate"), y: h("mug"), z: h("bowl") }),
            "Move the plate onto the bowl."
        );
    }

    #[test]
    fn plan_parsing_resolves_against_running_state() {
        let h = ObjectId::household;
        let problem = fixtures::problem();
        // table destination resolves to unstack
        let plan =
            parse_plan_nl("Move the tissue box onto the table.", &problem.init, &problem.objects)
                .unwrap();
        assert_eq!(
            plan.actions,
            vec![GroundAction::Unstack { x: h("tissue box"), y: h("notebook") }]
        );
        // on-table object resolves to stackfromtable even when invalid
        let plan =
            parse_plan_nl("Move the tablet onto the notebook.", &problem.init, &problem.objects)
                .unwrap();
        assert_eq!(
            plan.actions,
            vec![GroundAction::StackFromTable { x: h("tablet"), y: h("notebook") }]
        );
        // two-step: state advances between sentences
        let text = "Move the tissue box onto the table.\nMove the tissue box onto the tablet.";
        let plan = parse_plan_nl(text, &problem.init, &problem.objects).unwrap();
        assert_eq!(
            plan.actions,
            vec![
                GroundAction::Unstack { x: h("tissue box"), y: h("notebook") },
                GroundAction::StackFromTable { x: h("tissue box"), y: h("tablet") },
            ]
        );
    }

    #[test]
    fn plan_parsing_rejects_non_template_text() {
        let problem = fixtures::problem();
        assert!(matches!(
            parse_plan_nl("Throw the tablet.", &problem.init, &problem.objects),
            Err(GrammarError::UnparseablePlan(_))
        ));
        assert!(matches!(
            parse_plan_nl("Move the spaceship onto the tablet.", &problem.init, &problem.objects),
            Err(GrammarError::UnparseablePlan(_))
        ));
    }

    #[test]
    fn vocabulary_rejects_bad_names() {
        assert!(Vocabulary::new(vec!["table".into()], vec![]).is_err());
        assert!(Vocabulary::new(vec!["Plate".into()], vec![]).is_err());
        assert!(Vocabulary::new(vec!["a  b".into()], vec![]).is_err());
        assert!(Vocabulary::new(vec!["dup".into()], vec!["dup".into()]).is_err());
        assert!(Vocabulary::new(vec!["lid is on the pot".into()], vec![]).is_err());
    }

    #[test]
    fn default_vocabulary_is_large_enough() {
        let v = Vocabulary::default_vocabulary();
        assert!(v.household.len() >= 20);
        assert!(v.ood.len() >= 10);
        for name in ["plate", "keyboard", "writing pad", "notebook", "tissue box", "tablet"] {
            assert!(v.household.iter().any(|n| n == name), "missing {name}");
        }
        for name in ["meteorite", "corduroy pants"] {
            assert!(v.ood.iter().any(|n| n == name), "missing {name}");
        }
    }

    pub(crate) fn random_problem(rng: &mut ChaCha8Rng, vocab: &Vocabulary) -> Problem {
        let n = rng.gen_range(2..=5);
        let (objects, init) =
            crate::benchgen::sample_initial_configuration(rng, n, vocab).unwrap();
        let spec = init.canonical_facts(&objects);
        let k = rng.gen_range(1..=spec.len());
        let atoms: Vec<Fact> = (0..k).map(|i| spec[i].clone()).collect();
        Problem::new("rt", objects, init, Goal::new(atoms).unwrap()).unwrap()
    }

    #[test]
    fn nl_round_trip_random_problems() {
        let vocab = Vocabulary::default_vocabulary();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let p = random_problem(&mut rng, &vocab);
            let back = parse_problem_nl(&render_problem(&p), &vocab, "rt").unwrap();
            assert_eq!(back, p);
        }
    }
}
