//! World-state representation and action semantics for the object-stacking
//! domain.
//!
//! States are sets of ground facts over labeled objects. Every object sits
//! either on the table or on exactly one other object; `Clear` facts are
//! stored redundantly (standard blocksworld encoding) and recomputed by
//! [`canonicalize`], which is the single consistency gate.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A labeled object. Names are lower-case tokens, spaces allowed
/// (e.g. "writing pad"). `ood` marks objects drawn from the
/// out-of-distribution vocabulary.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct ObjectId {
    pub name: String,
    pub ood: bool,
}

impl ObjectId {
    pub fn household(name: impl Into<String>) -> Self {
        ObjectId {
            name: name.into(),
            ood: false,
        }
    }

    pub fn ood(name: impl Into<String>) -> Self {
        ObjectId {
            name: name.into(),
            ood: true,
        }
    }
}

impl fmt::Display for ObjectId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

/// A ground atom of the stacking domain.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fact {
    /// `above` sits directly on `below`.
    On { above: ObjectId, below: ObjectId },
    /// The object sits directly on the table.
    OnTable(ObjectId),
    /// Nothing sits on the object.
    Clear(ObjectId),
}

impl Fact {
    pub fn objects(&self) -> Vec<&ObjectId> {
        match self {
            Fact::On { above, below } => vec![above, below],
            Fact::OnTable(x) | Fact::Clear(x) => vec![x],
        }
    }

    pub fn on(above: ObjectId, below: ObjectId) -> Fact {
        Fact::On { above, below }
    }
}

impl fmt::Display for Fact {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Fact::On { above, below } => write!(f, "on({above}, {below})"),
            Fact::OnTable(x) => write!(f, "on-table({x})"),
            Fact::Clear(x) => write!(f, "clear({x})"),
        }
    }
}

/// A canonical world state: a consistent fact set with `Clear` facts derived
/// from the `On` relation. Construct only through [`canonicalize`] or
/// [`apply`].
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WorldState {
    facts: BTreeSet<Fact>,
}

impl WorldState {
    pub fn facts(&self) -> &BTreeSet<Fact> {
        &self.facts
    }

    pub fn contains(&self, fact: &Fact) -> bool {
        self.facts.contains(fact)
    }

    pub fn is_clear(&self, x: &ObjectId) -> bool {
        self.facts.contains(&Fact::Clear(x.clone()))
    }

    pub fn is_on_table(&self, x: &ObjectId) -> bool {
        self.facts.contains(&Fact::OnTable(x.clone()))
    }

    /// The object `x` sits on, if `x` is not on the table.
    pub fn support_of(&self, x: &ObjectId) -> Option<&ObjectId> {
        self.facts.iter().find_map(|f| match f {
            Fact::On { above, below } if above == x => Some(below),
            _ => None,
        })
    }

    /// Objects mentioned by any fact, sorted.
    pub fn objects(&self) -> BTreeSet<ObjectId> {
        self.facts
            .iter()
            .flat_map(|f| f.objects().into_iter().cloned())
            .collect()
    }

    /// Facts in the canonical rendering order: stacks bottom-to-top, stacks
    /// ordered by their bottom object's position in `order`; per object the
    /// support fact first, then `Clear` if the object is clear. Objects in
    /// `order` that the state does not mention are skipped.
    pub fn canonical_facts(&self, order: &[ObjectId]) -> Vec<Fact> {
        let mut above_of: BTreeMap<&ObjectId, &ObjectId> = BTreeMap::new();
        let mut bottoms: Vec<&ObjectId> = Vec::new();
        for f in &self.facts {
            match f {
                Fact::On { above, below } => {
                    above_of.insert(below, above);
                }
                Fact::OnTable(x) => bottoms.push(x),
                Fact::Clear(_) => {}
            }
        }
        bottoms.sort_by_key(|b| order.iter().position(|o| &o == b).unwrap_or(usize::MAX));
        let mut out = Vec::new();
        for bottom in bottoms {
            let mut cur = bottom;
            out.push(Fact::OnTable(cur.clone()));
            loop {
                match above_of.get(cur) {
                    Some(next) => {
                        out.push(Fact::on((*next).clone(), cur.clone()));
                        cur = next;
                    }
                    None => {
                        out.push(Fact::Clear(cur.clone()));
                        break;
                    }
                }
            }
        }
        out
    }

    /// Mention order of objects under the canonical rendering, used to fix a
    /// problem's object order so NL round trips are exact.
    pub fn mention_order(&self, seed_order: &[ObjectId]) -> Vec<ObjectId> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for f in self.canonical_facts(seed_order) {
            for o in f.objects() {
                if seen.insert(o.clone()) {
                    out.push(o.clone());
                }
            }
        }
        out
    }
}

/// A conjunctive goal: a non-empty ordered list of atoms.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Goal {
    pub atoms: Vec<Fact>,
}

impl Goal {
    pub fn new(atoms: Vec<Fact>) -> Result<Goal, DomainError> {
        if atoms.is_empty() {
            return Err(DomainError::Inconsistent("goal has no atoms".into()));
        }
        for a in &atoms {
            if let Fact::On { above, below } = a {
                if above == below {
                    return Err(DomainError::Inconsistent(format!(
                        "goal atom on({above}, {below}) relates an object to itself"
                    )));
                }
            }
        }
        Ok(Goal { atoms })
    }
}

/// A ground instance of one of the three action schemas.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GroundAction {
    /// Move `x` from on top of `y` to the table.
    Unstack { x: ObjectId, y: ObjectId },
    /// Move `x` from the table onto `y`.
    StackFromTable { x: ObjectId, y: ObjectId },
    /// Move `x` from on top of `y` onto `z`.
    Stack { x: ObjectId, y: ObjectId, z: ObjectId },
}

impl GroundAction {
    pub fn objects(&self) -> Vec<&ObjectId> {
        match self {
            GroundAction::Unstack { x, y } | GroundAction::StackFromTable { x, y } => vec![x, y],
            GroundAction::Stack { x, y, z } => vec![x, y, z],
        }
    }

    /// All referenced objects must be pairwise distinct.
    pub fn is_well_formed(&self) -> bool {
        let objs = self.objects();
        objs.iter()
            .enumerate()
            .all(|(i, a)| objs[i + 1..].iter().all(|b| a != b))
    }
}

impl fmt::Display for GroundAction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GroundAction::Unstack { x, y } => write!(f, "unstack({x}, {y})"),
            GroundAction::StackFromTable { x, y } => write!(f, "stackfromtable({x}, {y})"),
            GroundAction::Stack { x, y, z } => write!(f, "stack({x}, {y}, {z})"),
        }
    }
}

/// An ordered action sequence, possibly empty.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Plan {
    pub actions: Vec<GroundAction>,
}

impl Plan {
    pub fn new(actions: Vec<GroundAction>) -> Plan {
        Plan { actions }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

/// A complete planning problem: object set, fully specified initial state,
/// and conjunctive goal. Objects are ordered (the order fixes NL rendering).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Problem {
    pub id: String,
    pub objects: Vec<ObjectId>,
    pub init: WorldState,
    pub goal: Goal,
}

impl Problem {
    /// Validates the cross-references between objects, init, and goal, and
    /// normalizes the object order to the init state's mention order so that
    /// rendering and reparsing round-trip exactly.
    pub fn new(
        id: impl Into<String>,
        objects: Vec<ObjectId>,
        init: WorldState,
        goal: Goal,
    ) -> Result<Problem, DomainError> {
        let declared: BTreeSet<&ObjectId> = objects.iter().collect();
        if declared.len() != objects.len() {
            return Err(DomainError::Inconsistent("duplicate object".into()));
        }
        let mentioned = init.objects();
        if mentioned.iter().collect::<BTreeSet<_>>() != declared {
            return Err(DomainError::Inconsistent(
                "init must mention exactly the declared objects".into(),
            ));
        }
        for atom in &goal.atoms {
            for o in atom.objects() {
                if !declared.contains(o) {
                    return Err(DomainError::UnknownObject(o.name.clone()));
                }
            }
        }
        let objects = init.mention_order(&objects);
        Ok(Problem {
            id: id.into(),
            objects,
            init,
            goal,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DomainError {
    #[error("inconsistent state: {0}")]
    Inconsistent(String),
    #[error("unknown object: {0}")]
    UnknownObject(String),
    #[error("precondition violation: {action} requires {missing}")]
    PreconditionViolation { action: GroundAction, missing: Fact },
    #[error("too many objects for exhaustive enumeration: {0} (limit 6)")]
    TooManyObjects(usize),
}

/// Builds a canonical [`WorldState`] from a raw fact set, recomputing `Clear`
/// facts from the `On` relation. Rejects fact sets that violate
/// unique-support, uniqueness-of-occupant, or acyclicity, or that mention
/// objects outside `objects`.
pub fn canonicalize(
    facts: &BTreeSet<Fact>,
    objects: &BTreeSet<ObjectId>,
) -> Result<WorldState, DomainError> {
    // support: None = table
    let mut support: BTreeMap<&ObjectId, Option<&ObjectId>> = BTreeMap::new();
    let mut occupant: BTreeMap<&ObjectId, &ObjectId> = BTreeMap::new();
    for f in facts {
        for o in f.objects() {
            if !objects.contains(o) {
                return Err(DomainError::UnknownObject(o.name.clone()));
            }
        }
        match f {
            Fact::On { above, below } => {
                if above == below {
                    return Err(DomainError::Inconsistent(format!(
                        "object {above} cannot rest on itself"
                    )));
                }
                if support.insert(above, Some(below)).is_some() {
                    return Err(DomainError::Inconsistent(format!(
                        "object {above} has more than one support"
                    )));
                }
                if occupant.insert(below, above).is_some() {
                    return Err(DomainError::Inconsistent(format!(
                        "more than one object directly on {below}"
                    )));
                }
            }
            Fact::OnTable(x) => {
                if support.insert(x, None).is_some() {
                    return Err(DomainError::Inconsistent(format!(
                        "object {x} has more than one support"
                    )));
                }
            }
            Fact::Clear(_) => {} // recomputed below
        }
    }
    for o in objects {
        if !support.contains_key(o) {
            return Err(DomainError::Inconsistent(format!("object {o} has no support")));
        }
    }
    // acyclicity: follow supports down to the table
    for start in objects {
        let mut cur = start;
        let mut steps = 0usize;
        while let Some(Some(below)) = support.get(cur) {
            cur = below;
            steps += 1;
            if steps > objects.len() {
                return Err(DomainError::Inconsistent(format!(
                    "cycle in the on-relation involving {start}"
                )));
            }
        }
    }
    let mut out: BTreeSet<Fact> = BTreeSet::new();
    for (obj, sup) in &support {
        match sup {
            Some(below) => out.insert(Fact::on((*obj).clone(), (*below).clone())),
            None => out.insert(Fact::OnTable((*obj).clone())),
        };
        if !occupant.contains_key(*obj) {
            out.insert(Fact::Clear((*obj).clone()));
        }
    }
    Ok(WorldState { facts: out })
}

fn require(state: &WorldState, action: &GroundAction, fact: Fact) -> Result<(), DomainError> {
    if state.contains(&fact) {
        Ok(())
    } else {
        Err(DomainError::PreconditionViolation {
            action: action.clone(),
            missing: fact,
        })
    }
}

/// Applies one ground action to a canonical state, returning the canonical
/// successor. Pure: the input state is untouched.
pub fn apply(state: &WorldState, action: &GroundAction) -> Result<WorldState, DomainError> {
    if !action.is_well_formed() {
        return Err(DomainError::Inconsistent(format!(
            "action {action} repeats an object"
        )));
    }
    let mut facts = state.facts.clone();
    match action {
        GroundAction::Unstack { x, y } => {
            require(state, action, Fact::on(x.clone(), y.clone()))?;
            require(state, action, Fact::Clear(x.clone()))?;
            facts.remove(&Fact::on(x.clone(), y.clone()));
            facts.insert(Fact::OnTable(x.clone()));
            facts.insert(Fact::Clear(y.clone()));
        }
        GroundAction::StackFromTable { x, y } => {
            require(state, action, Fact::OnTable(x.clone()))?;
            require(state, action, Fact::Clear(x.clone()))?;
            require(state, action, Fact::Clear(y.clone()))?;
            facts.remove(&Fact::OnTable(x.clone()));
            facts.remove(&Fact::Clear(y.clone()));
            facts.insert(Fact::on(x.clone(), y.clone()));
        }
        GroundAction::Stack { x, y, z } => {
            require(state, action, Fact::on(x.clone(), y.clone()))?;
            require(state, action, Fact::Clear(x.clone()))?;
            require(state, action, Fact::Clear(z.clone()))?;
            facts.remove(&Fact::on(x.clone(), y.clone()));
            facts.remove(&Fact::Clear(z.clone()));
            facts.insert(Fact::on(x.clone(), z.clone()));
            facts.insert(Fact::Clear(y.clone()));
        }
    }
    Ok(WorldState { facts })
}

/// True iff every goal atom holds in the state.
pub fn satisfies(state: &WorldState, goal: &Goal) -> bool {
    goal.atoms.iter().all(|a| state.contains(a))
}

/// Where plan execution stopped, if it did.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ExecStatus {
    Ok,
    FailedAtStep(usize, DomainError),
}

/// Folds [`apply`] over the plan. On the first failing step, returns the
/// state reached so far together with the step index and error.
pub fn execute_plan(init: &WorldState, plan: &Plan) -> (WorldState, ExecStatus) {
    let mut state = init.clone();
    for (i, action) in plan.actions.iter().enumerate() {
        match apply(&state, action) {
            Ok(next) => state = next,
            Err(e) => return (state, ExecStatus::FailedAtStep(i, e)),
        }
    }
    (state, ExecStatus::Ok)
}

/// Every canonical configuration of the given objects, enumerated by trying
/// all support assignments (each object on the table or on one other object)
/// and keeping the consistent ones. Deterministic order.
pub fn enumerate_configurations(
    objects: &BTreeSet<ObjectId>,
) -> Result<Vec<WorldState>, DomainError> {
    let n = objects.len();
    if n == 0 {
        return Err(DomainError::Inconsistent("no objects".into()));
    }
    if n > 6 {
        return Err(DomainError::TooManyObjects(n));
    }
    let objs: Vec<&ObjectId> = objects.iter().collect();
    let mut out = Vec::new();
    // Every assignment "object i rests on digit(i)" with digit n meaning the
    // table; canonicalize filters the inconsistent ones.
    let total = (n + 1).pow(n as u32);
    'codes: for code in 0..total {
        let mut facts: BTreeSet<Fact> = BTreeSet::new();
        let mut rest = code;
        for i in 0..n {
            let digit = rest % (n + 1);
            rest /= n + 1;
            if digit == i {
                continue 'codes; // self-support
            }
            if digit == n {
                facts.insert(Fact::OnTable(objs[i].clone()));
            } else {
                facts.insert(Fact::on(objs[i].clone(), objs[digit].clone()));
            }
        }
        if let Ok(state) = canonicalize(&facts, objects) {
            out.push(state);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use proptest::prelude::*;

    fn obj(name: &str) -> ObjectId {
        ObjectId::household(name)
    }

    fn objects(names: &[&str]) -> BTreeSet<ObjectId> {
        names.iter().map(|n| obj(n)).collect()
    }

    #[test]
    fn canonicalize_derives_clear() {
        let facts: BTreeSet<Fact> = [Fact::OnTable(obj("a")), Fact::on(obj("b"), obj("a"))].into();
        let state = canonicalize(&facts, &objects(&["a", "b"])).unwrap();
        let expected: BTreeSet<Fact> = [
            Fact::OnTable(obj("a")),
            Fact::on(obj("b"), obj("a")),
            Fact::Clear(obj("b")),
        ]
        .into();
        assert_eq!(state.facts(), &expected);
    }

    #[test]
    fn canonicalize_rejects_cycle() {
        let facts: BTreeSet<Fact> = [Fact::on(obj("a"), obj("b")), Fact::on(obj("b"), obj("a"))].into();
        let err = canonicalize(&facts, &objects(&["a", "b"])).unwrap_err();
        assert!(matches!(err, DomainError::Inconsistent(_)), "{err:?}");
    }

    #[test]
    fn canonicalize_rejects_double_support_and_double_occupant() {
        let facts: BTreeSet<Fact> = [
            Fact::OnTable(obj("a")),
            Fact::on(obj("a"), obj("b")),
            Fact::OnTable(obj("b")),
        ]
        .into();
        assert!(canonicalize(&facts, &objects(&["a", "b"])).is_err());

        let facts: BTreeSet<Fact> = [
            Fact::OnTable(obj("c")),
            Fact::on(obj("a"), obj("c")),
            Fact::on(obj("b"), obj("c")),
        ]
        .into();
        assert!(canonicalize(&facts, &objects(&["a", "b", "c"])).is_err());
    }

    #[test]
    fn canonicalize_rejects_unknown_object() {
        let facts: BTreeSet<Fact> = [Fact::OnTable(obj("a"))].into();
        let err = canonicalize(&facts, &objects(&["b"])).unwrap_err();
        assert!(matches!(err, DomainError::UnknownObject(_)), "{err:?}");
    }

    #[test]
    fn fixture_state_has_six_facts() {
        let state = fixtures::initial_state();
        assert_eq!(state.facts().len(), 6);
        assert!(state.is_clear(&obj("tissue box")));
        assert!(state.is_clear(&obj("tablet")));
        assert!(!state.is_clear(&obj("notebook")));
    }

    #[test]
    fn apply_unstack_frees_support() {
        let state = fixtures::initial_state();
        let next = apply(
            &state,
            &GroundAction::Unstack {
                x: obj("tissue box"),
                y: obj("notebook"),
            },
        )
        .unwrap();
        assert!(next.is_on_table(&obj("tissue box")));
        assert!(next.is_clear(&obj("notebook")));
    }

    #[test]
    fn apply_rejects_stack_onto_occupied() {
        let state = fixtures::initial_state();
        let err = apply(
            &state,
            &GroundAction::StackFromTable {
                x: obj("tablet"),
                y: obj("notebook"),
            },
        )
        .unwrap_err();
        match err {
            DomainError::PreconditionViolation { missing, .. } => {
                assert_eq!(missing, Fact::Clear(obj("notebook")));
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn apply_stackfromtable_effects() {
        let state = fixtures::initial_state();
        let next = apply(
            &state,
            &GroundAction::StackFromTable {
                x: obj("tablet"),
                y: obj("tissue box"),
            },
        )
        .unwrap();
        assert!(next.contains(&Fact::on(obj("tablet"), obj("tissue box"))));
        assert!(!next.is_on_table(&obj("tablet")));
        assert!(!next.is_clear(&obj("tissue box")));
    }

    #[test]
    fn satisfies_checks_goal_atoms() {
        let state = fixtures::initial_state();
        let unmet = Goal::new(vec![Fact::Clear(obj("notebook"))]).unwrap();
        let met = Goal::new(vec![Fact::Clear(obj("tissue box"))]).unwrap();
        assert!(!satisfies(&state, &unmet));
        assert!(satisfies(&state, &met));
    }

    #[test]
    fn empty_goal_is_rejected() {
        assert!(Goal::new(vec![]).is_err());
    }

    #[test]
    fn execute_plan_folds_and_reports_failures() {
        let state = fixtures::initial_state();
        let (end, status) = execute_plan(&state, &Plan::default());
        assert_eq!(end, state);
        assert_eq!(status, ExecStatus::Ok);

        let good = Plan::new(vec![GroundAction::Unstack {
            x: obj("tissue box"),
            y: obj("notebook"),
        }]);
        let (end, status) = execute_plan(&state, &good);
        assert_eq!(status, ExecStatus::Ok);
        assert!(end.is_clear(&obj("notebook")));

        let bad = Plan::new(vec![GroundAction::Unstack {
            x: obj("tablet"),
            y: obj("notebook"),
        }]);
        let (end, status) = execute_plan(&state, &bad);
        assert_eq!(end, state);
        assert!(matches!(status, ExecStatus::FailedAtStep(0, _)));
    }

    /// Independent counter for the number of configurations: partition the
    /// objects into blocks and order each block (sets of ordered stacks).
    fn count_configurations(n: u64) -> u64 {
        fn choose(n: u64, k: u64) -> u64 {
            if k > n {
                return 0;
            }
            (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
        }
        fn factorial(n: u64) -> u64 {
            (1..=n).product()
        }
        if n == 0 {
            return 1;
        }
        (1..=n)
            .map(|k| choose(n - 1, k - 1) * factorial(k) * count_configurations(n - k))
            .sum()
    }

    #[test]
    fn enumerate_counts_match_brute_force_counter() {
        let names = ["a", "b", "c", "d", "e"];
        for n in 1..=5usize {
            let objs = objects(&names[..n]);
            let states = enumerate_configurations(&objs).unwrap();
            assert_eq!(states.len() as u64, count_configurations(n as u64), "n={n}");
            let unique: BTreeSet<_> = states.iter().map(|s| s.facts().clone()).collect();
            assert_eq!(unique.len(), states.len(), "duplicate state for n={n}");
        }
    }

    #[test]
    fn enumerate_small_counts() {
        assert_eq!(enumerate_configurations(&objects(&["a"])).unwrap().len(), 1);
        assert_eq!(enumerate_configurations(&objects(&["a", "b"])).unwrap().len(), 3);
        assert_eq!(
            enumerate_configurations(&objects(&["a", "b", "c", "d"])).unwrap().len(),
            73
        );
    }

    #[test]
    fn enumerate_guards_object_count() {
        let names = ["a", "b", "c", "d", "e", "f", "g"];
        assert!(matches!(
            enumerate_configurations(&objects(&names)),
            Err(DomainError::TooManyObjects(7))
        ));
    }

    fn all_actions(objs: &[ObjectId]) -> Vec<GroundAction> {
        let mut out = Vec::new();
        for x in objs {
            for y in objs {
                if x == y {
                    continue;
                }
                out.push(GroundAction::Unstack { x: x.clone(), y: y.clone() });
                out.push(GroundAction::StackFromTable { x: x.clone(), y: y.clone() });
                for z in objs {
                    if z == x || z == y {
                        continue;
                    }
                    out.push(GroundAction::Stack {
                        x: x.clone(),
                        y: y.clone(),
                        z: z.clone(),
                    });
                }
            }
        }
        out
    }

    fn arb_state_and_action() -> impl Strategy<Value = (BTreeSet<ObjectId>, WorldState, GroundAction)> {
        (2usize..=4).prop_flat_map(|n| {
            let names = ["a", "b", "c", "d"];
            let objs: BTreeSet<ObjectId> = names[..n].iter().map(|s| obj(s)).collect();
            let states = enumerate_configurations(&objs).unwrap();
            let actions = all_actions(&objs.iter().cloned().collect::<Vec<_>>());
            (0..states.len(), 0..actions.len()).prop_map(move |(si, ai)| {
                (objs.clone(), states[si].clone(), actions[ai].clone())
            })
        })
    }

    proptest! {
        #[test]
        fn apply_is_deterministic_and_closed((objs, state, action) in arb_state_and_action()) {
            let once = apply(&state, &action);
            let twice = apply(&state, &action);
            prop_assert_eq!(&once, &twice);
            if let Ok(next) = once {
                // closure: successor states are canonical fixed points
                let again = canonicalize(next.facts(), &objs).unwrap();
                prop_assert_eq!(&again, &next);
            }
        }

        #[test]
        fn apply_touches_only_schema_facts((_objs, state, action) in arb_state_and_action()) {
            if let Ok(next) = apply(&state, &action) {
                let changed: BTreeSet<&Fact> = state
                    .facts()
                    .symmetric_difference(next.facts())
                    .collect();
                let mentioned: BTreeSet<&ObjectId> = action.objects().into_iter().collect();
                for fact in changed {
                    prop_assert!(
                        fact.objects().iter().any(|o| mentioned.contains(o)),
                        "frame violation: {} changed by {}", fact, action
                    );
                }
            }
        }

        #[test]
        fn apply_is_reversible((_objs, state, action) in arb_state_and_action()) {
            if let Ok(next) = apply(&state, &action) {
                let inverse = match &action {
                    GroundAction::Unstack { x, y } => GroundAction::StackFromTable {
                        x: x.clone(),
                        y: y.clone(),
                    },
                    GroundAction::StackFromTable { x, y } => GroundAction::Unstack {
                        x: x.clone(),
                        y: y.clone(),
                    },
                    GroundAction::Stack { x, y, z } => GroundAction::Stack {
                        x: x.clone(),
                        y: z.clone(),
                        z: y.clone(),
                    },
                };
                let back = apply(&next, &inverse).expect("inverse applies");
                prop_assert_eq!(back, state);
            }
        }
    }
}
