//! The canonical worked example used across tests, docs, and committed
//! golden files: four household objects in two stacks, with the goal of
//! clearing the notebook.

use std::collections::BTreeSet;

use crate::domain::{canonicalize, Fact, Goal, ObjectId, Problem, WorldState};

pub fn objects() -> Vec<ObjectId> {
    ["writing pad", "notebook", "tissue box", "tablet"]
        .into_iter()
        .map(ObjectId::household)
        .collect()
}

/// The six-fact initial state: writing pad / notebook / tissue box stacked,
/// tablet alone on the table.
pub fn initial_state() -> WorldState {
    let [pad, notebook, tissue, tablet]: [ObjectId; 4] =
        objects().try_into().expect("four objects");
    let facts: BTreeSet<Fact> = [
        Fact::OnTable(pad.clone()),
        Fact::on(notebook.clone(), pad),
        Fact::on(tissue, notebook),
        Fact::OnTable(tablet),
    ]
    .into();
    canonicalize(&facts, &objects().into_iter().collect()).expect("fixture state is consistent")
}

/// The full problem: goal "There is nothing on the notebook."
pub fn problem() -> Problem {
    let notebook = ObjectId::household("notebook");
    Problem::new(
        "qualitative-example",
        objects(),
        initial_state(),
        Goal::new(vec![Fact::Clear(notebook)]).expect("non-empty goal"),
    )
    .expect("fixture problem is valid")
}
