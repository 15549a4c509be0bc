//! Forward state-space search over the stacking domain, plus the plan
//! validator implementing the binary success coding (1 = success, 0 = fail).

use std::cmp::Reverse;
use std::collections::{BinaryHeap, HashMap, VecDeque};

use crate::domain::{
    apply, execute_plan, satisfies, ExecStatus, GroundAction, Plan, Problem, WorldState,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Strategy {
    /// Breadth-first search; returns a shortest plan.
    Bfs,
    /// A* with the goal-count heuristic (number of unsatisfied goal atoms).
    /// Inadmissible and satisficing; ties broken FIFO.
    AStarGoalCount,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlannerConfig {
    pub strategy: Strategy,
    pub max_expansions: usize,
    /// Depth bound; `None` resolves to 2 * |objects| per problem.
    pub max_plan_length: Option<usize>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            strategy: Strategy::Bfs,
            max_expansions: 1_000_000,
            max_plan_length: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveResult {
    Solved { plan: Plan, expansions: usize },
    Unsolvable,
    ResourceExhausted { expansions: usize },
}

impl SolveResult {
    pub fn plan(&self) -> Option<&Plan> {
        match self {
            SolveResult::Solved { plan, .. } => Some(plan),
            _ => None,
        }
    }
}

/// Applicable actions in a fixed deterministic order: moved objects in
/// problem-object order, destinations likewise.
pub fn applicable_actions(state: &WorldState, objects: &[ObjectIdRef<'_>]) -> Vec<GroundAction> {
    let mut out = Vec::new();
    for x in objects {
        if !state.is_clear(x) {
            continue;
        }
        match state.support_of(x) {
            Some(y) => {
                out.push(GroundAction::Unstack {
                    x: (*x).clone(),
                    y: y.clone(),
                });
                for z in objects {
                    if *z != *x && z != &y && state.is_clear(z) {
                        out.push(GroundAction::Stack {
                            x: (*x).clone(),
                            y: y.clone(),
                            z: (*z).clone(),
                        });
                    }
                }
            }
            None => {
                for z in objects {
                    if *z != *x && state.is_clear(z) {
                        out.push(GroundAction::StackFromTable {
                            x: (*x).clone(),
                            y: (*z).clone(),
                        });
                    }
                }
            }
        }
    }
    out
}

type ObjectIdRef<'a> = &'a crate::domain::ObjectId;

struct Node {
    state: WorldState,
    parent: Option<(usize, GroundAction)>,
    depth: usize,
}

fn reconstruct(nodes: &[Node], mut idx: usize) -> Plan {
    let mut actions = Vec::new();
    while let Some((parent, action)) = &nodes[idx].parent {
        actions.push(action.clone());
        idx = *parent;
    }
    actions.reverse();
    Plan::new(actions)
}

/// Searches for a plan. Deterministic: identical inputs yield identical
/// results. Duplicate states are detected by their canonical fact set.
pub fn solve(problem: &Problem, config: &PlannerConfig) -> SolveResult {
    let objects: Vec<ObjectIdRef<'_>> = problem.objects.iter().collect();
    let max_len = config
        .max_plan_length
        .unwrap_or(2 * problem.objects.len());
    match config.strategy {
        Strategy::Bfs => solve_bfs(problem, &objects, config.max_expansions, max_len),
        Strategy::AStarGoalCount => solve_astar(problem, &objects, config.max_expansions, max_len),
    }
}

fn solve_bfs(
    problem: &Problem,
    objects: &[ObjectIdRef<'_>],
    max_expansions: usize,
    max_len: usize,
) -> SolveResult {
    let mut nodes = vec![Node {
        state: problem.init.clone(),
        parent: None,
        depth: 0,
    }];
    let mut seen: HashMap<WorldState, usize> = HashMap::new();
    seen.insert(problem.init.clone(), 0);
    let mut queue: VecDeque<usize> = VecDeque::from([0]);
    let mut expansions = 0usize;
    while let Some(idx) = queue.pop_front() {
        if expansions >= max_expansions {
            return SolveResult::ResourceExhausted { expansions };
        }
        expansions += 1;
        if satisfies(&nodes[idx].state, &problem.goal) {
            return SolveResult::Solved {
                plan: reconstruct(&nodes, idx),
                expansions,
            };
        }
        if nodes[idx].depth >= max_len {
            continue;
        }
        for action in applicable_actions(&nodes[idx].state, objects) {
            let next = apply(&nodes[idx].state, &action).expect("applicable action applies");
            if seen.contains_key(&next) {
                continue;
            }
            let next_idx = nodes.len();
            seen.insert(next.clone(), next_idx);
            nodes.push(Node {
                state: next,
                parent: Some((idx, action)),
                depth: nodes[idx].depth + 1,
            });
            queue.push_back(next_idx);
        }
    }
    SolveResult::Unsolvable
}

fn goal_count(state: &WorldState, problem: &Problem) -> usize {
    problem
        .goal
        .atoms
        .iter()
        .filter(|a| !state.contains(a))
        .count()
}

fn solve_astar(
    problem: &Problem,
    objects: &[ObjectIdRef<'_>],
    max_expansions: usize,
    max_len: usize,
) -> SolveResult {
    let mut nodes = vec![Node {
        state: problem.init.clone(),
        parent: None,
        depth: 0,
    }];
    let mut best: HashMap<WorldState, usize> = HashMap::new();
    best.insert(problem.init.clone(), 0);
    // Reverse<(f, seq, idx)>: min-f first, then insertion order (FIFO).
    let mut open: BinaryHeap<Reverse<(usize, usize, usize)>> = BinaryHeap::new();
    let mut seq = 0usize;
    open.push(Reverse((goal_count(&problem.init, problem), seq, 0)));
    let mut expansions = 0usize;
    while let Some(Reverse((_f, _seq, idx))) = open.pop() {
        let depth = nodes[idx].depth;
        if best
            .get(&nodes[idx].state)
            .is_some_and(|&d| d < depth)
        {
            continue; // stale entry
        }
        if expansions >= max_expansions {
            return SolveResult::ResourceExhausted { expansions };
        }
        expansions += 1;
        if satisfies(&nodes[idx].state, &problem.goal) {
            return SolveResult::Solved {
                plan: reconstruct(&nodes, idx),
                expansions,
            };
        }
        if depth >= max_len {
            continue;
        }
        for action in applicable_actions(&nodes[idx].state, objects) {
            let next = apply(&nodes[idx].state, &action).expect("applicable action applies");
            let g = depth + 1;
            if best.get(&next).is_some_and(|&d| d <= g) {
                continue;
            }
            let next_idx = nodes.len();
            best.insert(next.clone(), g);
            let h = goal_count(&next, problem);
            nodes.push(Node {
                state: next,
                parent: Some((idx, action)),
                depth: g,
            });
            seq += 1;
            open.push(Reverse((g + h, seq, next_idx)));
        }
    }
    SolveResult::Unsolvable
}

// ---------------------------------------------------------------------------
// validation

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FailureReason {
    None,
    Unparseable,
    PreconditionViolation(usize),
    GoalUnmet,
    /// The solver hit its expansion or wall-clock budget before producing a
    /// plan; reported separately from goal failures.
    ResourceExhausted,
}

/// Binary success outcome of simulating one plan.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimOutcome {
    pub success: u8,
    pub failure_reason: FailureReason,
}

impl SimOutcome {
    pub fn success() -> SimOutcome {
        SimOutcome {
            success: 1,
            failure_reason: FailureReason::None,
        }
    }

    pub fn failure(reason: FailureReason) -> SimOutcome {
        debug_assert!(reason != FailureReason::None);
        SimOutcome {
            success: 0,
            failure_reason: reason,
        }
    }
}

/// Simulates a parsed plan (or records a parse failure) against the problem.
/// Unparseable and invalid plans are unsuccessful.
pub fn validate(problem: &Problem, plan_or_error: Result<&Plan, ()>) -> SimOutcome {
    let plan = match plan_or_error {
        Ok(p) => p,
        Err(()) => return SimOutcome::failure(FailureReason::Unparseable),
    };
    let (final_state, status) = execute_plan(&problem.init, plan);
    match status {
        ExecStatus::FailedAtStep(i, _) => {
            SimOutcome::failure(FailureReason::PreconditionViolation(i))
        }
        ExecStatus::Ok => {
            if satisfies(&final_state, &problem.goal) {
                SimOutcome::success()
            } else {
                SimOutcome::failure(FailureReason::GoalUnmet)
            }
        }
    }
}
