//! Object-stacking planning toolkit.
//!
//! The crate covers the whole parse-and-solve pipeline for a small
//! blocksworld-style domain:
//!
//! - [`domain`]: world states, the three action schemas, plan execution;
//! - [`grammar`]: the synthetic natural-language templates and their inverse;
//! - [`pddl`]: the PDDL interlingua (domain/problem/plan documents);
//! - [`planner`]: BFS and A*-goal-count search plus the plan validator;
//! - [`benchgen`]: seeded benchmark generation across three goal conditions;
//! - [`llm`]: few-shot prompt assembly and record/replay completion transport;
//! - [`harness`]: the evaluation engine, success tables, and reports;
//! - [`stats`]: Fisher's exact test for the pairwise comparisons.

// Error enums carry descriptive strings; their size is not on any hot path.
#![allow(clippy::result_large_err)]

pub mod benchgen;
pub mod domain;
pub mod fixtures;
pub mod grammar;
pub mod harness;
pub mod llm;
pub mod pddl;
pub mod planner;
pub mod stats;

pub use benchgen::{BenchmarkItem, Condition, GenConfig};
pub use domain::{Fact, Goal, GroundAction, ObjectId, Plan, Problem, WorldState};
pub use grammar::Vocabulary;
pub use harness::{EvalConfig, EvalOutcome, Method, ResultTable};
pub use planner::{PlannerConfig, SimOutcome, SolveResult, Strategy};
