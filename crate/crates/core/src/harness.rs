//! Evaluation engine: runs each method over a dataset, aggregates
//! per-condition success tables, runs pairwise Fisher exact tests, and emits
//! CSV/Markdown reports.

use std::collections::BTreeMap;
use std::fmt;
use std::io::{BufRead, Write};
use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::benchgen::{BenchmarkItem, Condition};
use crate::domain::{Fact, Goal, ObjectId, Plan, Problem};
use crate::grammar::{parse_plan_nl, parse_problem_nl, render_plan, Vocabulary};
use crate::llm::{
    build_parser_prompt, build_planner_prompt, CompletionParams, FewShotExample, LlmError,
    ParserTarget, Transport,
};
use crate::pddl::{emit_goal, parse_goal_fragment, parse_pddl_problem};
use crate::planner::{solve, FailureReason, PlannerConfig, SimOutcome, SolveResult};
use crate::stats::{fisher_exact, StatsError};

/// The four evaluated pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Method {
    /// Symbolic planner fed the symbolic problem directly (no parsing).
    Oracle,
    /// NL -> deterministic grammar parser -> planner.
    PsGrammar,
    /// NL -> LLM parser -> PDDL goal parse -> planner.
    PsLlm,
    /// NL -> LLM planner prompt -> NL plan -> inverse-grammar parse -> simulate.
    LlmPlanner,
}

impl Method {
    pub const ALL: [Method; 4] = [
        Method::Oracle,
        Method::PsGrammar,
        Method::PsLlm,
        Method::LlmPlanner,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Method::Oracle => "oracle",
            Method::PsGrammar => "ps-grammar",
            Method::PsLlm => "ps-llm",
            Method::LlmPlanner => "llm-planner",
        }
    }

    pub fn needs_transport(&self) -> bool {
        matches!(self, Method::PsLlm | Method::LlmPlanner)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;

    fn from_str(s: &str) -> Result<Method, String> {
        match s {
            "oracle" => Ok(Method::Oracle),
            "ps-grammar" => Ok(Method::PsGrammar),
            "ps-llm" => Ok(Method::PsLlm),
            "llm-planner" => Ok(Method::LlmPlanner),
            other => Err(format!("unknown method {other:?}")),
        }
    }
}

/// Per-item evaluation result, the unit aggregated into success tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EvalOutcome {
    pub item_id: String,
    pub family: usize,
    pub condition: Condition,
    pub method: Method,
    pub parse_ok: bool,
    pub plan: Option<Plan>,
    pub outcome: SimOutcome,
    pub wall_time_ms: u64,
}

/// Evaluation knobs shared by all methods.
pub struct EvalConfig {
    pub planner: PlannerConfig,
    pub parser_target: ParserTarget,
    /// Per-item wall-clock budget; overruns count as failures.
    pub budget_ms: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig {
            planner: PlannerConfig::default(),
            parser_target: ParserTarget::GoalFragment,
            budget_ms: 10_000,
        }
    }
}

/// The fixed few-shot training problems, disjoint from every generated item.
/// Returns (problem, NL plan, goal predicate) triples.
pub fn training_examples() -> Vec<(Problem, String, String)> {
    let mk = |id: &str, stacks: &[&[&str]], goal_atoms: Vec<Fact>| -> (Problem, String, String) {
        let mut facts = std::collections::BTreeSet::new();
        let mut objects = Vec::new();
        for stack in stacks {
            let mut below: Option<ObjectId> = None;
            for name in *stack {
                let obj = ObjectId::household(*name);
                objects.push(obj.clone());
                match below {
                    None => facts.insert(Fact::OnTable(obj.clone())),
                    Some(b) => facts.insert(Fact::on(obj.clone(), b)),
                };
                below = Some(obj);
            }
        }
        let obj_set = objects.iter().cloned().collect();
        let init = crate::domain::canonicalize(&facts, &obj_set).expect("training init");
        let goal = Goal::new(goal_atoms).expect("training goal");
        let problem = Problem::new(id, objects, init, goal).expect("training problem");
        let solved = solve(&problem, &PlannerConfig::default());
        let plan = solved.plan().expect("training problems are solvable");
        (
            problem.clone(),
            render_plan(plan),
            emit_goal(&problem.goal),
        )
    };
    let h = ObjectId::household;
    vec![
        mk(
            "train-0",
            &[&["plate", "mug"]],
            vec![Fact::Clear(h("plate"))],
        ),
        mk(
            "train-1",
            &[&["book"], &["candle"], &["spoon"]],
            vec![Fact::on(h("candle"), h("book"))],
        ),
        mk(
            "train-2",
            &[&["keyboard", "napkin"], &["fork"]],
            vec![Fact::on(h("fork"), h("napkin")), Fact::OnTable(h("keyboard"))],
        ),
    ]
}

pub fn planner_examples() -> Vec<FewShotExample> {
    training_examples()
        .into_iter()
        .map(|(problem, plan_text, _)| FewShotExample {
            problem,
            solution_text: plan_text,
        })
        .collect()
}

pub fn parser_examples() -> Vec<FewShotExample> {
    training_examples()
        .into_iter()
        .map(|(problem, _, goal_text)| FewShotExample {
            problem,
            solution_text: goal_text,
        })
        .collect()
}

fn solve_and_validate(
    cfg: &EvalConfig,
    solved_problem: &Problem,
    truth: &Problem,
) -> (bool, Option<Plan>, SimOutcome) {
    match solve(solved_problem, &cfg.planner) {
        SolveResult::Solved { plan, .. } => {
            let outcome = crate::planner::validate(truth, Ok(&plan));
            (true, Some(plan), outcome)
        }
        SolveResult::ResourceExhausted { .. } => (
            true,
            None,
            SimOutcome::failure(FailureReason::ResourceExhausted),
        ),
        SolveResult::Unsolvable => (true, None, SimOutcome::failure(FailureReason::GoalUnmet)),
    }
}

/// Runs one method's pipeline over one item. All parse and plan failures are
/// totalized into the outcome; transport errors abort (the caller decides
/// whether an aborted run is acceptable).
pub fn run_item(
    method: Method,
    item: &BenchmarkItem,
    cfg: &EvalConfig,
    vocab: &Vocabulary,
    examples_planner: &[FewShotExample],
    examples_parser: &[FewShotExample],
    transport: Option<&mut Transport>,
) -> Result<EvalOutcome, LlmError> {
    let start = Instant::now();
    let (parse_ok, plan, mut outcome) = match method {
        Method::Oracle => solve_and_validate(cfg, &item.problem, &item.problem),
        Method::PsGrammar => match parse_problem_nl(&item.nl_text, vocab, &item.id) {
            Ok(parsed) => solve_and_validate(cfg, &parsed, &item.problem),
            Err(_) => (false, None, SimOutcome::failure(FailureReason::Unparseable)),
        },
        Method::PsLlm => {
            let transport =
                transport.ok_or_else(|| LlmError::Transport("ps-llm needs a transport".into()))?;
            let prompt = build_parser_prompt(examples_parser, &item.problem, cfg.parser_target)?;
            let completion = transport.complete(&prompt, &CompletionParams::parser())?;
            let program = format!("({}", completion.trim_end_matches([';', ' ', '\n']));
            run_ps_llm_program(cfg, vocab, item, &program)
        }
        Method::LlmPlanner => {
            let transport = transport
                .ok_or_else(|| LlmError::Transport("llm-planner needs a transport".into()))?;
            let prompt = build_planner_prompt(examples_planner, &item.problem)?;
            let completion = transport.complete(&prompt, &CompletionParams::planner())?;
            match parse_plan_nl(&completion, &item.problem.init, &item.problem.objects) {
                Ok(plan) => {
                    let outcome = crate::planner::validate(&item.problem, Ok(&plan));
                    (true, Some(plan), outcome)
                }
                Err(_) => (false, None, SimOutcome::failure(FailureReason::Unparseable)),
            }
        }
    };
    let wall_time_ms = start.elapsed().as_millis() as u64;
    if wall_time_ms > cfg.budget_ms && outcome.success == 1 {
        outcome = SimOutcome::failure(FailureReason::ResourceExhausted);
    }
    Ok(EvalOutcome {
        item_id: item.id.clone(),
        family: item.family,
        condition: item.condition,
        method,
        parse_ok,
        plan,
        outcome,
    wall_time_ms,
    })
}

fn run_ps_llm_program(
    cfg: &EvalConfig,
    vocab: &Vocabulary,
    item: &BenchmarkItem,
    program: &str,
) -> (bool, Option<Plan>, SimOutcome) {
    let unparseable = || (false, None, SimOutcome::failure(FailureReason::Unparseable));
    match cfg.parser_target {
        ParserTarget::FullProblem => match parse_pddl_problem(program, vocab) {
            Ok(parsed) => solve_and_validate(cfg, &parsed, &item.problem),
            Err(_) => unparseable(),
        },
        ParserTarget::GoalFragment => {
            // init comes from the deterministic NL parse; only the goal is
            // taken from the parser under test
            let base = match parse_problem_nl(&item.nl_text, vocab, &item.id) {
                Ok(p) => p,
                Err(_) => return unparseable(),
            };
            let goal = match parse_goal_fragment(program, &base.objects) {
                Ok(g) => g,
                Err(_) => return unparseable(),
            };
            match Problem::new(&item.id, base.objects, base.init, goal) {
                Ok(assembled) => solve_and_validate(cfg, &assembled, &item.problem),
                Err(_) => unparseable(),
            }
        }
    }
}

/// Evaluates every item with one method, in dataset order.
pub fn run_method(
    method: Method,
    items: &[BenchmarkItem],
    cfg: &EvalConfig,
    vocab: &Vocabulary,
    mut transport: Option<&mut Transport>,
) -> Result<Vec<EvalOutcome>, LlmError> {
    let ex_planner = planner_examples();
    let ex_parser = parser_examples();
    let mut out = Vec::with_capacity(items.len());
    for item in items {
        out.push(run_item(
            method,
            item,
            cfg,
            vocab,
            &ex_planner,
            &ex_parser,
            transport.as_deref_mut(),
        )?);
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// aggregation and reporting

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CountRow {
    pub n: u64,
    pub successes: u64,
}

impl CountRow {
    pub fn rate(&self) -> f64 {
        self.successes as f64 / self.n as f64
    }
}

/// Success counts keyed by (method, condition).
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ResultTable {
    pub rows: BTreeMap<(Method, Condition), CountRow>,
}

pub fn aggregate(outcomes: &[EvalOutcome]) -> ResultTable {
    let mut table = ResultTable::default();
    for o in outcomes {
        let row = table.rows.entry((o.method, o.condition)).or_default();
        row.n += 1;
        row.successes += u64::from(o.outcome.success);
    }
    table
}

/// The method pairs compared per condition.
pub const PAIRWISE: [(Method, Method); 2] = [
    (Method::PsGrammar, Method::LlmPlanner),
    (Method::PsLlm, Method::LlmPlanner),
];

/// Writes `results.csv` and `report.md` under `dir`. Deterministic bytes for
/// deterministic inputs.
pub fn emit_report(table: &ResultTable, dir: &Path) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let mut csv = String::from("method,condition,n,successes,rate\n");
    for ((method, condition), row) in &table.rows {
        csv.push_str(&format!(
            "{},{},{},{},{:.4}\n",
            method,
            condition,
            row.n,
            row.successes,
            row.rate()
        ));
    }
    std::fs::write(dir.join("results.csv"), csv)?;

    let mut md = String::from("# Evaluation report\n\n## Success rates\n\n");
    md.push_str("| method | initial | single-constraint | many-constraints |\n");
    md.push_str("|---|---|---|---|\n");
    let methods: Vec<Method> = Method::ALL
        .into_iter()
        .filter(|m| Condition::ALL.iter().any(|c| table.rows.contains_key(&(*m, *c))))
        .collect();
    for method in &methods {
        md.push_str(&format!("| {method} |"));
        for condition in Condition::ALL {
            match table.rows.get(&(*method, condition)) {
                Some(row) => md.push_str(&format!(
                    " {:.4} ({}/{}) |",
                    row.rate(),
                    row.successes,
                    row.n
                )),
                None => md.push_str(" - |"),
            }
        }
        md.push('\n');
    }
    md.push_str("\n## Pairwise Fisher exact tests\n\n");
    md.push_str("| comparison | condition | p-value |\n");
    md.push_str("|---|---|---|\n");
    for (a, b) in PAIRWISE {
        for condition in Condition::ALL {
            let (Some(ra), Some(rb)) = (
                table.rows.get(&(a, condition)),
                table.rows.get(&(b, condition)),
            ) else {
                continue;
            };
            let p = fisher_exact([
                [ra.successes, ra.n - ra.successes],
                [rb.successes, rb.n - rb.successes],
            ]);
            let cell = match p {
                Ok(p) => format!("{p:.6e}"),
                Err(StatsError::DegenerateMargins) => "n/a (degenerate margins)".to_string(),
            };
            md.push_str(&format!("| {a} vs {b} | {condition} | {cell} |\n"));
        }
    }
    std::fs::write(dir.join("report.md"), md)?;
    Ok(())
}

// ---------------------------------------------------------------------------
// results serialization

#[derive(Debug, Serialize, Deserialize)]
struct OutcomeRecord {
    item_id: String,
    family: usize,
    condition: Condition,
    method: String,
    parse_ok: bool,
    plan: Option<Vec<String>>,
    success: u8,
    failure_reason: String,
    wall_time_ms: u64,
}

fn reason_to_string(r: &FailureReason) -> String {
    match r {
        FailureReason::None => "none".into(),
        FailureReason::Unparseable => "unparseable".into(),
        FailureReason::PreconditionViolation(step) => format!("precondition-violation:{step}"),
        FailureReason::GoalUnmet => "goal-unmet".into(),
        FailureReason::ResourceExhausted => "resource-exhausted".into(),
    }
}

fn reason_from_string(s: &str) -> Result<FailureReason, String> {
    if let Some(step) = s.strip_prefix("precondition-violation:") {
        return step
            .parse()
            .map(FailureReason::PreconditionViolation)
            .map_err(|e: std::num::ParseIntError| e.to_string());
    }
    match s {
        "none" => Ok(FailureReason::None),
        "unparseable" => Ok(FailureReason::Unparseable),
        "goal-unmet" => Ok(FailureReason::GoalUnmet),
        "resource-exhausted" => Ok(FailureReason::ResourceExhausted),
        other => Err(format!("unknown failure reason {other:?}")),
    }
}

fn plan_lines(plan: &Plan) -> Vec<String> {
    crate::pddl::emit_plan(plan)
        .lines()
        .map(str::to_string)
        .collect()
}

pub fn write_results(outcomes: &[EvalOutcome], path: &Path) -> std::io::Result<()> {
    let mut file = std::fs::File::create(path)?;
    for o in outcomes {
        let record = OutcomeRecord {
            item_id: o.item_id.clone(),
            family: o.family,
            condition: o.condition,
            method: o.method.to_string(),
            parse_ok: o.parse_ok,
            plan: o.plan.as_ref().map(plan_lines),
            success: o.outcome.success,
            failure_reason: reason_to_string(&o.outcome.failure_reason),
            wall_time_ms: o.wall_time_ms,
        };
        writeln!(file, "{}", serde_json::to_string(&record)?)?;
    }
    Ok(())
}

/// Reads results back for aggregation. Plans are kept as text and not
/// re-parsed (aggregation only needs the outcome fields), so `plan` is `None`
/// on the returned outcomes.
pub fn read_results(path: &Path) -> Result<Vec<EvalOutcome>, String> {
    let file = std::fs::File::open(path).map_err(|e| e.to_string())?;
    let mut out = Vec::new();
    for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line.map_err(|e| e.to_string())?;
        if line.trim().is_empty() {
            continue;
        }
        let record: OutcomeRecord =
            serde_json::from_str(&line).map_err(|e| format!("line {}: {e}", i + 1))?;
        let failure_reason = reason_from_string(&record.failure_reason)
            .map_err(|e| format!("line {}: {e}", i + 1))?;
        let method: Method = record
            .method
            .parse()
            .map_err(|e| format!("line {}: {e}", i + 1))?;
        out.push(EvalOutcome {
            item_id: record.item_id,
            family: record.family,
            condition: record.condition,
            method,
            parse_ok: record.parse_ok,
            plan: None,
            outcome: SimOutcome {
                success: record.success,
                failure_reason,
            },
            wall_time_ms: record.wall_time_ms,
        });
    }
    // deterministic reduction regardless of completion order
    out.sort_by(|a, b| (&a.item_id, a.method).cmp(&(&b.item_id, b.method)));
    Ok(out)
}
