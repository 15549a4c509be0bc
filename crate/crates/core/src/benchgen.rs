//! Benchmark generation: seeded stacking problems under three progressively
//! constrained goal conditions, with out-of-distribution object swaps in the
//! heaviest condition, persisted as a line-delimited dataset.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::path::Path;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::domain::{
    canonicalize, enumerate_configurations, DomainError, Fact, Goal, ObjectId, Problem, WorldState,
};
use crate::grammar::{render_problem, Vocabulary};
use crate::planner::{solve, PlannerConfig, SolveResult};

/// Name of the PRNG recorded with each dataset record.
pub const RNG_NAME: &str = "chacha8";

const MAX_FAMILY_ATTEMPTS: usize = 100;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("out-of-distribution vocabulary exhausted")]
    VocabularyExhausted,
    #[error("family generation aborted after {MAX_FAMILY_ATTEMPTS} attempts")]
    GenerationAborted,
    #[error("invalid generation config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Domain(#[from] DomainError),
    #[error("io error: {0}")]
    Io(String),
    #[error("schema error at line {line}: {msg}")]
    Schema { line: usize, msg: String },
}

#[derive(Debug, Clone)]
pub struct GenConfig {
    pub seed: u64,
    pub count: usize,
    pub n_objects: usize,
    /// Number of constraints in the heaviest condition.
    pub n_many: usize,
    pub vocabulary: Vocabulary,
}

impl GenConfig {
    /// The defaults used throughout: 100 families of 4 objects with 4
    /// constraints in the heaviest condition.
    pub fn defaults(seed: u64) -> GenConfig {
        GenConfig {
            seed,
            count: 100,
            n_objects: 4,
            n_many: 4,
            vocabulary: Vocabulary::default_vocabulary(),
        }
    }

    fn validate(&self) -> Result<(), GenError> {
        if self.count == 0 {
            return Err(GenError::InvalidConfig("count must be positive".into()));
        }
        if self.n_objects < 2 {
            return Err(GenError::InvalidConfig("n_objects must be at least 2".into()));
        }
        if self.n_many < 2 {
            return Err(GenError::InvalidConfig("n_many must be at least 2".into()));
        }
        if self.vocabulary.household.len() < self.n_objects {
            return Err(GenError::InvalidConfig(
                "vocabulary has fewer household names than n_objects".into(),
            ));
        }
        if self.vocabulary.ood.len() < self.n_many - 1 {
            return Err(GenError::InvalidConfig(
                "vocabulary needs at least n_many - 1 ood names".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Condition {
    #[serde(rename = "initial")]
    Initial,
    #[serde(rename = "single-constraint")]
    SingleConstraint,
    #[serde(rename = "many-constraints")]
    ManyConstraints,
}

impl Condition {
    pub const ALL: [Condition; 3] = [
        Condition::Initial,
        Condition::SingleConstraint,
        Condition::ManyConstraints,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Condition::Initial => "initial",
            Condition::SingleConstraint => "single-constraint",
            Condition::ManyConstraints => "many-constraints",
        }
    }
}

impl std::fmt::Display for Condition {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// One generated problem tagged with its condition and family link.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BenchmarkItem {
    pub id: String,
    pub family: usize,
    pub condition: Condition,
    pub seed: u64,
    pub problem: Problem,
    pub nl_text: String,
}

fn pick<T>(rng: &mut ChaCha8Rng, items: &mut Vec<T>) -> T {
    let i = rng.gen_range(0..items.len());
    items.remove(i)
}

/// Samples `n_objects` distinct household objects and a configuration chosen
/// uniformly over all configurations (for up to 5 objects; larger sets fall
/// back to sequential stack placement, which is not uniform).
pub fn sample_initial_configuration(
    rng: &mut ChaCha8Rng,
    n_objects: usize,
    vocabulary: &Vocabulary,
) -> Result<(Vec<ObjectId>, WorldState), GenError> {
    let mut pool: Vec<&str> = vocabulary.household.iter().map(String::as_str).collect();
    let mut objects = Vec::with_capacity(n_objects);
    for _ in 0..n_objects {
        let name = pick(rng, &mut pool);
        objects.push(ObjectId::household(name));
    }
    let obj_set: BTreeSet<ObjectId> = objects.iter().cloned().collect();
    let state = if n_objects <= 5 {
        let configs = enumerate_configurations(&obj_set)?;
        configs[rng.gen_range(0..configs.len())].clone()
    } else {
        // sequential placement: each object joins an existing stack top or
        // starts a new stack on the table
        let mut stacks: Vec<Vec<ObjectId>> = Vec::new();
        for obj in &objects {
            let slot = rng.gen_range(0..=stacks.len());
            if slot == stacks.len() {
                stacks.push(vec![obj.clone()]);
            } else {
                stacks[slot].push(obj.clone());
            }
        }
        let mut facts: BTreeSet<Fact> = BTreeSet::new();
        for stack in &stacks {
            facts.insert(Fact::OnTable(stack[0].clone()));
            for pair in stack.windows(2) {
                facts.insert(Fact::on(pair[1].clone(), pair[0].clone()));
            }
        }
        canonicalize(&facts, &obj_set)?
    };
    Ok((objects, state))
}

/// Samples a target configuration distinct from `init`, uniformly, and
/// returns it with its full canonical fact list (support and clear facts).
pub fn sample_target_specification(
    rng: &mut ChaCha8Rng,
    objects: &[ObjectId],
    init: &WorldState,
) -> Result<(WorldState, Vec<Fact>), GenError> {
    let obj_set: BTreeSet<ObjectId> = objects.iter().cloned().collect();
    let candidates: Vec<WorldState> = enumerate_configurations(&obj_set)?
        .into_iter()
        .filter(|s| s != init)
        .collect();
    let target = candidates[rng.gen_range(0..candidates.len())].clone();
    let spec = target.canonical_facts(objects);
    Ok((target, spec))
}

fn rename_object(fact: &Fact, from: &ObjectId, to: &ObjectId) -> Fact {
    let swap = |o: &ObjectId| if o == from { to.clone() } else { o.clone() };
    match fact {
        Fact::On { above, below } => Fact::on(swap(above), swap(below)),
        Fact::OnTable(x) => Fact::OnTable(swap(x)),
        Fact::Clear(x) => Fact::Clear(swap(x)),
    }
}

/// Renames every non-protected household object mentioned in
/// `constraints[1..]` to a fresh out-of-distribution name (injectively; the
/// same object maps to the same name everywhere). The first constraint is
/// left untouched.
pub fn ood_swap(
    constraints: &[Fact],
    protected: &BTreeSet<ObjectId>,
    vocabulary: &Vocabulary,
    rng: &mut ChaCha8Rng,
) -> Result<(Vec<Fact>, Vec<ObjectId>), GenError> {
    let mut pool: Vec<&str> = vocabulary.ood.iter().map(String::as_str).collect();
    let mut renamed: Vec<Fact> = constraints.to_vec();
    let mut mapping: Vec<(ObjectId, ObjectId)> = Vec::new();
    let mut introduced = Vec::new();
    for fact in renamed.iter_mut().skip(1) {
        let mentioned: Vec<ObjectId> = fact.objects().into_iter().cloned().collect();
        for obj in mentioned {
            if obj.ood || protected.contains(&obj) {
                continue;
            }
            let to = match mapping.iter().find(|(from, _)| *from == obj) {
                Some((_, to)) => to.clone(),
                None => {
                    if pool.is_empty() {
                        return Err(GenError::VocabularyExhausted);
                    }
                    let to = ObjectId::ood(pick(rng, &mut pool));
                    mapping.push((obj.clone(), to.clone()));
                    introduced.push(to.clone());
                    to
                }
            };
            *fact = rename_object(fact, &obj, &to);
        }
    }
    Ok((renamed, introduced))
}

fn is_eligible_initial(fact: &Fact) -> bool {
    matches!(fact, Fact::Clear(_) | Fact::OnTable(_))
}

/// Builds one family: the Initial, SingleConstraint, and ManyConstraints
/// items over a shared base problem, goal atoms nested across conditions.
/// Every item is verified solvable; unsolvable draws are resampled.
pub fn build_family(
    rng: &mut ChaCha8Rng,
    config: &GenConfig,
    family: usize,
) -> Result<[BenchmarkItem; 3], GenError> {
    'attempt: for _ in 0..MAX_FAMILY_ATTEMPTS {
        let (objects, init) =
            sample_initial_configuration(rng, config.n_objects, &config.vocabulary)?;
        let (_target, spec) = sample_target_specification(rng, &objects, &init)?;

        // the Initial goal: a single atom about a common household object,
        // preferring clear/on-table atoms not already true in init
        let mut eligible: Vec<Fact> = spec
            .iter()
            .filter(|f| is_eligible_initial(f) && !init.contains(f))
            .cloned()
            .collect();
        if eligible.is_empty() {
            eligible = spec.iter().filter(|f| !init.contains(f)).cloned().collect();
        }
        if eligible.is_empty() {
            continue 'attempt;
        }
        let initial_atom = eligible[rng.gen_range(0..eligible.len())].clone();

        let mut remaining: Vec<Fact> = spec
            .iter()
            .filter(|f| **f != initial_atom)
            .cloned()
            .collect();
        if remaining.len() < config.n_many {
            continue 'attempt;
        }
        let constraints: Vec<Fact> = (0..config.n_many).map(|_| pick(rng, &mut remaining)).collect();

        let mut protected: BTreeSet<ObjectId> =
            initial_atom.objects().into_iter().cloned().collect();
        protected.extend(constraints[0].objects().into_iter().cloned());
        let (renamed, introduced) = ood_swap(&constraints, &protected, &config.vocabulary, rng)?;

        // assemble the three problems
        let goal_initial = Goal::new(vec![initial_atom.clone()])?;
        let goal_single = Goal::new(vec![initial_atom.clone(), constraints[0].clone()])?;
        let mut many_atoms = vec![initial_atom.clone()];
        many_atoms.extend(renamed.iter().cloned());
        let goal_many = Goal::new(many_atoms)?;

        let mut many_objects = objects.clone();
        many_objects.extend(introduced.iter().cloned());
        let mut many_facts = init.facts().clone();
        for obj in &introduced {
            many_facts.insert(Fact::OnTable(obj.clone()));
        }
        let many_set: BTreeSet<ObjectId> = many_objects.iter().cloned().collect();
        let many_init = canonicalize(&many_facts, &many_set)?;

        let mk = |condition: Condition, objs: Vec<ObjectId>, st: WorldState, goal: Goal| {
            let id = format!("{}-{}-{}", config.seed, family, condition);
            Problem::new(id.clone(), objs, st, goal).map(|problem| {
                let nl_text = render_problem(&problem);
                BenchmarkItem {
                    id,
                    family,
                    condition,
                    seed: config.seed,
                    problem,
                    nl_text,
                }
            })
        };
        let items = [
            mk(Condition::Initial, objects.clone(), init.clone(), goal_initial)?,
            mk(Condition::SingleConstraint, objects.clone(), init.clone(), goal_single)?,
            mk(Condition::ManyConstraints, many_objects, many_init, goal_many)?,
        ];

        let planner = PlannerConfig::default();
        if items
            .iter()
            .all(|it| matches!(solve(&it.problem, &planner), SolveResult::Solved { .. }))
        {
            return Ok(items);
        }
    }
    Err(GenError::GenerationAborted)
}

/// Generates the full dataset: `count` families, three items each. Families
/// draw from independent substreams of the seeded generator, so the output
/// is reproducible byte for byte.
pub fn generate(config: &GenConfig) -> Result<Vec<BenchmarkItem>, GenError> {
    config.validate()?;
    let mut items = Vec::with_capacity(config.count * 3);
    for family in 0..config.count {
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(family as u64);
        items.extend(build_family(&mut rng, config, family)?);
    }
    Ok(items)
}

// ---------------------------------------------------------------------------
// dataset serialization

#[derive(Debug, Serialize, Deserialize)]
struct ObjectRecord {
    name: String,
    ood: bool,
}

#[derive(Debug, Serialize, Deserialize)]
struct ItemRecord {
    id: String,
    family: usize,
    condition: Condition,
    seed: u64,
    rng: String,
    objects: Vec<ObjectRecord>,
    init: Vec<Vec<String>>,
    goal: Vec<Vec<String>>,
    nl_text: String,
}

fn fact_triple(fact: &Fact) -> Vec<String> {
    match fact {
        Fact::On { above, below } => {
            vec!["on".into(), above.name.clone(), below.name.clone()]
        }
        Fact::OnTable(x) => vec!["on-table".into(), x.name.clone()],
        Fact::Clear(x) => vec!["clear".into(), x.name.clone()],
    }
}

fn triple_fact(triple: &[String], objects: &[ObjectId]) -> Result<Fact, String> {
    let find = |name: &str| {
        objects
            .iter()
            .find(|o| o.name == name)
            .cloned()
            .ok_or_else(|| format!("unknown object {name:?}"))
    };
    match triple {
        [p, a, b] if p == "on" => Ok(Fact::on(find(a)?, find(b)?)),
        [p, a] if p == "on-table" => Ok(Fact::OnTable(find(a)?)),
        [p, a] if p == "clear" => Ok(Fact::Clear(find(a)?)),
        _ => Err(format!("malformed fact triple {triple:?}")),
    }
}

impl ItemRecord {
    fn from_item(item: &BenchmarkItem) -> ItemRecord {
        ItemRecord {
            id: item.id.clone(),
            family: item.family,
            condition: item.condition,
            seed: item.seed,
            rng: RNG_NAME.into(),
            objects: item
                .problem
                .objects
                .iter()
                .map(|o| ObjectRecord {
                    name: o.name.clone(),
                    ood: o.ood,
                })
                .collect(),
            init: item
                .problem
                .init
                .canonical_facts(&item.problem.objects)
                .iter()
                .map(fact_triple)
                .collect(),
            goal: item.problem.goal.atoms.iter().map(fact_triple).collect(),
            nl_text: item.nl_text.clone(),
        }
    }

    fn into_item(self, line: usize) -> Result<BenchmarkItem, GenError> {
        let schema = |msg: String| GenError::Schema { line, msg };
        let objects: Vec<ObjectId> = self
            .objects
            .iter()
            .map(|o| ObjectId {
                name: o.name.clone(),
                ood: o.ood,
            })
            .collect();
        let obj_set: BTreeSet<ObjectId> = objects.iter().cloned().collect();
        let mut init_facts: BTreeSet<Fact> = BTreeSet::new();
        for t in &self.init {
            init_facts.insert(triple_fact(t, &objects).map_err(&schema)?);
        }
        let init = canonicalize(&init_facts, &obj_set).map_err(|e| schema(e.to_string()))?;
        let goal = Goal::new(
            self.goal
                .iter()
                .map(|t| triple_fact(t, &objects))
                .collect::<Result<_, _>>()
                .map_err(&schema)?,
        )
        .map_err(|e| schema(e.to_string()))?;
        let problem =
            Problem::new(self.id.clone(), objects, init, goal).map_err(|e| schema(e.to_string()))?;
        Ok(BenchmarkItem {
            id: self.id,
            family: self.family,
            condition: self.condition,
            seed: self.seed,
            problem,
            nl_text: self.nl_text,
        })
    }
}

pub fn dataset_to_string(items: &[BenchmarkItem]) -> String {
    let mut out = String::new();
    for item in items {
        out.push_str(
            &serde_json::to_string(&ItemRecord::from_item(item)).expect("record serializes"),
        );
        out.push('\n');
    }
    out
}

pub fn write_dataset(items: &[BenchmarkItem], path: &Path) -> Result<(), GenError> {
    let mut file = std::fs::File::create(path).map_err(|e| GenError::Io(e.to_string()))?;
    file.write_all(dataset_to_string(items).as_bytes())
        .map_err(|e| GenError::Io(e.to_string()))
}

pub fn dataset_from_reader(reader: impl BufRead) -> Result<Vec<BenchmarkItem>, GenError> {
    let mut items = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|e| GenError::Io(e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let record: ItemRecord = serde_json::from_str(&line).map_err(|e| GenError::Schema {
            line: i + 1,
            msg: e.to_string(),
        })?;
        items.push(record.into_item(i + 1)?);
    }
    Ok(items)
}

pub fn read_dataset(path: &Path) -> Result<Vec<BenchmarkItem>, GenError> {
    let file = std::fs::File::open(path).map_err(|e| GenError::Io(e.to_string()))?;
    dataset_from_reader(std::io::BufReader::new(file))
}
