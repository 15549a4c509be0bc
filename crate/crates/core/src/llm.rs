//! Few-shot prompt assembly for the two LLM roles (planner and parser), a
//! minimal text-completion transport, and record/replay transcripts so the
//! whole evaluation runs offline and deterministically.

use std::collections::HashMap;
use std::io::{BufRead, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::domain::Problem;
use crate::grammar::render_problem;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LlmError {
    #[error("transport error: {0}")]
    Transport(String),
    #[error("replay miss for prompt hash {0}")]
    ReplayMiss(String),
    #[error("invalid transcript at line {line}: {msg}")]
    BadTranscript { line: usize, msg: String },
    #[error("prompt assembly requires exactly 3 examples, got {0}")]
    WrongExampleCount(usize),
    #[error("io error: {0}")]
    Io(String),
}

/// Sampling parameters sent with every completion request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompletionParams {
    pub temperature: f64,
    pub max_tokens: u32,
    pub stop: Vec<String>,
}

impl CompletionParams {
    /// Planner-role defaults: temperature 0.05, stop at the next problem's
    /// "Initially:" header.
    pub fn planner() -> CompletionParams {
        CompletionParams {
            temperature: 0.05,
            max_tokens: 256,
            stop: vec!["Initially:".to_string()],
        }
    }

    /// Parser-role defaults: greedy, ";" terminates the emitted program.
    pub fn parser() -> CompletionParams {
        CompletionParams {
            temperature: 0.0,
            max_tokens: 128,
            stop: vec![";".to_string()],
        }
    }
}

/// One few-shot header entry: a problem plus its role-specific solution text
/// (an NL plan for the planner role; a goal-predicate program for the parser
/// role). Example problems must stay disjoint from evaluated items.
#[derive(Debug, Clone)]
pub struct FewShotExample {
    pub problem: Problem,
    pub solution_text: String,
}

/// Assembles the planner-role prompt: three worked examples, each problem
/// followed by "Actions:" and its NL plan, then the query problem ending
/// with "Actions:\n" so the completion continues with the plan.
pub fn build_planner_prompt(
    examples: &[FewShotExample],
    problem: &Problem,
) -> Result<String, LlmError> {
    if examples.len() != 3 {
        return Err(LlmError::WrongExampleCount(examples.len()));
    }
    let mut s = String::new();
    for ex in examples {
        s.push_str(&render_problem(&ex.problem));
        s.push_str("\nActions:\n");
        s.push_str(&ex.solution_text);
        s.push('\n');
    }
    s.push_str(&render_problem(problem));
    s.push_str("\nActions:\n");
    Ok(s)
}

/// What the parser-role LLM is asked to emit.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ParserTarget {
    /// Only the goal predicate, e.g. "(and (clear notebook))".
    GoalFragment,
    /// A whole problem document, "(define (problem ...) ...)".
    FullProblem,
}

/// Assembles the parser-role prompt. Example solutions are s-expressions
/// terminated by ";"; the query ends with an open parenthesis so the
/// completion continues the program.
pub fn build_parser_prompt(
    examples: &[FewShotExample],
    problem: &Problem,
    target: ParserTarget,
) -> Result<String, LlmError> {
    if examples.len() != 3 {
        return Err(LlmError::WrongExampleCount(examples.len()));
    }
    let header = match target {
        ParserTarget::GoalFragment => "\nGoal predicate:\n",
        ParserTarget::FullProblem => "\nProblem:\n",
    };
    let mut s = String::new();
    for ex in examples {
        s.push_str(&render_problem(&ex.problem));
        s.push_str(header);
        s.push_str(&ex.solution_text);
        s.push_str(";\n");
    }
    s.push_str(&render_problem(problem));
    s.push_str(header);
    s.push('(');
    Ok(s)
}

/// Truncates a raw completion at the first occurrence of any stop string.
/// Idempotent.
pub fn truncate_at_stop(completion: &str, stop: &[String]) -> String {
    let cut = stop
        .iter()
        .filter_map(|s| completion.find(s.as_str()))
        .min()
        .unwrap_or(completion.len());
    completion[..cut].to_string()
}

pub fn prompt_hash(prompt: &str) -> String {
    hex::encode(Sha256::digest(prompt.as_bytes()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TranscriptEntry {
    pub prompt_hash: String,
    pub prompt: String,
    pub params: CompletionParams,
    pub completion: String,
}

/// A recorded prompt -> completion log, persisted as one JSON record per
/// line. Hashes are verified on load.
#[derive(Debug, Clone, Default)]
pub struct Transcript {
    pub entries: Vec<TranscriptEntry>,
    by_hash: HashMap<String, usize>,
}

impl Transcript {
    pub fn push(&mut self, entry: TranscriptEntry) {
        self.by_hash.insert(entry.prompt_hash.clone(), self.entries.len());
        self.entries.push(entry);
    }

    pub fn lookup(&self, hash: &str) -> Option<&TranscriptEntry> {
        self.by_hash.get(hash).map(|&i| &self.entries[i])
    }

    pub fn load(path: &Path) -> Result<Transcript, LlmError> {
        let file = std::fs::File::open(path).map_err(|e| LlmError::Io(e.to_string()))?;
        let mut t = Transcript::default();
        for (i, line) in std::io::BufReader::new(file).lines().enumerate() {
            let line = line.map_err(|e| LlmError::Io(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let entry: TranscriptEntry =
                serde_json::from_str(&line).map_err(|e| LlmError::BadTranscript {
                    line: i + 1,
                    msg: e.to_string(),
                })?;
            if entry.prompt_hash != prompt_hash(&entry.prompt) {
                return Err(LlmError::BadTranscript {
                    line: i + 1,
                    msg: "prompt hash does not match prompt".into(),
                });
            }
            t.push(entry);
        }
        Ok(t)
    }

    pub fn save(&self, path: &Path) -> Result<(), LlmError> {
        let mut file = std::fs::File::create(path).map_err(|e| LlmError::Io(e.to_string()))?;
        for entry in &self.entries {
            let line = serde_json::to_string(entry).expect("entry serializes");
            writeln!(file, "{line}").map_err(|e| LlmError::Io(e.to_string()))?;
        }
        Ok(())
    }
}

/// Connection details for a live completion endpoint, read from the
/// LLM_ENDPOINT / LLM_API_KEY / LLM_MODEL environment variables.
#[derive(Debug, Clone)]
pub struct Endpoint {
    pub url: String,
    pub api_key: Option<String>,
    pub model: Option<String>,
}

impl Endpoint {
    pub fn from_env() -> Result<Endpoint, LlmError> {
        let url = std::env::var("LLM_ENDPOINT")
            .map_err(|_| LlmError::Transport("LLM_ENDPOINT is not set".into()))?;
        Ok(Endpoint {
            url,
            api_key: std::env::var("LLM_API_KEY").ok(),
            model: std::env::var("LLM_MODEL").ok(),
        })
    }
}

/// How completions are obtained: over the network, from a recorded
/// transcript, or both (live with the result appended to a transcript).
pub enum Transport {
    Live(Endpoint),
    Replay(Transcript),
    Record(Endpoint, Transcript, PathBuf),
}

impl Transport {
    /// Completes a prompt. Completions are truncated at the first stop
    /// string before being returned or recorded.
    pub fn complete(
        &mut self,
        prompt: &str,
        params: &CompletionParams,
    ) -> Result<String, LlmError> {
        match self {
            Transport::Replay(transcript) => {
                let hash = prompt_hash(prompt);
                let entry = transcript
                    .lookup(&hash)
                    .ok_or(LlmError::ReplayMiss(hash))?;
                Ok(truncate_at_stop(&entry.completion, &params.stop))
            }
            Transport::Live(endpoint) => {
                let raw = post_completion(endpoint, prompt, params)?;
                Ok(truncate_at_stop(&raw, &params.stop))
            }
            Transport::Record(endpoint, transcript, path) => {
                let raw = post_completion(endpoint, prompt, params)?;
                let completion = truncate_at_stop(&raw, &params.stop);
                transcript.push(TranscriptEntry {
                    prompt_hash: prompt_hash(prompt),
                    prompt: prompt.to_string(),
                    params: params.clone(),
                    completion: completion.clone(),
                });
                transcript.save(path)?;
                Ok(completion)
            }
        }
    }
}

#[derive(Serialize)]
struct CompletionRequest<'a> {
    prompt: &'a str,
    temperature: f64,
    max_tokens: u32,
    stop: &'a [String],
    #[serde(skip_serializing_if = "Option::is_none")]
    model: Option<&'a str>,
}

#[derive(Deserialize)]
struct CompletionResponse {
    #[serde(default)]
    completion: Option<String>,
    #[serde(default)]
    text: Option<String>,
    #[serde(default)]
    choices: Vec<Choice>,
}

#[derive(Deserialize)]
struct Choice {
    #[serde(default)]
    text: Option<String>,
}

fn post_completion(
    endpoint: &Endpoint,
    prompt: &str,
    params: &CompletionParams,
) -> Result<String, LlmError> {
    let client = reqwest::blocking::Client::new();
    let mut req = client.post(&endpoint.url).json(&CompletionRequest {
        prompt,
        temperature: params.temperature,
        max_tokens: params.max_tokens,
        stop: &params.stop,
        model: endpoint.model.as_deref(),
    });
    if let Some(key) = &endpoint.api_key {
        req = req.bearer_auth(key);
    }
    let resp = req.send().map_err(|e| LlmError::Transport(e.to_string()))?;
    if !resp.status().is_success() {
        return Err(LlmError::Transport(format!("HTTP {}", resp.status())));
    }
    let body: CompletionResponse = resp
        .json()
        .map_err(|e| LlmError::Transport(e.to_string()))?;
    body.completion
        .or(body.text)
        .or_else(|| body.choices.into_iter().next().and_then(|c| c.text))
        .ok_or_else(|| LlmError::Transport("response carries no completion text".into()))
}
