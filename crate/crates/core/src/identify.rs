//! Stage 1: sentence-level matching of a problem description to graph nodes.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};
use serde_json::Value;
use thiserror::Error;

use crate::graph::ModellingGraph;
use crate::llm::{complete_structured, ChatBackend, ChatRequest, LlmError};

/// Upper bound on nodes kept per sentence.
pub const MAX_MATCHES: usize = 3;

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ActivationReport {
    pub sentences: Vec<String>,
    /// 1-based sentence index to matched node names.
    pub matches: BTreeMap<usize, Vec<String>>,
    pub activated_nodes: BTreeSet<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
    #[serde(default)]
    pub attempts: u32,
}

impl ActivationReport {
    /// Report activating exactly `nodes`, with no sentence structure.
    pub fn from_nodes<I, S>(nodes: I) -> Self
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        Self { activated_nodes: nodes.into_iter().map(Into::into).collect(), ..Self::default() }
    }
}

#[derive(Debug, Error)]
pub enum IdentifyError {
    #[error("problem description is empty")]
    EmptyDescription,
    #[error("identification failed: {0}")]
    Llm(#[from] LlmError),
}

pub fn build_identification_prompt(
    g: &ModellingGraph,
    description: &str,
    model_id: &str,
) -> Result<ChatRequest, IdentifyError> {
    if description.trim().is_empty() {
        return Err(IdentifyError::EmptyDescription);
    }
    let mut p = String::new();
    p.push_str("### Task: Identify Relevant Nodes for Each Sentence\n\n");
    p.push_str("#### Problem Description:\n");
    p.push_str(description.trim_end());
    p.push_str("\n\n#### Modelling Graph Nodes:\n");
    p.push_str(
        "Below are all the available modelling graph nodes. Each node has a **name** and a \
         **description**. Your task is to match each sentence from the **Problem Description** \
         to one or more of these nodes.\n\n",
    );
    for (name, desc) in g.node_catalog() {
        p.push_str(&format!("**Node Name**: {name}  \n**Description**: {desc}\n\n"));
    }
    p.push_str(INSTRUCTIONS);
    Ok(ChatRequest::new(model_id, None, p))
}

const INSTRUCTIONS: &str = r#"#### Instructions:
1. **Extract all sentences from the Problem Description**, ensuring they are listed in the correct order.
2. **Assign a unique identifier to each sentence (e.g., "sentence_1", "sentence_2", etc.).**
3. **Ensure that each sentence is returned exactly as it appears in the original Problem Description.**
4. **Match each sentence to up to 3 most relevant nodes from the Modelling Graph.**
5. **Ignore tables as separate sentences.** If a sentence introduces a table, it must still be processed normally.
6. **Ensure the response follows the JSON format strictly** with the correct number of sentences.

#### Expected Output Format:
```json
{
  "sentences": [
    "Sentence 1",
    "Sentence 2",
    "Sentence 3",
    ...
  ],
  "matches": {
    "sentence_1": ["Node A", "Node B"],
    "sentence_2": ["Node C"],
    "sentence_3": []
  }
}

Return only the JSON response. Do not include explanations or additional formatting.
"#;

pub fn run_identification(
    g: &ModellingGraph,
    description: &str,
    backend: &dyn ChatBackend,
    model_id: &str,
) -> Result<ActivationReport, IdentifyError> {
    let req = build_identification_prompt(g, description, model_id)?;
    let done = complete_structured(backend, &req, |v| interpret_response(g, &v))?;
    let mut report = done.value;
    report.attempts = done.attempts;
    for w in &report.warnings {
        log::warn!("identification: {w}");
    }
    Ok(report)
}

/// Validates a parsed identification answer against the graph.
///
/// Structural problems reject the answer. Unknown node names, surplus
/// matches and stray keys are tolerated and reported as warnings.
pub fn interpret_response(g: &ModellingGraph, v: &Value) -> Result<ActivationReport, String> {
    let sentences = v.get("sentences").and_then(Value::as_array).ok_or("missing `sentences` array")?;
    let sentences: Vec<String> = sentences
        .iter()
        .enumerate()
        .map(|(i, s)| match s.as_str().map(str::trim) {
            Some(s) if !s.is_empty() => Ok(s.to_string()),
            _ => Err(format!("sentence {} is empty or not a string", i + 1)),
        })
        .collect::<Result<_, _>>()?;
    if sentences.is_empty() {
        return Err("no sentences returned".into());
    }
    let raw_matches = v.get("matches").and_then(Value::as_object).ok_or("missing `matches` object")?;

    // Canonical names, looked up case-insensitively.
    let by_folded: BTreeMap<String, &str> =
        g.nodes.iter().map(|n| (n.name.trim().to_lowercase(), n.name.as_str())).collect();

    let mut warnings = Vec::new();
    let mut matches: BTreeMap<usize, Vec<String>> = (1..=sentences.len()).map(|i| (i, Vec::new())).collect();
    for (key, names) in raw_matches {
        let index = key
            .strip_prefix("sentence_")
            .and_then(|n| n.parse::<usize>().ok())
            .filter(|i| (1..=sentences.len()).contains(i));
        let Some(index) = index else {
            warnings.push(format!("ignoring match key `{key}`"));
            continue;
        };
        let Some(names) = names.as_array() else {
            warnings.push(format!("matches for `{key}` are not a list"));
            continue;
        };
        if names.len() > MAX_MATCHES {
            warnings.push(format!("`{key}` matched {} nodes; keeping the first {MAX_MATCHES}", names.len()));
        }
        let slot = matches.get_mut(&index).expect("index in range");
        for name in names.iter().take(MAX_MATCHES) {
            let Some(name) = name.as_str() else {
                warnings.push(format!("non-string node in `{key}`"));
                continue;
            };
            match by_folded.get(&name.trim().to_lowercase()) {
                Some(canonical) => {
                    if !slot.iter().any(|n| n == canonical) {
                        slot.push(canonical.to_string());
                    }
                }
                None => warnings.push(format!("dropping unknown node `{name}` in `{key}`")),
            }
        }
    }
    let activated_nodes = matches.values().flatten().cloned().collect();
    Ok(ActivationReport { sentences, matches, activated_nodes, warnings, attempts: 0 })
}
