use serde_json::Value;

use super::LlmError;

/// Pulls the outermost JSON object out of a model completion.
///
/// Accepts bare JSON, fenced code blocks and objects surrounded by prose.
pub fn parse_structured(text: &str) -> Result<Value, LlmError> {
    let trimmed = text.trim();
    if let Ok(value @ Value::Object(_)) = serde_json::from_str::<Value>(trimmed) {
        return Ok(value);
    }
    for block in fenced_blocks(trimmed) {
        if let Ok(value @ Value::Object(_)) = serde_json::from_str::<Value>(block.trim()) {
            return Ok(value);
        }
    }
    for (start, _) in trimmed.match_indices('{') {
        if let Some(end) = matching_brace(&trimmed[start..]) {
            if let Ok(value @ Value::Object(_)) = serde_json::from_str::<Value>(&trimmed[start..start + end]) {
                return Ok(value);
            }
        }
    }
    Err(LlmError::Parse { raw: text.to_string() })
}

fn fenced_blocks(text: &str) -> Vec<&str> {
    let mut blocks = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find("```") {
        let after = &rest[open + 3..];
        // Skip the info string (e.g. `json`) on the opening fence line.
        let body_start = after.find('\n').map(|i| i + 1).unwrap_or(after.len());
        let body = &after[body_start..];
        match body.find("```") {
            Some(close) => {
                blocks.push(&body[..close]);
                rest = &body[close + 3..];
            }
            None => {
                blocks.push(body);
                break;
            }
        }
    }
    blocks
}

/// Byte length of the balanced `{...}` prefix of `text`, honouring strings.
fn matching_brace(text: &str) -> Option<usize> {
    let mut depth = 0usize;
    let mut in_string = false;
    let mut escaped = false;
    for (i, c) in text.char_indices() {
        if in_string {
            match c {
                _ if escaped => escaped = false,
                '\\' => escaped = true,
                '"' => in_string = false,
                _ => {}
            }
            continue;
        }
        match c {
            '"' => in_string = true,
            '{' => depth += 1,
            '}' => {
                depth = depth.checked_sub(1)?;
                if depth == 0 {
                    return Some(i + 1);
                }
            }
            _ => {}
        }
    }
    None
}
