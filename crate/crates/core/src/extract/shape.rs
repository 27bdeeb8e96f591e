//! Structural shapes parsed from the output-format templates of tasks.
//!
//! Templates look like JSON but use placeholders: `[integer]`, `[number]`,
//! `[boolean]`, `[integer list]`, quoted descriptions for free text, and a
//! `...` entry marking repetition. A quoted placeholder beginning with
//! `[Optional` or a bare one beginning with `[optional` marks its key as
//! optional.

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Shape {
    Object { fields: Vec<Field> },
    Array { element: Box<Shape> },
    Integer,
    Number,
    Text,
    Boolean,
    Any,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Field {
    pub key: String,
    pub shape: Shape,
    pub optional: bool,
}

impl Shape {
    pub fn parse(template: &str) -> Result<Shape, String> {
        let mut p = Parser { src: template.as_bytes(), pos: 0 };
        let (shape, _) = p.value()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.error("trailing content"));
        }
        Ok(shape)
    }

    /// Checks `value` against the shape. Numeric placeholders also accept
    /// numeric strings; free text accepts scalars. Keys not in the template
    /// are ignored.
    pub fn validate(&self, value: &Value) -> Result<(), String> {
        self.check(value, "$")
    }

    fn check(&self, value: &Value, path: &str) -> Result<(), String> {
        let fail = |what: &str| Err(format!("{path}: expected {what}, found {}", kind(value)));
        match self {
            Shape::Any => Ok(()),
            Shape::Text => match value {
                Value::String(_) | Value::Number(_) | Value::Bool(_) => Ok(()),
                _ => fail("text"),
            },
            Shape::Boolean => match value {
                Value::Bool(_) => Ok(()),
                _ => fail("boolean"),
            },
            Shape::Integer => match value {
                Value::Number(n) if is_integral(n.as_f64()) => Ok(()),
                Value::String(s) if is_integral(s.trim().parse::<f64>().ok()) => Ok(()),
                _ => fail("integer"),
            },
            Shape::Number => match value {
                Value::Number(_) => Ok(()),
                Value::String(s) if s.trim().parse::<f64>().is_ok_and(f64::is_finite) => Ok(()),
                _ => fail("number"),
            },
            Shape::Array { element } => match value {
                Value::Array(items) => {
                    items.iter().enumerate().try_for_each(|(i, item)| element.check(item, &format!("{path}[{i}]")))
                }
                _ => fail("array"),
            },
            Shape::Object { fields } => {
                let Value::Object(map) = value else {
                    return fail("object");
                };
                for field in fields {
                    let sub = format!("{path}.{}", field.key);
                    match map.get(&field.key) {
                        None | Some(Value::Null) if field.optional => {}
                        None => return Err(format!("{sub}: missing required key")),
                        Some(v) => field.shape.check(v, &sub)?,
                    }
                }
                Ok(())
            }
        }
    }
}

fn is_integral(x: Option<f64>) -> bool {
    x.is_some_and(|x| x.is_finite() && x.fract() == 0.0)
}

fn kind(v: &Value) -> &'static str {
    match v {
        Value::Null => "null",
        Value::Bool(_) => "boolean",
        Value::Number(_) => "number",
        Value::String(_) => "string",
        Value::Array(_) => "array",
        Value::Object(_) => "object",
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> String {
        let line = self.src[..self.pos.min(self.src.len())].iter().filter(|&&b| b == b'\n').count() + 1;
        format!("template line {line}: {msg}")
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> Result<(), String> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected `{}`", b as char)))
        }
    }

    fn at_ellipsis(&mut self) -> bool {
        self.peek();
        self.src[self.pos..].starts_with(b"...")
    }

    /// Parses a value; the flag reports an optional marker.
    fn value(&mut self) -> Result<(Shape, bool), String> {
        match self.peek() {
            Some(b'{') => self.object().map(|s| (s, false)),
            Some(b'[') => {
                let save = self.pos;
                self.pos += 1;
                self.skip_ws();
                if self.src.get(self.pos).is_some_and(u8::is_ascii_alphabetic) {
                    self.pos = save;
                    self.placeholder()
                } else {
                    self.pos = save;
                    self.array().map(|s| (s, false))
                }
            }
            Some(b'"') => {
                let text = self.string()?;
                let optional = text.trim_start().to_ascii_lowercase().starts_with("[optional");
                Ok((Shape::Text, optional))
            }
            Some(b't') | Some(b'f') => {
                for word in ["true", "false"] {
                    if self.src[self.pos..].starts_with(word.as_bytes()) {
                        self.pos += word.len();
                        return Ok((Shape::Boolean, false));
                    }
                }
                Err(self.error("unexpected token"))
            }
            Some(b'-' | b'0'..=b'9') => {
                let start = self.pos;
                while self.pos < self.src.len()
                    && matches!(self.src[self.pos], b'-' | b'+' | b'.' | b'e' | b'E' | b'0'..=b'9')
                {
                    self.pos += 1;
                }
                let lit = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                if lit.contains(['.', 'e', 'E']) {
                    Ok((Shape::Number, false))
                } else {
                    Ok((Shape::Integer, false))
                }
            }
            _ => Err(self.error("expected a value")),
        }
    }

    fn placeholder(&mut self) -> Result<(Shape, bool), String> {
        self.eat(b'[')?;
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos] != b']' {
            self.pos += 1;
        }
        let inner = std::str::from_utf8(&self.src[start..self.pos])
            .map_err(|_| self.error("invalid UTF-8"))?
            .trim()
            .to_ascii_lowercase();
        self.eat(b']')?;
        let (optional, rest) = match inner.strip_prefix("optional") {
            Some(rest) => (true, rest.trim_start_matches([':', ' '])),
            None => (false, inner.as_str()),
        };
        let scalar = |word: &str| match word {
            "integer" | "int" => Some(Shape::Integer),
            "number" | "float" => Some(Shape::Number),
            "boolean" | "bool" => Some(Shape::Boolean),
            "string" | "text" => Some(Shape::Text),
            "any" => Some(Shape::Any),
            _ => None,
        };
        let shape = if let Some(elem) = rest.strip_suffix(" list") {
            Shape::Array {
                element: Box::new(
                    scalar(elem.trim()).ok_or_else(|| self.error(&format!("unknown placeholder `[{inner}]`")))?,
                ),
            }
        } else {
            scalar(rest).ok_or_else(|| self.error(&format!("unknown placeholder `[{inner}]`")))?
        };
        Ok((shape, optional))
    }

    fn string(&mut self) -> Result<String, String> {
        self.eat(b'"')?;
        let start = self.pos;
        let mut escaped = false;
        while self.pos < self.src.len() {
            let b = self.src[self.pos];
            self.pos += 1;
            match b {
                _ if escaped => escaped = false,
                b'\\' => escaped = true,
                b'"' => {
                    let raw = &self.src[start..self.pos - 1];
                    return String::from_utf8(raw.to_vec()).map_err(|_| self.error("invalid UTF-8"));
                }
                _ => {}
            }
        }
        Err(self.error("unterminated string"))
    }

    fn object(&mut self) -> Result<Shape, String> {
        self.eat(b'{')?;
        let mut fields = Vec::new();
        loop {
            if self.peek() == Some(b'}') {
                self.pos += 1;
                break;
            }
            if self.at_ellipsis() {
                self.pos += 3;
            } else {
                let key = self.string()?;
                self.eat(b':')?;
                let (shape, optional) = self.value()?;
                if fields.iter().any(|f: &Field| f.key == key) {
                    return Err(self.error(&format!("duplicate key `{key}`")));
                }
                fields.push(Field { key, shape, optional });
            }
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b'}') => {}
                _ => return Err(self.error("expected `,` or `}`")),
            }
        }
        Ok(Shape::Object { fields })
    }

    fn array(&mut self) -> Result<Shape, String> {
        self.eat(b'[')?;
        let mut element = None;
        loop {
            if self.peek() == Some(b']') {
                self.pos += 1;
                break;
            }
            if self.at_ellipsis() {
                self.pos += 3;
            } else {
                let (shape, _) = self.value()?;
                element.get_or_insert(shape);
            }
            match self.peek() {
                Some(b',') => self.pos += 1,
                Some(b']') => {}
                _ => return Err(self.error("expected `,` or `]`")),
            }
        }
        Ok(Shape::Array { element: Box::new(element.unwrap_or(Shape::Any)) })
    }
}
