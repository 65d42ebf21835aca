//! Minimal few-shot templates.
//!
//! | category | line                                           |
//! |----------|------------------------------------------------|
//! | single   | `Input: <x>, Label: <y>`                       |
//! | aspect   | `Input: <x>, Aspect: <a>, Label: <y>`          |
//! | pair     | `Input: <x1>, Text 2: <x2>, Label: <y>`        |
//!
//! Demo lines are joined with `\n`; the query line leaves the label slot
//! empty and ends in `Label: ` (or `Label:` with `trailing_space = false`).
//! There is no trailing newline. Field values are inserted verbatim, so a
//! comma or `Label:` inside a text can make two prompts render identically.

use serde::{Deserialize, Serialize};

use crate::dataset::{Category, TaskRecord};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptOptions {
    /// Keep the single space after the final `Label:`.
    pub trailing_space: bool,
}

impl Default for PromptOptions {
    fn default() -> Self {
        Self { trailing_space: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PromptString {
    pub text: String,
    pub category: Category,
    pub num_demos: usize,
}

impl PromptString {
    pub fn as_str(&self) -> &str {
        &self.text
    }
}

impl std::fmt::Display for PromptString {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.text)
    }
}

fn input_part(out: &mut String, text: &str, text2: Option<&str>, aspect: Option<&str>, category: Category) {
    out.push_str("Input: ");
    out.push_str(text);
    match category {
        Category::Single => {}
        Category::Aspect => {
            out.push_str(", Aspect: ");
            out.push_str(aspect.unwrap_or_default());
        }
        Category::Pair => {
            out.push_str(", Text 2: ");
            out.push_str(text2.unwrap_or_default());
        }
    }
    out.push_str(", Label:");
}

fn check_fields(record: &TaskRecord, category: Category, role: &str) -> Result<()> {
    let missing = match category {
        Category::Single => None,
        Category::Aspect if record.aspect.is_none() => Some("aspect"),
        Category::Pair if record.text2.is_none() => Some("text2"),
        _ => None,
    };
    match missing {
        Some(field) => Err(Error::invalid(format!("{role} record lacks `{field}` for {category:?} prompt"))),
        None => Ok(()),
    }
}

fn render_demos(out: &mut String, demos: &[&TaskRecord], verbalizers: &[String], category: Category) -> Result<()> {
    for demo in demos {
        check_fields(demo, category, "demo")?;
        let label = verbalizers.get(demo.label).ok_or_else(|| {
            Error::invalid(format!("demo label {} has no verbalizer", demo.label))
        })?;
        input_part(out, &demo.text, demo.text2.as_deref(), demo.aspect.as_deref(), category);
        out.push(' ');
        out.push_str(label);
        out.push('\n');
    }
    Ok(())
}

fn finish_query(out: &mut String, opts: PromptOptions) {
    if opts.trailing_space {
        out.push(' ');
    }
}

/// Renders `s = f(G, x_q)`. The query's label is ignored.
pub fn build_prompt(
    demos: &[&TaskRecord],
    query: &TaskRecord,
    verbalizers: &[String],
    category: Category,
    opts: PromptOptions,
) -> Result<PromptString> {
    check_fields(query, category, "query")?;
    let mut text = String::new();
    render_demos(&mut text, demos, verbalizers, category)?;
    input_part(&mut text, &query.text, query.text2.as_deref(), query.aspect.as_deref(), category);
    finish_query(&mut text, opts);
    Ok(PromptString {
        text,
        category,
        num_demos: demos.len(),
    })
}

/// Demos followed by a query line whose input slots are empty.
pub fn build_queryless_prompt(
    demos: &[&TaskRecord],
    verbalizers: &[String],
    category: Category,
    opts: PromptOptions,
) -> Result<PromptString> {
    if demos.is_empty() {
        return Err(Error::invalid("query-less prompt needs at least one demo"));
    }
    let mut text = String::new();
    render_demos(&mut text, demos, verbalizers, category)?;
    input_part(&mut text, "", Some(""), Some(""), category);
    finish_query(&mut text, opts);
    Ok(PromptString {
        text,
        category,
        num_demos: demos.len(),
    })
}
