//! Prompt templates with `{functions}` and `{text}` placeholders.
//!
//! A template file holds the system part, a line consisting of `---`, and
//! the user part. Without a separator the whole file is the system part and
//! the user part is `{text}`.

use serde::Serialize;

use super::backend::ChatMessage;
use super::HarnessError;
use crate::taxonomy::all_functions;

pub const RECOGNITION_TEMPLATE: &str = include_str!("../../data/prompts/recognition.txt");
pub const CONTINUATION_TEMPLATE: &str = include_str!("../../data/prompts/continuation.txt");

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PromptTemplate {
    pub id: String,
    pub system: String,
    pub user: String,
}

impl PromptTemplate {
    pub fn parse(id: impl Into<String>, source: &str) -> Result<Self, HarnessError> {
        let source = source.replace("\r\n", "\n");
        let mut system = Vec::new();
        let mut user: Option<Vec<&str>> = None;
        for line in source.lines() {
            match &mut user {
                Some(u) => u.push(line),
                None if line.trim() == "---" => user = Some(Vec::new()),
                None => system.push(line),
            }
        }
        let template = PromptTemplate {
            id: id.into(),
            system: system.join("\n").trim().to_string(),
            user: user.map_or_else(|| "{text}".to_string(), |u| u.join("\n").trim().to_string()),
        };
        if !template.system.contains("{text}") && !template.user.contains("{text}") {
            return Err(HarnessError::Template(format!(
                "template {:?} has no {{text}} placeholder",
                template.id
            )));
        }
        Ok(template)
    }

    pub fn recognition() -> Self {
        PromptTemplate::parse("recognition", RECOGNITION_TEMPLATE).expect("bundled template")
    }

    pub fn continuation() -> Self {
        PromptTemplate::parse("continuation", CONTINUATION_TEMPLATE).expect("bundled template")
    }

    fn fill(part: &str, text: &str) -> String {
        part.replace("{functions}", &function_list()).replace("{text}", text)
    }

    pub fn render(&self, text: &str) -> Vec<ChatMessage> {
        let mut messages = Vec::with_capacity(2);
        if !self.system.is_empty() {
            messages.push(ChatMessage::new("system", Self::fill(&self.system, text)));
        }
        messages.push(ChatMessage::new("user", Self::fill(&self.user, text)));
        messages
    }
}

/// One line per function: `K: Counteraction - The protagonist's ...`.
pub fn function_list() -> String {
    all_functions()
        .iter()
        .map(|f| format!("{}: {} - {}", f.symbol.token(), f.name, f.description))
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_templates() {
        let t = PromptTemplate::recognition();
        let msgs = t.render("它来了。");
        assert_eq!(msgs.len(), 2);
        assert_eq!(msgs[0].role, "system");
        assert!(msgs[0].content.contains("Lo: Memory Loss"));
        assert!(msgs[0].content.matches('\n').count() >= 34);
        assert_eq!(msgs[1].content, "它来了。");
        assert!(PromptTemplate::continuation().render("x")[0].content.contains("Continue"));
    }

    #[test]
    fn separator_optional() {
        let t = PromptTemplate::parse("t", "Label this.").unwrap();
        assert_eq!(t.user, "{text}");
        assert!(PromptTemplate::parse("bad", "no placeholder\n---\nnone").is_err());
    }
}
