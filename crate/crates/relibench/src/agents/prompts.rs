//! Prompt templates, versioned as data files so transcript hashes are
//! stable across builds.

use crate::core::types::Domain;
use crate::domains::tools::catalog;

pub const REACT_SYSTEM_TEMPLATE: &str = include_str!("../../assets/prompts/react_system.txt");
pub const REFLECTION_TEMPLATE: &str = include_str!("../../assets/prompts/reflexion_reflection.txt");

/// Renders the tool catalog for a domain as the prompt's tool list.
pub fn render_catalog(domain: Domain) -> String {
    catalog(domain)
        .iter()
        .map(|t| {
            let params = t
                .params
                .iter()
                .map(|p| p.name)
                .collect::<Vec<_>>()
                .join(", ");
            format!("- {}({params}): {}", t.name, t.description)
        })
        .collect::<Vec<_>>()
        .join("\n")
}

pub fn react_system(domain: Domain) -> String {
    REACT_SYSTEM_TEMPLATE.replace("{{TOOL_CATALOG}}", &render_catalog(domain))
}

pub fn reflection_message(errors: &[String]) -> String {
    let joined = if errors.is_empty() {
        "none recorded; the goal check did not pass".to_string()
    } else {
        errors.join("; ")
    };
    REFLECTION_TEMPLATE.replace("{{ERRORS}}", &joined)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn system_prompt_lists_every_domain_tool() {
        for domain in Domain::ALL {
            let sys = react_system(domain);
            for tool in catalog(domain) {
                assert!(sys.contains(tool.name), "{domain}: missing {}", tool.name);
            }
            assert!(!sys.contains("{{TOOL_CATALOG}}"));
        }
    }

    #[test]
    fn reflection_embeds_errors() {
        let msg = reflection_message(&["status=error reason=transient_timeout".to_string()]);
        assert!(msg.contains("transient_timeout"));
        assert!(!msg.contains("{{ERRORS}}"));
    }
}
