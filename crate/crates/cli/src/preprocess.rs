//! Column-wise textual preprocessing applied before domain construction.

/// Applies the named rules in order to one cell.
pub fn apply_rules(value: &str, rules: &[String]) -> String {
    let mut out = value.to_string();
    for rule in rules {
        out = match rule.as_str() {
            "split-hyphens" => out.replace('-', " "),
            "strip-punctuation" => out
                .chars()
                .filter(|c| !c.is_ascii_punctuation())
                .collect(),
            "uppercase" => out.to_uppercase(),
            _ => out,
        };
    }
    out
}
