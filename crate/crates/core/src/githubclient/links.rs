use std::sync::OnceLock;

use regex::Regex;

fn issue_token() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"(?:^|[^\w/])#(\d+)\b").expect("valid regex"))
}

/// Every `#<n>` token in a commit message that does not follow a word
/// character or `/` (so `owner/repo#12` is skipped), sorted and unique.
pub fn issue_refs(message: &str) -> Vec<u64> {
    let mut ids: Vec<u64> = issue_token()
        .captures_iter(message)
        .filter_map(|c| c[1].parse().ok())
        .filter(|&n| n > 0)
        .collect();
    ids.sort_unstable();
    ids.dedup();
    ids
}

/// The closing-keyword form, e.g. `Fixes #514` or `resolved #7`.
pub fn closing_pattern(issue_id: u64) -> Regex {
    Regex::new(&format!(r"(?i)\b(close[sd]?|fix(e[sd])?|resolve[sd]?)\s+#{issue_id}\b")).expect("valid regex")
}

/// Whether a commit message links to the issue, either through a closing
/// keyword or a bare `#<id>` token.
pub fn references_issue(message: &str, issue_id: u64) -> bool {
    closing_pattern(issue_id).is_match(message) || issue_refs(message).contains(&issue_id)
}
