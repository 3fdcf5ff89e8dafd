use unicode_normalization::UnicodeNormalization;

/// Canonical form of a keyword or descriptor: NFC, lowercase, internal
/// whitespace collapsed to single spaces, surrounding punctuation stripped.
///
/// May return an empty string; callers drop those.
pub fn normalize_term(raw: &str) -> String {
    let lowered: String = raw.nfc().flat_map(char::to_lowercase).collect();
    let collapsed = lowered.split_whitespace().collect::<Vec<_>>().join(" ");
    collapsed
        .trim_matches(|c: char| !c.is_alphanumeric())
        .to_string()
}

/// Splits free text into match tokens.
///
/// Text is normalized like [`normalize_term`]; tokens are maximal runs of
/// alphanumerics and hyphens with hyphens trimmed from both ends, so
/// `"e-learning"` stays one token and never matches the token `"learning"`.
pub fn tokenize(text: &str) -> Vec<String> {
    let lowered: String = text.nfc().flat_map(char::to_lowercase).collect();
    lowered
        .split(|c: char| !(c.is_alphanumeric() || c == '-'))
        .map(|t| t.trim_matches('-'))
        .filter(|t| !t.is_empty())
        .map(str::to_string)
        .collect()
}

/// True when `needle` occurs as a contiguous run inside `haystack`.
pub(crate) fn contains_sequence(haystack: &[String], needle: &[String]) -> bool {
    if needle.is_empty() || needle.len() > haystack.len() {
        return false;
    }
    haystack.windows(needle.len()).any(|w| w == needle)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn normalizes_examples() {
        assert_eq!(normalize_term("E-Learning "), "e-learning");
        assert_eq!(normalize_term("  ICT"), "ict");
        assert_eq!(
            normalize_term("Massive  Open Online Courses"),
            "massive open online courses"
        );
        assert_eq!(normalize_term("\"MOOC\"."), "mooc");
        assert_eq!(normalize_term(" ;; "), "");
    }

    #[test]
    fn nfc_composes() {
        // "e" + combining acute accent vs precomposed "é"
        assert_eq!(normalize_term("Re\u{301}seau"), normalize_term("R\u{e9}seau"));
    }

    #[test]
    fn tokens_keep_hyphenated_words_whole() {
        let toks = tokenize("An E-learning study: (learning) analytics, m-learning-");
        assert_eq!(
            toks,
            vec!["an", "e-learning", "study", "learning", "analytics", "m-learning"]
        );
        let needle = tokenize("e-learning");
        assert!(contains_sequence(&toks, &needle));
        assert!(!contains_sequence(&tokenize("machine learning"), &needle));
        assert!(contains_sequence(
            &tokenize("we study learning analytics today"),
            &tokenize("Learning Analytics")
        ));
    }
}
