//! Closed word lists used by the trend, scale, date and title matchers.

use crate::text::normalize_number;

pub const TREND_UP: &[&str] = &[
    "increase",
    "increases",
    "increased",
    "increasing",
    "grow",
    "grows",
    "grew",
    "growing",
    "grown",
    "growth",
    "rise",
    "rises",
    "rose",
    "rising",
    "risen",
    "climb",
    "climbed",
    "climbing",
    "gain",
    "gained",
    "gains",
    "upward",
    "surge",
    "surged",
];

pub const TREND_DOWN: &[&str] = &[
    "decrease",
    "decreases",
    "decreased",
    "decreasing",
    "decline",
    "declines",
    "declined",
    "declining",
    "drop",
    "drops",
    "dropped",
    "dropping",
    "fall",
    "falls",
    "fell",
    "falling",
    "fallen",
    "shrink",
    "shrank",
    "shrinking",
    "dip",
    "dipped",
    "downward",
    "plunge",
    "plunged",
];

pub const SCALES: &[&str] = &[
    "thousand",
    "thousands",
    "million",
    "millions",
    "billion",
    "billions",
    "trillion",
    "trillions",
    "percent",
    "percentage",
    "percentages",
    "%",
];

pub const MONTHS: &[&str] = &[
    "january",
    "february",
    "march",
    "april",
    "may",
    "june",
    "july",
    "august",
    "september",
    "october",
    "november",
    "december",
];

pub const MONTH_ABBREVIATIONS: &[&str] = &[
    "jan", "feb", "mar", "apr", "jun", "jul", "aug", "sep", "sept", "oct", "nov", "dec",
];

/// Words that never act as title variables or subject boundaries.
pub const FUNCTION_WORDS: &[&str] = &[
    "a", "an", "the", "of", "in", "on", "at", "by", "for", "from", "to", "and", "or", "with",
    "as", "is", "was", "were", "are", "be", "been", "this", "that", "these", "those", "its",
    "it", "their", "between", "per", "than", "into", "over", "during", "since", "until",
    "about", "after", "before", "up", "down", "there", "which", "who", "what", "when", "where",
    "how", "all", "also", "not", "no", "has", "had", "have",
];

fn position_ci(list: &[&str], word: &str) -> Option<usize> {
    list.iter().position(|w| w.eq_ignore_ascii_case(word))
}

pub fn trend_up_index(word: &str) -> Option<usize> {
    position_ci(TREND_UP, word)
}

pub fn trend_down_index(word: &str) -> Option<usize> {
    position_ci(TREND_DOWN, word)
}

pub fn scale_index(word: &str) -> Option<usize> {
    position_ci(SCALES, word)
}

pub fn is_function_word(word: &str) -> bool {
    position_ci(FUNCTION_WORDS, word).is_some()
}

pub fn is_month(word: &str) -> bool {
    let w = word.trim_end_matches('.');
    position_ci(MONTHS, w).is_some() || position_ci(MONTH_ABBREVIATIONS, w).is_some()
}

/// Four-digit integer between 1900 and 2099.
pub fn is_year(word: &str) -> bool {
    word.len() == 4
        && word.bytes().all(|b| b.is_ascii_digit())
        && normalize_number(word)
            .and_then(|n| n.parse::<u32>().ok())
            .is_some_and(|y| (1900..=2099).contains(&y))
}

/// A bare year, a month name or abbreviation, or a "Month Year" pair.
pub fn is_date_tokens<S: AsRef<str>>(tokens: &[S]) -> bool {
    match tokens {
        [one] => is_year(one.as_ref()) || is_month(one.as_ref()),
        [m, y] => is_month(m.as_ref()) && is_year(y.as_ref()),
        _ => false,
    }
}

/// Which temporal unit a date-shaped token sequence denotes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DateKind {
    Year,
    Month,
}

pub fn date_kind<S: AsRef<str>>(tokens: &[S]) -> Option<DateKind> {
    match tokens {
        [one] if is_year(one.as_ref()) => Some(DateKind::Year),
        [one] if is_month(one.as_ref()) => Some(DateKind::Month),
        [m, y] if is_month(m.as_ref()) && is_year(y.as_ref()) => Some(DateKind::Month),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::HashSet;

    #[test]
    fn lexicons_are_disjoint() {
        let lists: [&[&str]; 6] = [TREND_UP, TREND_DOWN, SCALES, MONTHS, MONTH_ABBREVIATIONS, FUNCTION_WORDS];
        let mut seen = HashSet::new();
        for list in lists {
            for w in list {
                assert!(seen.insert(w.to_lowercase()), "`{w}` appears in two lexicons");
            }
        }
    }

    #[test]
    fn lookups_ignore_case() {
        assert_eq!(trend_up_index("Growing"), trend_up_index("growing"));
        assert!(trend_up_index("growing").is_some());
        assert!(trend_down_index("DECREASING").is_some());
        assert_eq!(SCALES[scale_index("Percentage").unwrap()], "percentage");
        assert!(is_month("Sept."));
        assert!(is_month("jan"));
    }

    #[test]
    fn years() {
        assert!(is_year("1900"));
        assert!(is_year("2099"));
        assert!(!is_year("2100"));
        assert!(!is_year("1899"));
        assert!(!is_year("20.5"));
        assert!(is_date_tokens(&["March", "2020"]));
        assert!(!is_date_tokens(&["2020", "March"]));
    }
}
