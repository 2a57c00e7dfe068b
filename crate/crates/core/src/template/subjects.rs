use crate::corpus::ChartSample;
use crate::text::tokenize;

use super::lexicon::{is_function_word, is_month};

fn is_capitalized(token: &str) -> bool {
    token.chars().next().is_some_and(|c| c.is_uppercase())
}

fn is_all_caps(token: &str) -> bool {
    token.chars().any(|c| c.is_alphabetic()) && !token.chars().any(|c| c.is_lowercase())
}

/// Rule-based stand-in for named entity recognition over the chart title.
///
/// A subject is a maximal run of capitalized title tokens. Function words and
/// month names break runs. A single non-acronym word opening the title is
/// ordinary sentence capitalization and is skipped.
pub fn detect_subjects(chart: &ChartSample) -> Vec<Vec<String>> {
    subjects_in_title(&tokenize(&chart.title))
}

pub(crate) fn subjects_in_title(title: &[String]) -> Vec<Vec<String>> {
    let mut runs: Vec<(usize, Vec<String>)> = Vec::new();
    let mut current: Option<(usize, Vec<String>)> = None;
    for (i, tok) in title.iter().enumerate() {
        let in_run = is_capitalized(tok) && !is_function_word(tok) && !is_month(tok);
        if in_run {
            current.get_or_insert_with(|| (i, Vec::new())).1.push(tok.clone());
        } else if let Some(run) = current.take() {
            runs.push(run);
        }
    }
    runs.extend(current);

    let mut out: Vec<Vec<String>> = Vec::new();
    for (start, run) in runs {
        if start == 0 && run.len() == 1 && !is_all_caps(&run[0]) {
            continue;
        }
        if !out.contains(&run) {
            out.push(run);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn subjects(title: &str) -> Vec<String> {
        subjects_in_title(&tokenize(title))
            .into_iter()
            .map(|s| s.join(" "))
            .collect()
    }

    #[test]
    fn title_entities() {
        assert_eq!(subjects("Revenue of Liverpool FC by stream"), vec!["Liverpool FC"]);
        assert!(subjects("annual revenue by year").is_empty());
        assert_eq!(
            subjects("Facebook Fans of NFL Teams"),
            vec!["Facebook Fans", "NFL Teams"]
        );
    }

    #[test]
    fn acronyms_dedup_and_months() {
        assert_eq!(subjects("NFL revenue and NFL ratings"), vec!["NFL"]);
        assert_eq!(subjects("Sales of Apple in January 2020"), vec!["Apple"]);
        assert_eq!(subjects("The Beatles record sales"), vec!["Beatles"]);
    }
}
