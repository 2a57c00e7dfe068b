use serde::{Deserialize, Serialize};

use crate::corpus::ChartSample;
use crate::text::{detokenize, is_sentence_start, tokenize};

use super::matcher::ChartIndex;
use super::var::{Category, SummaryToken, TemplateVar};

/// Rendered in place of a variable that points outside the chart.
pub const UNK_REF: &str = "[UNK-REF]";

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TemplatedSummary {
    pub tokens: Vec<SummaryToken>,
    /// Source token range `[start, end)` in the tokenized summary, one entry
    /// per output token.
    pub alignment: Vec<(usize, usize)>,
}

impl TemplatedSummary {
    /// Whitespace-joined textual form, variables in grammar notation.
    pub fn to_text(&self) -> String {
        self.tokens
            .iter()
            .map(ToString::to_string)
            .collect::<Vec<_>>()
            .join(" ")
    }

    pub fn vars(&self) -> impl Iterator<Item = &TemplateVar> {
        self.tokens.iter().filter_map(SummaryToken::as_var)
    }

    pub fn from_tokens(tokens: Vec<SummaryToken>) -> Self {
        let alignment = (0..tokens.len()).map(|i| (i, i + 1)).collect();
        TemplatedSummary { tokens, alignment }
    }
}

/// Rewrites a summary into data-variable form.
///
/// Scans left to right. At each position the longest span accepted by any
/// matcher wins; among equal lengths the higher-priority category wins. A
/// candidate is only taken when it renders back to exactly the span.
pub fn templatize(summary: &str, chart: &ChartSample) -> TemplatedSummary {
    let index = ChartIndex::new(chart);
    templatize_tokens(&tokenize(summary), &index)
}

pub fn templatize_tokens(tokens: &[String], index: &ChartIndex<'_>) -> TemplatedSummary {
    let mut out = Vec::new();
    let mut alignment = Vec::new();
    let mut i = 0;
    while i < tokens.len() {
        let start = is_sentence_start(i.checked_sub(1).map(|p| &tokens[p]));
        match best_match(tokens, i, start, index) {
            Some((var, len)) => {
                out.push(SummaryToken::Var(var));
                alignment.push((i, i + len));
                i += len;
            }
            None => {
                out.push(SummaryToken::Literal(tokens[i].clone()));
                alignment.push((i, i + 1));
                i += 1;
            }
        }
    }
    TemplatedSummary {
        tokens: out,
        alignment,
    }
}

fn best_match(
    tokens: &[String],
    at: usize,
    sentence_start: bool,
    index: &ChartIndex<'_>,
) -> Option<(TemplateVar, usize)> {
    let longest = index.max_span().min(tokens.len() - at);
    for len in (1..=longest).rev() {
        let span = &tokens[at..at + len];
        for cat in Category::ALL {
            for var in index.candidates(cat, span) {
                if index.render_tokens(&var, sentence_start).as_deref() == Some(span) {
                    return Some((var, len));
                }
            }
        }
    }
    None
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct UnresolvedVar {
    /// Index of the variable in the input token stream.
    pub position: usize,
    pub var: String,
}

/// Variables that could not be resolved against the chart.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DetempReport {
    pub unresolved: Vec<UnresolvedVar>,
}

impl DetempReport {
    pub fn is_empty(&self) -> bool {
        self.unresolved.is_empty()
    }

    pub fn len(&self) -> usize {
        self.unresolved.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Detemplatized {
    pub text: String,
    pub tokens: Vec<String>,
    pub report: DetempReport,
}

/// Replaces each variable with the chart text it references. Out-of-range
/// variables render as [`UNK_REF`] and are listed in the report; this never
/// fails.
pub fn detemplatize(tokens: &[SummaryToken], chart: &ChartSample) -> Detemplatized {
    let index = ChartIndex::new(chart);
    let mut out: Vec<String> = Vec::new();
    let mut report = DetempReport::default();
    for (position, tok) in tokens.iter().enumerate() {
        match tok {
            SummaryToken::Literal(s) => out.push(s.clone()),
            SummaryToken::Var(var) => {
                let start = is_sentence_start(out.last());
                match index.render_tokens(var, start) {
                    Some(rendered) if !rendered.is_empty() => out.extend(rendered),
                    _ => {
                        report.unresolved.push(UnresolvedVar {
                            position,
                            var: var.to_string(),
                        });
                        out.push(UNK_REF.to_string());
                    }
                }
            }
        }
    }
    Detemplatized {
        text: detokenize(&out),
        tokens: out,
        report,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{ChartType, DataTable};
    use crate::template::lexicon;
    use crate::template::var::{parse_templated, Axis};
    use proptest::prelude::*;

    fn liverpool() -> ChartSample {
        ChartSample {
            id: "liverpool".into(),
            image_ref: None,
            title: "Revenue of Liverpool FC by stream".into(),
            x_label: "Season".into(),
            y_label: "Revenue in million euros".into(),
            chart_type: ChartType::ComplexBar,
            table: DataTable::new(
                vec![
                    "Season".into(),
                    "Matchday".into(),
                    "Broadcasting".into(),
                    "Commercial".into(),
                ],
                vec![
                    vec!["2017/18".into(), "94.9".into(), "266.1".into(), "164.1".into()],
                    vec!["2018/19".into(), "84.3".into(), "261.5".into(), "188.2".into()],
                ],
            ),
            summary: "Broadcasting is the largest source of revenue for Liverpool FC".into(),
        }
    }

    #[test]
    fn header_token_becomes_label_variable() {
        let c = liverpool();
        let ts = templatize(&c.summary, &c);
        assert_eq!(ts.tokens[0], SummaryToken::Var(TemplateVar::Cell { column: 2, row: 0 }));
        assert_eq!(ts.tokens[0].to_string(), "templateLabel[2][0]");
        assert_eq!(
            ts.to_text(),
            "templateLabel[2][0] is the largest source of revenue for templateSubject[0]"
        );
        assert_eq!(*ts.alignment.last().unwrap(), (8, 10));
    }

    #[test]
    fn no_data_references_stay_literal() {
        let c = liverpool();
        let ts = templatize("the the the", &c);
        assert!(ts.vars().next().is_none());
        assert_eq!(ts.to_text(), "the the the");
    }

    #[test]
    fn out_of_range_renders_sentinel() {
        let c = liverpool();
        let toks = vec![SummaryToken::Var(TemplateVar::Cell { column: 99, row: 0 })];
        let d = detemplatize(&toks, &c);
        assert_eq!(d.text, UNK_REF);
        assert_eq!(d.report.len(), 1);
        assert_eq!(d.report.unresolved[0].var, "templateLabel[99][0]");
    }

    #[test]
    fn lexeme_capitalized_at_sentence_start() {
        let c = liverpool();
        let ts = templatize("Growing revenue. Broadcasting revenue is growing.", &c);
        let up = lexicon::trend_up_index("growing").unwrap();
        let growing = SummaryToken::Var(TemplateVar::Trend {
            direction: crate::template::Direction::Up,
            lexeme: up,
        });
        assert_eq!(ts.tokens[0], growing);
        assert_eq!(ts.tokens[6], growing);
        assert_eq!(
            detemplatize(&ts.tokens, &c).text,
            "Growing revenue. Broadcasting revenue is growing."
        );
        // Shouting is not reproducible from the lexicon, so it stays literal.
        let ts = templatize("GROWING", &c);
        assert_eq!(ts.tokens[0], SummaryToken::Literal("GROWING".into()));
    }

    #[test]
    fn figure_style_sentence() {
        let mut c = liverpool();
        c.title = "Revenue of Liverpool FC from 2018 to 2019".into();
        c.table = DataTable::new(
            vec!["Year".into(), "Broadcasting".into()],
            vec![
                vec!["2018".into(), "266.1".into()],
                vec!["2019".into(), "261.5".into()],
            ],
        );
        c.x_label = "Year".into();
        let templated = "This statistic shows the templateTitle[0] of templateSubject[0] \
                         from templateDate[0][1] to templateDate[0][2] . In templateDate[0][2] , \
                         templateLabel[1][0] revenue templateNeg[6] to templateValue[1][2] \
                         templateScale[2] euros .";
        let d = detemplatize(&parse_templated(templated), &c);
        assert_eq!(
            d.text,
            "This statistic shows the Revenue of Liverpool FC from 2018 to 2019. \
             In 2019, Broadcasting revenue declined to 261.5 million euros."
        );
        assert!(d.report.is_empty());
    }

    #[test]
    fn axis_label_multi_token() {
        let c = liverpool();
        let ts = templatize("measured as Revenue in million euros", &c);
        assert_eq!(ts.tokens[2], SummaryToken::Var(TemplateVar::AxisLabel(Axis::Y)));
        assert_eq!(ts.tokens.len(), 3);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]
        #[test]
        fn roundtrip_any_text(words in proptest::collection::vec(
            prop_oneof![
                Just("Broadcasting".to_string()), Just("Liverpool".to_string()),
                Just("FC".to_string()), Just("94.9".to_string()), Just("2018/19".to_string()),
                Just("growing".to_string()), Just("Growing".to_string()), Just("million".to_string()),
                Just("Revenue".to_string()), Just("in".to_string()), Just(".".to_string()),
                Just("euros".to_string()), Just("266.10".to_string()), "[a-z]{1,6}",
            ], 0..25)) {
            let c = liverpool();
            let text = words.join(" ");
            let ts = templatize(&text, &c);
            let d = detemplatize(&ts.tokens, &c);
            prop_assert_eq!(d.tokens, tokenize(&text));
            prop_assert!(d.report.is_empty());
            prop_assert_eq!(templatize(&text, &c), ts);
        }
    }
}
