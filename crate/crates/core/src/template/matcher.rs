//! Per-category matchers and variable rendering.
//!
//! Every matcher answers "could this span refer to that piece of chart data",
//! independently of the others. [`match_category`] applies them in priority
//! order. Templatization additionally requires the winning variable to render
//! back to exactly the span, which is what makes detemplatization lossless.

use crate::corpus::ChartSample;
use crate::text::{comparison_key, parse_number, prose_number, tokenize, values_match};

use super::lexicon::{self, is_date_tokens, is_function_word, SCALES, TREND_DOWN, TREND_UP};
use super::subjects::subjects_in_title;
use super::var::{Axis, Category, Direction, TemplateVar};

/// Tokenized views of a chart, computed once per chart.
#[derive(Debug, Clone)]
pub struct ChartIndex<'a> {
    pub chart: &'a ChartSample,
    pub subjects: Vec<Vec<String>>,
    pub title: Vec<String>,
    pub x_label: Vec<String>,
    pub y_label: Vec<String>,
    /// Tokens of every table text, indexed `[column][row]`, row 0 = header.
    cells: Vec<Vec<Vec<String>>>,
    max_span: usize,
}

impl<'a> ChartIndex<'a> {
    pub fn new(chart: &'a ChartSample) -> Self {
        let title = tokenize(&chart.title);
        let subjects = subjects_in_title(&title);
        let table = &chart.table;
        let cells: Vec<Vec<Vec<String>>> = (0..table.n_columns())
            .map(|c| {
                (0..=table.n_rows())
                    .map(|r| tokenize(table.text_at(c, r).unwrap_or_default()))
                    .collect()
            })
            .collect();
        let x_label = tokenize(&chart.x_label);
        let y_label = tokenize(&chart.y_label);
        let max_span = subjects
            .iter()
            .map(Vec::len)
            .chain(cells.iter().flatten().map(Vec::len))
            .chain([x_label.len(), y_label.len(), 2])
            .max()
            .unwrap_or(1)
            .max(1);
        ChartIndex {
            chart,
            subjects,
            title,
            x_label,
            y_label,
            cells,
            max_span,
        }
    }

    /// Longest span any matcher can accept for this chart.
    pub fn max_span(&self) -> usize {
        self.max_span
    }

    pub fn n_columns(&self) -> usize {
        self.cells.len()
    }

    pub fn n_table_rows(&self) -> usize {
        self.chart.table.n_rows() + 1
    }

    fn cell_tokens(&self, column: usize, row: usize) -> &[String] {
        &self.cells[column][row]
    }

    /// Table coordinates in column-major order.
    fn coords(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let rows = self.n_table_rows();
        (0..self.n_columns()).flat_map(move |c| (0..rows).map(move |r| (c, r)))
    }

    /// Surface text a variable stands for, or `None` when it points outside
    /// this chart. Lexicon words are capitalized at the start of a sentence.
    pub fn render(&self, var: &TemplateVar, sentence_start: bool) -> Option<String> {
        let table = &self.chart.table;
        let lexeme = |list: &[&str], k: usize| {
            list.get(k).map(|w| {
                if sentence_start {
                    capitalize(w)
                } else {
                    w.to_string()
                }
            })
        };
        match *var {
            TemplateVar::Subject(i) => self.subjects.get(i).map(|s| s.join(" ")),
            TemplateVar::Date { column, row } => table.text_at(column, row).map(str::to_string),
            TemplateVar::AxisLabel(axis) => {
                let label = match axis {
                    Axis::X => &self.chart.x_label,
                    Axis::Y => &self.chart.y_label,
                };
                (!label.trim().is_empty()).then(|| label.clone())
            }
            TemplateVar::Title(i) => self.title.get(i).cloned(),
            TemplateVar::Cell { column, row: 0 } => table.text_at(column, 0).map(str::to_string),
            TemplateVar::Cell { column, row } => table.text_at(column, row).map(prose_number),
            TemplateVar::Trend {
                direction: Direction::Up,
                lexeme: k,
            } => lexeme(TREND_UP, k),
            TemplateVar::Trend {
                direction: Direction::Down,
                lexeme: k,
            } => lexeme(TREND_DOWN, k),
            TemplateVar::Scale(k) => lexeme(SCALES, k),
        }
    }

    pub fn render_tokens(&self, var: &TemplateVar, sentence_start: bool) -> Option<Vec<String>> {
        self.render(var, sentence_start).map(|s| tokenize(&s))
    }

    pub fn match_subject(&self, span: &[String]) -> Vec<TemplateVar> {
        self.subjects
            .iter()
            .position(|s| s.as_slice() == span)
            .map(TemplateVar::Subject)
            .into_iter()
            .collect()
    }

    /// Date-shaped spans grounded in a table cell (or header) holding the same
    /// date.
    pub fn match_date(&self, span: &[String]) -> Vec<TemplateVar> {
        if !is_date_tokens(span) {
            return Vec::new();
        }
        self.coords()
            .filter(|&(c, r)| keys_equal(self.cell_tokens(c, r), span))
            .map(|(column, row)| TemplateVar::Date { column, row })
            .collect()
    }

    pub fn match_axis_label(&self, span: &[String]) -> Vec<TemplateVar> {
        let mut out = Vec::new();
        if self.x_label.as_slice() == span {
            out.push(TemplateVar::AxisLabel(Axis::X));
        }
        if self.y_label.as_slice() == span {
            out.push(TemplateVar::AxisLabel(Axis::Y));
        }
        out
    }

    /// Single content-word title tokens.
    pub fn match_title(&self, span: &[String]) -> Vec<TemplateVar> {
        let [tok] = span else {
            return Vec::new();
        };
        if is_function_word(tok) || !tok.chars().any(char::is_alphanumeric) {
            return Vec::new();
        }
        self.title
            .iter()
            .position(|t| t == tok)
            .map(TemplateVar::Title)
            .into_iter()
            .collect()
    }

    /// Cells and headers equal to the span, numerically for single numeric
    /// tokens, token-wise (case-insensitive) otherwise. Column-major order, so
    /// the first candidate is the smallest `(column, row)`.
    pub fn match_cell(&self, span: &[String]) -> Vec<TemplateVar> {
        let span_value = match span {
            [one] => parse_number(one),
            _ => None,
        };
        self.coords()
            .filter(|&(c, r)| {
                let numeric = r > 0
                    && span_value.is_some_and(|x| {
                        self.chart
                            .table
                            .cell(c, r - 1)
                            .and_then(|cell| cell.value)
                            .is_some_and(|v| values_match(x, v))
                    });
                numeric || keys_equal(self.cell_tokens(c, r), span)
            })
            .map(|(column, row)| TemplateVar::Cell { column, row })
            .collect()
    }

    pub fn match_trend(&self, span: &[String]) -> Vec<TemplateVar> {
        let [tok] = span else {
            return Vec::new();
        };
        let mut out = Vec::new();
        if let Some(lexeme) = lexicon::trend_up_index(tok) {
            out.push(TemplateVar::Trend {
                direction: Direction::Up,
                lexeme,
            });
        }
        if let Some(lexeme) = lexicon::trend_down_index(tok) {
            out.push(TemplateVar::Trend {
                direction: Direction::Down,
                lexeme,
            });
        }
        out
    }

    pub fn match_scale(&self, span: &[String]) -> Vec<TemplateVar> {
        match span {
            [tok] => lexicon::scale_index(tok)
                .map(TemplateVar::Scale)
                .into_iter()
                .collect(),
            _ => Vec::new(),
        }
    }

    /// All candidates of one category, best first.
    pub fn candidates(&self, category: Category, span: &[String]) -> Vec<TemplateVar> {
        if span.is_empty() {
            return Vec::new();
        }
        match category {
            Category::Subject => self.match_subject(span),
            Category::Date => self.match_date(span),
            Category::AxisLabel => self.match_axis_label(span),
            Category::Title => self.match_title(span),
            Category::Cell => self.match_cell(span),
            Category::Trend => self.match_trend(span),
            Category::Scale => self.match_scale(span),
        }
    }
}

fn keys_equal(a: &[String], b: &[String]) -> bool {
    a.len() == b.len()
        && a.iter()
            .zip(b)
            .all(|(x, y)| x == y || comparison_key(x) == comparison_key(y))
}

fn capitalize(word: &str) -> String {
    let mut chars = word.chars();
    match chars.next() {
        Some(c) => c.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// The highest-priority variable whose matcher accepts `span`.
pub fn match_category<S: AsRef<str>>(span: &[S], chart: &ChartSample) -> Option<TemplateVar> {
    let span: Vec<String> = span.iter().map(|s| s.as_ref().to_string()).collect();
    let index = ChartIndex::new(chart);
    Category::ALL
        .iter()
        .find_map(|&cat| index.candidates(cat, &span).into_iter().next())
}
