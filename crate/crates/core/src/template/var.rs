//! Data variables and their textual grammar.
//!
//! ```text
//! templateSubject[i]      subject i of the chart title
//! templateDate[c][r]      date-valued cell at column c, row r
//! templateXLabel          x-axis label
//! templateYLabel          y-axis label
//! templateTitle[i]        title token i
//! templateLabel[c][0]     header of column c
//! templateValue[c][r]     data cell at column c, data row r (1-based)
//! templatePos[k]          upward-trend lexeme k
//! templateNeg[k]          downward-trend lexeme k
//! templateScale[k]        scale lexeme k
//! ```
//!
//! Table coordinates are `[column][row]` with row 0 the header row.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Category {
    Subject,
    Date,
    AxisLabel,
    Title,
    Cell,
    Trend,
    Scale,
}

impl Category {
    /// Priority order; a lower rank wins.
    pub const ALL: [Category; 7] = [
        Category::Subject,
        Category::Date,
        Category::AxisLabel,
        Category::Title,
        Category::Cell,
        Category::Trend,
        Category::Scale,
    ];

    pub fn rank(self) -> usize {
        self as usize
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Direction {
    Up,
    Down,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum TemplateVar {
    Subject(usize),
    Date { column: usize, row: usize },
    AxisLabel(Axis),
    Title(usize),
    Cell { column: usize, row: usize },
    Trend { direction: Direction, lexeme: usize },
    Scale(usize),
}

impl TemplateVar {
    pub fn category(&self) -> Category {
        match self {
            TemplateVar::Subject(_) => Category::Subject,
            TemplateVar::Date { .. } => Category::Date,
            TemplateVar::AxisLabel(_) => Category::AxisLabel,
            TemplateVar::Title(_) => Category::Title,
            TemplateVar::Cell { .. } => Category::Cell,
            TemplateVar::Trend { .. } => Category::Trend,
            TemplateVar::Scale(_) => Category::Scale,
        }
    }

    /// Table coordinates of the cell this variable points at, if any.
    pub fn table_coords(&self) -> Option<(usize, usize)> {
        match *self {
            TemplateVar::Date { column, row } | TemplateVar::Cell { column, row } => {
                Some((column, row))
            }
            _ => None,
        }
    }
}

impl fmt::Display for TemplateVar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            TemplateVar::Subject(i) => write!(f, "templateSubject[{i}]"),
            TemplateVar::Date { column, row } => write!(f, "templateDate[{column}][{row}]"),
            TemplateVar::AxisLabel(Axis::X) => f.write_str("templateXLabel"),
            TemplateVar::AxisLabel(Axis::Y) => f.write_str("templateYLabel"),
            TemplateVar::Title(i) => write!(f, "templateTitle[{i}]"),
            TemplateVar::Cell { column, row: 0 } => write!(f, "templateLabel[{column}][0]"),
            TemplateVar::Cell { column, row } => write!(f, "templateValue[{column}][{row}]"),
            TemplateVar::Trend {
                direction: Direction::Up,
                lexeme,
            } => write!(f, "templatePos[{lexeme}]"),
            TemplateVar::Trend {
                direction: Direction::Down,
                lexeme,
            } => write!(f, "templateNeg[{lexeme}]"),
            TemplateVar::Scale(k) => write!(f, "templateScale[{k}]"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseVarError(pub String);

impl fmt::Display for ParseVarError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "not a template variable: `{}`", self.0)
    }
}

impl std::error::Error for ParseVarError {}

fn indices(rest: &str) -> Option<Vec<usize>> {
    let mut out = Vec::new();
    let mut s = rest;
    while !s.is_empty() {
        let inner = s.strip_prefix('[')?;
        let close = inner.find(']')?;
        let digits = &inner[..close];
        if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        if digits.len() > 1 && digits.starts_with('0') {
            return None;
        }
        out.push(digits.parse().ok()?);
        s = &inner[close + 1..];
    }
    Some(out)
}

impl FromStr for TemplateVar {
    type Err = ParseVarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseVarError(s.to_string());
        let open = s.find('[').unwrap_or(s.len());
        let (name, rest) = s.split_at(open);
        let idx = indices(rest).ok_or_else(err)?;
        let var = match (name, idx.as_slice()) {
            ("templateSubject", [i]) => TemplateVar::Subject(*i),
            ("templateDate", [c, r]) => TemplateVar::Date {
                column: *c,
                row: *r,
            },
            ("templateXLabel", []) => TemplateVar::AxisLabel(Axis::X),
            ("templateYLabel", []) => TemplateVar::AxisLabel(Axis::Y),
            ("templateTitle", [i]) => TemplateVar::Title(*i),
            ("templateLabel", [c, 0]) => TemplateVar::Cell {
                column: *c,
                row: 0,
            },
            ("templateValue", [c, r]) if *r >= 1 => TemplateVar::Cell {
                column: *c,
                row: *r,
            },
            ("templatePos", [k]) => TemplateVar::Trend {
                direction: Direction::Up,
                lexeme: *k,
            },
            ("templateNeg", [k]) => TemplateVar::Trend {
                direction: Direction::Down,
                lexeme: *k,
            },
            ("templateScale", [k]) => TemplateVar::Scale(*k),
            _ => return Err(err()),
        };
        Ok(var)
    }
}

/// One token of a templated summary.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SummaryToken {
    Literal(String),
    Var(TemplateVar),
}

impl SummaryToken {
    /// Reads a whitespace-free token: grammar tokens become variables,
    /// everything else is a literal.
    pub fn parse(token: &str) -> Self {
        match token.parse() {
            Ok(v) => SummaryToken::Var(v),
            Err(_) => SummaryToken::Literal(token.to_string()),
        }
    }

    pub fn as_var(&self) -> Option<&TemplateVar> {
        match self {
            SummaryToken::Var(v) => Some(v),
            SummaryToken::Literal(_) => None,
        }
    }
}

impl fmt::Display for SummaryToken {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SummaryToken::Literal(s) => f.write_str(s),
            SummaryToken::Var(v) => v.fmt(f),
        }
    }
}

pub fn parse_templated(text: &str) -> Vec<SummaryToken> {
    text.split_whitespace().map(SummaryToken::parse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn renders_header_label_form() {
        let v = TemplateVar::Cell { column: 2, row: 0 };
        assert_eq!(v.to_string(), "templateLabel[2][0]");
        assert_eq!("templateLabel[2][0]".parse::<TemplateVar>().unwrap(), v);
    }

    #[test]
    fn rejects_malformed() {
        for s in [
            "templateValue[1][0]",
            "templateLabel[1][2]",
            "templateTitle",
            "templateTitle[01]",
            "templateTitle[1]x",
            "templateFoo[1]",
            "templateXLabel[0]",
            "Broadcasting",
        ] {
            assert!(s.parse::<TemplateVar>().is_err(), "{s}");
        }
    }

    fn any_var() -> impl Strategy<Value = TemplateVar> {
        let i = 0usize..200;
        prop_oneof![
            i.clone().prop_map(TemplateVar::Subject),
            (i.clone(), i.clone()).prop_map(|(column, row)| TemplateVar::Date { column, row }),
            any::<bool>().prop_map(|x| TemplateVar::AxisLabel(if x { Axis::X } else { Axis::Y })),
            i.clone().prop_map(TemplateVar::Title),
            (i.clone(), i.clone()).prop_map(|(column, row)| TemplateVar::Cell { column, row }),
            (any::<bool>(), i.clone()).prop_map(|(up, lexeme)| TemplateVar::Trend {
                direction: if up { Direction::Up } else { Direction::Down },
                lexeme
            }),
            i.prop_map(TemplateVar::Scale),
        ]
    }

    proptest! {
        #[test]
        fn grammar_roundtrip(v in any_var()) {
            prop_assert_eq!(v.to_string().parse::<TemplateVar>().unwrap(), v);
        }
    }
}
