use super::schema::DataTable;
use crate::template::lexicon::{date_kind, DateKind};
use crate::text::tokenize;

/// Minimum share of first-column cells that must look temporal.
pub const TEMPORAL_SHARE: f64 = 0.8;

/// Names the x axis "Year" or "Month" when the first column is temporal.
pub fn recover_axis_label(table: &DataTable) -> Option<String> {
    let kinds: Vec<Option<DateKind>> = table
        .column(0)
        .map(|c| date_kind(&tokenize(&c.raw)))
        .collect();
    if kinds.is_empty() {
        return None;
    }
    let share = |k: DateKind| {
        kinds.iter().filter(|&&x| x == Some(k)).count() as f64 / kinds.len() as f64
    };
    if share(DateKind::Year) >= TEMPORAL_SHARE {
        Some("Year".into())
    } else if share(DateKind::Month) >= TEMPORAL_SHARE {
        Some("Month".into())
    } else {
        None
    }
}
