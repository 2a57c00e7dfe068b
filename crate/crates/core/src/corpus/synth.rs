//! Synthetic chart corpora for desk-scale training and testing.
//!
//! Summaries are assembled from a small bank of sentence patterns. Every
//! token is either fixed pattern wording or text copied verbatim from the
//! chart (title words, subjects, headers, x values, cell values in prose
//! form), so each data reference templatizes unambiguously. Cell texts within
//! a table are pairwise distinct.

use std::collections::HashSet;

use rand::distributions::{Distribution, WeightedIndex};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::schema::{Cell, ChartSample, ChartType, Corpus, DataTable};
use crate::text::{comparison_key, detokenize, normalize_number, prose_number, tokenize};

/// Chart-type frequencies of the reference corpus: simple-line, simple-bar,
/// complex-line, complex-bar.
pub const CHART_TYPE_WEIGHTS: [(ChartType, u32); 4] = [
    (ChartType::SimpleLine, 3564),
    (ChartType::SimpleBar, 3199),
    (ChartType::ComplexLine, 902),
    (ChartType::ComplexBar, 640),
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub n_samples: usize,
    /// Domain names to draw from; empty means all of [`DOMAIN_NAMES`].
    #[serde(default)]
    pub domains: Vec<String>,
    pub min_rows: usize,
    pub max_rows: usize,
    /// Upper bound on value columns of complex charts (at least 2).
    pub max_series: usize,
}

impl SynthSpec {
    pub fn new(n_samples: usize) -> Self {
        SynthSpec {
            n_samples,
            domains: Vec::new(),
            min_rows: 4,
            max_rows: 8,
            max_series: 3,
        }
    }
}

struct Measure {
    noun: &'static str,
    label: &'static str,
    scale: &'static str,
    lo: f64,
    hi: f64,
}

struct Domain {
    name: &'static str,
    subjects: &'static [&'static str],
    measures: &'static [Measure],
    category_label: &'static str,
    categories: &'static [&'static str],
    series: &'static [&'static str],
}

pub const DOMAIN_NAMES: [&str; 5] = ["sports", "economy", "technology", "media", "demographics"];

const DOMAINS: &[Domain] = &[
    Domain {
        name: "sports",
        subjects: &["Liverpool FC", "Manchester United", "Real Madrid", "Bayern Munich", "Juventus Turin"],
        measures: &[
            Measure { noun: "revenue", label: "Revenue in million euros", scale: "million", lo: 40.0, hi: 900.0 },
            Measure { noun: "attendance", label: "Attendance in thousands", scale: "thousand", lo: 20.0, hi: 80.0 },
            Measure { noun: "wages", label: "Wages in million euros", scale: "million", lo: 30.0, hi: 600.0 },
        ],
        category_label: "Competition",
        categories: &["Premier League", "Champions League", "FA Cup", "League Cup", "Europa League", "Club World Cup", "Super Cup", "Community Shield"],
        series: &["Matchday", "Broadcasting", "Commercial"],
    },
    Domain {
        name: "economy",
        subjects: &["European Union", "Latin America", "Asia Pacific", "Nordic Council", "Gulf States"],
        measures: &[
            Measure { noun: "output", label: "Output in billion U.S. dollars", scale: "billion", lo: 100.0, hi: 9000.0 },
            Measure { noun: "exports", label: "Exports in billion U.S. dollars", scale: "billion", lo: 50.0, hi: 3000.0 },
            Measure { noun: "unemployment", label: "Unemployment rate", scale: "percent", lo: 2.0, hi: 25.0 },
        ],
        category_label: "Country",
        categories: &["Germany", "France", "Italy", "Spain", "Japan", "Brazil", "Canada", "India", "Mexico", "United States", "United Kingdom", "South Korea"],
        series: &["Exports", "Imports", "Investment"],
    },
    Domain {
        name: "technology",
        subjects: &["Acme Corp", "Globex Systems", "Initech", "Umbrella Labs", "Stark Industries"],
        measures: &[
            Measure { noun: "revenue", label: "Revenue in million U.S. dollars", scale: "million", lo: 100.0, hi: 8000.0 },
            Measure { noun: "shipments", label: "Shipments in million units", scale: "million", lo: 1.0, hi: 300.0 },
            Measure { noun: "users", label: "Users in millions", scale: "millions", lo: 5.0, hi: 900.0 },
        ],
        category_label: "Segment",
        categories: &["Hardware", "Software", "Services", "Cloud", "Advertising", "Licensing", "Consulting", "Devices"],
        series: &["Hardware", "Software", "Services"],
    },
    Domain {
        name: "media",
        subjects: &["Netflix", "Spotify", "New York Times", "BBC", "Warner Music"],
        measures: &[
            Measure { noun: "subscribers", label: "Subscribers in millions", scale: "millions", lo: 2.0, hi: 250.0 },
            Measure { noun: "revenue", label: "Revenue in million U.S. dollars", scale: "million", lo: 50.0, hi: 9000.0 },
            Measure { noun: "share", label: "Share of respondents", scale: "%", lo: 1.0, hi: 90.0 },
        ],
        category_label: "Platform",
        categories: &["Mobile", "Desktop", "Tablet", "Smart TV", "Console", "Radio", "Podcast", "Print"],
        series: &["Print", "Online", "Television"],
    },
    Domain {
        name: "demographics",
        subjects: &["Canada", "Australia", "New Zealand", "Ireland", "Scotland"],
        measures: &[
            Measure { noun: "population", label: "Population in millions", scale: "million", lo: 0.5, hi: 40.0 },
            Measure { noun: "births", label: "Births in thousands", scale: "thousand", lo: 10.0, hi: 400.0 },
            Measure { noun: "urbanization", label: "Share of urban population", scale: "percent", lo: 30.0, hi: 95.0 },
        ],
        category_label: "Region",
        categories: &["North", "South", "East", "West", "Central", "Highlands", "Coast", "Islands"],
        series: &["Urban", "Rural", "Suburban"],
    },
];

const MONTH_ABBR: [&str; 12] = [
    "Jan", "Feb", "Mar", "Apr", "May", "Jun", "Jul", "Aug", "Sep", "Oct", "Nov", "Dec",
];

const UP_WORDS: [&str; 3] = ["increased", "grew", "rose"];
const DOWN_WORDS: [&str; 3] = ["decreased", "declined", "fell"];

#[derive(Clone, Copy, PartialEq)]
enum XKind {
    Years,
    Months,
    Categories,
}

/// Deterministic synthetic corpus; all randomness derives from `seed`.
pub fn generate_synthetic_corpus(spec: &SynthSpec, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let domains: Vec<&Domain> = if spec.domains.is_empty() {
        DOMAINS.iter().collect()
    } else {
        DOMAINS
            .iter()
            .filter(|d| spec.domains.iter().any(|n| n == d.name))
            .collect()
    };
    let domains = if domains.is_empty() {
        DOMAINS.iter().collect()
    } else {
        domains
    };
    let types = WeightedIndex::new(CHART_TYPE_WEIGHTS.iter().map(|(_, w)| *w)).expect("weights");
    let samples = (0..spec.n_samples)
        .map(|i| {
            let chart_type = CHART_TYPE_WEIGHTS[types.sample(&mut rng)].0;
            let domain = *domains.choose(&mut rng).expect("non-empty");
            generate_sample(format!("synth-{seed}-{i:05}"), chart_type, domain, spec, &mut rng)
        })
        .collect();
    Corpus {
        samples,
        split_tag: None,
    }
}

fn format_value(v: f64) -> String {
    normalize_number(&format!("{v:.1}")).expect("formatted number")
}

fn generate_sample(
    id: String,
    chart_type: ChartType,
    domain: &Domain,
    spec: &SynthSpec,
    rng: &mut ChaCha8Rng,
) -> ChartSample {
    let x_kind = match (chart_type.is_line(), rng.gen_range(0..10)) {
        (true, 0..=6) => XKind::Years,
        (true, _) => XKind::Months,
        (false, 0..=5) => XKind::Categories,
        (false, _) => XKind::Years,
    };
    let min_rows = spec.min_rows.max(2);
    let max_rows = spec.max_rows.max(min_rows);
    let mut n_rows = rng.gen_range(min_rows..=max_rows);
    let (x_label, x_values, year): (String, Vec<String>, u32) = match x_kind {
        XKind::Years => {
            let start = rng.gen_range(1995..=2012u32);
            ("Year".into(), (0..n_rows).map(|k| (start + k as u32).to_string()).collect(), start)
        }
        XKind::Months => {
            n_rows = n_rows.min(12);
            let start = rng.gen_range(0..=12 - n_rows);
            let year = rng.gen_range(2010..=2021u32);
            ("Month".into(), MONTH_ABBR[start..start + n_rows].iter().map(|s| s.to_string()).collect(), year)
        }
        XKind::Categories => {
            n_rows = n_rows.min(domain.categories.len());
            let picked = domain.categories.choose_multiple(rng, n_rows).map(|s| s.to_string());
            (domain.category_label.into(), picked.collect(), 0)
        }
    };

    let measure = domain.measures.choose(rng).expect("measures");
    let subject = *domain.subjects.choose(rng).expect("subjects");
    let n_series = if chart_type.is_complex() {
        rng.gen_range(2..=spec.max_series.clamp(2, domain.series.len()))
    } else {
        1
    };
    let series: Vec<String> = if n_series == 1 {
        vec![measure.label.to_string()]
    } else {
        domain.series[..n_series].iter().map(|s| s.to_string()).collect()
    };

    // Distinct texts across the whole table so every mention has one referent.
    let mut used: HashSet<String> = x_values.iter().map(|s| comparison_key(s)).collect();
    used.extend(series.iter().map(|s| comparison_key(s)));
    used.insert(comparison_key(&x_label));
    let mut columns: Vec<Vec<String>> = Vec::new();
    for _ in 0..n_series {
        let mut col = Vec::with_capacity(n_rows);
        let mut v = rng.gen_range(measure.lo..measure.hi);
        let drift = rng.gen_range(-0.12..0.12);
        for _ in 0..n_rows {
            v = v.clamp(measure.lo * 0.5, measure.hi * 1.5);
            let text = loop {
                let candidate = format_value(v);
                if used.insert(comparison_key(&candidate)) {
                    break candidate;
                }
                v = rng.gen_range(measure.lo..measure.hi);
            };
            col.push(text);
            v = if chart_type.is_line() {
                v * (1.0 + drift + rng.gen_range(-0.08..0.08))
            } else {
                rng.gen_range(measure.lo..measure.hi)
            };
        }
        columns.push(col);
    }

    let mut headers = vec![x_label.clone()];
    headers.extend(series.iter().cloned());
    let rows: Vec<Vec<Cell>> = (0..n_rows)
        .map(|r| {
            std::iter::once(Cell::parse(x_values[r].clone()))
                .chain(columns.iter().map(|c| Cell::parse(c[r].clone())))
                .collect()
        })
        .collect();
    let table = DataTable { headers, rows };

    let title = match x_kind {
        XKind::Years => format!(
            "Annual {} of {} from {} to {}",
            measure.noun,
            subject,
            x_values[0],
            x_values[n_rows - 1]
        ),
        XKind::Months => format!("Monthly {} of {} in {}", measure.noun, subject, year),
        XKind::Categories => format!(
            "Total {} of {} by {}",
            measure.noun,
            subject,
            domain.category_label.to_lowercase()
        ),
    };

    let summary = write_summary(&table, chart_type, x_kind, measure, subject, rng);

    ChartSample {
        id,
        image_ref: None,
        title,
        x_label,
        y_label: measure.label.to_string(),
        chart_type,
        table,
        summary,
    }
}

fn write_summary(
    table: &DataTable,
    chart_type: ChartType,
    x_kind: XKind,
    measure: &Measure,
    subject: &str,
    rng: &mut ChaCha8Rng,
) -> String {
    let n_rows = table.n_rows();
    let x = |r: usize| table.rows[r][0].raw.clone();
    let val = |c: usize, r: usize| prose_number(&table.rows[r][c].raw);
    let value = |c: usize, r: usize| table.rows[r][c].value.unwrap_or(0.0);
    let prep = if x_kind == XKind::Categories { "for" } else { "in" };
    let scale = measure.scale;
    let noun = measure.noun;

    let mut sentences: Vec<String> = Vec::new();
    let opener = *["This statistic shows", "The statistic presents"].choose(rng).unwrap();
    sentences.push(match x_kind {
        XKind::Categories => format!("{opener} the {noun} of {subject} by {} .", table.headers[0].to_lowercase()),
        _ => format!("{opener} the {noun} of {subject} from {} to {} .", x(0), x(n_rows - 1)),
    });

    // Extremes over all value columns.
    let cells: Vec<(usize, usize)> = (1..table.n_columns())
        .flat_map(|c| (0..n_rows).map(move |r| (c, r)))
        .collect();
    let by_value = |a: &&(usize, usize), b: &&(usize, usize)| {
        value(a.0, a.1).partial_cmp(&value(b.0, b.1)).unwrap()
    };
    let &(cmax, rmax) = cells.iter().max_by(by_value).unwrap();
    let &(cmin, rmin) = cells.iter().min_by(by_value).unwrap();

    if chart_type.is_complex() {
        let (smax, smin) = (&table.headers[cmax], &table.headers[cmin]);
        sentences.push(format!(
            "{smax} was the largest category with {} {scale} {prep} {} .",
            val(cmax, rmax),
            x(rmax)
        ));
        let verb = *["was the smallest at", "recorded the lowest figure with"].choose(rng).unwrap();
        sentences.push(format!("{smin} {verb} {} {scale} {prep} {} .", val(cmin, rmin), x(rmin)));
    } else if x_kind == XKind::Categories {
        let verb = *["had the highest", "ranked first in"].choose(rng).unwrap();
        sentences.push(format!("{} {verb} {noun} with {} {scale} .", x(rmax), val(cmax, rmax)));
        sentences.push(format!("{} had the lowest {noun} at {} {scale} .", x(rmin), val(cmin, rmin)));
    } else {
        let verb = *["peaked at", "reached a high of"].choose(rng).unwrap();
        sentences.push(format!("In {} , the {noun} {verb} {} {scale} .", x(rmax), val(cmax, rmax)));
        sentences.push(format!("The lowest value was {} {scale} in {} .", val(cmin, rmin), x(rmin)));
    }

    if chart_type.is_line() {
        let (first, last) = (value(1, 0), value(1, n_rows - 1));
        let word = if last >= first {
            *UP_WORDS.choose(rng).unwrap()
        } else {
            *DOWN_WORDS.choose(rng).unwrap()
        };
        let lead = if chart_type.is_complex() {
            table.headers[1].clone()
        } else {
            format!("Overall , the {noun}")
        };
        sentences.push(format!(
            "{lead} {word} from {} {scale} in {} to {} {scale} in {} .",
            val(1, 0),
            x(0),
            val(1, n_rows - 1),
            x(n_rows - 1)
        ));
    }

    let tokens: Vec<String> = sentences.iter().flat_map(|s| tokenize(s)).collect();
    detokenize(&tokens)
}
