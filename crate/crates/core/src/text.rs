//! Tokenization, sentence splitting and number normalization shared by every
//! stage of the pipeline.
//!
//! The tokenizer splits on whitespace and then peels leading and trailing ASCII
//! punctuation off each chunk as single-character tokens. A leading minus sign
//! directly followed by a digit stays attached so negative numbers survive as
//! one token. [`detokenize`] is its inverse on tokenizer output:
//! `tokenize(&detokenize(&tokenize(s))) == tokenize(s)` for every `s`.

/// Relative tolerance used when two numeric strings are compared by value.
pub const NUMERIC_REL_TOL: f64 = 1e-9;

const CLOSING: &[&str] = &[".", ",", ";", ":", "!", "?", "%", ")", "]", "}"];
const OPENING: &[&str] = &["(", "[", "{", "$"];

fn is_minus(c: char) -> bool {
    c == '-' || c == '\u{2212}'
}

pub fn tokenize(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    for chunk in text.split_whitespace() {
        let chars: Vec<char> = chunk.chars().collect();
        let mut start = 0;
        let mut end = chars.len();
        let mut leading = Vec::new();
        while start < end && chars[start].is_ascii_punctuation() {
            let next_is_digit = chars.get(start + 1).is_some_and(|c| c.is_ascii_digit());
            if is_minus(chars[start]) && next_is_digit && start + 1 < end {
                break;
            }
            leading.push(chars[start].to_string());
            start += 1;
        }
        let mut trailing = Vec::new();
        while end > start && chars[end - 1].is_ascii_punctuation() {
            trailing.push(chars[end - 1].to_string());
            end -= 1;
        }
        out.extend(leading);
        if start < end {
            out.push(chars[start..end].iter().collect());
        }
        out.extend(trailing.into_iter().rev());
    }
    out
}

/// Joins tokens with single spaces, attaching closing punctuation to the
/// previous token and opening punctuation to the next one.
pub fn detokenize<S: AsRef<str>>(tokens: &[S]) -> String {
    let mut out = String::new();
    let mut prev_opening = false;
    for (i, tok) in tokens.iter().enumerate() {
        let tok = tok.as_ref();
        if i > 0 && !prev_opening && !CLOSING.contains(&tok) {
            out.push(' ');
        }
        out.push_str(tok);
        prev_opening = OPENING.contains(&tok);
    }
    out
}

/// True at the first position of a token stream and right after a
/// sentence-final punctuation token.
pub fn is_sentence_start<S: AsRef<str>>(prev: Option<S>) -> bool {
    match prev {
        None => true,
        Some(p) => matches!(p.as_ref(), "." | "!" | "?"),
    }
}

/// Splits on ". ", "! " or "? " when followed by an uppercase letter or the end
/// of the text. Empty segments are dropped.
pub fn split_sentences(text: &str) -> Vec<&str> {
    let bytes: Vec<(usize, char)> = text.char_indices().collect();
    let mut sentences = Vec::new();
    let mut seg_start = 0;
    let mut i = 0;
    while i < bytes.len() {
        let (pos, c) = bytes[i];
        if matches!(c, '.' | '!' | '?') && bytes.get(i + 1).is_some_and(|&(_, n)| n == ' ') {
            let mut j = i + 1;
            while j < bytes.len() && bytes[j].1 == ' ' {
                j += 1;
            }
            let boundary = match bytes.get(j) {
                None => true,
                Some(&(_, n)) => n.is_uppercase(),
            };
            if boundary {
                let seg = text[seg_start..pos + c.len_utf8()].trim();
                if !seg.is_empty() {
                    sentences.push(seg);
                }
                seg_start = bytes.get(j).map_or(text.len(), |&(p, _)| p);
                i = j;
                continue;
            }
        }
        i += 1;
    }
    let tail = text[seg_start..].trim();
    if !tail.is_empty() {
        sentences.push(tail);
    }
    sentences
}

/// Canonical form of a numeric string: grouping commas removed, trailing
/// fractional zeros trimmed, redundant leading zeros dropped, ASCII minus.
/// Returns `None` when `s` is not a plain decimal number.
pub fn normalize_number(s: &str) -> Option<String> {
    let s = s.trim();
    let (negative, body) = match s.chars().next() {
        Some(c) if is_minus(c) => (true, &s[c.len_utf8()..]),
        Some('+') => (false, &s[1..]),
        _ => (false, s),
    };
    let (int_part, frac_part) = match body.split_once('.') {
        Some((i, f)) => (i, Some(f)),
        None => (body, None),
    };
    if int_part.is_empty() {
        return None;
    }
    let digits = if int_part.contains(',') {
        let mut groups = int_part.split(',');
        let first = groups.next()?;
        if first.is_empty() || first.len() > 3 || !first.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        let mut digits = first.to_string();
        for g in groups {
            if g.len() != 3 || !g.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            digits.push_str(g);
        }
        digits
    } else {
        if !int_part.bytes().all(|b| b.is_ascii_digit()) {
            return None;
        }
        int_part.to_string()
    };
    let mut int_digits = digits.trim_start_matches('0').to_string();
    if int_digits.is_empty() {
        int_digits.push('0');
    }
    let frac = match frac_part {
        Some(f) => {
            if f.is_empty() || !f.bytes().all(|b| b.is_ascii_digit()) {
                return None;
            }
            f.trim_end_matches('0').to_string()
        }
        None => String::new(),
    };
    let is_zero = int_digits == "0" && frac.is_empty();
    let mut out = String::new();
    if negative && !is_zero {
        out.push('-');
    }
    out.push_str(&int_digits);
    if !frac.is_empty() {
        out.push('.');
        out.push_str(&frac);
    }
    Some(out)
}

pub fn parse_number(s: &str) -> Option<f64> {
    normalize_number(s).and_then(|n| n.parse().ok())
}

/// Numeric equality under normalization: identical canonical strings, or
/// parsed values equal within [`NUMERIC_REL_TOL`].
pub fn numbers_match(a: &str, b: &str) -> bool {
    match (normalize_number(a), normalize_number(b)) {
        (Some(x), Some(y)) => {
            if x == y {
                return true;
            }
            match (x.parse::<f64>(), y.parse::<f64>()) {
                (Ok(u), Ok(v)) => values_match(u, v),
                _ => false,
            }
        }
        _ => false,
    }
}

pub fn values_match(u: f64, v: f64) -> bool {
    (u - v).abs() <= NUMERIC_REL_TOL * u.abs().max(v.abs())
}

/// The form a number takes in running prose: an integer part of four or more
/// digits gets grouping commas ("1200.5" becomes "1,200.5"). Anything that is
/// not a plain number, or already has commas, is returned unchanged.
pub fn prose_number(raw: &str) -> String {
    if raw.contains(',') || normalize_number(raw).is_none() {
        return raw.to_string();
    }
    let (sign, body) = match raw.chars().next() {
        Some(c) if is_minus(c) || c == '+' => raw.split_at(c.len_utf8()),
        _ => ("", raw),
    };
    let (int_part, rest) = match body.find('.') {
        Some(p) => body.split_at(p),
        None => (body, ""),
    };
    if int_part.len() < 4 {
        return raw.to_string();
    }
    let mut grouped = String::new();
    for (i, c) in int_part.chars().enumerate() {
        if i > 0 && (int_part.len() - i) % 3 == 0 {
            grouped.push(',');
        }
        grouped.push(c);
    }
    format!("{sign}{grouped}{rest}")
}

/// Lowercase form used for case-insensitive comparisons; numbers compare by
/// their canonical form.
pub fn comparison_key(token: &str) -> String {
    normalize_number(token).unwrap_or_else(|| token.to_lowercase())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn tokenizer_splits_edge_punctuation() {
        assert_eq!(
            tokenize("Sales peaked at 1,200 million in 2017."),
            vec!["Sales", "peaked", "at", "1,200", "million", "in", "2017", "."]
        );
        assert_eq!(tokenize("(about 20%)"), vec!["(", "about", "20", "%", ")"]);
        assert_eq!(tokenize("fell to -5.5, then"), vec!["fell", "to", "-5.5", ",", "then"]);
        assert_eq!(tokenize("Liverpool's"), vec!["Liverpool's"]);
        assert_eq!(tokenize("  "), Vec::<String>::new());
    }

    #[test]
    fn detokenize_attaches_punctuation() {
        let toks = tokenize("In 2017, revenue grew by 20% (to $5 million).");
        assert_eq!(detokenize(&toks), "In 2017, revenue grew by 20% (to $5 million).");
    }

    #[test]
    fn sentence_counts() {
        assert_eq!(split_sentences("A B C . D E .").len(), 2);
        assert_eq!(split_sentences("Revenue was 2.5 million. It grew.").len(), 2);
        assert_eq!(split_sentences("values rose. then fell").len(), 1);
        assert_eq!(split_sentences("Wow! Really? Yes.").len(), 3);
        assert!(split_sentences("").is_empty());
    }

    #[test]
    fn number_normalization() {
        assert_eq!(normalize_number("1,200").as_deref(), Some("1200"));
        assert_eq!(normalize_number("1200.50").as_deref(), Some("1200.5"));
        assert_eq!(normalize_number("3.000").as_deref(), Some("3"));
        assert_eq!(normalize_number("\u{2212}4.5").as_deref(), Some("-4.5"));
        assert_eq!(normalize_number("-0.0").as_deref(), Some("0"));
        assert_eq!(normalize_number("007").as_deref(), Some("7"));
        assert_eq!(normalize_number("12,00"), None);
        assert_eq!(normalize_number("abc"), None);
        assert_eq!(normalize_number("1."), None);
        assert!(numbers_match("1,200", "1200"));
        assert!(numbers_match("1200.0", "1200"));
        assert!(!numbers_match("1200", "1201"));
    }

    #[test]
    fn prose_numbers() {
        assert_eq!(prose_number("1200"), "1,200");
        assert_eq!(prose_number("1234567.25"), "1,234,567.25");
        assert_eq!(prose_number("-45210"), "-45,210");
        assert_eq!(prose_number("999.9"), "999.9");
        assert_eq!(prose_number("1,200"), "1,200");
        assert_eq!(prose_number("Germany"), "Germany");
    }

    proptest! {
        #[test]
        fn detokenize_inverts_tokenize(s in "[a-zA-Z0-9 .,%$()\\-!?']{0,60}") {
            let toks = tokenize(&s);
            prop_assert_eq!(tokenize(&detokenize(&toks)), toks);
        }

        #[test]
        fn prose_form_normalizes_back(v in -1e9f64..1e9f64) {
            let raw = format!("{:.2}", v);
            let canon = normalize_number(&raw).unwrap();
            prop_assert_eq!(normalize_number(&prose_number(&raw)).unwrap(), canon);
        }
    }
}
