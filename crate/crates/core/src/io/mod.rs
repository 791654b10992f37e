//! Dataset ingestion, bundled datasets, number formatting and report
//! rendering.

mod commands;
mod table;

pub use commands::{
    curve_table, exit_code, fit_table, gof_table, run, simulation_table, Command, Outcome,
    OutputFormat, RunConfig,
};
pub use table::{Table, Value};

use std::path::Path;

use crate::error::{EgtlError, Result};
use crate::estimation::Dataset;

pub const BARLOW1975: &str = include_str!("../../data/barlow1975.txt");
pub const QUESENBERRY1982: &str = include_str!("../../data/quesenberry1982.txt");

/// Names accepted by [`load_dataset`] in place of a path.
pub const BUNDLED: [&str; 2] = ["barlow1975", "quesenberry1982"];

/// Raw text of a bundled dataset.
pub fn bundled_text(name: &str) -> Option<&'static str> {
    match name {
        "barlow1975" => Some(BARLOW1975),
        "quesenberry1982" => Some(QUESENBERRY1982),
        _ => None,
    }
}

fn is_header_token(tok: &str) -> bool {
    tok.chars()
        .next()
        .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && tok.parse::<f64>().is_err()
}

/// Parses comma- or whitespace-separated nonnegative decimals.
///
/// `#` starts a comment. The first content line may be a header of names
/// (as written by the CSV output); it is skipped.
pub fn parse_values(text: &str) -> Result<Vec<f64>> {
    let mut values = Vec::new();
    let mut seen_content = false;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("");
        let tokens: Vec<&str> = line
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|t| !t.is_empty())
            .collect();
        if tokens.is_empty() {
            continue;
        }
        if !seen_content && tokens.iter().all(|t| is_header_token(t)) {
            seen_content = true;
            continue;
        }
        seen_content = true;
        for tok in tokens {
            let v: f64 = tok.parse().map_err(|_| EgtlError::Parse {
                line: line_no,
                message: format!("`{tok}` is not a number"),
            })?;
            if !v.is_finite() {
                return Err(EgtlError::Parse {
                    line: line_no,
                    message: format!("`{tok}` is not finite"),
                });
            }
            if v < 0.0 {
                return Err(EgtlError::Parse {
                    line: line_no,
                    message: format!("negative lifetime {tok}"),
                });
            }
            values.push(v);
        }
    }
    if values.is_empty() {
        return Err(EgtlError::DataQuality {
            message: "no values found".into(),
            indices: Vec::new(),
        });
    }
    Ok(values)
}

/// Loads a bundled dataset by name, or a file by path.
pub fn load_dataset(source: &str) -> Result<Dataset> {
    if let Some(text) = bundled_text(source) {
        return Dataset::new(parse_values(text)?, source);
    }
    let path = Path::new(source);
    if !path.is_file() {
        return Err(EgtlError::NotFound(source.to_string()));
    }
    let text = std::fs::read_to_string(path)?;
    Dataset::new(parse_values(&text)?, source)
}

/// Rounds to 12 significant digits, ties to even on the exact binary value.
pub fn round_sig(x: f64) -> f64 {
    if !x.is_finite() || x == 0.0 {
        return x;
    }
    format!("{x:.11e}").parse().expect("formatted float parses")
}

/// Decimal text of `x` rounded to 12 significant digits.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    let r = round_sig(x);
    let a = r.abs();
    if r == 0.0 || (1e-6..1e15).contains(&a) {
        format!("{r}")
    } else {
        format!("{r:e}")
    }
}

/// CSV rendering of a dataset (header `x`, one value per line).
pub fn dataset_to_csv(data: &Dataset) -> String {
    let mut out = String::from("x\n");
    for &v in data.values() {
        out.push_str(&format_number(v));
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_sets_have_expected_extremes() {
        let b = load_dataset("barlow1975").unwrap();
        assert_eq!((b.len(), b.min(), b.max()), (107, 56.0, 7739.0));
        let q = load_dataset("quesenberry1982").unwrap();
        assert_eq!((q.len(), q.min(), q.max()), (100, 15.0, 829.0));
    }

    #[test]
    fn parses_mixed_separators_and_comments() {
        assert_eq!(parse_values("1,2,3\n").unwrap(), vec![1.0, 2.0, 3.0]);
        assert_eq!(
            parse_values("# c\n1 2,\t3 # tail\n\n4").unwrap(),
            vec![1.0, 2.0, 3.0, 4.0]
        );
        assert_eq!(parse_values("x\n1\n2\n").unwrap(), vec![1.0, 2.0]);
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        match parse_values("1 2\n3 abc\n") {
            Err(EgtlError::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        match parse_values("1\n\n-4\n") {
            Err(EgtlError::Parse { line, .. }) => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
        assert!(matches!(
            parse_values("# only\n"),
            Err(EgtlError::DataQuality { .. })
        ));
        assert!(matches!(
            load_dataset("no/such/file.txt"),
            Err(EgtlError::NotFound(_))
        ));
    }

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_number(123456789012345.0), "123456789012000");
        assert_eq!(format_number(7.32e-4), "0.000732");
        assert_eq!(format_number(1.5e-9), "1.5e-9");
        assert_eq!(format_number(56.0), "56");
        // exact binary ties at the twelfth digit go to even
        assert_eq!(format_number(100_000_000_000.5), "100000000000");
        assert_eq!(format_number(100_000_000_001.5), "100000000002");
    }
}
