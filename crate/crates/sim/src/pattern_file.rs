//! `pattern v1` text format.
//!
//! ```text
//! pattern v1 <grid_rate_hz> <duration_s> <D>
//! <kept ADC-clock index>
//! ...
//! ```
//!
//! Indices are ascending, one per line. Floats are written in shortest
//! round-trip form, so write then read reproduces the pattern exactly.

use std::fmt::Write as _;
use std::path::Path;

use csrx_core::{SamplingPattern, TimeGrid};

const MAGIC: &str = "pattern";
const VERSION: &str = "v1";

#[derive(Debug, thiserror::Error)]
pub enum PatternFileError {
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("{0}")]
    Invalid(#[from] csrx_core::Error),
    #[error("cannot access {path}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

pub fn to_string(pattern: &SamplingPattern) -> String {
    let g = pattern.grid();
    let mut out = format!(
        "{MAGIC} {VERSION} {:?} {:?} {}\n",
        g.rate(),
        g.duration(),
        pattern.decimation()
    );
    for k in pattern.kept() {
        writeln!(out, "{k}").expect("writing to a String");
    }
    out
}

pub fn parse(text: &str) -> Result<SamplingPattern, PatternFileError> {
    let syntax = |line: usize, reason: String| PatternFileError::Syntax { line, reason };
    let mut lines = text.lines().enumerate().map(|(i, l)| (i + 1, l.trim()));
    let (_, header) = lines.next().ok_or_else(|| syntax(1, "empty file".into()))?;
    let fields: Vec<&str> = header.split_whitespace().collect();
    let [magic, version, rate, duration, decimation] = fields[..] else {
        return Err(syntax(
            1,
            format!("expected `{MAGIC} {VERSION} <rate_hz> <duration_s> <D>`, got `{header}`"),
        ));
    };
    if magic != MAGIC {
        return Err(syntax(1, format!("not a pattern file (`{magic}`)")));
    }
    if version != VERSION {
        return Err(syntax(1, format!("unsupported version `{version}`")));
    }
    let num = |s: &str, what: &str| -> Result<f64, PatternFileError> {
        s.parse()
            .map_err(|_| syntax(1, format!("bad {what} `{s}`")))
    };
    let rate = num(rate, "grid rate")?;
    let duration = num(duration, "duration")?;
    let decimation: usize = decimation
        .parse()
        .map_err(|_| syntax(1, format!("bad decimation `{decimation}`")))?;

    let mut kept = Vec::new();
    for (line, body) in lines {
        if body.is_empty() {
            continue;
        }
        let k: usize = body
            .parse()
            .map_err(|_| syntax(line, format!("bad index `{body}`")))?;
        kept.push(k);
    }
    let grid = TimeGrid::new(rate, duration)?;
    Ok(SamplingPattern::new(grid, decimation, kept)?)
}

pub fn read(path: &Path) -> Result<SamplingPattern, PatternFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| PatternFileError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse(&text)
}

pub fn write(path: &Path, pattern: &SamplingPattern) -> Result<(), PatternFileError> {
    std::fs::write(path, to_string(pattern)).map_err(|source| PatternFileError::Io {
        path: path.display().to_string(),
        source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn uniform_round_trip() {
        let p = SamplingPattern::uniform(TimeGrid::default(), 5).unwrap();
        let text = to_string(&p);
        assert!(text.starts_with("pattern v1 400000.0 0.01 5\n0\n1\n"));
        assert_eq!(parse(&text).unwrap(), p);
    }

    #[test]
    fn rejects_malformed_files() {
        assert!(parse("").is_err());
        assert!(parse("pattern v2 400000 0.01 5\n1\n").is_err());
        assert!(parse("pattren v1 400000 0.01 5\n1\n").is_err());
        assert!(parse("pattern v1 400000 0.01\n1\n").is_err());
        assert!(matches!(
            parse("pattern v1 400000 0.01 5\n1\nx\n"),
            Err(PatternFileError::Syntax { line: 3, .. })
        ));
        // descending
        assert!(matches!(
            parse("pattern v1 400000 0.01 5\n3\n1\n"),
            Err(PatternFileError::Invalid(_))
        ));
        // beyond the 800 ADC slots
        assert!(parse("pattern v1 400000 0.01 5\n800\n").is_err());
        // no indices
        assert!(parse("pattern v1 400000 0.01 5\n").is_err());
    }
}
