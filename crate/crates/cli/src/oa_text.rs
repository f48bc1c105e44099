//! Plain-text orthogonal arrays.
//!
//! The first non-comment line is the header `r N d k` (runs, factors, levels,
//! strength); then come `r` rows of `N` whitespace-separated symbols. Rows of a
//! single token such as `0120` are split into digits when `d <= 10`, which is
//! how many published tables are typeset. Lines starting with `#` are ignored.

use std::path::{Path, PathBuf};

use ame_core::designs::{check_oa, OrthogonalArray};

#[derive(Debug, thiserror::Error)]
pub enum OaFileError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("malformed header {line:?}: expected four positive integers \"r N d k\"")]
    MalformedHeader { line: String },
    #[error("row {row}: entry {token:?} is not a symbol")]
    BadEntry { row: usize, token: String },
    #[error("row {row}: {found} entries, header declares N = {expected}")]
    RowLength { row: usize, expected: usize, found: usize },
    #[error("{found} rows, header declares r = {expected}")]
    RowCount { expected: usize, found: usize },
    #[error("row {row}: symbol {symbol} outside 0..{d}")]
    SymbolRange { row: usize, symbol: usize, d: usize },
    #[error("rows do not form an orthogonal array of strength {k}")]
    Strength { k: usize },
}

impl OaFileError {
    /// Stable identifier for scripts.
    pub fn code(&self) -> &'static str {
        match self {
            OaFileError::Io { .. } => "oa-io",
            OaFileError::MalformedHeader { .. } => "oa-header",
            OaFileError::BadEntry { .. } => "oa-entry",
            OaFileError::RowLength { .. } => "oa-row-length",
            OaFileError::RowCount { .. } => "oa-row-count",
            OaFileError::SymbolRange { .. } => "oa-symbol-range",
            OaFileError::Strength { .. } => "oa-strength",
        }
    }
}

pub fn parse_oa_file(path: &Path) -> Result<OrthogonalArray, OaFileError> {
    let text = std::fs::read_to_string(path).map_err(|source| OaFileError::Io { path: path.into(), source })?;
    parse_oa_text(&text)
}

pub fn parse_oa_text(text: &str) -> Result<OrthogonalArray, OaFileError> {
    let mut lines = text.lines().map(str::trim).filter(|l| !l.is_empty() && !l.starts_with('#'));
    let header = lines.next().unwrap_or("");
    let fields: Vec<usize> = header.split_whitespace().map_while(|t| t.parse().ok()).collect();
    let [r, n, d, k] = fields[..] else {
        return Err(OaFileError::MalformedHeader { line: header.into() });
    };
    if header.split_whitespace().count() != 4 || [r, n, d].contains(&0) {
        return Err(OaFileError::MalformedHeader { line: header.into() });
    }
    let mut rows = Vec::with_capacity(r);
    for (i, line) in lines.enumerate() {
        let row = i + 1;
        let tokens: Vec<&str> = line.split_whitespace().collect();
        let split_digits = tokens.len() == 1 && n > 1 && d <= 10 && line.len() == n;
        let entries: Vec<String> = if split_digits {
            line.chars().map(String::from).collect()
        } else {
            tokens.into_iter().map(String::from).collect()
        };
        let mut symbols = Vec::with_capacity(n);
        for token in entries {
            let symbol = token.parse::<usize>().map_err(|_| OaFileError::BadEntry { row, token: token.clone() })?;
            if symbol >= d {
                return Err(OaFileError::SymbolRange { row, symbol, d });
            }
            symbols.push(symbol);
        }
        if symbols.len() != n {
            return Err(OaFileError::RowLength { row, expected: n, found: symbols.len() });
        }
        rows.push(symbols);
    }
    if rows.len() != r {
        return Err(OaFileError::RowCount { expected: r, found: rows.len() });
    }
    let strength_ok = check_oa(&rows, d, k).map(|c| c.is_oa).unwrap_or(false);
    if !strength_ok {
        return Err(OaFileError::Strength { k });
    }
    OrthogonalArray::new(rows, d, k).map_err(|_| OaFileError::Strength { k })
}

/// Render in the same format, one space between symbols.
pub fn render_oa_text(oa: &OrthogonalArray) -> String {
    let mut out = format!("{} {} {} {}\n", oa.runs(), oa.factors(), oa.levels(), oa.strength());
    for row in oa.rows() {
        let cells: Vec<String> = row.iter().map(usize::to_string).collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}
