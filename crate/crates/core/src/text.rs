//! Small line reader shared by the text formats.

use std::str::FromStr;

use crate::error::ParseError;

/// Iterates over non-blank lines, skipping `#` comments, tracking 1-based line numbers.
pub(crate) struct LineReader<'a> {
    format: &'static str,
    lines: std::iter::Peekable<std::iter::Enumerate<std::str::Lines<'a>>>,
    last_line: usize,
}

impl<'a> LineReader<'a> {
    pub fn new(format: &'static str, text: &'a str) -> Self {
        Self { format, lines: text.lines().enumerate().peekable(), last_line: 0 }
    }

    pub fn error(&self, line: usize, message: impl Into<String>) -> ParseError {
        ParseError::new(self.format, line, message)
    }

    pub fn next_line(&mut self) -> Option<(usize, &'a str)> {
        for (i, raw) in self.lines.by_ref() {
            let line = raw.split('#').next().unwrap_or("").trim();
            self.last_line = i + 1;
            if !line.is_empty() {
                return Some((i + 1, line));
            }
        }
        None
    }

    pub fn require_line(&mut self, what: &str) -> Result<(usize, &'a str), ParseError> {
        let last = self.last_line;
        self.next_line()
            .ok_or_else(|| self.error(last + 1, format!("unexpected end of input, expected {what}")))
    }

    pub fn expect_header(&mut self, header: &str) -> Result<(), ParseError> {
        let (n, line) = self.require_line(header)?;
        let got: Vec<&str> = line.split_whitespace().collect();
        let want: Vec<&str> = header.split_whitespace().collect();
        if got != want {
            return Err(self.error(n, format!("expected header `{header}`, found `{line}`")));
        }
        Ok(())
    }

    /// Reads a `keyword N` line.
    pub fn expect_count(&mut self, keyword: &str) -> Result<usize, ParseError> {
        let (n, line) = self.require_line(keyword)?;
        let mut it = line.split_whitespace();
        if it.next() != Some(keyword) {
            return Err(self.error(n, format!("expected `{keyword} <count>`, found `{line}`")));
        }
        let count = it
            .next()
            .ok_or_else(|| self.error(n, format!("missing count after `{keyword}`")))?;
        let count = parse_token(self, n, count)?;
        if it.next().is_some() {
            return Err(self.error(n, "trailing tokens"));
        }
        Ok(count)
    }

    pub fn finish(&mut self) -> Result<(), ParseError> {
        match self.next_line() {
            Some((n, line)) => Err(self.error(n, format!("unexpected trailing content `{line}`"))),
            None => Ok(()),
        }
    }
}

pub(crate) fn parse_token<T: FromStr>(
    r: &LineReader<'_>,
    line: usize,
    token: &str,
) -> Result<T, ParseError> {
    token.parse().map_err(|_| r.error(line, format!("cannot parse `{token}`")))
}

/// Parses exactly `N` whitespace-separated values from a line.
pub(crate) fn parse_fixed<T: FromStr + Copy + Default, const N: usize>(
    r: &LineReader<'_>,
    line: usize,
    text: &str,
) -> Result<[T; N], ParseError> {
    let tokens: Vec<&str> = text.split_whitespace().collect();
    if tokens.len() != N {
        return Err(r.error(line, format!("expected {N} values, found {}", tokens.len())));
    }
    let mut out = [T::default(); N];
    for (slot, tok) in out.iter_mut().zip(tokens) {
        *slot = parse_token(r, line, tok)?;
    }
    Ok(out)
}
