//! Text formats for curve pairs.
//!
//! The native format is a header line `xi g=<int> N=<int>` followed by `N`
//! lines `<k> <lower> <upper>`, where the upper column may read `inf`.
//! Blank lines and lines starting with `#` are ignored.

use std::fmt::Write as _;
use std::path::Path;

use super::{validate, Bound, XiCurvePair};
use crate::error::{Error, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_u64(tok: &str, line: usize, what: &str) -> Result<u64> {
    tok.parse::<u64>()
        .map_err(|_| parse_err(line, format!("expected integer for {what}, found `{tok}`")))
}

pub fn parse_bound(tok: &str) -> Option<Bound> {
    if tok.eq_ignore_ascii_case("inf") {
        Some(Bound::Unbounded)
    } else {
        tok.parse().ok().map(Bound::Finite)
    }
}

pub(crate) fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    })
}

/// Reads and parses a curve file.
pub fn load_curve(path: &Path) -> Result<XiCurvePair> {
    parse_curve(&read_file(path)?)
}

/// Parses the native curve format. The result is validated.
pub fn parse_curve(text: &str) -> Result<XiCurvePair> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));

    let (hline, header) = lines.next().ok_or_else(|| parse_err(1, "missing header"))?;
    let mut toks = header.split_whitespace();
    if toks.next() != Some("xi") {
        return Err(parse_err(hline, "header must start with `xi`"));
    }
    let mut g = None;
    let mut n = None;
    for tok in toks {
        match tok.split_once('=') {
            Some(("g", v)) => g = Some(parse_u64(v, hline, "g")?),
            Some(("N", v)) => n = Some(parse_u64(v, hline, "N")?),
            _ => return Err(parse_err(hline, format!("unexpected header field `{tok}`"))),
        }
    }
    let g = g.ok_or_else(|| parse_err(hline, "header lacks g=<int>"))?;
    let n = n.ok_or_else(|| parse_err(hline, "header lacks N=<int>"))? as usize;
    if g == 0 || g > u32::MAX as u64 {
        return Err(parse_err(hline, "g must be a positive 32-bit integer"));
    }

    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for (line, l) in lines {
        let cols: Vec<&str> = l.split_whitespace().collect();
        if cols.len() != 3 {
            return Err(parse_err(line, "expected `<k> <lower> <upper>`"));
        }
        let k = parse_u64(cols[0], line, "k")? as usize;
        if k != lower.len() + 1 {
            return Err(parse_err(
                line,
                format!("expected k={}, found k={k}", lower.len() + 1),
            ));
        }
        lower.push(parse_u64(cols[1], line, "lower")?);
        upper.push(
            parse_bound(cols[2])
                .ok_or_else(|| parse_err(line, format!("bad upper value `{}`", cols[2])))?,
        );
    }
    if lower.len() != n {
        return Err(parse_err(
            text.lines().count(),
            format!("header announces N={n} but {} points follow", lower.len()),
        ));
    }
    let pair = XiCurvePair::from_parts(lower, upper, g as u32);
    let diags = validate(&pair);
    if let Some(d) = diags.first() {
        return Err(parse_err(hline + d.k, d.message.clone()));
    }
    Ok(pair)
}

/// Writes the native curve format.
pub fn format_curve(pair: &XiCurvePair) -> String {
    let mut out = format!("xi g={} N={}\n", pair.granularity(), pair.len());
    for k in 1..=pair.len() {
        let _ = writeln!(out, "{k} {} {}", pair.lower(k), pair.upper(k));
    }
    out
}

/// CSV with columns `k,lower,upper`.
pub fn format_csv(pair: &XiCurvePair) -> String {
    let mut out = String::from("k,lower,upper\n");
    for k in 1..=pair.len() {
        let _ = writeln!(out, "{k},{},{}", pair.lower(k), pair.upper(k));
    }
    out
}

/// Two-column gnuplot data for one bound, `x` in fine events (`k·g`).
/// Unbounded points are skipped.
pub fn format_gnuplot(pair: &XiCurvePair, upper: bool) -> String {
    let mut out = String::new();
    for k in 1..=pair.len() {
        let v = if upper {
            pair.upper(k).finite()
        } else {
            Some(pair.lower(k))
        };
        if let Some(v) = v {
            let _ = writeln!(out, "{} {v}", k as u64 * pair.granularity() as u64);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_and_writes_native_format() {
        let text = "# arrival\nxi g=1 N=3\n1 1 2\n2 3 inf\n3 4 inf\n";
        let c = parse_curve(text).unwrap();
        assert_eq!(c.lower_points(), &[1, 3, 4]);
        assert_eq!(c.upper(2), Bound::Unbounded);
        assert_eq!(parse_curve(&format_curve(&c)).unwrap(), c);
        assert_eq!(format_csv(&c).lines().nth(2), Some("2,3,inf"));
        assert_eq!(format_gnuplot(&c, true), "1 2\n");
    }

    #[test]
    fn reports_positions() {
        let err = parse_curve("xi g=1 N=2\n1 1 2\n2 x 3\n").unwrap_err();
        assert_eq!(
            err,
            Error::Parse {
                line: 3,
                msg: "expected integer for lower, found `x`".into()
            }
        );
        let err = parse_curve("xi g=1 N=2\n1 3 2\n2 3 3\n").unwrap_err();
        assert!(matches!(err, Error::Parse { line: 2, .. }), "{err}");
        assert!(parse_curve("xi g=1 N=3\n1 1 1\n").is_err());
    }
}
