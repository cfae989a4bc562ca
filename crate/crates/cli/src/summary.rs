use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use granrtc::curves::io::{format_csv, format_curve, format_gnuplot};
use granrtc::XiCurvePair;
use sha2::{Digest, Sha256};

/// Key=value text grouped in `[section]` blocks.
#[derive(Default)]
pub struct Summary {
    text: String,
}

impl Summary {
    pub fn section(&mut self, name: &str) {
        if !self.text.is_empty() {
            self.text.push('\n');
        }
        let _ = writeln!(self.text, "[{name}]");
    }

    pub fn put(&mut self, key: &str, value: impl std::fmt::Display) {
        let _ = writeln!(self.text, "{key}={value}");
    }

    pub fn text(&self) -> &str {
        &self.text
    }
}

pub fn sha256_hex(data: &str) -> String {
    Sha256::digest(data.as_bytes())
        .iter()
        .fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Writes `<stem>.xi`, `<stem>.csv`, `<stem>.lower.dat` and `<stem>.upper.dat`.
pub fn write_curve(dir: &Path, stem: &str, c: &XiCurvePair) -> std::io::Result<()> {
    fs::write(dir.join(format!("{stem}.xi")), format_curve(c))?;
    fs::write(dir.join(format!("{stem}.csv")), format_csv(c))?;
    fs::write(
        dir.join(format!("{stem}.lower.dat")),
        format_gnuplot(c, false),
    )?;
    fs::write(
        dir.join(format!("{stem}.upper.dat")),
        format_gnuplot(c, true),
    )
}

pub fn points(c: &XiCurvePair) -> (String, String) {
    let lo = c
        .lower_points()
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>();
    let up = c
        .upper_points()
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>();
    (lo.join(" "), up.join(" "))
}
