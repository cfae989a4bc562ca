//! Text format for M-TA models.
//!
//! ```text
//! # comment
//! mode sleep
//!   service=none blow=0 bhigh=4 dwell=[1,inf]
//!   on above -> run
//! mode run
//!   service=run.xi
//!   blow=1
//!   bhigh=inf
//!   on below -> sleep
//! initial sleep q=0
//! ```
//!
//! `service=` names a curve file; the caller resolves it. Keys not given
//! default to `blow=0 bhigh=inf dwell=[1,inf]`.

use std::path::Path;

use super::{Mode, MtaSpec, MtaTransition, TransitionKind};
use crate::curves::{Bound, XiCurvePair};
use crate::error::{Error, Result};

fn err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn parse_u64(line: usize, key: &str, v: &str) -> Result<u64> {
    v.parse()
        .map_err(|_| err(line, format!("expected integer for {key}, found `{v}`")))
}

fn parse_bound(line: usize, key: &str, v: &str) -> Result<Bound> {
    crate::curves::io::parse_bound(v).ok_or_else(|| {
        err(
            line,
            format!("expected integer or inf for {key}, found `{v}`"),
        )
    })
}

fn parse_dwell(line: usize, v: &str) -> Result<(u64, Bound)> {
    let inner = v
        .strip_prefix('[')
        .and_then(|s| s.strip_suffix(']'))
        .ok_or_else(|| err(line, format!("expected dwell=[L,U], found `{v}`")))?;
    let (l, u) = inner
        .split_once(',')
        .ok_or_else(|| err(line, format!("expected dwell=[L,U], found `{v}`")))?;
    Ok((
        parse_u64(line, "dwell minimum", l.trim())?,
        parse_bound(line, "dwell maximum", u.trim())?,
    ))
}

/// Reads a model file. Service curve names are paths relative to the
/// model's directory.
pub fn load_model(path: &Path) -> Result<MtaSpec> {
    let text = crate::curves::io::read_file(path)?;
    let dir = path.parent().unwrap_or(Path::new("."));
    parse_mta(&text, &mut |name| {
        crate::curves::io::load_curve(&dir.join(name))
    })
}

/// Parses a model. `resolve` loads the service curve named by a
/// `service=<name>` key.
pub fn parse_mta(
    text: &str,
    resolve: &mut dyn FnMut(&str) -> Result<XiCurvePair>,
) -> Result<MtaSpec> {
    let mut modes: Vec<Mode> = Vec::new();
    let mut initial: Option<(String, u32)> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let toks: Vec<&str> = content.split_whitespace().collect();
        match toks[0] {
            "mode" => {
                if toks.len() != 2 {
                    return Err(err(line, "expected `mode <id>`"));
                }
                modes.push(Mode::new(toks[1], None));
            }
            "initial" => {
                if toks.len() != 3 {
                    return Err(err(line, "expected `initial <id> q=<int>`"));
                }
                let q = toks[2]
                    .strip_prefix("q=")
                    .ok_or_else(|| err(line, "expected `q=<int>`"))?;
                let q = q
                    .parse()
                    .map_err(|_| err(line, format!("expected integer for q, found `{q}`")))?;
                initial = Some((toks[1].to_string(), q));
            }
            "on" => {
                let mode = modes
                    .last_mut()
                    .ok_or_else(|| err(line, "transition outside of a mode section"))?;
                let (kind, rest) = match toks.get(1) {
                    Some(&"sync") => {
                        let a = toks
                            .get(2)
                            .ok_or_else(|| err(line, "missing sync signal"))?;
                        (TransitionKind::Sync(a.to_string()), &toks[3..])
                    }
                    Some(&"timeout") => (TransitionKind::Timeout, &toks[2..]),
                    Some(&"above") => (TransitionKind::BufferAbove, &toks[2..]),
                    Some(&"below") => (TransitionKind::BufferBelow, &toks[2..]),
                    Some(other) => {
                        return Err(err(line, format!("unknown transition kind `{other}`")))
                    }
                    None => return Err(err(line, "missing transition kind")),
                };
                if rest.len() != 2 || rest[0] != "->" {
                    return Err(err(line, "expected `-> <target>`"));
                }
                mode.transitions.push(MtaTransition::new(kind, rest[1]));
            }
            _ => {
                let mode = modes
                    .last_mut()
                    .ok_or_else(|| err(line, "attribute outside of a mode section"))?;
                for tok in toks {
                    let (key, v) = tok
                        .split_once('=')
                        .ok_or_else(|| err(line, format!("expected key=value, found `{tok}`")))?;
                    match key {
                        "service" => {
                            mode.service = if v == "none" {
                                None
                            } else {
                                Some(
                                    resolve(v)
                                        .map_err(|e| err(line, format!("service `{v}`: {e}")))?,
                                )
                            }
                        }
                        "blow" => {
                            mode.backlog_low = parse_u64(line, key, v)?
                                .try_into()
                                .map_err(|_| err(line, "blow too large"))?
                        }
                        "bhigh" => {
                            mode.backlog_high = match parse_bound(line, key, v)? {
                                Bound::Finite(b) => {
                                    Some(b.try_into().map_err(|_| err(line, "bhigh too large"))?)
                                }
                                Bound::Unbounded => None,
                            }
                        }
                        "dwell" => {
                            let (l, u) = parse_dwell(line, v)?;
                            mode.dwell_min = l;
                            mode.dwell_max = u;
                        }
                        _ => return Err(err(line, format!("unknown key `{key}`"))),
                    }
                }
            }
        }
    }
    let (id, q) =
        initial.ok_or_else(|| err(text.lines().count().max(1), "missing `initial` line"))?;
    let spec = MtaSpec::new(modes, id, q);
    spec.validate()?;
    Ok(spec)
}
