/*! Mode-based timed automata (M-TA) and their translation into automata networks.

A component is a set of modes. Each mode owns a pair of service curves,
a backlog range `[b_low, b_high]`, dwell bounds `[L, U]` measured by a
per-mode clock, and up to four kinds of exits: an external sync signal,
a timeout at `x = U`, the backlog rising above `b_high`, and the backlog
falling below `b_low`. Backlog and timeout exits are only enabled once
`x ≥ L`; a sync is taken as soon as it is offered.

[translate_fine] produces the processing element (PE) and service model
(SM) that realize the component on individual events. [translate_coarse]
produces their abstraction on coarse events that each stand for `g` fine
events.
*/

use std::collections::{HashMap, HashSet};

use crate::curves::{self, Bound, XiCurvePair};
use crate::engine::network::{
    CoarseService, Network, PeMode, ProcessingElement, ServiceModel, ThresholdExit,
};
use crate::error::{Error, Result};

pub mod parse;

pub use parse::{load_model, parse_mta};

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TransitionKind {
    Sync(String),
    Timeout,
    BufferAbove,
    BufferBelow,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MtaTransition {
    pub kind: TransitionKind,
    pub target: String,
}

impl MtaTransition {
    pub fn new(kind: TransitionKind, target: impl Into<String>) -> Self {
        MtaTransition {
            kind,
            target: target.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Mode {
    pub id: String,
    /// `None` for a mode that never serves.
    pub service: Option<XiCurvePair>,
    pub backlog_low: u32,
    /// `None` when the backlog has no upper limit in this mode.
    pub backlog_high: Option<u32>,
    pub dwell_min: u64,
    pub dwell_max: Bound,
    pub transitions: Vec<MtaTransition>,
}

impl Mode {
    pub fn new(id: impl Into<String>, service: Option<XiCurvePair>) -> Self {
        Mode {
            id: id.into(),
            service,
            backlog_low: 0,
            backlog_high: None,
            dwell_min: 1,
            dwell_max: Bound::Unbounded,
            transitions: Vec::new(),
        }
    }

    pub fn on(mut self, kind: TransitionKind, target: impl Into<String>) -> Self {
        self.transitions.push(MtaTransition::new(kind, target));
        self
    }

    pub fn backlog(mut self, low: u32, high: Option<u32>) -> Self {
        self.backlog_low = low;
        self.backlog_high = high;
        self
    }

    pub fn dwell(mut self, min: u64, max: Bound) -> Self {
        self.dwell_min = min;
        self.dwell_max = max;
        self
    }

    fn exit(&self, pred: impl Fn(&TransitionKind) -> bool) -> Option<&str> {
        self.transitions
            .iter()
            .find(|t| pred(&t.kind))
            .map(|t| t.target.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MtaSpec {
    pub modes: Vec<Mode>,
    pub initial_mode: String,
    pub initial_backlog: u32,
}

impl MtaSpec {
    pub fn new(modes: Vec<Mode>, initial_mode: impl Into<String>, initial_backlog: u32) -> Self {
        MtaSpec {
            modes,
            initial_mode: initial_mode.into(),
            initial_backlog,
        }
    }

    pub fn mode_index(&self, id: &str) -> Option<usize> {
        self.modes.iter().position(|m| m.id == id)
    }

    /// Every violated rule, in mode order. Empty when the model is valid.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        if self.modes.is_empty() {
            out.push("model has no modes".to_string());
        }
        let mut seen = HashSet::new();
        for m in &self.modes {
            if !seen.insert(m.id.as_str()) {
                out.push(format!("duplicate mode id `{}`", m.id));
            }
        }
        if self.mode_index(&self.initial_mode).is_none() {
            out.push(format!(
                "initial mode `{}` does not exist",
                self.initial_mode
            ));
        }
        for m in &self.modes {
            let id = &m.id;
            if let Some(s) = &m.service {
                for d in curves::validate(s) {
                    out.push(format!("mode `{id}`: service curve: {d}"));
                }
                if s.is_empty() {
                    out.push(format!("mode `{id}`: service curve has no points"));
                } else if s.lower(1) == 0 {
                    out.push(format!("mode `{id}`: service lower(1) must be at least 1"));
                }
            }
            if m.dwell_min < 1 {
                out.push(format!("mode `{id}`: dwell minimum must be at least 1"));
            }
            if Bound::Finite(m.dwell_min) > m.dwell_max {
                out.push(format!("mode `{id}`: dwell minimum exceeds dwell maximum"));
            }
            let count = |pred: &dyn Fn(&TransitionKind) -> bool| {
                m.transitions.iter().filter(|t| pred(&t.kind)).count()
            };
            let timeouts = count(&|k| matches!(k, TransitionKind::Timeout));
            let above = count(&|k| matches!(k, TransitionKind::BufferAbove));
            let below = count(&|k| matches!(k, TransitionKind::BufferBelow));
            if timeouts > 1 || above > 1 || below > 1 {
                out.push(format!(
                    "mode `{id}`: at most one timeout, one above and one below transition"
                ));
            }
            if (timeouts == 1) != m.dwell_max.is_finite() {
                out.push(format!(
                    "mode `{id}`: a timeout transition is required exactly when the dwell maximum is finite"
                ));
            }
            if above == 1 && m.backlog_high.is_none() {
                out.push(format!(
                    "mode `{id}`: `above` transition needs a finite bhigh"
                ));
            }
            if below == 1 && m.backlog_low < 1 {
                out.push(format!("mode `{id}`: `below` transition needs blow >= 1"));
            }
            if let Some(high) = m.backlog_high {
                if m.backlog_low > high {
                    out.push(format!("mode `{id}`: blow exceeds bhigh"));
                }
            }
            let mut signals = HashSet::new();
            for t in &m.transitions {
                if self.mode_index(&t.target).is_none() {
                    out.push(format!(
                        "mode `{id}`: transition target `{}` does not exist",
                        t.target
                    ));
                }
                if let TransitionKind::Sync(a) = &t.kind {
                    if !signals.insert(a.as_str()) {
                        out.push(format!("mode `{id}`: duplicate sync signal `{a}`"));
                    }
                }
            }
        }
        out
    }

    pub fn validate(&self) -> Result<()> {
        let d = self.diagnostics();
        if d.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(d.join("; ")))
        }
    }

    /// All sync signals the component listens to.
    pub fn signals(&self) -> Vec<String> {
        let mut v: Vec<String> = self
            .modes
            .iter()
            .flat_map(|m| m.transitions.iter())
            .filter_map(|t| match &t.kind {
                TransitionKind::Sync(a) => Some(a.clone()),
                _ => None,
            })
            .collect();
        v.sort();
        v.dedup();
        v
    }
}

/// Coarse backlog thresholds of one mode at granularity `g`.
///
/// The fine `above` threshold (`q = b_high + 1`) is reached while the coarse
/// backlog lies in `[y_low, y_high]`; the fine `below` threshold
/// (`q = b_low − 1`) while it lies in `[h_low, h_high]`. `h_low` and `h_high`
/// are negative only when `b_low = 0`, where no `below` exit can exist.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Thresholds {
    pub y_low: i64,
    pub y_high: i64,
    pub h_low: i64,
    pub h_high: i64,
}

/// `Y^L = ⌊(b_high+1)/g⌋`, `Y^U = ⌈(b_high+1)/g⌉`, `H^L = ⌊(b_low−1)/g⌋`, `H^U = ⌈(b_low−1)/g⌉`.
pub fn coarse_thresholds(b_low: u32, b_high: u32, g: u32) -> Result<Thresholds> {
    if g < 1 {
        return Err(Error::InvalidGranularity(g));
    }
    let g = g as i64;
    let up = b_high as i64 + 1;
    let down = b_low as i64 - 1;
    Ok(Thresholds {
        y_low: up.div_euclid(g),
        y_high: ceil_div(up, g),
        h_low: down.div_euclid(g),
        h_high: ceil_div(down, g),
    })
}

fn ceil_div(a: i64, b: i64) -> i64 {
    -((-a).div_euclid(b))
}

fn resolve_targets(spec: &MtaSpec) -> Vec<HashMap<&'static str, usize>> {
    spec.modes
        .iter()
        .map(|m| {
            let mut map = HashMap::new();
            if let Some(t) = m.exit(|k| matches!(k, TransitionKind::Timeout)) {
                map.insert("timeout", spec.mode_index(t).unwrap());
            }
            if let Some(t) = m.exit(|k| matches!(k, TransitionKind::BufferAbove)) {
                map.insert("above", spec.mode_index(t).unwrap());
            }
            if let Some(t) = m.exit(|k| matches!(k, TransitionKind::BufferBelow)) {
                map.insert("below", spec.mode_index(t).unwrap());
            }
            map
        })
        .collect()
}

fn pe_modes(spec: &MtaSpec, g: u32) -> Result<Vec<PeMode>> {
    let targets = resolve_targets(spec);
    spec.modes
        .iter()
        .zip(targets)
        .map(|(m, tg)| {
            let above = match (tg.get("above"), m.backlog_high) {
                (Some(&target), Some(high)) => {
                    let (may, must) = if g == 1 {
                        (high as i64 + 1, high as i64)
                    } else {
                        let th = coarse_thresholds(m.backlog_low, high, g)?;
                        (th.y_low, th.y_high)
                    };
                    Some(ThresholdExit { may, must, target })
                }
                _ => None,
            };
            let below = match tg.get("below") {
                Some(&target) => {
                    let (may, must) = if g == 1 {
                        (m.backlog_low as i64 - 1, m.backlog_low as i64)
                    } else {
                        let th = coarse_thresholds(m.backlog_low, m.backlog_high.unwrap_or(0), g)?;
                        (th.h_high, th.h_low)
                    };
                    Some(ThresholdExit { may, must, target })
                }
                None => None,
            };
            let syncs = m
                .transitions
                .iter()
                .filter_map(|t| match &t.kind {
                    TransitionKind::Sync(a) => {
                        Some((a.clone(), spec.mode_index(&t.target).unwrap()))
                    }
                    _ => None,
                })
                .collect();
            Ok(PeMode {
                name: m.id.clone(),
                dwell_min: m.dwell_min,
                dwell_max: m.dwell_max.finite(),
                timeout_target: tg.get("timeout").copied(),
                above,
                below,
                syncs,
            })
        })
        .collect()
}

/// Fine processing element and service model of a component.
///
/// Each mode `i` yields PE locations `S_i` (dwell until `x = L_i`) and
/// `S_i1` (backlog within range, `x ≤ U_i`); the SM runs one service
/// generator per mode, restarted at every mode entry.
pub fn translate_fine(spec: &MtaSpec) -> Result<Network> {
    spec.validate()?;
    let pe = ProcessingElement {
        modes: pe_modes(spec, 1)?,
        initial_mode: spec.mode_index(&spec.initial_mode).unwrap(),
        initial_backlog: spec.initial_backlog,
        deterministic: true,
    };
    let sm = ServiceModel::Fine {
        curves: spec.modes.iter().map(|m| m.service.clone()).collect(),
    };
    Ok(Network::new(1, pe, sm))
}

/// Abstraction of a component on coarse events of `g` fine events each.
///
/// The PE counts the coarse backlog `Q`. Backlog exits become
/// nondeterministic: the `above` exit may fire once `Q ≥ Y^L` and must fire
/// once `Q > Y^U` (mirrored with `H^U`/`H^L` for `below`). Dwell, timeout
/// and sync exits are unchanged.
///
/// Each SM mode starts in a transient state whose first coarse `serv` comes
/// `[ψ^L(1), ψ^U(g)]` after entry, then follows the sampled curve. When the
/// coarse backlog is empty the SM may restart its transient state, since
/// fine service spent on an empty buffer shifts the coarse alignment.
///
/// `g = 1` yields exactly [translate_fine].
pub fn translate_coarse(spec: &MtaSpec, g: u32) -> Result<Network> {
    if g < 1 {
        return Err(Error::InvalidGranularity(g));
    }
    if g == 1 {
        return translate_fine(spec);
    }
    spec.validate()?;
    if !spec.initial_backlog.is_multiple_of(g) {
        return Err(Error::InvalidModel(format!(
            "initial backlog {} is not a multiple of the granularity {g}",
            spec.initial_backlog
        )));
    }
    let pe = ProcessingElement {
        modes: pe_modes(spec, g)?,
        initial_mode: spec.mode_index(&spec.initial_mode).unwrap(),
        initial_backlog: spec.initial_backlog / g,
        deterministic: false,
    };
    let modes = spec
        .modes
        .iter()
        .map(|m| {
            m.service
                .as_ref()
                .map(|psi| -> Result<CoarseService> {
                    Ok(CoarseService {
                        trans_min: psi.lower(1),
                        trans_max: psi.upper(g as usize),
                        curve: curves::sample(psi, g)?,
                    })
                })
                .transpose()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Network::new(g, pe, ServiceModel::Coarse { g, modes }))
}

/// The example sleep/run component: it sleeps until its backlog exceeds
/// `threshold − 1` (i.e. reaches `threshold`), then runs on `run_service`
/// until the buffer is empty.
pub fn sleep_run(threshold: u32, run_service: XiCurvePair) -> MtaSpec {
    let sleep = Mode::new("sleep", None)
        .backlog(0, Some(threshold.saturating_sub(1)))
        .on(TransitionKind::BufferAbove, "run");
    let run = Mode::new("run", Some(run_service))
        .backlog(1, None)
        .on(TransitionKind::BufferBelow, "sleep");
    MtaSpec::new(vec![sleep, run], "sleep", 0)
}
