//! Brute-force ground truth on concrete integer-time event streams.
//!
//! Everything here works on explicit timestamp lists and shares no code with
//! [crate::engine]; it is only meant for tiny instances.

use std::collections::{HashMap, HashSet};

use crate::curves::{Bound, XiCurvePair};
use crate::error::{Error, Result};
use crate::mta::{MtaSpec, TransitionKind};

/// Timestamps `t_0 = 0, t_1, …`, nondecreasing.
pub type EventStream = Vec<u64>;

pub const DEFAULT_BUDGET: u64 = 2_000_000;

fn window_ok(x: &XiCurvePair, k: usize, d: u64) -> bool {
    d >= x.lower(k) && Bound::Finite(d) <= x.upper(k)
}

/// True iff every window of `k ≤ N` consecutive gaps inside `s` meets both bounds.
pub fn stream_satisfies(s: &[u64], x: &XiCurvePair) -> bool {
    if s.windows(2).any(|w| w[1] < w[0]) {
        return false;
    }
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            let k = j - i;
            if k > x.len() {
                break;
            }
            if !window_ok(x, k, s[j] - s[i]) {
                return false;
            }
        }
    }
    true
}

/// `s` satisfies `x`, has no event after `h`, and an event at `h` or later
/// could still come in time for every upper bound.
pub fn alive_at(s: &[u64], x: &XiCurvePair, h: u64) -> bool {
    if !stream_satisfies(s, x) || s.last().is_some_and(|&t| t > h) {
        return false;
    }
    (1..=x.len().min(s.len())).all(|k| Bound::Finite(h - s[s.len() - k]) <= x.upper(k))
}

fn new_event_ok(s: &[u64], x: &XiCurvePair, t: u64) -> bool {
    (1..=x.len().min(s.len())).all(|k| t >= s[s.len() - k] && window_ok(x, k, t - s[s.len() - k]))
}

/// Every stream of exactly `max_events` events (the origin included) with
/// all timestamps at most `max_time` satisfying `x`.
pub fn enumerate_streams(
    x: &XiCurvePair,
    max_events: usize,
    max_time: u64,
) -> Result<Vec<EventStream>> {
    enumerate_streams_with_budget(x, max_events, max_time, DEFAULT_BUDGET)
}

pub fn enumerate_streams_with_budget(
    x: &XiCurvePair,
    max_events: usize,
    max_time: u64,
    budget: u64,
) -> Result<Vec<EventStream>> {
    let mut out = Vec::new();
    if max_events == 0 {
        return Ok(out);
    }
    let mut s = vec![0];
    let mut visited = 0u64;
    fill(
        x,
        max_events,
        max_time,
        budget,
        &mut visited,
        &mut s,
        &mut out,
    )?;
    Ok(out)
}

fn fill(
    x: &XiCurvePair,
    m: usize,
    h: u64,
    budget: u64,
    visited: &mut u64,
    s: &mut Vec<u64>,
    out: &mut Vec<EventStream>,
) -> Result<()> {
    *visited += 1;
    if *visited > budget {
        return Err(Error::BudgetExceeded(format!(
            "stream enumeration beyond {budget} nodes"
        )));
    }
    if s.len() == m {
        out.push(s.clone());
        return Ok(());
    }
    let last = *s.last().unwrap();
    for t in last..=h {
        if new_event_ok(s, x, t) {
            s.push(t);
            fill(x, m, h, budget, visited, s, out)?;
            s.pop();
        }
    }
    Ok(())
}

/// Every stream alive at `horizon` (see [alive_at]). Needs `lower(1) ≥ 1`.
pub fn enumerate_prefixes(x: &XiCurvePair, horizon: u64) -> Result<Vec<EventStream>> {
    if !x.is_empty() && x.lower(1) == 0 {
        return Err(Error::InvalidCurve(
            "prefix enumeration needs lower(1) >= 1".into(),
        ));
    }
    let mut out = Vec::new();
    let mut s = vec![0];
    let mut visited = 0u64;
    prefixes(x, horizon, &mut visited, &mut s, &mut out)?;
    out.sort();
    Ok(out)
}

fn prefixes(
    x: &XiCurvePair,
    h: u64,
    visited: &mut u64,
    s: &mut Vec<u64>,
    out: &mut Vec<EventStream>,
) -> Result<()> {
    *visited += 1;
    if *visited > DEFAULT_BUDGET {
        return Err(Error::BudgetExceeded("prefix enumeration".into()));
    }
    if alive_at(s, x, h) {
        out.push(s.clone());
    }
    let last = *s.last().unwrap();
    for t in last + 1..=h {
        if new_event_ok(s, x, t) {
            s.push(t);
            prefixes(x, h, visited, s, out)?;
            s.pop();
        } else if (1..=x.len().min(s.len())).any(|k| Bound::Finite(t - s[s.len() - k]) > x.upper(k))
        {
            break;
        }
    }
    Ok(())
}

/// True when `s` satisfies `x` and can be continued by infinitely many events.
pub fn extendable_forever(s: &[u64], x: &XiCurvePair) -> bool {
    if !stream_satisfies(s, x) {
        return false;
    }
    let n = x.len();
    if n == 0 {
        return true;
    }
    let cap = x.max_constant() + 1;
    // State: distances from the last event back to the previous ones, capped.
    let start: Vec<u64> = {
        let last = *s.last().unwrap();
        s.iter()
            .rev()
            .skip(1)
            .take(n - 1)
            .map(|&t| (last - t).min(cap))
            .collect()
    };
    let step = |st: &Vec<u64>, d: u64| -> Option<Vec<u64>> {
        if !window_ok(x, 1, d) {
            return None;
        }
        for (i, &a) in st.iter().enumerate() {
            let span = a + d;
            if !window_ok(x, i + 2, span) {
                return None;
            }
        }
        let mut next = vec![d.min(cap)];
        next.extend(st.iter().map(|&a| (a + d).min(cap)));
        next.truncate(n - 1);
        Some(next)
    };
    let mut index: HashMap<Vec<u64>, usize> = HashMap::new();
    let mut states = vec![start.clone()];
    index.insert(start, 0);
    let mut edges: Vec<Vec<usize>> = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let st = states[i].clone();
        let mut row = Vec::new();
        for d in x.lower(1)..=cap {
            if let Some(nx) = step(&st, d) {
                let id = *index.entry(nx.clone()).or_insert_with(|| {
                    states.push(nx);
                    states.len() - 1
                });
                row.push(id);
            }
        }
        edges.push(row);
        i += 1;
    }
    let mut alive = vec![true; states.len()];
    loop {
        let mut changed = false;
        for v in 0..states.len() {
            if alive[v] && !edges[v].iter().any(|&w| alive[w]) {
                alive[v] = false;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }
    alive[0]
}

/// `T_i = t_{g·i}` for every `i` with `g·i` inside `s`.
pub fn abstract_stream(s: &[u64], g: u32) -> Result<EventStream> {
    if g < 1 {
        return Err(Error::InvalidGranularity(g));
    }
    Ok(s.iter().step_by(g as usize).copied().collect())
}

/// True iff `fine` abstracts to `coarse` at `g` on the prefix `coarse` covers.
pub fn is_refinement(fine: &[u64], coarse: &[u64], g: u32) -> bool {
    match abstract_stream(fine, g) {
        Ok(a) => a.len() >= coarse.len() && a[..coarse.len()] == *coarse,
        Err(_) => false,
    }
}

pub fn parse_stream(text: &str) -> Result<EventStream> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let t: u64 = line.parse().map_err(|_| Error::Parse {
            line: i + 1,
            msg: format!("expected timestamp, found `{line}`"),
        })?;
        if out.is_empty() && t != 0 {
            return Err(Error::Parse {
                line: i + 1,
                msg: "first timestamp must be 0".into(),
            });
        }
        if out.last().is_some_and(|&p| t < p) {
            return Err(Error::Parse {
                line: i + 1,
                msg: "timestamps must be nondecreasing".into(),
            });
        }
        out.push(t);
    }
    if out.is_empty() {
        return Err(Error::Parse {
            line: 1,
            msg: "empty stream".into(),
        });
    }
    Ok(out)
}

pub fn format_stream(s: &[u64]) -> String {
    s.iter().map(|t| format!("{t}\n")).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum SwitchReason {
    Sync,
    Timeout,
    Above,
    Below,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SwitchEvent {
    pub time: u64,
    pub from: String,
    pub to: String,
    pub reason: SwitchReason,
}

/// Concrete state of the fine component model.
#[derive(Debug, Clone)]
struct FineMachine<'a> {
    spec: &'a MtaSpec,
    mode: usize,
    x: u64,
    q: u64,
    /// Service events of the current visit; the entry instant is the origin.
    visit: Vec<u64>,
}

impl<'a> FineMachine<'a> {
    fn new(spec: &'a MtaSpec) -> Self {
        FineMachine {
            spec,
            mode: spec.mode_index(&spec.initial_mode).expect("valid spec"),
            x: 0,
            q: spec.initial_backlog as u64,
            visit: vec![0],
        }
    }

    fn service(&self) -> Option<&'a XiCurvePair> {
        self.spec.modes[self.mode].service.as_ref()
    }

    fn can_serve(&self, t: u64) -> bool {
        self.service()
            .is_some_and(|psi| new_event_ok(&self.visit, psi, t))
    }

    /// Returns true when the serve produces an output event.
    fn serve(&mut self, t: u64) -> bool {
        self.visit.push(t);
        if self.q > 0 {
            self.q -= 1;
            true
        } else {
            false
        }
    }

    fn switch(&mut self, t: u64, offer: Option<&str>) -> Option<SwitchEvent> {
        let m = &self.spec.modes[self.mode];
        let target = |pred: &dyn Fn(&TransitionKind) -> bool| {
            m.transitions
                .iter()
                .find(|tr| pred(&tr.kind))
                .map(|tr| tr.target.clone())
        };
        let mut fired = None;
        if let Some(a) = offer {
            if let Some(to) = target(&|k| matches!(k, TransitionKind::Sync(s) if s == a)) {
                fired = Some((to, SwitchReason::Sync));
            }
        }
        if fired.is_none() && self.x >= m.dwell_min {
            let above = m.backlog_high.is_some_and(|b| self.q > b as u64);
            let below = self.q < m.backlog_low as u64;
            let timeout = m.dwell_max == Bound::Finite(self.x);
            if above {
                fired = target(&|k| *k == TransitionKind::BufferAbove)
                    .map(|to| (to, SwitchReason::Above));
            }
            if fired.is_none() && below {
                fired = target(&|k| *k == TransitionKind::BufferBelow)
                    .map(|to| (to, SwitchReason::Below));
            }
            if fired.is_none() && timeout {
                fired = target(&|k| *k == TransitionKind::Timeout)
                    .map(|to| (to, SwitchReason::Timeout));
            }
        }
        let (to, reason) = fired?;
        let ev = SwitchEvent {
            time: t,
            from: m.id.clone(),
            to: to.clone(),
            reason,
        };
        self.mode = self.spec.mode_index(&to).expect("valid spec");
        self.x = 0;
        self.visit = vec![t];
        Some(ev)
    }

    /// Whether one time unit may pass after the events at `t`.
    fn can_elapse(&self, t: u64) -> bool {
        let m = &self.spec.modes[self.mode];
        if Bound::Finite(self.x + 1) > m.dwell_max {
            return false;
        }
        match self.service() {
            Some(psi) => {
                let v = &self.visit;
                (1..=psi.len().min(v.len()))
                    .all(|k| Bound::Finite(t + 1 - v[v.len() - k]) <= psi.upper(k))
            }
            None => true,
        }
    }

    fn elapse(&mut self) {
        self.x += 1;
    }

    fn signals(&self) -> Vec<&'a str> {
        self.spec.modes[self.mode]
            .transitions
            .iter()
            .filter_map(|t| match &t.kind {
                TransitionKind::Sync(a) => Some(a.as_str()),
                _ => None,
            })
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SimulationTrace {
    pub produces: Vec<u64>,
    pub switches: Vec<SwitchEvent>,
    /// Instants where service found an empty buffer.
    pub wasted: Vec<u64>,
    /// Backlog after the events of each instant.
    pub backlog: Vec<u64>,
}

/// Replays the fine component on concrete streams up to `horizon`.
///
/// `service` gives, per mode, serve offsets relative to each entry into
/// that mode (offset `0` is the entry origin and is skipped); the same
/// offsets are reused on every visit. `syncs` lists offered signals.
pub fn simulate_mta(
    spec: &MtaSpec,
    input: &[u64],
    service: &HashMap<String, EventStream>,
    syncs: &[(u64, String)],
    horizon: u64,
) -> Result<SimulationTrace> {
    spec.validate()?;
    let inputs: HashSet<u64> = input.iter().skip(1).copied().collect();
    let mut m = FineMachine::new(spec);
    let mut trace = SimulationTrace::default();
    for t in 0..=horizon {
        let mode = &spec.modes[m.mode];
        if mode.service.is_some() {
            let script = service.get(&mode.id).ok_or_else(|| {
                Error::InconsistentService(format!("no service stream for mode `{}`", mode.id))
            })?;
            let entry = m.visit[0];
            if t > entry && script.contains(&(t - entry)) {
                if !m.can_serve(t) {
                    return Err(Error::InconsistentService(format!(
                        "serve at {t} in mode `{}` violates its service curve",
                        mode.id
                    )));
                }
                if m.serve(t) {
                    trace.produces.push(t);
                } else {
                    trace.wasted.push(t);
                }
            }
        }
        if inputs.contains(&t) {
            m.q += 1;
        }
        let offer = syncs
            .iter()
            .find(|(ts, _)| *ts == t)
            .map(|(_, a)| a.as_str());
        if let Some(ev) = m.switch(t, offer) {
            trace.switches.push(ev);
        }
        trace.backlog.push(m.q);
        if t < horizon {
            if !m.can_elapse(t) {
                return Err(Error::InconsistentService(format!(
                    "service stream of mode `{}` misses its upper bound at {}",
                    spec.modes[m.mode].id,
                    t + 1
                )));
            }
            m.elapse();
        }
    }
    Ok(trace)
}

/// Raw output windows over every run: index `K − 1` holds the min and max
/// distance between an output event (or the origin) and the `K`-th next one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleBounds {
    pub min: Vec<Option<u64>>,
    pub max: Vec<Option<u64>>,
    pub runs: u64,
}

/// One complete run of the fine component up to the horizon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FineRun {
    pub input: EventStream,
    /// Output stream with the origin.
    pub output: EventStream,
    pub switches: Vec<SwitchEvent>,
    /// Backlog after the events of each instant.
    pub backlog: Vec<u64>,
}

/// Calls `f` on every run of the fine component for every input prefix
/// alive at `horizon`, branching on service and sync offers per instant.
pub fn for_each_fine_run(
    spec: &MtaSpec,
    arrival: &XiCurvePair,
    horizon: u64,
    budget: u64,
    f: &mut dyn FnMut(&FineRun),
) -> Result<u64> {
    spec.validate()?;
    let mut runs = 0u64;
    for input in enumerate_prefixes(arrival, horizon)? {
        let reqs: HashSet<u64> = input.iter().skip(1).copied().collect();
        let mut run = FineRun {
            input: input.clone(),
            output: vec![0],
            switches: Vec::new(),
            backlog: Vec::new(),
        };
        explore_runs(
            FineMachine::new(spec),
            0,
            horizon,
            &reqs,
            &mut run,
            &mut runs,
            budget,
            f,
        )?;
    }
    Ok(runs)
}

#[allow(clippy::too_many_arguments)]
fn explore_runs(
    m: FineMachine,
    t: u64,
    h: u64,
    reqs: &HashSet<u64>,
    run: &mut FineRun,
    runs: &mut u64,
    budget: u64,
    f: &mut dyn FnMut(&FineRun),
) -> Result<()> {
    let serves: &[bool] = if m.can_serve(t) {
        &[false, true]
    } else {
        &[false]
    };
    let offers: Vec<Option<&str>> = std::iter::once(None)
        .chain(m.signals().into_iter().map(Some))
        .collect();
    for &serve in serves {
        for &offer in &offers {
            let mut m2 = m.clone();
            let out_len = run.output.len();
            let sw_len = run.switches.len();
            if serve && m2.serve(t) {
                run.output.push(t);
            }
            if reqs.contains(&t) {
                m2.q += 1;
            }
            if let Some(ev) = m2.switch(t, offer) {
                run.switches.push(ev);
            }
            run.backlog.push(m2.q);
            if t == h {
                *runs += 1;
                if *runs > budget {
                    return Err(Error::BudgetExceeded(format!("more than {budget} runs")));
                }
                f(run);
            } else if m2.can_elapse(t) {
                m2.elapse();
                explore_runs(m2, t + 1, h, reqs, run, runs, budget, f)?;
            }
            run.backlog.pop();
            run.output.truncate(out_len);
            run.switches.truncate(sw_len);
        }
    }
    Ok(())
}

/// Exact output windows of the fine component for windows `1..=k_max`,
/// by exhausting every run up to `horizon`.
pub fn oracle_output_curves(
    spec: &MtaSpec,
    arrival: &XiCurvePair,
    k_max: usize,
    horizon: u64,
    budget: u64,
) -> Result<OracleBounds> {
    let mut min = vec![None::<u64>; k_max];
    let mut max = vec![None::<u64>; k_max];
    let runs = for_each_fine_run(spec, arrival, horizon, budget, &mut |run| {
        let p = &run.output;
        for k in 1..=k_max {
            for i in 0..p.len().saturating_sub(k) {
                let d = p[i + k] - p[i];
                min[k - 1] = Some(min[k - 1].map_or(d, |v: u64| v.min(d)));
                max[k - 1] = Some(max[k - 1].map_or(d, |v: u64| v.max(d)));
            }
        }
    })?;
    Ok(OracleBounds { min, max, runs })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mta::{sleep_run, Mode};

    fn xi(l: &[u64], u: &[u64]) -> XiCurvePair {
        XiCurvePair::finite(l, u).unwrap()
    }

    #[test]
    fn satisfaction_examples() {
        assert!(stream_satisfies(&[0, 2, 4, 6], &xi(&[2, 4, 6], &[2, 4, 6])));
        let x = XiCurvePair::from_parts(vec![2, 4], vec![Bound::Unbounded; 2], 1);
        assert!(!stream_satisfies(&[0, 1, 4], &x));
    }

    #[test]
    fn enumeration_examples() {
        assert_eq!(
            enumerate_streams(&xi(&[2], &[2]), 3, 10).unwrap(),
            vec![vec![0, 2, 4]]
        );
        assert_eq!(
            enumerate_streams(&xi(&[1], &[2]), 2, 4).unwrap(),
            vec![vec![0, 1], vec![0, 2]]
        );
        assert!(matches!(
            enumerate_streams_with_budget(&xi(&[1], &[3]), 8, 30, 10),
            Err(Error::BudgetExceeded(_))
        ));
    }

    #[test]
    fn abstraction_examples() {
        let s = [0, 1, 2, 3, 4, 5, 6];
        assert_eq!(abstract_stream(&s, 3).unwrap(), vec![0, 3, 6]);
        assert_eq!(abstract_stream(&s, 1).unwrap(), s.to_vec());
        assert!(is_refinement(&s, &[0, 3, 6], 3));
        assert!(!is_refinement(&s, &[0, 2], 3));
    }

    #[test]
    fn extension_check() {
        let x = xi(&[1, 3], &[2, 4]);
        assert!(extendable_forever(&[0, 2], &x));
        assert!(extendable_forever(&[0, 1], &x));
        let tight = xi(&[2, 5], &[2, 5]);
        assert!(!extendable_forever(&[0], &tight));
    }

    #[test]
    fn stream_file_format() {
        assert_eq!(parse_stream("0\n2\n5\n").unwrap(), vec![0, 2, 5]);
        assert!(matches!(
            parse_stream("1\n2\n"),
            Err(Error::Parse { line: 1, .. })
        ));
        assert!(matches!(
            parse_stream("0\n3\n2\n"),
            Err(Error::Parse { line: 3, .. })
        ));
        assert_eq!(format_stream(&[0, 4]), "0\n4\n");
    }

    #[test]
    fn sleep_run_wakes_at_threshold() {
        let spec = sleep_run(5, xi(&[1], &[1]));
        let input = [0, 1, 2, 3, 4, 5, 6];
        let service = HashMap::from([("run".to_string(), (1..20).collect::<Vec<u64>>())]);
        let trace = simulate_mta(&spec, &input, &service, &[], 12).unwrap();
        assert_eq!(trace.switches[0].time, 5);
        assert_eq!(trace.backlog[5], 5);
        assert_eq!(trace.produces.first(), Some(&6));
        let again = simulate_mta(&spec, &input, &service, &[], 12).unwrap();
        assert_eq!(trace, again);

        let idle = simulate_mta(&spec, &[0], &service, &[], 12).unwrap();
        assert!(idle.produces.is_empty() && idle.switches.is_empty());
    }

    #[test]
    fn wire_passes_input_through() {
        // Serving every instant: each request leaves one instant later.
        let spec = MtaSpec::new(vec![Mode::new("on", Some(xi(&[1, 2], &[1, 2])))], "on", 0);
        let arrival = xi(&[2, 4], &[3, 6]);
        let o = oracle_output_curves(&spec, &arrival, 2, 9, DEFAULT_BUDGET).unwrap();
        assert_eq!(o.max[0], Some(4));
        assert_eq!(o.min[0], Some(2));
    }
}
