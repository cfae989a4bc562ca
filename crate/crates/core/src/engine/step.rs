//! One-instant step relation of a network driven by an input generator.
//!
//! Within an instant the phases run in a fixed order: the SM may serve
//! (a serve on a non-empty buffer produces an output event), the input may
//! request, then the PE may switch modes. Time then advances by one unit.

use super::generator::{Generator, DEAD};
use super::network::{Network, ServiceModel};
use crate::curves::XiCurvePair;
use crate::error::Result;

const SM_OFF: u32 = 0x7FFF_FFFF;
const TRANS_BIT: u32 = 0x8000_0000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NetState {
    pub input: u32,
    pub sm: u32,
    pub q: u32,
    pub x: u16,
    pub mode: u16,
    pub active: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Step {
    pub serv: bool,
    pub produce: bool,
    pub req: bool,
    /// Index of the sync signal offered and taken.
    pub sync: Option<u16>,
    pub switch_to: Option<u16>,
}

enum Sm {
    Off,
    Gen(Generator),
    Trans {
        min: u64,
        max: Option<u64>,
        cap: u32,
        gen: Generator,
    },
}

#[derive(Clone, Copy)]
enum SmPost {
    Off,
    Gen(u32, bool),
    Fresh,
    Trans(u32),
}

pub struct Compiled<'a> {
    pub net: &'a Network,
    pub input: Generator,
    sm: Vec<Sm>,
    x_cap: Vec<u16>,
    pub signals: Vec<String>,
    syncs: Vec<Vec<(u16, u16)>>,
    q_sat: u32,
}

impl<'a> Compiled<'a> {
    pub fn new(net: &'a Network, input: &XiCurvePair) -> Result<Self> {
        let input = Generator::compile(input, true)?;
        let sm = match &net.sm {
            ServiceModel::Fine { curves } => curves
                .iter()
                .map(|c| match c {
                    Some(c) => Ok(Sm::Gen(Generator::compile(c, true)?)),
                    None => Ok(Sm::Off),
                })
                .collect::<Result<Vec<_>>>()?,
            ServiceModel::Coarse { modes, .. } => modes
                .iter()
                .map(|c| match c {
                    Some(c) => {
                        let max = c.trans_max.finite();
                        Ok(Sm::Trans {
                            min: c.trans_min,
                            max,
                            cap: (max.unwrap_or(c.trans_min).max(c.trans_min) + 1)
                                .min(u32::MAX as u64 / 2) as u32,
                            gen: Generator::compile(&c.curve, true)?,
                        })
                    }
                    None => Ok(Sm::Off),
                })
                .collect::<Result<Vec<_>>>()?,
        };
        let x_cap = net
            .pe
            .modes
            .iter()
            .map(|m| (m.dwell_min.max(m.dwell_max.unwrap_or(0)) + 1).min(u16::MAX as u64) as u16)
            .collect();
        let mut signals: Vec<String> = net
            .pe
            .modes
            .iter()
            .flat_map(|m| m.syncs.iter().map(|(a, _)| a.clone()))
            .collect();
        signals.sort();
        signals.dedup();
        let syncs = net
            .pe
            .modes
            .iter()
            .map(|m| {
                m.syncs
                    .iter()
                    .map(|(a, t)| {
                        (
                            signals.iter().position(|s| s == a).unwrap() as u16,
                            *t as u16,
                        )
                    })
                    .collect()
            })
            .collect();
        let mut q_sat = 1i64;
        for m in &net.pe.modes {
            if let Some(a) = &m.above {
                q_sat = q_sat.max(a.may).max(a.must + 1);
            }
            if let Some(b) = &m.below {
                q_sat = q_sat.max(b.may + 1).max(b.must);
            }
        }
        Ok(Compiled {
            net,
            input,
            sm,
            x_cap,
            signals,
            syncs,
            q_sat: q_sat as u32,
        })
    }

    pub fn coarse(&self) -> bool {
        self.net.is_coarse()
    }

    pub fn initial(&self) -> NetState {
        let mode = self.net.pe.initial_mode;
        NetState {
            input: self.input.initial(),
            sm: self.reset_code(mode),
            q: self.net.pe.initial_backlog,
            x: 0,
            mode: mode as u16,
            active: false,
        }
    }

    /// Backlog above which every threshold comparison is settled.
    pub fn q_saturation(&self) -> u32 {
        self.q_sat
    }

    pub fn signal_index(&self, name: &str) -> Option<u16> {
        self.signals
            .iter()
            .position(|s| s == name)
            .map(|i| i as u16)
    }

    fn reset_code(&self, mode: usize) -> u32 {
        match &self.sm[mode] {
            Sm::Off => SM_OFF,
            Sm::Gen(_) => 0,
            Sm::Trans { .. } => TRANS_BIT,
        }
    }

    fn reset_post(&self, mode: usize) -> SmPost {
        match &self.sm[mode] {
            Sm::Off => SmPost::Off,
            Sm::Gen(_) => SmPost::Fresh,
            Sm::Trans { .. } => SmPost::Trans(0),
        }
    }

    fn serve_options(&self, s: &NetState, out: &mut Vec<(SmPost, bool)>) {
        out.clear();
        let code = s.sm;
        match &self.sm[s.mode as usize] {
            Sm::Off => out.push((SmPost::Off, false)),
            Sm::Gen(gen) => {
                out.push((SmPost::Gen(code, false), false));
                if gen.can_emit(code) {
                    out.push((SmPost::Gen(code, true), true));
                }
            }
            Sm::Trans { min, gen, .. } => {
                if code & TRANS_BIT != 0 {
                    let c = code & !TRANS_BIT;
                    out.push((SmPost::Trans(c), false));
                    if c as u64 >= *min {
                        out.push((SmPost::Fresh, true));
                    }
                    if s.q == 0 && c != 0 {
                        out.push((SmPost::Trans(0), false));
                    }
                } else {
                    out.push((SmPost::Gen(code, false), false));
                    if gen.can_emit(code) {
                        out.push((SmPost::Gen(code, true), true));
                    }
                    if s.q == 0 {
                        out.push((SmPost::Trans(0), false));
                    }
                }
            }
        }
    }

    fn elapse_sm(&self, mode: usize, post: SmPost) -> Option<u32> {
        let v = match (&self.sm[mode], post) {
            (_, SmPost::Off) => SM_OFF,
            (Sm::Gen(gen), SmPost::Gen(id, e)) => gen.tick(id, e),
            (Sm::Gen(gen), SmPost::Fresh) => gen.fresh_elapsed(),
            (Sm::Trans { gen, .. }, SmPost::Gen(id, e)) => gen.tick(id, e),
            (Sm::Trans { gen, .. }, SmPost::Fresh) => gen.fresh_elapsed(),
            (Sm::Trans { max, cap, .. }, SmPost::Trans(c)) => {
                if max.is_some_and(|m| c as u64 + 1 > m) {
                    DEAD
                } else {
                    TRANS_BIT | (c + 1).min(*cap)
                }
            }
            _ => unreachable!("service state does not match mode"),
        };
        (v != DEAD).then_some(v)
    }

    /// PE outcomes of the switch phase: `None` to stay, `Some(j)` to enter mode `j`.
    fn pe_outcomes(
        &self,
        mode: usize,
        active: bool,
        x: u16,
        q: u32,
        out: &mut Vec<Option<u16>>,
    ) -> bool {
        out.clear();
        let m = &self.net.pe.modes[mode];
        let active = active || x as u64 >= m.dwell_min;
        if !active {
            out.push(None);
            return false;
        }
        let q = q as i64;
        let above = m.above.as_ref();
        let below = m.below.as_ref();
        let timeout = m
            .timeout_target
            .filter(|_| m.dwell_max.is_some_and(|u| x as u64 >= u));
        let forced_above = above.filter(|a| q > a.must).map(|a| a.target);
        let forced_below = below.filter(|b| q < b.must).map(|b| b.target);
        if self.net.pe.deterministic {
            let pick = forced_above.or(forced_below).or(timeout);
            out.push(pick.map(|t| t as u16));
        } else {
            if let Some(a) = above.filter(|a| q >= a.may) {
                out.push(Some(a.target as u16));
            }
            if let Some(b) = below.filter(|b| q <= b.may) {
                out.push(Some(b.target as u16));
            }
            if let Some(t) = timeout {
                out.push(Some(t as u16));
            }
            if forced_above.is_none() && forced_below.is_none() && timeout.is_none() {
                out.push(None);
            }
        }
        true
    }

    /// Calls `f` for every step from `s`. Unless `last`, the state passed is
    /// the successor at the next instant and dead branches are dropped; at
    /// the last instant it is the state after the events, before elapsing.
    pub fn for_each_step(&self, s: &NetState, last: bool, mut f: impl FnMut(Step, NetState)) {
        let mut serves = Vec::with_capacity(3);
        let mut pe = Vec::with_capacity(4);
        self.serve_options(s, &mut serves);
        let mode = s.mode as usize;
        let reqs: &[bool] = if self.input.can_emit(s.input) {
            &[false, true]
        } else {
            &[false]
        };
        for &(post, serv) in &serves {
            let produce = serv && s.q > 0;
            let q1 = if produce { s.q - 1 } else { s.q };
            for &req in reqs {
                let q2 = q1 + req as u32;
                let input = if last {
                    s.input
                } else {
                    self.input.tick(s.input, req)
                };
                if input == DEAD {
                    continue;
                }
                for offer in std::iter::once(None).chain(self.syncs[mode].iter().map(Some)) {
                    let step_base = Step {
                        serv,
                        produce,
                        req,
                        sync: offer.map(|&(a, _)| a),
                        switch_to: None,
                    };
                    let active_pe;
                    if let Some(&(_, target)) = offer {
                        pe.clear();
                        pe.push(Some(target));
                        active_pe = false;
                    } else {
                        active_pe = self.pe_outcomes(mode, s.active, s.x, q2, &mut pe);
                    }
                    for &o in &pe {
                        let step = Step {
                            switch_to: o,
                            ..step_base
                        };
                        let (m2, act2, x2, sm_post) = match o {
                            Some(j) => (j, false, 0u16, self.reset_post(j as usize)),
                            None => (s.mode, active_pe, s.x, post),
                        };
                        if last {
                            f(
                                step,
                                NetState {
                                    input,
                                    sm: s.sm,
                                    q: q2,
                                    x: x2,
                                    mode: m2,
                                    active: act2,
                                },
                            );
                            continue;
                        }
                        let pm = &self.net.pe.modes[m2 as usize];
                        if pm.dwell_max.is_some_and(|u| x2 as u64 + 1 > u) {
                            continue;
                        }
                        let Some(sm) = self.elapse_sm(m2 as usize, sm_post) else {
                            continue;
                        };
                        f(
                            step,
                            NetState {
                                input,
                                sm,
                                q: q2,
                                x: (x2 + 1).min(self.x_cap[m2 as usize]),
                                mode: m2,
                                active: act2,
                            },
                        );
                    }
                }
            }
        }
    }

    /// Same state with the backlog saturated; equivalent for produce-free runs.
    pub fn project(&self, mut s: NetState) -> NetState {
        s.q = s.q.min(self.q_sat);
        s
    }
}
