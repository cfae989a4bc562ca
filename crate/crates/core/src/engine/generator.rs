//! Explicit automaton of a curve-constrained event generator.
//!
//! A state holds the ages of the last `θ ≤ N` events, most recent first,
//! at an instant before that instant's emission. The origin counts as an
//! event, so the initial state is `[0]`. One tick emits at most one event
//! and then lets one time unit pass.

use rustc_hash::FxHashMap;

use crate::curves::{Bound, XiCurvePair};
use crate::error::{Error, Result};

pub const DEAD: u32 = u32::MAX;

#[derive(Debug, Clone)]
pub struct Generator {
    can_emit: Vec<bool>,
    tick_idle: Vec<u32>,
    tick_emit: Vec<u32>,
    fresh_elapsed: u32,
    blocking: bool,
}

struct Builder<'a> {
    curve: &'a XiCurvePair,
    cap: u32,
    ids: FxHashMap<Vec<u32>, u32>,
    states: Vec<Vec<u32>>,
}

impl Builder<'_> {
    fn id(&mut self, ages: Vec<u32>) -> u32 {
        if let Some(&i) = self.ids.get(&ages) {
            return i;
        }
        let i = self.states.len() as u32;
        self.ids.insert(ages.clone(), i);
        self.states.push(ages);
        i
    }

    fn can_emit(&self, ages: &[u32]) -> bool {
        ages.iter()
            .enumerate()
            .all(|(i, &a)| a as u64 >= self.curve.lower(i + 1))
    }

    fn emit(&self, ages: &[u32]) -> Vec<u32> {
        let mut out = Vec::with_capacity(ages.len() + 1);
        out.push(0);
        out.extend_from_slice(ages);
        out.truncate(self.curve.len());
        out
    }

    fn elapse(&self, ages: &[u32]) -> Option<Vec<u32>> {
        let out: Vec<u32> = ages.iter().map(|&a| (a + 1).min(self.cap)).collect();
        let ok = out
            .iter()
            .enumerate()
            .all(|(i, &a)| Bound::Finite(a as u64) <= self.curve.upper(i + 1));
        ok.then_some(out)
    }
}

impl Generator {
    /// Compiles the generator of `curve`. With `viable_only`, transitions
    /// into states from which time cannot diverge are removed.
    pub fn compile(curve: &XiCurvePair, viable_only: bool) -> Result<Generator> {
        if !curve.is_empty() && curve.lower(1) == 0 {
            return Err(Error::InvalidCurve(
                "generator curves need lower(1) >= 1".into(),
            ));
        }
        let cap = u32::try_from(curve.max_constant() + 1)
            .map_err(|_| Error::InvalidCurve("curve constants too large".into()))?;
        let mut b = Builder {
            curve,
            cap,
            ids: FxHashMap::default(),
            states: Vec::new(),
        };
        let init = b.id(vec![0]);
        let mut can_emit = Vec::new();
        let mut tick_idle = Vec::new();
        let mut tick_emit = Vec::new();
        let mut next = 0usize;
        while next < b.states.len() {
            let ages = b.states[next].clone();
            let e = b.can_emit(&ages);
            let idle = b.elapse(&ages).map_or(DEAD, |s| b.id(s));
            let emitted = if e {
                b.elapse(&b.emit(&ages)).map_or(DEAD, |s| b.id(s))
            } else {
                DEAD
            };
            can_emit.push(e);
            tick_idle.push(idle);
            tick_emit.push(emitted);
            next += 1;
        }
        let n = b.states.len();
        let viable = greatest_viable(&tick_idle, &tick_emit);
        let blocking = viable.iter().any(|v| !v);
        if viable_only {
            if !viable[init as usize] {
                return Err(Error::BlockingGenerator(
                    "no infinite stream satisfies the curve".into(),
                ));
            }
            for s in 0..n {
                if tick_idle[s] != DEAD && !viable[tick_idle[s] as usize] {
                    tick_idle[s] = DEAD;
                }
                if tick_emit[s] != DEAD && !viable[tick_emit[s] as usize] {
                    tick_emit[s] = DEAD;
                }
                if tick_emit[s] == DEAD {
                    can_emit[s] = false;
                }
            }
        }
        let fresh_elapsed = tick_idle[init as usize];
        debug_assert_eq!(init, 0);
        Ok(Generator {
            can_emit,
            tick_idle,
            tick_emit,
            fresh_elapsed,
            blocking,
        })
    }

    pub fn initial(&self) -> u32 {
        0
    }

    /// State one instant after a fresh origin.
    pub fn fresh_elapsed(&self) -> u32 {
        self.fresh_elapsed
    }

    pub fn can_emit(&self, s: u32) -> bool {
        self.can_emit[s as usize]
    }

    pub fn tick(&self, s: u32, emit: bool) -> u32 {
        if emit {
            self.tick_emit[s as usize]
        } else {
            self.tick_idle[s as usize]
        }
    }

    pub fn state_count(&self) -> usize {
        self.can_emit.len()
    }

    /// True when every reachable state admits an infinite continuation.
    pub fn is_nonblocking(&self) -> bool {
        !self.blocking
    }
}

fn greatest_viable(idle: &[u32], emit: &[u32]) -> Vec<bool> {
    let n = idle.len();
    let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut outdeg = vec![0u32; n];
    for s in 0..n {
        for t in [idle[s], emit[s]] {
            if t != DEAD {
                preds[t as usize].push(s as u32);
                outdeg[s] += 1;
            }
        }
    }
    let mut viable = vec![true; n];
    let mut work: Vec<usize> = (0..n).filter(|&s| outdeg[s] == 0).collect();
    for &s in &work {
        viable[s] = false;
    }
    while let Some(s) = work.pop() {
        for &p in &preds[s] {
            let p = p as usize;
            outdeg[p] -= 1;
            if outdeg[p] == 0 && viable[p] {
                viable[p] = false;
                work.push(p);
            }
        }
    }
    viable
}

/// Every emission sequence of a lone generator alive at `horizon`: the origin
/// `0` followed by emission times, with no window violated up to `horizon`.
pub fn emission_sequences(curve: &XiCurvePair, horizon: u64) -> Result<Vec<Vec<u64>>> {
    let gen = Generator::compile(curve, false)?;
    let mut out = Vec::new();
    let mut seq = vec![0u64];
    walk(&gen, gen.initial(), 0, horizon, &mut seq, &mut out);
    out.sort();
    Ok(out)
}

fn walk(gen: &Generator, s: u32, t: u64, h: u64, seq: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
    let emits: &[bool] = if gen.can_emit(s) && t > 0 {
        &[false, true]
    } else {
        &[false]
    };
    for &e in emits {
        if e {
            seq.push(t);
        }
        if t == h {
            out.push(seq.clone());
        } else {
            let n = gen.tick(s, e);
            if n != DEAD {
                walk(gen, n, t + 1, h, seq, out);
            }
        }
        if e {
            seq.pop();
        }
    }
}
