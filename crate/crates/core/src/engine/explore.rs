use std::time::{Duration, Instant};

use rustc_hash::{FxHashMap, FxHashSet};

use super::step::{Compiled, NetState};
use crate::error::{Error, Result};

/// Minimum and maximum distance between the first and last of `K + 1`
/// consecutive output events (the origin counts as the first event),
/// over windows completed up to the horizon. Index `K − 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WindowBounds {
    pub min: Vec<Option<u64>>,
    pub max: Vec<Option<u64>>,
    /// Some reachable state admits an infinite run without output.
    pub stalls: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ExploreStats {
    /// Sum of layer sizes over all instants.
    pub states: u64,
    pub transitions: u64,
    pub peak_layer: usize,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Exploration {
    pub bounds: WindowBounds,
    pub stats: ExploreStats,
}

struct Layer {
    states: Vec<NetState>,
    index: FxHashMap<NetState, u32>,
    win: Vec<i32>,
    k: usize,
}

impl Layer {
    fn new(k: usize) -> Self {
        Layer {
            states: Vec::new(),
            index: FxHashMap::default(),
            win: Vec::new(),
            k,
        }
    }

    /// Latest and earliest start of each open window, `-1` when none.
    fn merge(&mut self, s: NetState, latest: &[i32], earliest: &[i32]) {
        let k = self.k;
        match self.index.get(&s) {
            Some(&i) => {
                let base = i as usize * 2 * k;
                for e in 0..k {
                    let l = &mut self.win[base + e];
                    *l = (*l).max(latest[e]);
                    let er = &mut self.win[base + k + e];
                    if earliest[e] >= 0 && (*er < 0 || earliest[e] < *er) {
                        *er = earliest[e];
                    }
                }
            }
            None => {
                self.index.insert(s, self.states.len() as u32);
                self.states.push(s);
                self.win.extend_from_slice(latest);
                self.win.extend_from_slice(earliest);
            }
        }
    }
}

pub struct ExploreOptions {
    pub horizon: u64,
    pub detect_stall: bool,
    pub state_budget: Option<u64>,
}

pub fn explore(c: &Compiled, k_max: usize, opts: &ExploreOptions) -> Result<Exploration> {
    let start = Instant::now();
    let k = k_max.max(1);
    let h =
        i32::try_from(opts.horizon).map_err(|_| Error::OutOfRange("horizon too large".into()))?;
    let mut min: Vec<Option<u64>> = vec![None; k];
    let mut max: Vec<Option<u64>> = vec![None; k];
    let mut stats = ExploreStats::default();
    let mut seen: FxHashSet<NetState> = FxHashSet::default();

    let mut cur = Layer::new(k);
    let mut lat = vec![-1i32; k];
    let mut ear = vec![-1i32; k];
    lat[0] = 0;
    ear[0] = 0;
    cur.merge(c.initial(), &lat, &ear);

    let mut succ: Vec<(bool, NetState)> = Vec::new();
    for t in 0..=h {
        let last = t == h;
        stats.states += cur.states.len() as u64;
        stats.peak_layer = stats.peak_layer.max(cur.states.len());
        if let Some(b) = opts.state_budget {
            if stats.states > b {
                return Err(Error::BudgetExceeded(format!(
                    "more than {b} states explored by instant {t}"
                )));
            }
        }
        let mut next = Layer::new(k);
        for i in 0..cur.states.len() {
            let s = cur.states[i];
            if opts.detect_stall {
                seen.insert(c.project(s));
            }
            succ.clear();
            c.for_each_step(&s, last, |st, n| succ.push((st.produce, n)));
            stats.transitions += succ.len() as u64;
            let base = i * 2 * k;
            let (wl, we) = cur.win[base..base + 2 * k].split_at(k);
            for &(produce, n) in &succ {
                if produce {
                    for e in 0..k {
                        if wl[e] >= 0 {
                            let lo = (t - wl[e]) as u64;
                            let hi = (t - we[e]) as u64;
                            min[e] = Some(min[e].map_or(lo, |m| m.min(lo)));
                            max[e] = Some(max[e].map_or(hi, |m| m.max(hi)));
                        }
                    }
                    if !last {
                        lat[0] = t;
                        ear[0] = t;
                        lat[1..].copy_from_slice(&wl[..k - 1]);
                        ear[1..].copy_from_slice(&we[..k - 1]);
                        next.merge(n, &lat, &ear);
                    }
                } else if !last {
                    next.merge(n, wl, we);
                }
            }
        }
        cur = next;
    }
    let stalls = opts.detect_stall && stall_reachable(c, &seen);
    stats.elapsed = start.elapsed();
    Ok(Exploration {
        bounds: WindowBounds { min, max, stalls },
        stats,
    })
}

/// True when some state in `seeds` (already projected) starts an infinite
/// produce-free run.
fn stall_reachable(c: &Compiled, seeds: &FxHashSet<NetState>) -> bool {
    let mut ids: FxHashMap<NetState, u32> = FxHashMap::default();
    let mut states: Vec<NetState> = Vec::new();
    for &s in seeds {
        ids.insert(s, states.len() as u32);
        states.push(s);
    }
    let n_seeds = states.len();
    let mut succs: Vec<Vec<u32>> = Vec::new();
    let mut i = 0;
    while i < states.len() {
        let s = states[i];
        let mut out = Vec::new();
        c.for_each_step(&s, false, |st, n| {
            if !st.produce {
                out.push(c.project(n));
            }
        });
        let mut row = Vec::with_capacity(out.len());
        for n in out {
            let id = *ids.entry(n).or_insert_with(|| {
                states.push(n);
                (states.len() - 1) as u32
            });
            row.push(id);
        }
        row.sort_unstable();
        row.dedup();
        succs.push(row);
        i += 1;
    }
    let n = states.len();
    let mut preds: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut outdeg = vec![0u32; n];
    for (s, row) in succs.iter().enumerate() {
        outdeg[s] = row.len() as u32;
        for &t in row {
            preds[t as usize].push(s as u32);
        }
    }
    let mut alive = vec![true; n];
    let mut work: Vec<usize> = (0..n).filter(|&s| outdeg[s] == 0).collect();
    for &s in &work {
        alive[s] = false;
    }
    while let Some(s) = work.pop() {
        for &p in &preds[s] {
            let p = p as usize;
            outdeg[p] -= 1;
            if outdeg[p] == 0 && alive[p] {
                alive[p] = false;
                work.push(p);
            }
        }
    }
    alive[..n_seeds].iter().any(|&a| a)
}

/// Observable behaviour to replay: per instant, whether the input requests,
/// whether an output event is produced, and which sync is taken.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Guide {
    pub req: Vec<bool>,
    pub produce: Vec<bool>,
    pub sync: Vec<Option<String>>,
}

impl Guide {
    pub fn horizon(&self) -> u64 {
        self.req.len() as u64 - 1
    }
}

/// True when the network has a run matching `guide` at every instant up to
/// its horizon.
pub fn replay(c: &Compiled, guide: &Guide) -> Result<bool> {
    let h = guide.req.len();
    if h == 0 || guide.produce.len() != h || guide.sync.len() != h {
        return Err(Error::OutOfRange(
            "guide vectors must share a nonzero length".into(),
        ));
    }
    let mut sync_idx = Vec::with_capacity(h);
    for s in &guide.sync {
        match s {
            None => sync_idx.push(None),
            Some(a) => match c.signal_index(a) {
                Some(i) => sync_idx.push(Some(i)),
                None => return Ok(false),
            },
        }
    }
    let mut cur: FxHashSet<NetState> = FxHashSet::default();
    cur.insert(c.initial());
    for (t, &want_sync) in sync_idx.iter().enumerate() {
        let last = t + 1 == h;
        let mut next = FxHashSet::default();
        let mut matched = false;
        for s in &cur {
            c.for_each_step(s, last, |st, n| {
                if st.req == guide.req[t] && st.produce == guide.produce[t] && st.sync == want_sync
                {
                    matched = true;
                    if !last {
                        next.insert(n);
                    }
                }
            });
        }
        if last {
            return Ok(matched);
        }
        if next.is_empty() {
            return Ok(false);
        }
        cur = next;
    }
    unreachable!()
}
