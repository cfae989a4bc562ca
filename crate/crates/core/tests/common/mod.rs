#![allow(dead_code)]

use granrtc::curves::{causality_closure, Bound, XiCurvePair};
use granrtc::engine::Generator;
use granrtc::mta::{Mode, MtaSpec, TransitionKind};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Random closed curve with `lower(1) ≥ 1` whose generator never blocks.
pub fn random_curve(
    r: &mut StdRng,
    max_len: usize,
    max_const: u64,
    allow_inf: bool,
) -> XiCurvePair {
    loop {
        let n = r.gen_range(1..=max_len);
        let mut lower = Vec::with_capacity(n);
        let mut upper = Vec::with_capacity(n);
        let mut lo = 0;
        let mut up = 0;
        for _ in 0..n {
            lo = r.gen_range(lo.max(1)..=max_const.max(lo.max(1)));
            up = r.gen_range(lo.max(up)..=max_const.max(lo.max(up)));
            lower.push(lo);
            upper.push(Bound::Finite(up));
        }
        if allow_inf && r.gen_bool(0.2) {
            let from = r.gen_range(0..n);
            for u in upper.iter_mut().skip(from) {
                *u = Bound::Unbounded;
            }
        }
        let Ok(x) = XiCurvePair::new(lower, upper, 1) else {
            continue;
        };
        let Ok(x) = causality_closure(&x) else {
            continue;
        };
        if x.lower(1) == 0 {
            continue;
        }
        match Generator::compile(&x, false) {
            Ok(g) if g.is_nonblocking() => return x,
            _ => continue,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Instance {
    pub spec: MtaSpec,
    pub arrival: XiCurvePair,
}

/// At most two modes, curves of length at most 4 with constants at most 6.
pub fn random_instance(r: &mut StdRng) -> Instance {
    loop {
        let arrival = random_curve(r, 4, 6, false);
        let two = r.gen_bool(0.75);
        let mut modes = Vec::new();
        let count = if two { 2 } else { 1 };
        for i in 0..count {
            let service = if two && i == 0 && r.gen_bool(0.5) {
                None
            } else {
                let inf = r.gen_bool(0.3);
                Some(random_curve(r, 4, 6, inf))
            };
            let id = ["a", "b"][i];
            let other = ["b", "a"][i];
            let mut m = Mode::new(id, service);
            m.dwell_min = r.gen_range(1..=3);
            if two {
                match r.gen_range(0..4) {
                    0 => {
                        let high = r.gen_range(0..=3);
                        m = m
                            .backlog(0, Some(high))
                            .on(TransitionKind::BufferAbove, other);
                    }
                    1 => {
                        let low = r.gen_range(1..=2);
                        m = m.backlog(low, None).on(TransitionKind::BufferBelow, other);
                    }
                    2 => {
                        let u = m.dwell_min + r.gen_range(0..=3);
                        m.dwell_max = Bound::Finite(u);
                        m = m.on(TransitionKind::Timeout, other);
                    }
                    _ => {
                        m = m.on(TransitionKind::Sync("s".into()), other);
                    }
                }
            }
            modes.push(m);
        }
        let spec = MtaSpec::new(modes, "a", 0);
        if spec.validate().is_ok() {
            return Instance { spec, arrival };
        }
    }
}
