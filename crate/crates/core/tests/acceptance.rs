mod common;

use std::collections::{BTreeSet, HashSet};
use std::path::PathBuf;
use std::time::{Duration, Instant};

use granrtc::curves::{
    causality_closure, combine, default_kmax, distance, sample, Bound, CoarseCurveSet, XiCurvePair,
};
use granrtc::engine::{
    analyze_component, emission_sequences, explore_network, replay_guide, AnalysisOptions, Guide,
};
use granrtc::mta::{coarse_thresholds, load_model, translate_coarse, translate_fine};
use granrtc::oracle::{
    abstract_stream, alive_at, enumerate_prefixes, enumerate_streams, extendable_forever,
    for_each_fine_run, oracle_output_curves, SwitchReason, DEFAULT_BUDGET,
};
use granrtc::Error;
use rand::Rng;

type Check = std::result::Result<String, String>;
type Criterion<'a> = (&'a str, Box<dyn Fn() -> Check + 'a>);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn e2s(e: Error) -> String {
    e.to_string()
}

const INSTANCES: usize = 60;
const FINE_HORIZON: u64 = 10;
const WINDOWS: usize = 4;

fn thresholds() -> Check {
    let start = Instant::now();
    let t = coarse_thresholds(1, 12, 5).map_err(e2s)?;
    ensure((t.y_low, t.y_high) == (2, 3), || {
        format!("b=12 g=5 gave {t:?}")
    })?;
    // Coarse backlog Q can coexist with fine backlog q iff g(Q-1) < q < g(Q+1).
    let window = |v: i64, g: i64| -> (i64, i64) {
        let qs: Vec<i64> = (-2..=v + 2)
            .filter(|&q| g * (q - 1) < v && v < g * (q + 1))
            .collect();
        (qs[0], *qs.last().unwrap())
    };
    for g in 1..=8u32 {
        for b in 0..=30u32 {
            let t = coarse_thresholds(b.max(1), b, g).map_err(e2s)?;
            let gi = g as i64;
            let up = window(b as i64 + 1, gi);
            ensure((t.y_low, t.y_high) == up, || {
                format!("above b={b} g={g}: {t:?} vs {up:?}")
            })?;
            if b >= 1 {
                let t = coarse_thresholds(b, 30, g).map_err(e2s)?;
                let down = window(b as i64 - 1, gi);
                ensure((t.h_low, t.h_high) == down, || {
                    format!("below b={b} g={g}: {t:?} vs {down:?}")
                })?;
            }
        }
    }
    let el = start.elapsed();
    ensure(el < Duration::from_secs(1), || format!("took {el:?}"))?;
    Ok(format!("{el:?}"))
}

fn combination() -> Check {
    let mut set = CoarseCurveSet::new();
    // Only the second coarse upper point is reported; the first is set to the
    // same value, which every monotone curve allows.
    let fin = |v: u64| vec![Bound::Finite(v), Bound::Finite(v)];
    set.insert(10, XiCurvePair::from_parts(vec![0, 0], fin(111), 10))
        .map_err(e2s)?;
    set.insert(9, XiCurvePair::from_parts(vec![0, 0], fin(108), 9))
        .map_err(e2s)?;
    let c = combine(&set, 20).map_err(e2s)?;
    ensure(c.upper(10) == Bound::Finite(108), || {
        format!("upper(10) = {}", c.upper(10))
    })?;
    Ok("upper(10) = 108".into())
}

fn oracle_equivalence(instances: &[common::Instance]) -> Check {
    let start = Instant::now();
    let mut runs = 0;
    for (i, inst) in instances.iter().enumerate() {
        let net = translate_fine(&inst.spec).map_err(e2s)?;
        let e = explore_network(
            &net,
            &inst.arrival,
            WINDOWS,
            FINE_HORIZON,
            &AnalysisOptions::default(),
        )
        .map_err(e2s)?;
        let o = oracle_output_curves(
            &inst.spec,
            &inst.arrival,
            WINDOWS,
            FINE_HORIZON,
            DEFAULT_BUDGET,
        )
        .map_err(e2s)?;
        runs += o.runs;
        ensure(e.bounds.min == o.min && e.bounds.max == o.max, || {
            format!(
                "instance {i}: engine {:?}/{:?} oracle {:?}/{:?}",
                e.bounds.min, e.bounds.max, o.min, o.max
            )
        })?;
    }
    let el = start.elapsed();
    ensure(el < Duration::from_secs(300), || format!("took {el:?}"))?;
    Ok(format!(
        "{} instances, {runs} oracle runs, {el:?}",
        instances.len()
    ))
}

fn coarse_encloses_fine(instances: &[common::Instance]) -> Check {
    let mut compared = 0;
    for (i, inst) in instances.iter().enumerate() {
        let k = 6;
        let fine = translate_fine(&inst.spec).map_err(e2s)?;
        let f = explore_network(
            &fine,
            &inst.arrival,
            k,
            FINE_HORIZON,
            &AnalysisOptions::default(),
        )
        .map_err(e2s)?;
        for g in [2u32, 3] {
            let net = translate_coarse(&inst.spec, g).map_err(e2s)?;
            let input = sample(&inst.arrival, g).map_err(e2s)?;
            let kc = k / g as usize;
            // Coarse windows end on every g-th fine event, so a fine window
            // seen late in the horizon may need a longer coarse run.
            let c = explore_network(
                &net,
                &input,
                kc,
                2 * FINE_HORIZON,
                &AnalysisOptions::default(),
            )
            .map_err(e2s)?;
            for kk in 1..=kc {
                let fk = g as usize * kk - 1;
                if let (Some(fl), Some(cl)) = (f.bounds.min[fk], c.bounds.min[kk - 1]) {
                    compared += 1;
                    ensure(cl <= fl, || {
                        format!("instance {i} g={g} k={kk}: lower {cl} > {fl}")
                    })?;
                }
                if let Some(fu) = f.bounds.max[fk] {
                    compared += 1;
                    let cu = c.bounds.max[kk - 1];
                    ensure(cu.is_some_and(|cu| cu >= fu) || c.bounds.stalls, || {
                        format!("instance {i} g={g} k={kk}: upper {cu:?} < {fu}")
                    })?;
                }
            }
        }
    }
    Ok(format!("{compared} points compared"))
}

fn guide_of(run: &granrtc::oracle::FineRun, g: u32, h: u64) -> Guide {
    let n = h as usize + 1;
    let mut req = vec![false; n];
    for &t in &abstract_stream(&run.input, g).unwrap()[1..] {
        req[t as usize] = true;
    }
    let mut produce = vec![false; n];
    for &t in &abstract_stream(&run.output, g).unwrap()[1..] {
        produce[t as usize] = true;
    }
    let mut sync = vec![None; n];
    for s in &run.switches {
        if s.reason == SwitchReason::Sync {
            sync[s.time as usize] = Some("s".to_string());
        }
    }
    Guide { req, produce, sync }
}

fn abstraction_matching() -> Check {
    let h = 12;
    let mut r = common::rng(11);
    let mut checked = 0;
    for i in 0..30 {
        let inst = common::random_instance(&mut r);
        for g in [2u32, 3] {
            let mut guides: HashSet<Guide> = HashSet::new();
            for_each_fine_run(
                &inst.spec,
                &inst.arrival,
                h,
                50 * DEFAULT_BUDGET,
                &mut |run| {
                    guides.insert(guide_of(run, g, h));
                },
            )
            .map_err(e2s)?;
            let net = translate_coarse(&inst.spec, g).map_err(e2s)?;
            let input = sample(&inst.arrival, g).map_err(e2s)?;
            for guide in &guides {
                checked += 1;
                ensure(replay_guide(&net, &input, guide).map_err(e2s)?, || {
                    format!("instance {i} g={g}: no coarse run for {guide:?}")
                })?;
            }
        }
    }
    Ok(format!("{checked} abstracted runs matched"))
}

fn random_pair(r: &mut impl Rng) -> XiCurvePair {
    loop {
        let n = r.gen_range(1..=4);
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let (mut lo, mut up) = (0, 0);
        for _ in 0..n {
            lo = (lo + r.gen_range(1..=3)).min(8);
            up = (up.max(lo) + r.gen_range(0..=3)).min(8);
            lower.push(lo);
            upper.push(Bound::Finite(up));
        }
        if r.gen_bool(0.2) {
            *upper.last_mut().unwrap() = Bound::Unbounded;
        }
        if let Ok(x) = XiCurvePair::new(lower, upper, 1) {
            return x;
        }
    }
}

/// Prefixes of up to `m` events ending by `t` that extend to an infinite stream.
fn infinite_prefixes(x: &XiCurvePair, m: usize, t: u64) -> Result<BTreeSet<Vec<u64>>, String> {
    let mut out = BTreeSet::new();
    for len in 1..=m {
        for s in enumerate_streams(x, len, t).map_err(e2s)? {
            if extendable_forever(&s, x) {
                out.insert(s);
            }
        }
    }
    Ok(out)
}

fn closure_correctness() -> Check {
    let mut r = common::rng(5);
    let (mut empty, mut tightened) = (0, 0);
    for _ in 0..300 {
        let x = random_pair(&mut r);
        let before = infinite_prefixes(&x, 5, 16)?;
        let c = match causality_closure(&x) {
            Ok(c) => c,
            Err(Error::EmptyStreamSet { .. }) => {
                empty += 1;
                ensure(before.is_empty(), || {
                    format!("{x:?} reported empty but accepts {before:?}")
                })?;
                continue;
            }
            Err(e) => return Err(e.to_string()),
        };
        let after = infinite_prefixes(&c, 5, 16)?;
        ensure(before == after, || {
            format!("{x:?}: stream sets differ after closure")
        })?;
        ensure(c.is_tighter_or_equal(&x), || {
            format!("{x:?} loosened to {c:?}")
        })?;
        ensure(causality_closure(&c).map_err(e2s)? == c, || {
            format!("{x:?} not idempotent")
        })?;
        if c != x {
            tightened += 1;
        }
        if x.len() >= 3 {
            let up = match x.upper(3) {
                Bound::Finite(u) => x.upper(1).min(Bound::Finite(u.saturating_sub(x.lower(2)))),
                Bound::Unbounded => x.upper(1),
            };
            let lo = x.lower(1).max(
                x.upper(2)
                    .finite()
                    .map_or(0, |u| x.lower(3).saturating_sub(u)),
            );
            ensure(c.upper(1) <= up && c.lower(1) >= lo, || {
                format!(
                    "{x:?}: window 1 is [{}, {}], expected within [{lo}, {up}]",
                    c.lower(1),
                    c.upper(1)
                )
            })?;
        }
    }
    Ok(format!("300 pairs, {tightened} tightened, {empty} empty"))
}

fn example_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../models/sleep_run")
}

fn speedup_trend() -> Check {
    let dir = example_dir();
    let spec = load_model(&dir.join("sleep_run.mta")).map_err(e2s)?;
    let arrival = granrtc::curves::io::load_curve(&dir.join("arrival.xi")).map_err(e2s)?;
    let n = arrival.len();
    let opts = AnalysisOptions {
        horizon: Some(110),
        state_budget: None,
    };
    let mut times = Vec::new();
    let mut curves = Vec::new();
    for g in 1..=4u32 {
        let start = Instant::now();
        let a = analyze_component(&spec, &arrival, g, n, &opts).map_err(e2s)?;
        times.push(start.elapsed());
        curves.push(a.curve);
    }
    let mut dist = Vec::new();
    for g in 2..=4u32 {
        let d =
            distance(&curves[0], &curves[g as usize - 1], g, default_kmax(n, g)).map_err(e2s)?;
        dist.push(d);
    }
    let report = format!(
        "times {:?}, distances {}",
        times,
        dist.iter()
            .map(|d| d.to_string())
            .collect::<Vec<_>>()
            .join(" ")
    );
    ensure(times[0] >= Duration::from_secs(10), || {
        format!("g=1 too fast: {report}")
    })?;
    ensure(times.windows(2).all(|w| w[1] < w[0]), || {
        format!("not decreasing: {report}")
    })?;
    ensure(times[3] * 10 <= times[0], || {
        format!("g=4 under 10x faster: {report}")
    })?;
    ensure(dist.iter().all(|d| *d.numer() >= 0), || {
        format!("negative distance: {report}")
    })?;
    ensure(dist.windows(2).all(|w| w[0] <= w[1]), || {
        format!("distance not monotone: {report}")
    })?;
    Ok(report)
}

fn generator_language() -> Check {
    let h = 12;
    let mut r = common::rng(3);
    let mut total = 0;
    for i in 0..60 {
        let x = common::random_curve(&mut r, 4, 6, true);
        let engine: BTreeSet<Vec<u64>> = emission_sequences(&x, h)
            .map_err(e2s)?
            .into_iter()
            .collect();
        let mut oracle = BTreeSet::new();
        for m in 1..=h as usize + 1 {
            for s in enumerate_streams(&x, m, h).map_err(e2s)? {
                if alive_at(&s, &x, h) {
                    oracle.insert(s);
                }
            }
        }
        let prefixes: BTreeSet<Vec<u64>> = enumerate_prefixes(&x, h)
            .map_err(e2s)?
            .into_iter()
            .collect();
        ensure(engine == oracle && oracle == prefixes, || {
            format!(
                "curve {i} {x:?}: {} engine vs {} oracle sequences",
                engine.len(),
                oracle.len()
            )
        })?;
        total += engine.len();
    }
    Ok(format!("60 curves, {total} sequences"))
}

fn main() {
    let mut r = common::rng(7);
    let instances: Vec<common::Instance> = (0..INSTANCES)
        .map(|_| common::random_instance(&mut r))
        .collect();
    let criteria: Vec<Criterion> = vec![
        ("coarse thresholds", Box::new(thresholds)),
        ("combination anchor", Box::new(combination)),
        (
            "engine equals oracle",
            Box::new(|| oracle_equivalence(&instances)),
        ),
        (
            "coarse bounds enclose fine bounds",
            Box::new(|| coarse_encloses_fine(&instances)),
        ),
        (
            "fine runs abstract to coarse runs",
            Box::new(abstraction_matching),
        ),
        ("closure correctness", Box::new(closure_correctness)),
        ("speedup trend", Box::new(speedup_trend)),
        ("generator language", Box::new(generator_language)),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let res = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check))
            .unwrap_or_else(|_| Err("panicked".into()));
        match res {
            Ok(info) => println!("PASS {} {name}: {info}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name}: {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
