use std::fs;

use granrtc::curves::io::format_curve;
use granrtc::curves::{causality_closure, combine, default_kmax, distance, CoarseCurveSet};
use granrtc::engine::{
    analyze_component, explore_network, AnalysisOptions, ComponentAnalysis, WindowBounds,
};
use granrtc::mta::translate_fine;
use granrtc::oracle::{oracle_output_curves, DEFAULT_BUDGET};
use granrtc::{Error, XiCurvePair};
use rayon::prelude::*;

use crate::inputs::{self, Loaded};
use crate::summary::{points, sha256_hex, write_curve, Summary};
use crate::{AnalyzeArgs, Failure};

fn check_granularities(gs: &[u32], n: usize) -> Result<Vec<u32>, Failure> {
    let mut sorted = gs.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.is_empty() || sorted.len() != gs.len() {
        return Err(Failure::Invalid(
            "granularities must be nonempty and distinct".into(),
        ));
    }
    if let Some(&g) = sorted.iter().find(|&&g| g == 0 || g as usize > n) {
        return Err(Failure::Invalid(format!("granularity {g} outside 1..={n}")));
    }
    Ok(sorted)
}

fn config_hash(a: &AnalyzeArgs, l: &Loaded, gs: &[u32]) -> String {
    let mut s = format!("{:?}\n{}", l.spec, format_curve(&l.arrival));
    s += &format!(
        "g={gs:?} n={} h={} closure={} oracle={} budget={:?}",
        l.points, l.horizon, !a.no_closure, a.oracle_check, a.state_budget
    );
    sha256_hex(&s)
}

/// Every coarse point encloses the fine point it samples.
fn encloses(fine: &XiCurvePair, coarse: &XiCurvePair, g: u32) -> bool {
    let g = g as usize;
    (1..=coarse.len())
        .all(|k| coarse.lower(k) <= fine.lower(g * k) && coarse.upper(k) >= fine.upper(g * k))
}

enum OracleVerdict {
    Pass(u64),
    Mismatch(String),
    Skipped(String),
}

fn oracle_check(
    l: &Loaded,
    fine: Option<&WindowBounds>,
    opts: &AnalysisOptions,
) -> Result<OracleVerdict, Failure> {
    let own;
    let fine = match fine {
        Some(b) => b,
        None => {
            let net = translate_fine(&l.spec)?;
            own = explore_network(&net, &l.arrival, l.points, l.horizon, opts)?.bounds;
            &own
        }
    };
    match oracle_output_curves(&l.spec, &l.arrival, l.points, l.horizon, DEFAULT_BUDGET) {
        Ok(o) if o.min == fine.min && o.max == fine.max => Ok(OracleVerdict::Pass(o.runs)),
        Ok(o) => Ok(OracleVerdict::Mismatch(format!(
            "engine min {:?} max {:?}, oracle min {:?} max {:?}",
            fine.min, fine.max, o.min, o.max
        ))),
        Err(Error::BudgetExceeded(m)) => Ok(OracleVerdict::Skipped(m)),
        Err(e) => Err(e.into()),
    }
}

pub fn run(a: &AnalyzeArgs) -> Result<(), Failure> {
    let l = inputs::load(&a.input)?;
    let gs = check_granularities(&a.granularities, l.points)?;
    let opts = AnalysisOptions {
        horizon: Some(l.horizon),
        state_budget: a.state_budget,
    };
    let results: Vec<ComponentAnalysis> = gs
        .par_iter()
        .map(|&g| analyze_component(&l.spec, &l.arrival, g, l.points, &opts))
        .collect::<Result<_, _>>()?;

    let mut set = CoarseCurveSet::new();
    for r in &results {
        set.insert(r.granularity, r.curve.clone())?;
    }
    let combined = combine(&set, l.points)?;
    let closed = (!a.no_closure).then(|| causality_closure(&combined));
    let fine = results.iter().find(|r| r.granularity == 1);
    let verdict = if a.oracle_check {
        Some(oracle_check(
            &l,
            fine.map(|r| &r.exploration.bounds),
            &opts,
        )?)
    } else {
        None
    };

    let io = |e: std::io::Error| Failure::Invalid(format!("{}: {e}", a.out.display()));
    fs::create_dir_all(&a.out).map_err(io)?;
    let mut s = Summary::default();
    s.section("run");
    s.put("version", env!("CARGO_PKG_VERSION"));
    s.put("config_hash", config_hash(a, &l, &gs));
    s.put("model", a.input.model.display());
    s.put("arrival", a.input.arrival.display());
    s.put("points", l.points);
    s.put("horizon", l.horizon);
    s.put(
        "granularities",
        gs.iter()
            .map(|g| g.to_string())
            .collect::<Vec<_>>()
            .join(","),
    );
    for r in &results {
        let g = r.granularity;
        write_curve(&a.out, &format!("g{g}"), &r.curve).map_err(io)?;
        let st = &r.exploration.stats;
        s.section(&format!("g{g}"));
        let (lo, up) = points(&r.curve);
        s.put("lower", lo);
        s.put("upper", up);
        s.put("stalls", r.exploration.bounds.stalls);
        s.put("time_ms", format!("{:.3}", st.elapsed.as_secs_f64() * 1e3));
        s.put("states", st.states);
        s.put("transitions", st.transitions);
        s.put("peak_layer", st.peak_layer);
        if let (Some(f), true) = (fine, g > 1) {
            s.put("encloses_fine", encloses(&f.curve, &r.curve, g));
            match distance(&f.curve, &r.curve, g, default_kmax(l.points, g)) {
                Ok(d) => s.put(
                    "distance",
                    format!("{d} ({:.3})", *d.numer() as f64 / *d.denom() as f64),
                ),
                Err(e) => s.put("distance", format!("n/a ({e})")),
            }
        }
    }
    write_curve(&a.out, "combined", &combined).map_err(io)?;
    s.section("combined");
    let (lo, up) = points(&combined);
    s.put("lower", lo);
    s.put("upper", up);
    match &closed {
        None => s.put("closure", "off"),
        Some(Ok(c)) => {
            write_curve(&a.out, "closed", c).map_err(io)?;
            s.put("closure", "applied");
            let (lo, up) = points(c);
            s.put("closed_lower", lo);
            s.put("closed_upper", up);
        }
        Some(Err(e)) => s.put("closure", format!("failed ({e})")),
    }
    if let Some(v) = &verdict {
        s.section("oracle");
        match v {
            OracleVerdict::Pass(runs) => {
                s.put("verdict", "pass");
                s.put("runs", runs);
            }
            OracleVerdict::Mismatch(m) => {
                s.put("verdict", "mismatch");
                s.put("detail", m);
            }
            OracleVerdict::Skipped(m) => s.put("verdict", format!("skipped ({m})")),
        }
    }
    fs::write(a.out.join("summary.txt"), s.text()).map_err(io)?;
    print!("{}", s.text());
    if let Some(OracleVerdict::Mismatch(m)) = verdict {
        return Err(Failure::Mismatch(m));
    }
    Ok(())
}
