//! Exhaustive integer-time exploration of automata networks.
//!
//! A network is explored layer by layer, one layer per instant up to a
//! horizon. Each state carries, for every window size `K`, the latest and
//! earliest instant at which a window of `K` output events could have
//! started. This yields the exact minimum and maximum window lengths over
//! all runs without enumerating runs.

use crate::curves::{self, Bound, XiCurvePair};
use crate::error::{Error, Result};
use crate::mta::{translate_coarse, MtaSpec};

pub mod explore;
pub mod generator;
pub mod network;
pub mod step;

pub use explore::{Exploration, ExploreStats, Guide, WindowBounds};
pub use generator::{emission_sequences, Generator};
pub use network::{Network, PeLocationKind};

use explore::ExploreOptions;
use step::Compiled;

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AnalysisOptions {
    /// Last instant explored; see [default_horizon] when `None`.
    pub horizon: Option<u64>,
    /// Abort once this many states (summed over instants) were visited.
    pub state_budget: Option<u64>,
}

/// `N · max(last finite input upper, last finite service upper) + max finite dwell maximum`,
/// all measured on the fine model.
pub fn default_horizon(spec: &MtaSpec, arrival: &XiCurvePair, n: usize) -> u64 {
    let last_finite = |x: &XiCurvePair| {
        x.upper_points()
            .iter()
            .filter_map(|b| b.finite())
            .max()
            .unwrap_or(x.max_constant())
    };
    let mut span = last_finite(arrival);
    for m in &spec.modes {
        if let Some(s) = &m.service {
            span = span.max(last_finite(s));
        }
    }
    let dwell = spec
        .modes
        .iter()
        .filter_map(|m| m.dwell_max.finite().or(Some(m.dwell_min)))
        .max()
        .unwrap_or(0);
    n as u64 * span.max(1) + dwell
}

/// Explores `net` driven by `input` (already at the network's granularity),
/// for window sizes `1..=k_max`.
pub fn explore_network(
    net: &Network,
    input: &XiCurvePair,
    k_max: usize,
    horizon: u64,
    opts: &AnalysisOptions,
) -> Result<Exploration> {
    let c = Compiled::new(net, input)?;
    explore::explore(
        &c,
        k_max,
        &ExploreOptions {
            horizon,
            detect_stall: true,
            state_budget: opts.state_budget,
        },
    )
}

/// Minimum distance of `k + 1` consecutive output events; `0` if no such
/// window completes before the horizon.
pub fn analyze_lower(net: &Network, input: &XiCurvePair, k: usize, horizon: u64) -> Result<u64> {
    if k == 0 {
        return Ok(0);
    }
    let e = explore_network(net, input, k, horizon, &AnalysisOptions::default())?;
    Ok(e.bounds.min[k - 1].unwrap_or(0))
}

/// Maximum distance of `k + 1` consecutive output events; unbounded if the
/// output may stall forever or no such window completes.
pub fn analyze_upper(net: &Network, input: &XiCurvePair, k: usize, horizon: u64) -> Result<Bound> {
    if k == 0 {
        return Ok(Bound::Finite(0));
    }
    let e = explore_network(net, input, k, horizon, &AnalysisOptions::default())?;
    Ok(upper_point(&e.bounds, k))
}

fn upper_point(b: &WindowBounds, k: usize) -> Bound {
    if b.stalls {
        return Bound::Unbounded;
    }
    match b.max[k - 1] {
        Some(v) => Bound::Finite(v),
        None => Bound::Unbounded,
    }
}

/// Output curve from raw window bounds, made nondecreasing. A point without
/// a completed window keeps the previous lower value and is unbounded above.
pub fn output_curve(b: &WindowBounds, granularity: u32) -> XiCurvePair {
    let n = b.min.len();
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    let mut lo = 0;
    let mut run = Bound::Finite(0);
    for k in 1..=n {
        lo = b.min[k - 1].unwrap_or(0).max(lo);
        lower.push(lo);
        run = run.max(upper_point(b, k));
        upper.push(run);
    }
    XiCurvePair::from_parts(lower, upper, granularity)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ComponentAnalysis {
    pub granularity: u32,
    /// Output curve in coarse events, `⌊n/g⌋` points.
    pub curve: XiCurvePair,
    pub exploration: Exploration,
    pub horizon: u64,
}

/// Output curve of a component at granularity `g` for an `n`-point arrival curve.
pub fn analyze_component(
    spec: &MtaSpec,
    arrival: &XiCurvePair,
    g: u32,
    n: usize,
    opts: &AnalysisOptions,
) -> Result<ComponentAnalysis> {
    if g < 1 {
        return Err(Error::InvalidGranularity(g));
    }
    let net = translate_coarse(spec, g)?;
    let input = curves::sample(arrival, g)?;
    let k_max = curves::default_kmax(n, g);
    if k_max == 0 {
        return Err(Error::OutOfRange(format!(
            "granularity {g} exceeds the number of points {n}"
        )));
    }
    let horizon = opts
        .horizon
        .unwrap_or_else(|| default_horizon(spec, arrival, n));
    let exploration = explore_network(&net, &input, k_max, horizon, opts)?;
    Ok(ComponentAnalysis {
        granularity: g,
        curve: output_curve(&exploration.bounds, g),
        exploration,
        horizon,
    })
}

/// True when the network admits a run with the observable behaviour of `guide`.
pub fn replay_guide(net: &Network, input: &XiCurvePair, guide: &Guide) -> Result<bool> {
    let c = Compiled::new(net, input)?;
    explore::replay(&c, guide)
}
