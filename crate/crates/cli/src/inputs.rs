use std::path::Path;

use granrtc::curves::io::load_curve;
use granrtc::engine::{default_horizon, explore_network, AnalysisOptions};
use granrtc::mta::{load_model, translate_fine};
use granrtc::{Error, MtaSpec, XiCurvePair};

use crate::{Failure, InputArgs};

pub struct Loaded {
    pub spec: MtaSpec,
    pub arrival: XiCurvePair,
    pub points: usize,
    pub horizon: u64,
}

fn located(path: &Path, e: Error) -> Failure {
    match e {
        Error::Io { .. } => Failure::Invalid(e.to_string()),
        _ => Failure::Invalid(format!("{}: {e}", path.display())),
    }
}

pub fn load(a: &InputArgs) -> Result<Loaded, Failure> {
    let spec = load_model(&a.model).map_err(|e| located(&a.model, e))?;
    let arrival = load_curve(&a.arrival).map_err(|e| located(&a.arrival, e))?;
    let points = a.points.unwrap_or(arrival.len());
    if points == 0 {
        return Err(Failure::Invalid("--points must be at least 1".into()));
    }
    let horizon = a
        .horizon
        .unwrap_or_else(|| default_horizon(&spec, &arrival, points));
    // Compiling the fine network checks the curves the engine relies on.
    let net = translate_fine(&spec)?;
    let probe = AnalysisOptions {
        horizon: Some(0),
        state_budget: None,
    };
    explore_network(&net, &arrival, 1, 0, &probe).map_err(|e| located(&a.arrival, e))?;
    Ok(Loaded {
        spec,
        arrival,
        points,
        horizon,
    })
}

pub fn validate(a: &InputArgs) -> Result<(), Failure> {
    let l = load(a)?;
    println!(
        "ok: {} modes, arrival curve with {} points, horizon {}",
        l.spec.modes.len(),
        l.arrival.len(),
        l.horizon
    );
    Ok(())
}
