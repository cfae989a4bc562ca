//! Automata networks produced by the M-TA translations.

use crate::curves::{Bound, XiCurvePair};

/// A backlog exit. For `above`, the exit may fire when `q ≥ may` and must
/// fire when `q > must`; for `below`, may when `q ≤ may`, must when `q < must`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThresholdExit {
    pub may: i64,
    pub must: i64,
    pub target: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeMode {
    pub name: String,
    pub dwell_min: u64,
    pub dwell_max: Option<u64>,
    pub timeout_target: Option<usize>,
    pub above: Option<ThresholdExit>,
    pub below: Option<ThresholdExit>,
    pub syncs: Vec<(String, usize)>,
}

impl PeMode {
    pub fn sync_target(&self, signal: &str) -> Option<usize> {
        self.syncs
            .iter()
            .find(|(a, _)| a == signal)
            .map(|&(_, t)| t)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PeLocationKind {
    /// `S_i`: waiting out the minimum dwell time.
    Dwell,
    /// `S_i1`: backlog within range.
    Steady,
    /// `S_inc`: coarse backlog inside the `above` threshold window.
    Rising,
    /// `S_dec`: coarse backlog inside the `below` threshold window.
    Falling,
}

/// The processing element. It counts backlog (fine or coarse) and switches modes.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProcessingElement {
    pub modes: Vec<PeMode>,
    pub initial_mode: usize,
    pub initial_backlog: u32,
    /// Forced exits fire in the fixed order above, below, timeout and
    /// nothing else may fire. Otherwise every enabled exit is a choice.
    pub deterministic: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoarseService {
    /// Earliest first coarse service after mode entry, `ψ^L(1)`.
    pub trans_min: u64,
    /// Latest first coarse service after mode entry, `ψ^U(g)`.
    pub trans_max: Bound,
    /// Service curve sampled at the granularity.
    pub curve: XiCurvePair,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ServiceModel {
    /// One generator per mode, restarted on mode entry.
    Fine { curves: Vec<Option<XiCurvePair>> },
    /// A transient clock followed by a generator of the sampled curve, per mode.
    Coarse {
        g: u32,
        modes: Vec<Option<CoarseService>>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Network {
    pub granularity: u32,
    pub pe: ProcessingElement,
    pub sm: ServiceModel,
}

impl Network {
    pub fn new(granularity: u32, pe: ProcessingElement, sm: ServiceModel) -> Self {
        Network {
            granularity,
            pe,
            sm,
        }
    }

    pub fn is_coarse(&self) -> bool {
        matches!(self.sm, ServiceModel::Coarse { .. })
    }

    /// PE locations as (mode name, kind).
    pub fn pe_locations(&self) -> Vec<(String, PeLocationKind)> {
        let kinds: &[PeLocationKind] = if self.is_coarse() {
            &[
                PeLocationKind::Dwell,
                PeLocationKind::Steady,
                PeLocationKind::Rising,
                PeLocationKind::Falling,
            ]
        } else {
            &[PeLocationKind::Dwell, PeLocationKind::Steady]
        };
        self.pe
            .modes
            .iter()
            .flat_map(|m| kinds.iter().map(move |&k| (m.name.clone(), k)))
            .collect()
    }

    /// Number of SM generator instantiations, one per mode.
    pub fn sm_generators(&self) -> usize {
        self.pe.modes.len()
    }

    /// Location of an active mode with backlog `q`.
    pub fn classify(&self, mode: usize, q: u32) -> PeLocationKind {
        if !self.is_coarse() {
            return PeLocationKind::Steady;
        }
        let m = &self.pe.modes[mode];
        let q = q as i64;
        if m.above.as_ref().is_some_and(|a| q >= a.may) {
            PeLocationKind::Rising
        } else if m.below.as_ref().is_some_and(|b| q <= b.may) {
            PeLocationKind::Falling
        } else {
            PeLocationKind::Steady
        }
    }
}
