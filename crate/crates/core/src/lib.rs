/*!
# granrtc

Timing analysis of power-managed components described as mode-based timed
automata (M-TA), driven by finite arrival and service curves.

The crate is organized bottom-up:

* [curves] holds finite curve pairs and the curve algebra used around the
  analysis (pseudo-inversion, sampling at a granularity, combination of
  several coarse results, causality closure, and a distance metric).
* [mta] holds the component model and its translation into a network of
  automata, either at fine granularity or abstracted to coarse events.
* [engine] explores such networks exhaustively in integer time and reports
  exact minimum and maximum windows of the output stream.
* [oracle] is an independent brute-force ground truth over concrete event
  streams, used to certify the engine and the translations on tiny inputs.
*/

pub mod curves;
pub mod engine;
pub mod error;
pub mod mta;
pub mod oracle;

pub use curves::{AlphaCurvePair, Bound, CoarseCurveSet, XiCurvePair};
pub use error::{Error, Result};
pub use mta::{Mode, MtaSpec, MtaTransition, Thresholds};
