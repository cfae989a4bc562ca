/*! Finite arrival and service curves and the algebra used around the analysis.

Curves are kept in the *time domain*: for `k = 1..=N`, `lower(k)` and
`upper(k)` bound the time spanned by any `k` consecutive events of a stream,
where the origin of time counts as event zero. The dual *count domain*
([AlphaCurvePair]) bounds the number of event steps that fit in an interval
of length `Δ`.

Only the `N` stored points are known. Queries past `N` answer "unknown",
i.e. `0` for the lower curve and [Bound::Unbounded] for the upper curve.
*/

use std::cmp::{max, min};
use std::fmt;

use num_rational::Ratio;

use crate::error::{Error, Result};

pub mod io;

/// An upper-curve value: a finite time or "no bound".
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Bound {
    Finite(u64),
    Unbounded,
}

impl Bound {
    pub fn finite(self) -> Option<u64> {
        match self {
            Bound::Finite(v) => Some(v),
            Bound::Unbounded => None,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, Bound::Finite(_))
    }
}

impl std::ops::Add for Bound {
    type Output = Bound;

    fn add(self, other: Bound) -> Bound {
        match (self, other) {
            (Bound::Finite(a), Bound::Finite(b)) => Bound::Finite(a + b),
            _ => Bound::Unbounded,
        }
    }
}

impl From<u64> for Bound {
    fn from(v: u64) -> Self {
        Bound::Finite(v)
    }
}

impl fmt::Display for Bound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Bound::Finite(v) => write!(f, "{v}"),
            Bound::Unbounded => write!(f, "inf"),
        }
    }
}

/// A pair of time-domain curves, tagged with the granularity of the events
/// it describes (one curve index unit = `granularity` fine events).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct XiCurvePair {
    lower: Vec<u64>,
    upper: Vec<Bound>,
    granularity: u32,
}

/// One violated invariant, found by [validate].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub k: usize,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.message)
    }
}

impl XiCurvePair {
    /// Builds a pair without checking invariants; see [XiCurvePair::new].
    pub fn from_parts(lower: Vec<u64>, upper: Vec<Bound>, granularity: u32) -> Self {
        XiCurvePair {
            lower,
            upper,
            granularity,
        }
    }

    /// Builds a validated pair.
    pub fn new(lower: Vec<u64>, upper: Vec<Bound>, granularity: u32) -> Result<Self> {
        let pair = Self::from_parts(lower, upper, granularity);
        let diags = validate(&pair);
        if diags.is_empty() {
            Ok(pair)
        } else {
            Err(Error::InvalidCurve(join_diagnostics(&diags)))
        }
    }

    /// Convenience constructor for pairs whose upper curve is finite everywhere.
    pub fn finite(lower: &[u64], upper: &[u64]) -> Result<Self> {
        Self::new(
            lower.to_vec(),
            upper.iter().copied().map(Bound::Finite).collect(),
            1,
        )
    }

    /// Number of stored points `N`.
    pub fn len(&self) -> usize {
        self.lower.len()
    }

    pub fn is_empty(&self) -> bool {
        self.lower.is_empty()
    }

    pub fn granularity(&self) -> u32 {
        self.granularity
    }

    pub fn lower_points(&self) -> &[u64] {
        &self.lower
    }

    pub fn upper_points(&self) -> &[Bound] {
        &self.upper
    }

    /// `lower(k)`; `0` for `k = 0` and for `k > N`.
    pub fn lower(&self, k: usize) -> u64 {
        if k == 0 || k > self.lower.len() {
            0
        } else {
            self.lower[k - 1]
        }
    }

    /// `upper(k)`; `0` for `k = 0` and unbounded for `k > N`.
    pub fn upper(&self, k: usize) -> Bound {
        if k == 0 {
            Bound::Finite(0)
        } else if k > self.upper.len() {
            Bound::Unbounded
        } else {
            self.upper[k - 1]
        }
    }

    /// Largest constant appearing in the pair (finite values only).
    pub fn max_constant(&self) -> u64 {
        let lo = self.lower.iter().copied().max().unwrap_or(0);
        let up = self
            .upper
            .iter()
            .filter_map(|b| b.finite())
            .max()
            .unwrap_or(0);
        max(lo, up)
    }

    pub fn with_granularity(mut self, g: u32) -> Self {
        self.granularity = g;
        self
    }

    /// True when the pair is pointwise at least as tight as `other`.
    pub fn is_tighter_or_equal(&self, other: &XiCurvePair) -> bool {
        self.len() == other.len()
            && (1..=self.len())
                .all(|k| self.lower(k) >= other.lower(k) && self.upper(k) <= other.upper(k))
    }
}

fn join_diagnostics(diags: &[Diagnostic]) -> String {
    diags
        .iter()
        .map(|d| d.message.as_str())
        .collect::<Vec<_>>()
        .join("; ")
}

/// Checks every structural invariant of a pair (ordering, monotonicity,
/// matching lengths, positive granularity). Closure tightness is not checked.
pub fn validate(pair: &XiCurvePair) -> Vec<Diagnostic> {
    let mut diags = Vec::new();
    if pair.granularity == 0 {
        diags.push(Diagnostic {
            k: 0,
            message: "granularity must be at least 1".into(),
        });
    }
    if pair.lower.len() != pair.upper.len() {
        diags.push(Diagnostic {
            k: 0,
            message: format!(
                "length mismatch: {} lower points, {} upper points",
                pair.lower.len(),
                pair.upper.len()
            ),
        });
        return diags;
    }
    for k in 1..=pair.len() {
        if Bound::Finite(pair.lower(k)) > pair.upper(k) {
            diags.push(Diagnostic {
                k,
                message: format!("lower[{k}] > upper[{k}]"),
            });
        }
        if k >= 2 {
            if pair.lower(k) < pair.lower(k - 1) {
                diags.push(Diagnostic {
                    k,
                    message: format!("lower not nondecreasing at k={k}"),
                });
            }
            if pair.upper(k) < pair.upper(k - 1) {
                diags.push(Diagnostic {
                    k,
                    message: format!("upper not nondecreasing at k={k}"),
                });
            }
        }
    }
    diags
}

/// Count-domain pair: event steps per interval length `Δ = 0..=Δmax`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlphaCurvePair {
    lower: Vec<u64>,
    upper: Vec<u64>,
}

impl AlphaCurvePair {
    pub fn new(lower: Vec<u64>, upper: Vec<u64>) -> Result<Self> {
        if lower.is_empty() || lower.len() != upper.len() {
            return Err(Error::InvalidCurve(
                "alpha curves need the same nonzero number of points".into(),
            ));
        }
        for d in 0..lower.len() {
            if lower[d] > upper[d] {
                return Err(Error::InvalidCurve(format!(
                    "alpha lower[{d}] > upper[{d}]"
                )));
            }
            if d > 0 && (lower[d] < lower[d - 1] || upper[d] < upper[d - 1]) {
                return Err(Error::InvalidCurve(format!(
                    "alpha curve not nondecreasing at delta={d}"
                )));
            }
        }
        Ok(AlphaCurvePair { lower, upper })
    }

    pub fn delta_max(&self) -> u64 {
        self.lower.len() as u64 - 1
    }

    pub fn lower(&self, delta: u64) -> u64 {
        self.lower[delta as usize]
    }

    pub fn upper(&self, delta: u64) -> u64 {
        self.upper[delta as usize]
    }
}

/// Time-domain pair of length `n` from a count-domain pair.
///
/// `upper(k) = min{Δ | α_lower(Δ) ≥ k}` and `lower(k) = min{Δ | α_upper(Δ) ≥ k}`,
/// searched over `0..=Δmax`. An upper point with no witness is unbounded; a
/// lower point with no witness is `Δmax + 1`, the largest value the pair
/// still certifies.
pub fn xi_from_alpha(alpha: &AlphaCurvePair, n: usize) -> Result<XiCurvePair> {
    let dmax = alpha.delta_max();
    let mut lower = Vec::with_capacity(n);
    let mut upper = Vec::with_capacity(n);
    for k in 1..=n as u64 {
        let up = (0..=dmax).find(|&d| alpha.lower(d) >= k);
        upper.push(up.map_or(Bound::Unbounded, Bound::Finite));
        let lo = (0..=dmax).find(|&d| alpha.upper(d) >= k);
        lower.push(lo.unwrap_or(dmax + 1));
    }
    XiCurvePair::new(lower, upper, 1)
}

/// Count-domain pair over `0..=delta_max` from a time-domain pair.
///
/// `α_upper(Δ) = max{k ≤ N | lower(k) ≤ Δ}` and
/// `α_lower(Δ) = max{k ≤ N | upper(k) ≤ Δ}`, with `lower(0) = upper(0) = 0`.
/// Counts are capped at `N`: the pair says nothing about longer windows.
pub fn alpha_from_xi(xi: &XiCurvePair, delta_max: u64) -> Result<AlphaCurvePair> {
    let diags = validate(xi);
    if !diags.is_empty() {
        return Err(Error::InvalidCurve(join_diagnostics(&diags)));
    }
    let n = xi.len();
    let mut lower = Vec::with_capacity(delta_max as usize + 1);
    let mut upper = Vec::with_capacity(delta_max as usize + 1);
    for d in 0..=delta_max {
        let up = (0..=n).rev().find(|&k| xi.lower(k) <= d).unwrap_or(0);
        let lo = (0..=n)
            .rev()
            .find(|&k| xi.upper(k) <= Bound::Finite(d))
            .unwrap_or(0);
        upper.push(up as u64);
        lower.push(lo as u64);
    }
    AlphaCurvePair::new(lower, upper)
}

/// Samples a pair every `g` points: `result(k) = x(g·k)` for `k = 1..=⌊N/g⌋`.
pub fn sample(x: &XiCurvePair, g: u32) -> Result<XiCurvePair> {
    if g < 1 {
        return Err(Error::InvalidGranularity(g));
    }
    let g_us = g as usize;
    let n = x.len() / g_us;
    let lower = (1..=n).map(|k| x.lower(g_us * k)).collect();
    let upper = (1..=n).map(|k| x.upper(g_us * k)).collect();
    Ok(XiCurvePair::from_parts(lower, upper, x.granularity * g))
}

/// Results of analyses at several granularities, each stored as measured
/// in coarse events.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoarseCurveSet {
    entries: Vec<(u32, XiCurvePair)>,
}

impl CoarseCurveSet {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, g: u32, pair: XiCurvePair) -> Result<()> {
        if g < 1 {
            return Err(Error::InvalidGranularity(g));
        }
        if self.entries.iter().any(|(h, _)| *h == g) {
            return Err(Error::InvalidCurve(format!("duplicate granularity {g}")));
        }
        let diags = validate(&pair);
        if !diags.is_empty() {
            return Err(Error::InvalidCurve(join_diagnostics(&diags)));
        }
        self.entries.push((g, pair));
        Ok(())
    }

    pub fn entries(&self) -> &[(u32, XiCurvePair)] {
        &self.entries
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// Combines coarse results into a fine pair of length `n`.
///
/// `upper(n) = min{ upper_g(k) | k·g ≥ n }` and `lower(n) = max{ lower_g(k) | k·g ≤ n }`.
pub fn combine(set: &CoarseCurveSet, n: usize) -> Result<XiCurvePair> {
    if set.is_empty() {
        return Err(Error::EmptyCurveSet);
    }
    let mut lower = vec![0u64; n];
    let mut upper = vec![Bound::Unbounded; n];
    for (g, pair) in set.entries() {
        let g = *g as usize;
        for k in 1..=pair.len() {
            let span = k * g;
            // lower bounds every fine point at or beyond k·g
            for m in span..=n {
                lower[m - 1] = max(lower[m - 1], pair.lower(k));
            }
            // upper bounds every fine point at or before k·g
            for m in 1..=min(span, n) {
                upper[m - 1] = min(upper[m - 1], pair.upper(k));
            }
        }
    }
    Ok(XiCurvePair::from_parts(lower, upper, 1))
}

/// Tightens a pair to the fixpoint of the sub/super-additivity and
/// deconvolution rules, which keeps the set of (infinite) streams it
/// accepts unchanged.
///
/// For every `n`:
/// * `upper(n) ≤ upper(a) + upper(n−a)` and `upper(n) ≤ upper(a) − lower(a−n)` for `a > n`,
/// * `lower(n) ≥ lower(a) + lower(n−a)` and `lower(n) ≥ lower(a) − upper(a−n)` for `a > n`.
pub fn causality_closure(x: &XiCurvePair) -> Result<XiCurvePair> {
    let diags = validate(x);
    if !diags.is_empty() {
        return Err(Error::InvalidCurve(join_diagnostics(&diags)));
    }
    let n = x.len();
    // index 0 holds the k = 0 point
    let mut lo: Vec<i64> = std::iter::once(0)
        .chain(x.lower.iter().map(|&v| v as i64))
        .collect();
    let mut up: Vec<Option<i64>> = std::iter::once(Some(0))
        .chain(x.upper.iter().map(|b| b.finite().map(|v| v as i64)))
        .collect();

    let tighter = |cur: Option<i64>, cand: Option<i64>| match (cur, cand) {
        (_, None) => cur,
        (None, Some(c)) => Some(c),
        (Some(a), Some(c)) => Some(min(a, c)),
    };

    loop {
        let mut changed = false;
        for m in 1..=n {
            let mut u = up[m];
            let mut l = lo[m];
            for a in 1..m {
                u = tighter(u, up[a].zip(up[m - a]).map(|(p, q)| p + q));
                l = max(l, lo[a] + lo[m - a]);
            }
            for a in m + 1..=n {
                u = tighter(u, up[a].map(|p| p - lo[a - m]));
                if let Some(q) = up[a - m] {
                    l = max(l, lo[a] - q);
                }
            }
            if let Some(uv) = u {
                if l > uv {
                    return Err(Error::EmptyStreamSet {
                        k: m,
                        lower: l.max(0) as u64,
                        upper: uv.max(0) as u64,
                    });
                }
            }
            if u != up[m] || l != lo[m] {
                up[m] = u;
                lo[m] = l;
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    Ok(XiCurvePair::from_parts(
        lo[1..].iter().map(|&v| v as u64).collect(),
        up[1..]
            .iter()
            .map(|v| v.map_or(Bound::Unbounded, |v| Bound::Finite(v as u64)))
            .collect(),
        x.granularity,
    ))
}

/// Number of coarse points compared by [distance] for a fine curve of
/// length `n`: `⌊n/g⌋`.
pub fn default_kmax(n: usize, g: u32) -> usize {
    n / g.max(1) as usize
}

/// Mean gap between a coarse pair at granularity `g` and the fine pair
/// sampled at multiples of `g`, over `k = 1..=kmax`:
/// the average of `mean(fine.lower(g·k) − coarse.lower(k))` and
/// `mean(coarse.upper(k) − fine.upper(g·k))`.
pub fn distance(
    fine: &XiCurvePair,
    coarse: &XiCurvePair,
    g: u32,
    kmax: usize,
) -> Result<Ratio<i64>> {
    if g < 1 {
        return Err(Error::InvalidGranularity(g));
    }
    if kmax == 0 {
        return Err(Error::OutOfRange("kmax must be at least 1".into()));
    }
    let g = g as usize;
    if g * kmax > fine.len() {
        return Err(Error::OutOfRange(format!(
            "fine curve has {} points, needs {}",
            fine.len(),
            g * kmax
        )));
    }
    if kmax > coarse.len() {
        return Err(Error::OutOfRange(format!(
            "coarse curve has {} points, needs {kmax}",
            coarse.len()
        )));
    }
    let mut lower_gap = 0i64;
    let mut upper_gap = 0i64;
    for k in 1..=kmax {
        lower_gap += fine.lower(g * k) as i64 - coarse.lower(k) as i64;
        let (Some(cu), Some(fu)) = (coarse.upper(k).finite(), fine.upper(g * k).finite()) else {
            return Err(Error::OutOfRange(format!("unbounded upper point at k={k}")));
        };
        upper_gap += cu as i64 - fu as i64;
    }
    let kmax = kmax as i64;
    Ok((Ratio::new(lower_gap, kmax) + Ratio::new(upper_gap, kmax)) / 2)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fin(v: &[u64]) -> Vec<Bound> {
        v.iter().copied().map(Bound::Finite).collect()
    }

    fn pair(lo: &[u64], up: &[u64]) -> XiCurvePair {
        XiCurvePair::from_parts(lo.to_vec(), fin(up), 1)
    }

    #[test]
    fn validate_reports_named_violations() {
        assert!(validate(&pair(&[1, 2, 3], &[2, 4, 6])).is_empty());

        let d = validate(&pair(&[3, 2, 1], &[4, 4, 4]));
        assert!(d
            .iter()
            .any(|d| d.message == "lower not nondecreasing at k=2"));

        let d = validate(&pair(&[2, 3], &[1, 5]));
        assert_eq!(d[0].message, "lower[1] > upper[1]");

        let d = validate(&XiCurvePair::from_parts(vec![1], vec![], 1));
        assert!(d[0].message.contains("length mismatch"));
    }

    #[test]
    fn unknown_points_past_n() {
        let x = pair(&[1, 2], &[3, 4]);
        assert_eq!(x.lower(3), 0);
        assert_eq!(x.upper(3), Bound::Unbounded);
        assert_eq!(x.upper(0), Bound::Finite(0));
    }

    #[test]
    fn xi_from_identity_alpha() {
        let ident: Vec<u64> = (0..=10).collect();
        let a = AlphaCurvePair::new(ident.clone(), ident).unwrap();
        let x = xi_from_alpha(&a, 4).unwrap();
        assert_eq!(x.lower_points(), &[1, 2, 3, 4]);
        assert_eq!(x.upper_points(), fin(&[1, 2, 3, 4]).as_slice());
    }

    #[test]
    fn xi_from_alpha_without_forced_events_is_unbounded() {
        let a = AlphaCurvePair::new(vec![0; 6], vec![3; 6]).unwrap();
        let x = xi_from_alpha(&a, 1).unwrap();
        assert_eq!(x.upper(1), Bound::Unbounded);
    }

    #[test]
    fn alpha_from_xi_examples() {
        let x = pair(&[1, 2, 3], &[1, 2, 3]);
        let a = alpha_from_xi(&x, 3).unwrap();
        for d in 0..=3 {
            assert_eq!(a.upper(d), d);
            assert_eq!(a.lower(d), d);
        }
        let x = XiCurvePair::from_parts(vec![2, 4], vec![Bound::Unbounded; 2], 1);
        let a = alpha_from_xi(&x, 3).unwrap();
        assert_eq!(a.upper(3), 1);
    }

    #[test]
    fn sample_examples() {
        let x = pair(
            &[1, 2, 3, 4, 5, 6, 7, 8, 9],
            &[2, 4, 6, 8, 10, 12, 14, 16, 18],
        );
        assert_eq!(sample(&x, 1).unwrap(), x);
        let s = sample(&x, 3).unwrap();
        assert_eq!(s.lower_points(), &[3, 6, 9]);
        assert_eq!(s.upper_points(), fin(&[6, 12, 18]).as_slice());
        assert_eq!(s.granularity(), 3);

        let x7 = pair(&[1, 2, 3, 4, 5, 6, 7], &[1, 2, 3, 4, 5, 6, 7]);
        assert_eq!(sample(&x7, 3).unwrap().len(), 2);
        assert_eq!(sample(&x7, 0), Err(Error::InvalidGranularity(0)));
    }

    #[test]
    fn combine_reported_points() {
        let mut set = CoarseCurveSet::new();
        set.insert(
            10,
            XiCurvePair::from_parts(vec![0, 0], vec![Bound::Finite(111), Bound::Finite(111)], 10),
        )
        .unwrap();
        set.insert(
            9,
            XiCurvePair::from_parts(vec![0, 0], vec![Bound::Finite(108), Bound::Finite(108)], 9),
        )
        .unwrap();
        let c = combine(&set, 20).unwrap();
        assert_eq!(c.upper(10), Bound::Finite(108));
        assert_eq!(c.upper(19), Bound::Finite(111));
        assert_eq!(c.upper(20), Bound::Finite(111));
    }

    #[test]
    fn combine_single_unit_entry_is_identity() {
        let x = pair(&[1, 3, 4], &[2, 5, 8]);
        let mut set = CoarseCurveSet::new();
        set.insert(1, x.clone()).unwrap();
        assert_eq!(combine(&set, 3).unwrap(), x);
        assert_eq!(
            combine(&CoarseCurveSet::new(), 3),
            Err(Error::EmptyCurveSet)
        );
    }

    #[test]
    fn closure_keeps_tight_pairs() {
        let x = pair(&[2, 4, 6], &[2, 4, 6]);
        assert_eq!(causality_closure(&x).unwrap(), x);
    }

    #[test]
    fn closure_small_example() {
        let c = causality_closure(&pair(&[1, 2, 6], &[4, 5, 7])).unwrap();
        assert_eq!(c.lower_points(), &[1, 2, 6]);
        assert_eq!(c.upper_points(), fin(&[4, 5, 7]).as_slice());
    }

    #[test]
    fn closure_detects_empty_sets() {
        // gaps of exactly 3 cannot fit two gaps into 5
        let x = pair(&[3, 3], &[5, 4]);
        assert!(validate(&x).iter().any(|d| d.message.contains("upper")));
        let x = pair(&[3, 3], &[3, 5]);
        assert!(matches!(
            causality_closure(&x),
            Err(Error::EmptyStreamSet { .. })
        ));
    }

    #[test]
    fn distance_examples() {
        let fine = pair(&[1, 2, 3, 4, 5, 6], &[2, 4, 6, 8, 10, 12]);
        let s = sample(&fine, 2).unwrap();
        assert_eq!(distance(&fine, &s, 2, 3).unwrap(), Ratio::from_integer(0));

        let slack = XiCurvePair::from_parts(
            s.lower_points().iter().map(|v| v - 1).collect(),
            s.upper_points()
                .iter()
                .map(|b| *b + Bound::Finite(1))
                .collect(),
            2,
        );
        assert_eq!(
            distance(&fine, &slack, 2, 3).unwrap(),
            Ratio::from_integer(1)
        );
        assert!(matches!(
            distance(&fine, &s, 2, 4),
            Err(Error::OutOfRange(_))
        ));
    }
}
