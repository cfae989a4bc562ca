use granrtc::curves::io::{format_curve, parse_curve};
use granrtc::curves::{
    alpha_from_xi, causality_closure, sample, xi_from_alpha, Bound, XiCurvePair,
};
use granrtc::oracle::{abstract_stream, stream_satisfies};
use proptest::prelude::*;

fn pair_strategy(max_len: usize) -> impl Strategy<Value = XiCurvePair> {
    prop::collection::vec((0u64..4, 0u64..4, any::<bool>()), 1..=max_len).prop_map(|steps| {
        let (mut lo, mut up) = (0, 0);
        let mut lower = Vec::new();
        let mut upper = Vec::new();
        let mut open = false;
        for (dl, du, inf) in steps {
            lo += dl;
            up = up.max(lo) + du;
            open |= inf && lower.len() > 1;
            lower.push(lo);
            upper.push(if open {
                Bound::Unbounded
            } else {
                Bound::Finite(up)
            });
        }
        XiCurvePair::new(lower, upper, 1).unwrap()
    })
}

fn stream_strategy() -> impl Strategy<Value = Vec<u64>> {
    prop::collection::vec(0u64..5, 0..12).prop_map(|gaps| {
        let mut s = vec![0];
        for g in gaps {
            s.push(s.last().unwrap() + g);
        }
        s
    })
}

/// Window bounds of `s` for `k = 1..=n`, widened by `slack`.
fn tightest_pair(s: &[u64], n: usize, slack: u64) -> XiCurvePair {
    let mut lower = Vec::new();
    let mut upper = Vec::new();
    for k in 1..=n {
        let d: Vec<u64> = s.windows(k + 1).map(|w| w[k] - w[0]).collect();
        lower.push(d.iter().min().unwrap().saturating_sub(slack));
        upper.push(Bound::Finite(d.iter().max().unwrap() + slack));
    }
    XiCurvePair::new(lower, upper, 1).unwrap()
}

proptest! {
    #[test]
    fn closure_is_additive_and_tighter(x in pair_strategy(6)) {
        if let Ok(c) = causality_closure(&x) {
            prop_assert!(c.is_tighter_or_equal(&x));
            prop_assert_eq!(causality_closure(&c).unwrap(), c.clone());
            let n = c.len();
            for a in 1..n {
                for b in 1..=n - a {
                    prop_assert!(c.lower(a + b) >= c.lower(a) + c.lower(b));
                    prop_assert!(c.upper(a + b) <= c.upper(a) + c.upper(b));
                }
            }
        }
    }

    #[test]
    fn sampling_composes(x in pair_strategy(12), a in 1u32..4, b in 1u32..4) {
        let twice = sample(&sample(&x, a).unwrap(), b).unwrap();
        prop_assert_eq!(twice, sample(&x, a * b).unwrap());
    }

    #[test]
    fn abstraction_keeps_sampled_bounds(s in stream_strategy(), n in 1usize..7, slack in 0u64..3, g in 1u32..4) {
        prop_assume!(s.len() > n);
        let x = tightest_pair(&s, n, slack);
        prop_assert!(stream_satisfies(&s, &x));
        let coarse = abstract_stream(&s, g).unwrap();
        prop_assert!(stream_satisfies(&coarse, &sample(&x, g).unwrap()));
    }

    #[test]
    fn alpha_round_trip(x in pair_strategy(6)) {
        prop_assume!(x.upper(x.len()).is_finite());
        let dmax = x.max_constant();
        let alpha = alpha_from_xi(&x, dmax).unwrap();
        prop_assert_eq!(xi_from_alpha(&alpha, x.len()).unwrap(), x);
    }

    #[test]
    fn curve_text_round_trip(x in pair_strategy(8)) {
        prop_assert_eq!(parse_curve(&format_curve(&x)).unwrap(), x);
    }
}
