use granrtc::engine::{explore_network, AnalysisOptions};
use granrtc::mta::translate_fine;
use granrtc::oracle::oracle_output_curves;
use granrtc::Error;

use crate::{inputs, Failure, OracleArgs};

fn show(v: Option<u64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| v.to_string())
}

pub fn run(a: &OracleArgs) -> Result<(), Failure> {
    let l = inputs::load(&a.input)?;
    let o = match oracle_output_curves(&l.spec, &l.arrival, l.points, l.horizon, a.budget) {
        Ok(o) => o,
        Err(Error::BudgetExceeded(m)) => {
            return Err(Failure::Budget(format!(
                "instance too large for the oracle ({m}); lower --points or --horizon, or raise --budget"
            )))
        }
        Err(e) => return Err(e.into()),
    };
    let net = translate_fine(&l.spec)?;
    let e = explore_network(
        &net,
        &l.arrival,
        l.points,
        l.horizon,
        &AnalysisOptions::default(),
    )?;
    let b = &e.bounds;
    println!("horizon={} runs={}", l.horizon, o.runs);
    println!(
        "{:>4} {:>10} {:>10} {:>10} {:>10}",
        "k", "engine_min", "oracle_min", "engine_max", "oracle_max"
    );
    let mut ok = true;
    for k in 0..l.points {
        let same = b.min[k] == o.min[k] && b.max[k] == o.max[k];
        ok &= same;
        println!(
            "{:>4} {:>10} {:>10} {:>10} {:>10}{}",
            k + 1,
            show(b.min[k]),
            show(o.min[k]),
            show(b.max[k]),
            show(o.max[k]),
            if same { "" } else { "  <- differs" }
        );
    }
    if ok {
        println!("verdict=pass");
        Ok(())
    } else {
        println!("verdict=mismatch");
        Err(Failure::Mismatch("engine and oracle disagree".into()))
    }
}
