use std::collections::HashMap;
use std::io::BufReader;

use almab_core::bandit::DelaySpec;
use almab_core::distsim::{
    amdahl_speedup, amdahl_time, fit_serial_fraction, gustafson_speedup, optimal_agents, parallel_efficiency,
    simulate_async_run, AsyncPolicy, EventKind, Oracle, ScalingParams, SimConfig, SimTrace, TaskDurationModel,
};
use almab_core::seed::rng_from;
use almab_core::Result;
use proptest::prelude::*;

struct RoundRobin {
    arms: usize,
    next: usize,
    seen: usize,
}

impl AsyncPolicy for RoundRobin {
    fn propose(&mut self, _pending: &[usize]) -> Result<usize> {
        self.next += 1;
        Ok((self.next - 1) % self.arms)
    }
    fn observe(&mut self, _arm: usize, _reward: f64) -> Result<()> {
        self.seen += 1;
        Ok(())
    }
}

struct Linear;

impl Oracle for Linear {
    fn evaluate(&mut self, arm: usize, query: usize) -> Result<f64> {
        Ok(arm as f64 + 1e-3 * query as f64)
    }
}

fn run(cfg: &SimConfig, seed: u64) -> (SimTrace, usize) {
    let mut p = RoundRobin { arms: 7, next: 0, seen: 0 };
    let out = simulate_async_run(&mut p, &mut Linear, cfg, &mut rng_from(seed)).unwrap();
    (out.trace, p.seen)
}

fn config(k: usize, budget: usize, lognormal: bool, update: f64, tau: u64) -> SimConfig {
    let durations = if lognormal {
        TaskDurationModel::lognormal_with_mean(1.0, 0.3).unwrap()
    } else {
        TaskDurationModel::Constant(1.0)
    };
    SimConfig {
        update_cost: update,
        delay: DelaySpec::uniform(tau),
        ..SimConfig::new(k, budget, durations)
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn traces_conserve_work(k in 1usize..9, extra in 0usize..40, lognormal in any::<bool>(), update in 0.0f64..0.3, tau in 0u64..4, seed in any::<u64>()) {
        let budget = k + extra;
        let cfg = config(k, budget, lognormal, update, tau);
        let (trace, seen) = run(&cfg, seed);
        prop_assert_eq!(trace.count(EventKind::Complete), budget);
        prop_assert_eq!(trace.count(EventKind::Dispatch), budget);
        prop_assert_eq!(seen, budget);
        // ordered by time, then agent, then kind
        for w in trace.events.windows(2) {
            let a = (w[0].time, w[0].agent, w[0].kind);
            let b = (w[1].time, w[1].agent, w[1].kind);
            prop_assert!(a.0 < b.0 || (a.0 == b.0 && (a.1, a.2) <= (b.1, b.2)), "{:?} then {:?}", a, b);
        }
        // no agent holds two tasks at once
        let mut busy: HashMap<usize, bool> = HashMap::new();
        for e in &trace.events {
            match e.kind {
                EventKind::Dispatch => prop_assert!(!busy.insert(e.agent, true).unwrap_or(false)),
                EventKind::Complete => prop_assert!(busy.insert(e.agent, false).unwrap_or(false)),
                EventKind::PosteriorUpdate => {}
            }
        }
        let last_complete = trace.events.iter().filter(|e| e.kind == EventKind::Complete).map(|e| e.time).fold(0.0, f64::max);
        prop_assert!(trace.wall_clock >= last_complete);
        let (again, _) = run(&cfg, seed);
        prop_assert_eq!(trace, again);
    }

    #[test]
    fn more_agents_never_slow_constant_runs(update in 0.0f64..0.5, budget in 16usize..64) {
        let mut last = f64::INFINITY;
        for k in [1, 2, 4, 8, 16] {
            let (t, _) = run(&config(k, budget, false, update, 0), 0);
            prop_assert!(t.wall_clock <= last + 1e-9, "K={} {} > {}", k, t.wall_clock, last);
            last = t.wall_clock;
        }
    }

    #[test]
    fn serial_fraction_round_trip(p in 0.0f64..1.0) {
        let pts: Vec<(usize, f64)> = [1, 2, 4, 8, 16]
            .iter()
            .map(|&k| (k, amdahl_speedup(&ScalingParams::amdahl(p), k).unwrap()))
            .collect();
        prop_assert!((fit_serial_fraction(&pts).unwrap() - p).abs() < 1e-9);
    }

    #[test]
    fn efficiency_decreases_in_agents(alpha in 1e-4f64..1.0, beta in 0.5f64..1.0, k in 1usize..100) {
        prop_assert!(parallel_efficiency(alpha, beta, k + 1).unwrap() < parallel_efficiency(alpha, beta, k).unwrap());
    }
}

#[test]
fn closed_form_examples() {
    let p = ScalingParams::amdahl(0.08);
    assert!((amdahl_time(&p, 16, 1.0).unwrap() - 0.1375).abs() < 1e-12);
    assert!((amdahl_speedup(&p, 16).unwrap() - 1.0 / 0.1375).abs() < 1e-12);
    assert!((gustafson_speedup(0.08, 16).unwrap() - 14.8).abs() < 1e-12);
    assert!((parallel_efficiency(0.01, 1.0, 16).unwrap() - 1.0 / 1.16).abs() < 1e-12);
    let k = optimal_agents(&ScalingParams { serial_fraction: 0.1, comm_alpha: 0.01, ..Default::default() }).unwrap();
    assert!((k - 30.0).abs() < 1e-9);
    let k2 = optimal_agents(&ScalingParams { serial_fraction: 0.1, comm_alpha: 0.02, ..Default::default() }).unwrap();
    assert!((k / k2 - 2f64.sqrt()).abs() < 1e-9);
    assert!(fit_serial_fraction(&[(1, 1.0), (1, 1.0)]).is_err());
    assert_eq!(fit_serial_fraction(&[(1, 1.0), (4, 4.0), (8, 8.0)]).unwrap(), 0.0);
    assert_eq!(fit_serial_fraction(&[(1, 1.0), (4, 1.0), (8, 1.0)]).unwrap(), 1.0);
}

#[test]
fn jsonl_round_trip() {
    let (trace, _) = run(&config(3, 20, true, 0.1, 0), 9);
    let mut buf = Vec::new();
    trace.write_jsonl(&mut buf).unwrap();
    let back = SimTrace::read_jsonl(BufReader::new(&buf[..])).unwrap();
    assert_eq!(back.events, trace.events);
    assert_eq!(back.agents(), 3);
    assert!(SimTrace::read_jsonl(BufReader::new(&b"{not json}\n"[..])).is_err());
}
