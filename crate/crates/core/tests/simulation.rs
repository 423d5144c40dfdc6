use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Exp};

use aoi_mec_core::analytic::{maoi_local, maoi_remote};
use aoi_mec_core::rates::PartialRates;
use aoi_mec_core::sim::{
    replicate, sawtooth_maoi, simulate_mm1, simulate_partial, simulate_tandem, write_trace, SimConfig, SimSettings,
    SplitMode, TaskRecord, TRACE_HEADER,
};
use aoi_mec_core::Error;

fn settings(n: usize, seed: u64) -> SimSettings {
    SimSettings {
        n_tasks: n,
        warmup_fraction: 0.1,
        seed,
    }
}

fn partial(mode: SplitMode, n: usize, seed: u64) -> SimConfig {
    SimConfig {
        settings: settings(n, seed),
        split_mode: mode,
        rates: PartialRates {
            mu_l: 0.92593,
            mu_t: 1.2,
            mu_e: 3.125,
        },
        xi: 0.2,
        beta: 0.4,
    }
}

/// Departure epochs of a FCFS single server by Lindley's recursion.
fn lindley(gen: &[f64], service: &[f64]) -> Vec<f64> {
    let mut free = 0.0f64;
    gen.iter()
        .zip(service)
        .map(|(&g, &s)| {
            free = free.max(g) + s;
            free
        })
        .collect()
}

#[test]
fn mm1_departures_follow_lindley() {
    let run = simulate_mm1(1.0, 0.7, &settings(20_000, 3)).unwrap();
    let gen: Vec<f64> = run.records.iter().map(|r| r.gen_time).collect();
    let service: Vec<f64> = run.records.iter().map(|r| r.local_service.unwrap()).collect();
    let expect = lindley(&gen, &service);
    for (r, d) in run.records.iter().zip(expect) {
        assert!((r.local_done.unwrap() - d).abs() <= 1e-9 * d.max(1.0));
        assert_eq!(r.complete_time, r.local_done.unwrap());
    }
}

#[test]
fn replicated_local_branch_follows_lindley() {
    let run = simulate_partial(&partial(SplitMode::Replicate, 20_000, 5)).unwrap();
    let gen: Vec<f64> = run.records.iter().map(|r| r.gen_time).collect();
    let service: Vec<f64> = run.records.iter().map(|r| r.local_service.unwrap()).collect();
    for (r, d) in run.records.iter().zip(lindley(&gen, &service)) {
        assert!((r.local_done.unwrap() - d).abs() <= 1e-9 * d.max(1.0));
        let latest = r.local_done.unwrap().max(r.edge_done.unwrap());
        assert_eq!(r.complete_time, latest);
        assert!(r.transmit_done.unwrap() <= r.edge_done.unwrap());
    }
}

#[test]
fn thinned_tasks_visit_one_branch() {
    let run = simulate_partial(&partial(SplitMode::Thin, 20_000, 5)).unwrap();
    let local = run.records.iter().filter(|r| r.local_done.is_some()).count();
    for r in &run.records {
        assert!(r.local_done.is_some() != r.edge_done.is_some());
    }
    let share = local as f64 / run.records.len() as f64;
    assert!((share - 0.6).abs() < 0.02, "local share {share}");
}

#[test]
fn mm1_queue_laws() {
    let (mu, xi) = (1.0, 0.6);
    let run = simulate_mm1(mu, xi, &settings(400_000, 11)).unwrap();
    let q = run.queues.local.unwrap();
    // Little's law.
    let little = q.arrival_rate() * q.mean_system_time();
    assert!(
        (q.mean_in_system() - little).abs() / little < 0.02,
        "L={} lambda W={little}",
        q.mean_in_system()
    );
    // PASTA: arrivals see the time-average busy probability.
    assert!((q.busy_fraction() - xi / mu).abs() < 0.01, "busy {}", q.busy_fraction());
    // Mean system time 1/(mu - xi).
    assert!((q.mean_system_time() - 1.0 / (mu - xi)).abs() / 2.5 < 0.03);
    // Output rate equals input rate.
    assert!((q.departure_rate() - xi).abs() / xi < 0.01);
}

#[test]
fn tandem_second_stage_sees_poisson_rate() {
    let (mu_t, mu_e, xi) = (1.0, 1.5, 0.5);
    let run = simulate_tandem(mu_t, mu_e, xi, &settings(300_000, 2)).unwrap();
    let t = run.queues.transmit.unwrap();
    let e = run.queues.edge.unwrap();
    assert!((t.departure_rate() - xi).abs() / xi < 0.01);
    assert!((e.arrival_rate() - xi).abs() / xi < 0.01);
    // Burke: the edge behaves as an M/M/1 queue with rate xi.
    assert!((e.busy_fraction() - xi / mu_e).abs() < 0.01);
    assert!((e.mean_system_time() - 1.0 / (mu_e - xi)).abs() * (mu_e - xi) < 0.03);
}

#[test]
fn mm1_system_time_is_exponential() {
    let (mu, xi) = (1.0, 0.5);
    let set = settings(400_000, 9);
    let run = simulate_mm1(mu, xi, &set).unwrap();
    // Thin the sequence so neighbouring system times are nearly independent.
    let mut times: Vec<f64> = run
        .measured(&set)
        .iter()
        .step_by(40)
        .map(|r| r.system_time_max)
        .collect();
    times.sort_by(f64::total_cmp);
    let law = Exp::new(mu - xi).unwrap();
    let n = times.len() as f64;
    let d = times
        .iter()
        .enumerate()
        .map(|(i, &t)| {
            let f = law.cdf(t);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max);
    // 1% critical value of the Kolmogorov-Smirnov statistic.
    assert!(d < 1.63 / n.sqrt(), "D = {d}, n = {n}");
}

#[test]
fn sawtooth_matches_pure_closed_forms() {
    let run = simulate_mm1(1.0, 0.5, &settings(400_000, 21)).unwrap();
    let exact = maoi_local(1.0, 0.5).unwrap().maoi;
    assert!(
        (run.sawtooth.maoi_hat - exact).abs() < 4.0 * run.sawtooth.stderr,
        "{:?} vs {exact}",
        run.sawtooth
    );

    let run = simulate_tandem(1.0, 2.0, 0.4, &settings(400_000, 22)).unwrap();
    let exact = maoi_remote(1.0, 2.0, 0.4).unwrap().maoi;
    assert!(
        (run.sawtooth.maoi_hat - exact).abs() < 4.0 * run.sawtooth.stderr,
        "{:?} vs {exact}",
        run.sawtooth
    );
}

#[test]
fn same_seed_same_run() {
    let a = simulate_partial(&partial(SplitMode::Replicate, 5_000, 17)).unwrap();
    let b = simulate_partial(&partial(SplitMode::Replicate, 5_000, 17)).unwrap();
    assert_eq!(a, b);
    let c = simulate_partial(&partial(SplitMode::Replicate, 5_000, 18)).unwrap();
    assert_ne!(a.records, c.records);
}

#[test]
fn replications_do_not_depend_on_thread_count() {
    let set = settings(5_000, 4);
    let go = || replicate(&set, 6, |s| simulate_mm1(1.0, 0.5, s)).unwrap();
    let one = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(go);
    let four = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(go);
    assert_eq!(one, four);
    assert_eq!(one.runs.len(), 6);
    assert!(one.stderr > 0.0);
}

#[test]
fn unstable_simulations_are_refused() {
    assert!(matches!(
        simulate_mm1(1.0, 1.0, &settings(1000, 1)),
        Err(Error::Instability { .. })
    ));
    let mut cfg = partial(SplitMode::Replicate, 1000, 1);
    // Stable after thinning but not when every task visits every queue.
    cfg.xi = 1.0;
    assert!(matches!(simulate_partial(&cfg), Err(Error::Instability { .. })));
    cfg.split_mode = SplitMode::Thin;
    assert!(simulate_partial(&cfg).is_ok());
    cfg.beta = 1.0;
    assert_eq!(simulate_partial(&cfg).unwrap_err(), Error::NotPartial(1.0));
}

#[test]
fn trace_has_one_line_per_task() {
    let run = simulate_partial(&partial(SplitMode::Thin, 500, 1)).unwrap();
    let mut buf = Vec::new();
    write_trace(&run.records, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some(TRACE_HEADER));
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 500);
    assert!(rows.iter().all(|l| l.split(',').count() == 5));
}

fn record(gen: f64, done: f64, prev_gen: f64) -> TaskRecord {
    TaskRecord {
        gen_time: gen,
        local_done: Some(done),
        transmit_done: None,
        edge_done: None,
        complete_time: done,
        system_time_max: done - gen,
        interarrival: gen - prev_gen,
        local_service: None,
    }
}

#[test]
fn sawtooth_rejects_unsorted_records() {
    let recs = [record(0.0, 1.0, 0.0), record(2.0, 3.0, 0.0), record(1.0, 4.0, 2.0)];
    assert!(matches!(sawtooth_maoi(&recs), Err(Error::Unsorted(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn age_area_is_at_least_the_generation_gaps(mu in 0.5f64..3.0, load in 0.1f64..0.8, seed in 0u64..1000) {
        let run = simulate_mm1(mu, load * mu, &settings(2_000, seed)).unwrap();
        let s = run.sawtooth;
        prop_assert!(s.maoi_hat > 0.0 && s.area > 0.0 && s.duration > 0.0);
        // Age never drops below the time since the freshest generation.
        prop_assert!(s.maoi_hat >= 1.0 / mu * 0.5);
        prop_assert!(s.informative <= run.records.len());
    }

    #[test]
    fn replicate_mode_conserves_each_queue(seed in 0u64..1000, beta in 0.1f64..0.9) {
        let mut cfg = partial(SplitMode::Replicate, 3_000, seed);
        cfg.beta = beta;
        let run = simulate_partial(&cfg).unwrap();
        for q in [run.queues.local, run.queues.transmit, run.queues.edge] {
            let q = q.unwrap();
            prop_assert!(q.departures <= q.arrivals + 200);
            prop_assert!(q.busy_on_arrival <= q.arrivals);
        }
        for r in &run.records {
            prop_assert!(r.complete_time >= r.gen_time);
            prop_assert!((r.system_time_max - (r.complete_time - r.gen_time)).abs() < 1e-9);
        }
    }
}
