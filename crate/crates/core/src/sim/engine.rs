use std::cmp::{Ordering, Reverse};
use std::collections::{BinaryHeap, VecDeque};

use rand::Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use super::TaskRecord;
use crate::rng::{substream, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Station {
    Local = 0,
    Transmit = 1,
    Edge = 2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Kind {
    Generate,
    Depart(Station),
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    task: usize,
    kind: Kind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Event {}
impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Event {
    fn cmp(&self, other: &Self) -> Ordering {
        self.time.total_cmp(&other.time).then(self.seq.cmp(&other.seq))
    }
}

/// Min-ordered event calendar; ties broken by insertion order.
#[derive(Default)]
struct Calendar {
    heap: BinaryHeap<Reverse<Event>>,
    seq: u64,
}

impl Calendar {
    fn push(&mut self, time: f64, task: usize, kind: Kind) {
        self.heap.push(Reverse(Event {
            time,
            seq: self.seq,
            task,
            kind,
        }));
        self.seq += 1;
    }

    fn pop(&mut self) -> Option<Event> {
        self.heap.pop().map(|Reverse(e)| e)
    }
}

/// Where generated tasks go.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) enum Routing {
    /// Every task enters the local queue only.
    LocalOnly,
    /// Every task enters the transmit → edge tandem only.
    RemoteOnly,
    /// Every task enters both branches; done when both finish.
    Both,
    /// Each task goes to the tandem with probability `beta`, else local.
    Thin { beta: f64 },
}

/// Service rates per station; unused stations may hold any value.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Network {
    pub mu_l: f64,
    pub mu_t: f64,
    pub mu_e: f64,
    pub xi: f64,
    pub routing: Routing,
}

/// Per-task random inputs, drawn in a fixed order so that every routing
/// sees the same sample path.
#[derive(Debug, Clone, Copy)]
pub(crate) struct Draws {
    pub interarrival: f64,
    pub route: f64,
    pub s_l: f64,
    pub s_t: f64,
    pub s_e: f64,
}

pub(crate) fn draw_tasks(net: &Network, n: usize, seed: u64) -> Vec<Draws> {
    let mut rng: SimRng = substream(seed, 0);
    (0..n)
        .map(|_| {
            let a: f64 = rng.sample(Exp1);
            let u: f64 = rng.random();
            let l: f64 = rng.sample(Exp1);
            let t: f64 = rng.sample(Exp1);
            let e: f64 = rng.sample(Exp1);
            Draws {
                interarrival: a / net.xi,
                route: u,
                s_l: l / net.mu_l,
                s_t: t / net.mu_t,
                s_e: e / net.mu_e,
            }
        })
        .collect()
}

/// Time-average and per-customer statistics for one queue, measured over
/// an observation window.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct QueueStats {
    pub window: f64,
    pub arrivals: u64,
    pub departures: u64,
    pub busy_on_arrival: u64,
    /// Time integral of the number in system over the window.
    pub occupancy_area: f64,
    /// Sum of system times of customers that arrived in the window.
    pub system_time_sum: f64,
    pub completed_in_window: u64,
}

impl QueueStats {
    pub fn arrival_rate(&self) -> f64 {
        self.arrivals as f64 / self.window
    }
    pub fn departure_rate(&self) -> f64 {
        self.departures as f64 / self.window
    }
    pub fn mean_in_system(&self) -> f64 {
        self.occupancy_area / self.window
    }
    pub fn mean_system_time(&self) -> f64 {
        self.system_time_sum / self.completed_in_window as f64
    }
    /// Fraction of arrivals that found the server busy.
    pub fn busy_fraction(&self) -> f64 {
        self.busy_on_arrival as f64 / self.arrivals as f64
    }
}

struct Queue {
    waiting: VecDeque<usize>,
    in_service: Option<usize>,
    in_system: u64,
    last_change: f64,
    stats: QueueStats,
    arrived: Vec<f64>,
}

impl Queue {
    fn new(n: usize) -> Self {
        Queue {
            waiting: VecDeque::new(),
            in_service: None,
            in_system: 0,
            last_change: 0.0,
            stats: QueueStats::default(),
            arrived: vec![f64::NAN; n],
        }
    }

    fn advance(&mut self, now: f64, win: (f64, f64)) {
        let lo = self.last_change.max(win.0);
        let hi = now.min(win.1);
        if hi > lo {
            self.stats.occupancy_area += self.in_system as f64 * (hi - lo);
        }
        self.last_change = now;
    }
}

fn in_window(t: f64, win: (f64, f64)) -> bool {
    t >= win.0 && t <= win.1
}

pub(crate) struct EngineOutput {
    pub records: Vec<TaskRecord>,
    pub queues: [Option<QueueStats>; 3],
}

/// Runs the event-driven network over pre-drawn inputs. `window_from` is
/// the index of the first task whose generation opens the observation
/// window; the window closes at the last generation.
pub(crate) fn run(net: &Network, draws: &[Draws], window_from: usize) -> EngineOutput {
    let n = draws.len();
    let mut gen = Vec::with_capacity(n);
    let mut t = 0.0;
    for d in draws {
        t += d.interarrival;
        gen.push(t);
    }
    let win = (gen[window_from.min(n - 1)], gen[n - 1]);

    let service = |task: usize, s: Station| match s {
        Station::Local => draws[task].s_l,
        Station::Transmit => draws[task].s_t,
        Station::Edge => draws[task].s_e,
    };
    let to_local = |task: usize| match net.routing {
        Routing::LocalOnly | Routing::Both => true,
        Routing::RemoteOnly => false,
        Routing::Thin { beta } => draws[task].route >= beta,
    };
    let to_remote = |task: usize| match net.routing {
        Routing::RemoteOnly | Routing::Both => true,
        Routing::LocalOnly => false,
        Routing::Thin { beta } => draws[task].route < beta,
    };

    let mut queues = [Queue::new(n), Queue::new(n), Queue::new(n)];
    let mut used = [false; 3];
    let mut done = [vec![None; n], vec![None; n], vec![None; n]];
    let mut cal = Calendar::default();
    cal.push(gen[0], 0, Kind::Generate);

    let arrive = |cal: &mut Calendar, q: &mut Queue, s: Station, task: usize, now: f64| {
        q.advance(now, win);
        if in_window(now, win) {
            q.stats.arrivals += 1;
            if q.in_service.is_some() {
                q.stats.busy_on_arrival += 1;
            }
        }
        q.arrived[task] = now;
        q.in_system += 1;
        if q.in_service.is_none() {
            q.in_service = Some(task);
            cal.push(now + service(task, s), task, Kind::Depart(s));
        } else {
            q.waiting.push_back(task);
        }
    };

    while let Some(ev) = cal.pop() {
        let now = ev.time;
        match ev.kind {
            Kind::Generate => {
                let task = ev.task;
                if task + 1 < n {
                    cal.push(gen[task + 1], task + 1, Kind::Generate);
                }
                if to_local(task) {
                    used[0] = true;
                    arrive(&mut cal, &mut queues[0], Station::Local, task, now);
                }
                if to_remote(task) {
                    used[1] = true;
                    used[2] = true;
                    arrive(&mut cal, &mut queues[1], Station::Transmit, task, now);
                }
            }
            Kind::Depart(s) => {
                let idx = s as usize;
                let task = ev.task;
                {
                    let q = &mut queues[idx];
                    q.advance(now, win);
                    q.in_system -= 1;
                    if in_window(now, win) {
                        q.stats.departures += 1;
                    }
                    let arrived = q.arrived[task];
                    if in_window(arrived, win) {
                        q.stats.system_time_sum += now - arrived;
                        q.stats.completed_in_window += 1;
                    }
                    done[idx][task] = Some(now);
                    q.in_service = None;
                    if let Some(next) = q.waiting.pop_front() {
                        q.in_service = Some(next);
                        cal.push(now + service(next, s), next, Kind::Depart(s));
                    }
                }
                if s == Station::Transmit {
                    arrive(&mut cal, &mut queues[2], Station::Edge, task, now);
                }
            }
        }
    }

    let records = (0..n)
        .map(|i| {
            let local_done = done[0][i];
            let transmit_done = done[1][i];
            let edge_done = done[2][i];
            let complete = match (local_done, edge_done) {
                (Some(a), Some(b)) => a.max(b),
                (Some(a), None) => a,
                (None, Some(b)) => b,
                (None, None) => unreachable!("every task is routed somewhere"),
            };
            TaskRecord {
                gen_time: gen[i],
                local_done,
                transmit_done,
                edge_done,
                complete_time: complete,
                system_time_max: complete - gen[i],
                interarrival: draws[i].interarrival,
                local_service: local_done.map(|_| draws[i].s_l),
            }
        })
        .collect();

    let mut out = [None; 3];
    for (k, q) in queues.into_iter().enumerate() {
        if used[k] {
            let mut stats = q.stats;
            stats.window = win.1 - win.0;
            out[k] = Some(stats);
        }
    }
    EngineOutput { records, queues: out }
}
