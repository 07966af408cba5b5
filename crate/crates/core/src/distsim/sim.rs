use std::io::Write;

use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use crate::bandit::DelaySpec;
use crate::error::{Error, Result};
use crate::seed::Rng;

pub const DEFAULT_SIGMA_LOG: f64 = 0.3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum TaskDurationModel {
    Constant(f64),
    LogNormal { mu_log: f64, sigma_log: f64 },
}

impl TaskDurationModel {
    /// Log-normal durations with the given arithmetic mean.
    pub fn lognormal_with_mean(mean: f64, sigma_log: f64) -> Result<Self> {
        if !(mean > 0.0) {
            return Err(Error::config(format!("mean duration {mean} must be positive")));
        }
        let m = TaskDurationModel::LogNormal {
            mu_log: mean.ln() - 0.5 * sigma_log * sigma_log,
            sigma_log,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            TaskDurationModel::Constant(c) if c > 0.0 && c.is_finite() => Ok(()),
            TaskDurationModel::Constant(c) => Err(Error::config(format!("constant duration {c} must be positive"))),
            TaskDurationModel::LogNormal { mu_log, sigma_log } if mu_log.is_finite() && sigma_log >= 0.0 => Ok(()),
            TaskDurationModel::LogNormal { sigma_log, .. } => {
                Err(Error::config(format!("log-normal sigma {sigma_log} must be >= 0")))
            }
        }
    }

    pub fn mean(&self) -> f64 {
        match *self {
            TaskDurationModel::Constant(c) => c,
            TaskDurationModel::LogNormal { mu_log, sigma_log } => (mu_log + 0.5 * sigma_log * sigma_log).exp(),
        }
    }

    /// Constant durations consume no randomness.
    pub fn sample(&self, rng: &mut Rng) -> f64 {
        match *self {
            TaskDurationModel::Constant(c) => c,
            TaskDurationModel::LogNormal { mu_log, sigma_log } => {
                if sigma_log == 0.0 {
                    mu_log.exp()
                } else {
                    LogNormal::new(mu_log, sigma_log).expect("validated").sample(rng)
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
/// Declaration order is the tie-break at equal time and agent.
pub enum EventKind {
    Complete,
    PosteriorUpdate,
    Dispatch,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimEvent {
    pub time: f64,
    pub agent: usize,
    pub kind: EventKind,
    pub arm: usize,
    pub reward: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimTrace {
    pub events: Vec<SimEvent>,
    pub wall_clock: f64,
    pub busy: Vec<f64>,
}

impl SimTrace {
    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    /// Reads a trace written by [`SimTrace::write_jsonl`]. Busy times are not
    /// stored in the file and come back empty.
    pub fn read_jsonl<R: std::io::BufRead>(r: R) -> Result<SimTrace> {
        let mut events = Vec::new();
        for line in r.lines() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            events.push(serde_json::from_str::<SimEvent>(&line)?);
        }
        let wall_clock = events.iter().map(|e| e.time).fold(0.0, f64::max);
        Ok(SimTrace {
            events,
            wall_clock,
            busy: Vec::new(),
        })
    }

    /// Number of distinct agents that completed work.
    pub fn agents(&self) -> usize {
        let mut seen: Vec<usize> = self
            .events
            .iter()
            .filter(|e| e.kind == EventKind::Complete)
            .map(|e| e.agent)
            .collect();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    /// One JSON object per line.
    pub fn write_jsonl<W: Write>(&self, mut w: W) -> Result<()> {
        for e in &self.events {
            serde_json::to_writer(&mut w, e)?;
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DispatchMode {
    /// Every agent evaluates its own point.
    BatchDiverse,
    /// All agents evaluate the same arm and the policy sees the average.
    ReplicateAveraging,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub agents: usize,
    /// Total oracle evaluations.
    pub budget: usize,
    pub durations: TaskDurationModel,
    /// Serial virtual time per posterior update.
    pub update_cost: f64,
    /// Delays are converted to virtual time in units of the mean task duration.
    pub delay: DelaySpec,
    pub mode: DispatchMode,
    /// Per-round synchronization cost `α·K^β` (times the mean duration) in averaging mode.
    pub comm_alpha: f64,
    pub comm_beta: f64,
}

impl SimConfig {
    pub fn new(agents: usize, budget: usize, durations: TaskDurationModel) -> Self {
        SimConfig {
            agents,
            budget,
            durations,
            update_cost: 0.0,
            delay: DelaySpec::NONE,
            mode: DispatchMode::BatchDiverse,
            comm_alpha: 0.0,
            comm_beta: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.agents < 1 {
            return Err(Error::config("agent count must be >= 1"));
        }
        if self.budget < self.agents {
            return Err(Error::input(format!(
                "budget {} smaller than agent count {}",
                self.budget, self.agents
            )));
        }
        if !(self.update_cost >= 0.0) || !(self.comm_alpha >= 0.0) {
            return Err(Error::config("update and communication costs must be >= 0"));
        }
        self.durations.validate()
    }
}

/// Proposes queries from all feedback delivered so far.
pub trait AsyncPolicy {
    /// `pending` holds arms dispatched whose feedback has not been delivered.
    fn propose(&mut self, pending: &[usize]) -> Result<usize>;
    fn observe(&mut self, arm: usize, reward: f64) -> Result<()>;
}

pub trait Oracle {
    /// `query` is the global 0-based evaluation index.
    fn evaluate(&mut self, arm: usize, query: usize) -> Result<f64>;
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub query: usize,
    pub agent: usize,
    pub arm: usize,
    pub reward: f64,
    pub dispatched: f64,
    pub completed: f64,
    pub learned: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimOutcome {
    pub trace: SimTrace,
    /// Evaluations in the order the policy learned them.
    pub evaluations: Vec<Evaluation>,
}

#[derive(Debug, Clone, Copy)]
enum Pending {
    Complete { agent: usize, query: usize },
    Ready { query: usize },
    Updated { query: usize },
}

#[derive(Debug, Clone, Copy)]
struct Scheduled {
    time: f64,
    agent: usize,
    rank: u8,
    seq: usize,
    what: Pending,
}

struct Engine<'a, P: AsyncPolicy, O: Oracle> {
    cfg: SimConfig,
    policy: &'a mut P,
    oracle: &'a mut O,
    rng: &'a mut Rng,
    queue: Vec<Scheduled>,
    seq: usize,
    events: Vec<SimEvent>,
    evals: Vec<Evaluation>,
    learned: Vec<Evaluation>,
    in_flight: Vec<usize>,
    idle: Vec<bool>,
    busy: Vec<f64>,
    update_free: f64,
    updates_waiting: usize,
}

impl<P: AsyncPolicy, O: Oracle> Engine<'_, P, O> {
    fn schedule(&mut self, time: f64, agent: usize, rank: u8, what: Pending) {
        self.seq += 1;
        self.queue.push(Scheduled {
            time,
            agent,
            rank,
            seq: self.seq,
            what,
        });
    }

    fn pop(&mut self) -> Option<Scheduled> {
        let idx = (0..self.queue.len()).min_by(|&a, &b| {
            let (x, y) = (&self.queue[a], &self.queue[b]);
            x.time
                .total_cmp(&y.time)
                .then(x.rank.cmp(&y.rank))
                .then(x.agent.cmp(&y.agent))
                .then(x.seq.cmp(&y.seq))
        })?;
        Some(self.queue.swap_remove(idx))
    }

    fn dispatch(&mut self, agent: usize, arm: usize, now: f64) -> Result<usize> {
        let query = self.evals.len();
        let reward = self.oracle.evaluate(arm, query)?;
        let d = self.cfg.durations.sample(self.rng);
        self.events.push(SimEvent {
            time: now,
            agent,
            kind: EventKind::Dispatch,
            arm,
            reward: None,
        });
        self.evals.push(Evaluation {
            query,
            agent,
            arm,
            reward,
            dispatched: now,
            completed: now + d,
            learned: f64::NAN,
        });
        self.busy[agent] += d;
        self.idle[agent] = false;
        self.in_flight.push(query);
        self.schedule(now + d, agent, 1, Pending::Complete { agent, query });
        Ok(query)
    }

    fn enqueue_update(&mut self, ready: f64, agent: usize, query: usize, extra: f64) {
        let start = ready.max(self.update_free);
        let end = start + extra + self.cfg.update_cost;
        self.update_free = end;
        self.updates_waiting += 1;
        self.schedule(end, agent, 2, Pending::Updated { query });
    }

    fn delay_time(&mut self) -> f64 {
        self.cfg.delay.sample(self.rng) as f64 * self.cfg.durations.mean()
    }

    fn pending_arms(&self) -> Vec<usize> {
        self.in_flight.iter().map(|&q| self.evals[q].arm).collect()
    }

    fn run_diverse(&mut self) -> Result<()> {
        let mut now = 0.0;
        loop {
            if self.updates_waiting == 0 {
                for agent in 0..self.cfg.agents {
                    if self.idle[agent] && self.evals.len() < self.cfg.budget {
                        let pending = self.pending_arms();
                        let arm = self.policy.propose(&pending)?;
                        self.dispatch(agent, arm, now)?;
                    }
                }
            }
            let Some(ev) = self.pop() else { break };
            now = ev.time;
            match ev.what {
                Pending::Complete { agent, query } => {
                    let e = self.evals[query];
                    self.events.push(SimEvent {
                        time: now,
                        agent,
                        kind: EventKind::Complete,
                        arm: e.arm,
                        reward: Some(e.reward),
                    });
                    self.idle[agent] = true;
                    let d = self.delay_time();
                    if d > 0.0 {
                        self.schedule(now + d, agent, 0, Pending::Ready { query });
                    } else {
                        self.enqueue_update(now, agent, query, 0.0);
                    }
                }
                Pending::Ready { query } => {
                    let agent = self.evals[query].agent;
                    self.enqueue_update(now, agent, query, 0.0);
                }
                Pending::Updated { query } => {
                    self.updates_waiting -= 1;
                    self.learn(query, now)?;
                    let e = self.evals[query];
                    self.events.push(SimEvent {
                        time: now,
                        agent: e.agent,
                        kind: EventKind::PosteriorUpdate,
                        arm: e.arm,
                        reward: Some(e.reward),
                    });
                    self.policy.observe(e.arm, e.reward)?;
                }
            }
        }
        Ok(())
    }

    fn learn(&mut self, query: usize, now: f64) -> Result<()> {
        self.in_flight.retain(|&q| q != query);
        self.evals[query].learned = now;
        self.learned.push(self.evals[query]);
        Ok(())
    }

    fn run_averaging(&mut self) -> Result<()> {
        let k = self.cfg.agents;
        let rounds = self.cfg.budget / k;
        let comm = self.cfg.comm_alpha * (k as f64).powf(self.cfg.comm_beta) * self.cfg.durations.mean();
        let mut now = 0.0;
        for _ in 0..rounds {
            let arm = self.policy.propose(&[])?;
            let first = self.evals.len();
            for agent in 0..k {
                self.dispatch(agent, arm, now)?;
            }
            let mut done = now;
            let mut sum = 0.0;
            while let Some(ev) = self.pop() {
                if let Pending::Complete { agent, query } = ev.what {
                    let e = self.evals[query];
                    self.events.push(SimEvent {
                        time: ev.time,
                        agent,
                        kind: EventKind::Complete,
                        arm,
                        reward: Some(e.reward),
                    });
                    sum += e.reward;
                    done = done.max(ev.time);
                }
            }
            self.idle.iter_mut().for_each(|b| *b = true);
            let ready = done + self.delay_time();
            self.update_free = self.update_free.max(ready);
            let end = self.update_free + comm + self.cfg.update_cost;
            self.update_free = end;
            for q in first..first + k {
                self.learn(q, end)?;
            }
            let avg = sum / k as f64;
            self.events.push(SimEvent {
                time: end,
                agent: 0,
                kind: EventKind::PosteriorUpdate,
                arm,
                reward: Some(avg),
            });
            self.policy.observe(arm, avg)?;
            now = end;
        }
        Ok(())
    }
}

/// Discrete-event run of `cfg.agents` workers on a virtual clock.
///
/// Idle workers are dispatched only while no posterior update is pending, so
/// the update cost acts as the serial fraction. `rng` drives durations and
/// delays only; oracle noise and policy randomness are owned by their callers.
pub fn simulate_async_run<P: AsyncPolicy, O: Oracle>(
    policy: &mut P,
    oracle: &mut O,
    cfg: &SimConfig,
    rng: &mut Rng,
) -> Result<SimOutcome> {
    cfg.validate()?;
    let mut engine = Engine {
        cfg: *cfg,
        policy,
        oracle,
        rng,
        queue: Vec::new(),
        seq: 0,
        events: Vec::new(),
        evals: Vec::new(),
        learned: Vec::new(),
        in_flight: Vec::new(),
        idle: vec![true; cfg.agents],
        busy: vec![0.0; cfg.agents],
        update_free: 0.0,
        updates_waiting: 0,
    };
    match cfg.mode {
        DispatchMode::BatchDiverse => engine.run_diverse()?,
        DispatchMode::ReplicateAveraging => engine.run_averaging()?,
    }
    let mut events = engine.events;
    events.sort_by(|a, b| a.time.total_cmp(&b.time).then(a.agent.cmp(&b.agent)).then(a.kind.cmp(&b.kind)));
    let wall_clock = events.iter().map(|e| e.time).fold(0.0, f64::max);
    Ok(SimOutcome {
        trace: SimTrace {
            events,
            wall_clock,
            busy: engine.busy,
        },
        evaluations: engine.learned,
    })
}
