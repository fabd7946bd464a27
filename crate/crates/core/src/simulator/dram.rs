//! Bandwidth/latency DRAM model: a token bucket refilled every GE cycle,
//! strict round-robin arbitration across request streams, and a fixed
//! completion latency.

use std::collections::VecDeque;

use super::config::DramConfig;

pub struct DramModel<T> {
    /// Millibytes added per cycle; `None` means unlimited.
    refill: Option<u64>,
    cap: u64,
    tokens: u64,
    latency: u64,
    streams: Vec<VecDeque<(u32, T)>>,
    queued: usize,
    rr: usize,
    inflight: VecDeque<(u64, T)>,
}

impl<T> DramModel<T> {
    pub fn new(cfg: &DramConfig, num_streams: usize) -> Self {
        let refill = cfg.bandwidth.map(|b| (b * 1000.0).round().max(1.0) as u64);
        let cap = refill.unwrap_or(0).max(cfg.burst as u64 * 1000);
        DramModel {
            refill,
            cap,
            tokens: 0,
            latency: cfg.latency as u64,
            streams: (0..num_streams).map(|_| VecDeque::new()).collect(),
            queued: 0,
            rr: 0,
            inflight: VecDeque::new(),
        }
    }

    pub fn enqueue(&mut self, stream: usize, bytes: u32, req: T) {
        self.streams[stream].push_back((bytes, req));
        self.queued += 1;
    }

    /// Queues a request ahead of everything else waiting on its stream.
    pub fn enqueue_front(&mut self, stream: usize, bytes: u32, req: T) {
        self.streams[stream].push_front((bytes, req));
        self.queued += 1;
    }

    /// Requests waiting to be issued on `stream`.
    pub fn queued_on(&self, stream: usize) -> usize {
        self.streams[stream].len()
    }

    pub fn is_idle(&self) -> bool {
        self.queued == 0 && self.inflight.is_empty()
    }

    /// Advances one cycle: refills tokens, issues requests round-robin while
    /// the budget allows (`on_issue` sees each one), and appends every
    /// request completing at or before `now` to `done`.
    pub fn tick(&mut self, now: u64, mut on_issue: impl FnMut(&T, u32), done: &mut Vec<T>) {
        if let Some(r) = self.refill {
            self.tokens = (self.tokens + r).min(self.cap);
        }
        let n = self.streams.len();
        'issue: while self.queued > 0 {
            for step in 0..n {
                let s = (self.rr + step) % n;
                let Some(&(bytes, _)) = self.streams[s].front() else {
                    continue;
                };
                if self.refill.is_some() {
                    let cost = bytes as u64 * 1000;
                    if self.tokens < cost {
                        break 'issue;
                    }
                    self.tokens -= cost;
                }
                let (bytes, req) = self.streams[s].pop_front().unwrap();
                self.queued -= 1;
                on_issue(&req, bytes);
                self.inflight.push_back((now + self.latency, req));
                self.rr = (s + 1) % n;
                continue 'issue;
            }
            unreachable!("queued requests exist");
        }
        while self.inflight.front().is_some_and(|&(t, _)| t <= now) {
            done.push(self.inflight.pop_front().unwrap().1);
        }
    }
}
