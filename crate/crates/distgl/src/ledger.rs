//! Exact accounting of exchanged scalars: one transmitted scalar over one
//! communication edge is one message.

use serde::{Deserialize, Serialize};

/// Protocol phase a message is charged to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Phase {
    InitSignals,
    InitResults,
    WeightExchange,
    CentralUp,
    CentralDown,
}

impl Phase {
    pub const ALL: [Phase; 5] = [
        Phase::InitSignals,
        Phase::InitResults,
        Phase::WeightExchange,
        Phase::CentralUp,
        Phase::CentralDown,
    ];

    pub fn label(&self) -> &'static str {
        match self {
            Phase::InitSignals => "init_signals",
            Phase::InitResults => "init_results",
            Phase::WeightExchange => "weight_exchange",
            Phase::CentralUp => "central_up",
            Phase::CentralDown => "central_down",
        }
    }
}

/// Per-phase scalar-message counters. Counters only ever grow.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MessageLedger {
    counts: [u64; 5],
}

impl MessageLedger {
    pub fn new() -> Self {
        Self::default()
    }

    fn slot(phase: Phase) -> usize {
        match phase {
            Phase::InitSignals => 0,
            Phase::InitResults => 1,
            Phase::WeightExchange => 2,
            Phase::CentralUp => 3,
            Phase::CentralDown => 4,
        }
    }

    pub fn charge(&mut self, phase: Phase, scalars: u64) {
        self.counts[Self::slot(phase)] += scalars;
    }

    pub fn count(&self, phase: Phase) -> u64 {
        self.counts[Self::slot(phase)]
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    /// (label, count) rows in a fixed phase order, for CSV export.
    pub fn rows(&self) -> Vec<(&'static str, u64)> {
        Phase::ALL
            .iter()
            .map(|p| (p.label(), self.count(*p)))
            .collect()
    }
}

/// Simulated transport: senders charge the ledger, receivers bump an
/// independent delivery counter. The two tallies are reconciled by tests so
/// a charge without a matching delivery (or vice versa) cannot go unnoticed.
#[derive(Debug, Clone, Default)]
pub struct Transport {
    ledger: MessageLedger,
    delivered: u64,
}

impl Transport {
    pub fn new() -> Self {
        Self::default()
    }

    /// Called at the sending site.
    pub fn send(&mut self, phase: Phase, scalars: u64) {
        self.ledger.charge(phase, scalars);
    }

    /// Called at the receiving site.
    pub fn deliver(&mut self, scalars: u64) {
        self.delivered += scalars;
    }

    pub fn ledger(&self) -> &MessageLedger {
        &self.ledger
    }

    pub fn into_ledger(self) -> MessageLedger {
        self.ledger
    }

    /// Independent transport-layer recount of delivered scalars.
    pub fn delivered(&self) -> u64 {
        self.delivered
    }
}
