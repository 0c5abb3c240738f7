use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::party::{Party, Topology, TopologyKind};

/// Qubit counts per `(round, from, to)`. Equality ignores `meta`.
#[derive(Clone, Debug)]
pub struct Schedule {
    topology: Topology,
    n: usize,
    counts: BTreeMap<(u32, Party, Party), u64>,
    meta: BTreeMap<String, Value>,
}

impl PartialEq for Schedule {
    fn eq(&self, other: &Schedule) -> bool {
        self.topology == other.topology && self.n == other.n && self.counts == other.counts
    }
}

impl Schedule {
    pub fn new(topology: Topology, n: usize) -> Schedule {
        Schedule { topology, n, counts: BTreeMap::new(), meta: BTreeMap::new() }
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Adds `count` qubits sent from `from` to `to` in `round` (1-based).
    pub fn add(&mut self, round: u32, from: Party, to: Party, count: u64) -> Result<()> {
        for p in [from, to] {
            if !self.topology.contains(p) {
                return Err(Error::UnknownParty(p.to_string()));
            }
        }
        if from == to {
            return Err(Error::MalformedProgram(format!("{from} sends to itself")));
        }
        if round == 0 {
            return Err(Error::MalformedProgram("rounds are numbered from 1".into()));
        }
        if self.topology.kind == TopologyKind::Coordinator
            && !from.is_coordinator()
            && !to.is_coordinator()
        {
            return Err(Error::WrongTopology(format!(
                "{from} -> {to} bypasses the coordinator"
            )));
        }
        if count > 0 {
            *self.counts.entry((round, from, to)).or_insert(0) += count;
        }
        Ok(())
    }

    /// Number of rounds: the largest round carrying a message, 0 if none.
    pub fn rounds(&self) -> u32 {
        self.counts.keys().map(|k| k.0).max().unwrap_or(0)
    }

    /// Total qubits over all rounds and ordered pairs.
    pub fn qcc(&self) -> u64 {
        self.counts.values().sum()
    }

    /// Qubits sent plus received by `party`.
    pub fn qcc_per_party(&self, party: Party) -> Result<u64> {
        if !self.topology.contains(party) {
            return Err(Error::UnknownParty(party.to_string()));
        }
        Ok(self
            .counts
            .iter()
            .filter(|((_, f, t), _)| *f == party || *t == party)
            .map(|(_, c)| c)
            .sum())
    }

    pub fn count(&self, round: u32, from: Party, to: Party) -> u64 {
        self.counts.get(&(round, from, to)).copied().unwrap_or(0)
    }

    pub fn entries(&self) -> impl Iterator<Item = (u32, Party, Party, u64)> + '_ {
        self.counts.iter().map(|(&(r, f, t), &c)| (r, f, t, c))
    }

    /// Qubits sent in `round`, all pairs.
    pub fn round_total(&self, round: u32) -> u64 {
        self.counts.range((round, Party::Player(0), Party::Player(0))..)
            .take_while(|((r, _, _), _)| *r == round)
            .map(|(_, c)| c)
            .sum()
    }

    pub fn meta(&self) -> &BTreeMap<String, Value> {
        &self.meta
    }

    pub fn set_meta(&mut self, key: &str, value: Value) {
        self.meta.insert(key.to_string(), value);
    }

    pub fn to_doc(&self) -> ScheduleDoc {
        let rounds = (1..=self.rounds())
            .map(|r| {
                self.counts
                    .iter()
                    .filter(|((m, _, _), _)| *m == r)
                    .map(|(&(_, from, to), &count)| SendDoc { from, to, count })
                    .collect()
            })
            .collect();
        ScheduleDoc {
            topology: self.topology.kind,
            k: self.topology.k,
            n: self.n,
            rounds,
            meta: self.meta.clone(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_doc()).expect("schedule serializes")
    }

    pub fn from_doc(doc: &ScheduleDoc) -> Result<Schedule> {
        let mut s = Schedule::new(Topology::new(doc.topology, doc.k)?, doc.n);
        for (i, round) in doc.rounds.iter().enumerate() {
            for send in round {
                s.add(i as u32 + 1, send.from, send.to, send.count)?;
            }
        }
        s.meta = doc.meta.clone();
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Schedule> {
        let doc: ScheduleDoc =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        Schedule::from_doc(&doc)
    }
}

/// Serialized schedule. `rounds[m]` lists the sends of round `m + 1` in
/// `(from, to)` order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScheduleDoc {
    pub topology: TopologyKind,
    pub k: usize,
    pub n: usize,
    pub rounds: Vec<Vec<SendDoc>>,
    #[serde(default)]
    pub meta: BTreeMap<String, Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SendDoc {
    pub from: Party,
    pub to: Party,
    pub count: u64,
}

/// One transmission observed during an execution.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LedgerEntry {
    pub round: u32,
    pub from: Party,
    pub to: Party,
    pub count: u64,
}

/// Chronological record of every transmission in one execution.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CostLedger {
    entries: Vec<LedgerEntry>,
}

impl CostLedger {
    pub fn new() -> CostLedger {
        CostLedger::default()
    }

    pub fn record(&mut self, round: u32, from: Party, to: Party, count: u64) {
        self.entries.push(LedgerEntry { round, from, to, count });
    }

    pub fn entries(&self) -> &[LedgerEntry] {
        &self.entries
    }

    pub fn total(&self) -> u64 {
        self.entries.iter().map(|e| e.count).sum()
    }

    /// The entries as a sorted multiset.
    pub fn multiset(&self) -> Vec<LedgerEntry> {
        let mut v = self.entries.clone();
        v.sort_unstable();
        v
    }

    pub fn aggregate(&self, topology: Topology, n: usize) -> Result<Schedule> {
        let mut s = Schedule::new(topology, n);
        for e in &self.entries {
            s.add(e.round, e.from, e.to, e.count)?;
        }
        Ok(s)
    }

    /// SHA-256 over the sorted multiset; equal digests mean equal ledgers.
    pub fn digest(&self) -> String {
        let mut h = Sha256::new();
        for e in self.multiset() {
            h.update(format!("{}:{}:{}:{};", e.round, e.from, e.to, e.count).as_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn to_json(&self, topology: Topology, n: usize) -> Result<String> {
        Ok(self.aggregate(topology, n)?.to_json())
    }
}
