use serde::{Deserialize, Serialize};

use super::exec::{derive_schedule, execute, ExecOptions};
use super::program::ProtocolProgram;
use super::schedule::LedgerEntry;
use crate::bits::BitString;

/// First execution whose ledger differs from the reference run.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Divergence {
    pub input_index: usize,
    pub seed: u64,
    pub inputs: Vec<BitString>,
    /// First position where the sorted multisets disagree.
    pub expected: Option<LedgerEntry>,
    pub found: Option<LedgerEntry>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObliviousnessReport {
    pub executions: usize,
    pub reference_digest: Option<String>,
    pub divergent_executions: usize,
    pub first_divergence: Option<Divergence>,
    /// Whether the reference ledger equals the static schedule; `None` when
    /// no schedule can be derived.
    pub matches_schedule: Option<bool>,
    pub errors: Vec<String>,
}

impl ObliviousnessReport {
    pub fn is_oblivious(&self) -> bool {
        self.divergent_executions == 0 && self.errors.is_empty() && self.matches_schedule != Some(false)
    }
}

/// Runs every `(input, seed)` pair and compares the ledgers as multisets.
pub fn verify_oblivious(
    program: &ProtocolProgram,
    inputs: &[Vec<BitString>],
    seeds: &[u64],
) -> ObliviousnessReport {
    let mut report = ObliviousnessReport {
        executions: 0,
        reference_digest: None,
        divergent_executions: 0,
        first_divergence: None,
        matches_schedule: None,
        errors: Vec::new(),
    };
    let mut reference: Option<Vec<LedgerEntry>> = None;
    for (idx, input) in inputs.iter().enumerate() {
        for &seed in seeds {
            let run = match execute(program, input, &ExecOptions::seeded(seed)) {
                Ok(run) => run,
                Err(e) => {
                    report.errors.push(format!("input {idx}, seed {seed}: {e}"));
                    continue;
                }
            };
            report.executions += 1;
            let multiset = run.ledger.multiset();
            match &reference {
                None => {
                    report.reference_digest = Some(run.ledger.digest());
                    report.matches_schedule = derive_schedule(program).ok().map(|s| {
                        run.ledger.aggregate(program.topology(), program.n()).ok() == Some(s)
                    });
                    reference = Some(multiset);
                }
                Some(expected) if *expected != multiset => {
                    report.divergent_executions += 1;
                    if report.first_divergence.is_none() {
                        let at = expected
                            .iter()
                            .zip(&multiset)
                            .position(|(a, b)| a != b)
                            .unwrap_or(expected.len().min(multiset.len()));
                        report.first_divergence = Some(Divergence {
                            input_index: idx,
                            seed,
                            inputs: input.clone(),
                            expected: expected.get(at).copied(),
                            found: multiset.get(at).copied(),
                        });
                    }
                }
                Some(_) => {}
            }
        }
    }
    report
}
