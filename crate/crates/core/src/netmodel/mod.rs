//! Oblivious communication model: instruction programs, static schedules,
//! runtime ledgers, and conversions between point-to-point and coordinator
//! topologies.
//!
//! Instructions execute in program order. Round labels only attribute
//! sends to rounds for cost accounting; within a label, sends are
//! independent, so program order is one valid serialization.

mod convert;
mod exec;
mod oblivious;
mod program;
mod schedule;

pub use convert::{normalize_single_sender, to_coordinator, to_point_to_point};
pub(crate) use convert::rehost;
pub(crate) use exec::causal_key;
pub use exec::{analyze, derive_schedule, execute, peak_qubits, Analysis, ExecOptions, Execution};
pub use oblivious::{verify_oblivious, Divergence, ObliviousnessReport};
pub use program::{
    Action, BindingDecl, BindingId, InputMap, Instruction, LiftFn, LocalFn, ProgramBuilder,
    ProtocolProgram, RandomSpec, RegId, RegisterDecl, View,
};
pub use schedule::{CostLedger, LedgerEntry, Schedule, ScheduleDoc, SendDoc};

/// Total qubits of a schedule.
pub fn qcc(schedule: &Schedule) -> u64 {
    schedule.qcc()
}

/// Qubits sent or received by `party`.
pub fn qcc_per_party(schedule: &Schedule, party: crate::party::Party) -> crate::Result<u64> {
    schedule.qcc_per_party(party)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::bits::{parse_inputs, BitString};
    use crate::error::Error;
    use crate::party::{Party, Topology};
    use crate::statevec::Gate;

    fn p(i: usize) -> Party {
        Party::player(i)
    }

    /// Three players; sends of 2, 1, 3 and 1 qubits in rounds 1 to 4.
    fn fig_schedule() -> Schedule {
        let mut s = Schedule::new(Topology::point_to_point(3).unwrap(), 4);
        s.add(1, p(1), p(2), 2).unwrap();
        s.add(2, p(1), p(3), 1).unwrap();
        s.add(3, p(2), p(3), 3).unwrap();
        s.add(4, p(3), p(1), 1).unwrap();
        s
    }

    /// The same traffic as an executable program; every player outputs 0.
    fn fig_program() -> ProtocolProgram {
        let mut b = ProgramBuilder::new("fig", Topology::point_to_point(3).unwrap(), 4, 0.0);
        for (from, to, width, round) in [(1, 2, 2, 1), (1, 3, 1, 2), (2, 3, 3, 3), (3, 1, 1, 4)] {
            let r = b.alloc(p(from), width, "m");
            b.send(p(from), p(to), r, round);
            b.release(r);
        }
        for i in 1..=3 {
            b.output(p(i), |_| false);
        }
        b.build().unwrap()
    }

    fn silent_program(k: usize) -> ProtocolProgram {
        let mut b = ProgramBuilder::new("silent", Topology::point_to_point(k).unwrap(), 2, 0.0);
        for i in 1..=k {
            b.output(p(i), move |v| v.bit(0));
        }
        b.build().unwrap()
    }

    #[test]
    fn empty_program_has_empty_schedule() {
        let s = derive_schedule(&silent_program(2)).unwrap();
        assert_eq!((s.rounds(), s.qcc()), (0, 0));
    }

    #[test]
    fn fig_accounting() {
        let s = fig_schedule();
        assert_eq!(qcc(&s), 7);
        let per: Vec<u64> = (1..=3).map(|i| qcc_per_party(&s, p(i)).unwrap()).collect();
        assert_eq!(per, vec![4, 5, 5]);
        assert_eq!(per.iter().sum::<u64>(), 2 * qcc(&s));
        assert!(matches!(s.qcc_per_party(p(4)), Err(Error::UnknownParty(_))));
        assert!(matches!(s.qcc_per_party(Party::Coordinator), Err(Error::UnknownParty(_))));
        assert_eq!(derive_schedule(&fig_program()).unwrap(), s);
    }

    #[test]
    fn simple_schedules() {
        assert_eq!(Schedule::new(Topology::point_to_point(2).unwrap(), 1).qcc(), 0);

        let mut co = Schedule::new(Topology::coordinator(4).unwrap(), 1);
        for i in 1..=4 {
            co.add(1, p(i), Party::Coordinator, 1).unwrap();
            co.add(1, Party::Coordinator, p(i), 1).unwrap();
        }
        assert_eq!(co.qcc(), 8);

        let mut pair = Schedule::new(Topology::point_to_point(3).unwrap(), 1);
        pair.add(1, p(1), p(2), 3).unwrap();
        pair.add(2, p(2), p(1), 1).unwrap();
        assert_eq!(pair.qcc_per_party(p(3)).unwrap(), 0);

        let mut all = Schedule::new(Topology::point_to_point(3).unwrap(), 1);
        for i in 1..=3 {
            for j in 1..=3 {
                if i != j {
                    all.add(1, p(i), p(j), 1).unwrap();
                }
            }
        }
        for i in 1..=3 {
            assert_eq!(all.qcc_per_party(p(i)).unwrap(), 4);
        }
    }

    #[test]
    fn coordinator_schedule_rejects_bypass() {
        let mut s = Schedule::new(Topology::coordinator(3).unwrap(), 1);
        assert!(matches!(s.add(1, p(1), p(2), 1), Err(Error::WrongTopology(_))));
    }

    #[test]
    fn schedule_json_roundtrip() {
        let s = fig_schedule();
        let text = s.to_json();
        assert!(text.contains("\"topology\": \"point-to-point\""));
        assert_eq!(Schedule::from_json(&text).unwrap(), s);
        let doc = s.to_doc();
        assert_eq!(doc.rounds.len(), 4);
        assert_eq!(doc.rounds[2], vec![SendDoc { from: p(2), to: p(3), count: 3 }]);
    }

    #[test]
    fn ledger_matches_schedule_and_digest_is_stable() {
        let prog = fig_program();
        let inputs = parse_inputs(&["0000", "1111", "0101"]).unwrap();
        let a = execute(&prog, &inputs, &ExecOptions::seeded(1)).unwrap();
        let b = execute(&prog, &inputs, &ExecOptions::seeded(2)).unwrap();
        assert_eq!(a.ledger.aggregate(prog.topology(), 4).unwrap(), derive_schedule(&prog).unwrap());
        assert_eq!(a.ledger.digest(), b.ledger.digest());
        assert_eq!(a.outputs, vec![false; 3]);
    }

    #[test]
    fn unowned_send_is_rejected() {
        let mut b = ProgramBuilder::new("bad", Topology::point_to_point(2).unwrap(), 1, 0.0);
        let r = b.alloc(p(1), 1, "r");
        b.send(p(2), p(1), r, 1);
        b.output(p(1), |_| false);
        b.output(p(2), |_| false);
        assert!(matches!(b.build(), Err(Error::OwnershipViolation { .. })));
    }

    #[test]
    fn missing_output_is_rejected() {
        let mut b = ProgramBuilder::new("bad", Topology::point_to_point(2).unwrap(), 1, 0.0);
        b.output(p(1), |_| false);
        assert_eq!(b.build().unwrap_err(), Error::MissingOutput(p(2)));
    }

    #[test]
    fn coordinator_programs_route_through_coordinator() {
        let mut b = ProgramBuilder::new("bad", Topology::coordinator(2).unwrap(), 1, 0.0);
        let r = b.alloc(p(1), 1, "r");
        b.send(p(1), p(2), r, 1);
        b.output(p(1), |_| false);
        b.output(p(2), |_| false);
        assert!(matches!(b.build(), Err(Error::WrongTopology(_))));
    }

    #[test]
    fn causality_is_enforced() {
        let mut b = ProgramBuilder::new("bad", Topology::point_to_point(3).unwrap(), 1, 0.0);
        let r = b.alloc(p(1), 1, "r");
        b.send(p(1), p(2), r, 2);
        b.send(p(2), p(3), r, 2);
        for i in 1..=3 {
            b.output(p(i), |_| false);
        }
        assert!(matches!(b.build(), Err(Error::MalformedProgram(_))));
    }

    #[test]
    fn private_bindings_stay_private() {
        let mut b = ProgramBuilder::new("peek", Topology::point_to_point(2).unwrap(), 1, 0.0);
        let r = b.alloc(p(1), 1, "r");
        let m = b.measure(p(1), r, "secret");
        b.output(p(1), move |v| v.get(m) == 1);
        b.output(p(2), move |v| v.get(m) == 1);
        let prog = b.build().unwrap();
        let err = execute(&prog, &parse_inputs(&["0", "0"]).unwrap(), &ExecOptions::default());
        assert!(matches!(err, Err(Error::BindingNotVisible { .. })));
    }

    #[test]
    fn coordinator_cannot_read_inputs() {
        let mut b = ProgramBuilder::new("peek", Topology::coordinator(2).unwrap(), 1, 0.0);
        b.broadcast_output(Party::Coordinator, 1, |v| v.bit(0));
        let prog = b.build().unwrap();
        let err = execute(&prog, &parse_inputs(&["1", "1"]).unwrap(), &ExecOptions::default());
        assert!(matches!(err, Err(Error::MalformedProgram(_))));
    }

    #[test]
    fn dirty_release_is_reported() {
        let mut b = ProgramBuilder::new("dirty", Topology::point_to_point(2).unwrap(), 1, 0.0);
        let r = b.alloc(p(1), 1, "anc");
        b.act(p(1), Action::gate(r, 0, Gate::x()));
        b.release(r);
        b.output(p(1), |_| false);
        b.output(p(2), |_| false);
        let prog = b.build().unwrap();
        let err = execute(&prog, &parse_inputs(&["0", "0"]).unwrap(), &ExecOptions::default());
        assert_eq!(err.unwrap_err(), Error::DirtyAncilla("anc".into()));
    }

    #[test]
    fn local_ops_need_ownership() {
        let mut b = ProgramBuilder::new("steal", Topology::point_to_point(2).unwrap(), 1, 0.0);
        let r = b.alloc(p(1), 1, "r");
        b.act(p(2), Action::gate(r, 0, Gate::h()));
        b.output(p(1), |_| false);
        b.output(p(2), |_| false);
        let prog = b.build().unwrap();
        let err = execute(&prog, &parse_inputs(&["0", "0"]).unwrap(), &ExecOptions::default());
        assert!(matches!(err, Err(Error::OwnershipViolation { .. })));
    }

    #[test]
    fn qubit_cap_refusal_names_width() {
        let mut b = ProgramBuilder::new("wide", Topology::point_to_point(2).unwrap(), 1, 0.0);
        let r = b.alloc(p(1), 20, "r");
        let s = b.alloc(p(1), 10, "s");
        b.release(s);
        b.release(r);
        b.output(p(1), |_| false);
        b.output(p(2), |_| false);
        let prog = b.build().unwrap();
        assert_eq!(peak_qubits(&prog).unwrap(), 30);
        let err = execute(&prog, &parse_inputs(&["0", "0"]).unwrap(), &ExecOptions::default());
        assert_eq!(err.unwrap_err(), Error::QubitCapExceeded { required: 30, cap: 26 });
    }

    /// Coordinator program: each player sends its first bit up, the
    /// coordinator broadcasts the AND.
    fn and_program(k: usize) -> ProtocolProgram {
        let mut b = ProgramBuilder::new("and", Topology::coordinator(k).unwrap(), 2, 0.0);
        let bits: Vec<BindingId> = (1..=k)
            .map(|i| b.send_classical(p(i), Party::Coordinator, 1, 1, "x0", |v| v.bit(0) as u64))
            .collect();
        b.broadcast_output(Party::Coordinator, 2, move |v| bits.iter().all(|&x| v.get(x) == 1));
        b.build().unwrap()
    }

    #[test]
    fn conversions_preserve_outputs_and_bound_cost() {
        let prog = and_program(3);
        let s = derive_schedule(&prog).unwrap();
        assert_eq!((s.qcc(), s.rounds()), (6, 2));
        let p2p = to_point_to_point(&prog).unwrap();
        let s2 = derive_schedule(&p2p).unwrap();
        assert!(s2.qcc() <= s.qcc());
        assert_eq!(s2.qcc(), 4);
        assert!(s2.rounds() <= 2 * s.rounds());
        let back = to_coordinator(&fig_program()).unwrap();
        assert_eq!(derive_schedule(&back).unwrap().qcc(), 14);
        assert!(to_coordinator(&prog).is_err());
        assert!(to_point_to_point(&fig_program()).is_err());
        for a in 0..4u64 {
            for b2 in 0..4u64 {
                for c in 0..4u64 {
                    let xs: Vec<BitString> =
                        [a, b2, c].iter().map(|&v| BitString::from_u64(v, 2)).collect();
                    let o1 = execute(&prog, &xs, &ExecOptions::default()).unwrap().outputs;
                    let o2 = execute(&p2p, &xs, &ExecOptions::default()).unwrap().outputs;
                    assert_eq!(o1, o2);
                    assert_eq!(o1[0], a & b2 & c & 1 == 1);
                }
            }
        }
    }

    #[test]
    fn zero_communication_conversions() {
        let silent = silent_program(3);
        assert_eq!(derive_schedule(&to_coordinator(&silent).unwrap()).unwrap().qcc(), 0);
        let mut b = ProgramBuilder::new("quiet", Topology::coordinator(2).unwrap(), 1, 0.0);
        b.output(p(1), |_| true);
        b.output(p(2), |_| true);
        let quiet = b.build().unwrap();
        assert_eq!(derive_schedule(&to_point_to_point(&quiet).unwrap()).unwrap().qcc(), 0);
    }

    #[test]
    fn single_sender_normalization() {
        let prog = and_program(3);
        let norm = normalize_single_sender(&prog);
        let s = derive_schedule(&norm).unwrap();
        assert_eq!(s.qcc(), 6);
        assert_eq!(s.rounds(), 4);
        for r in 1..=s.rounds() {
            let senders: std::collections::BTreeSet<Party> =
                s.entries().filter(|e| e.0 == r).map(|e| e.1).collect();
            assert_eq!(senders.len(), 1);
        }
    }

    #[test]
    fn oblivious_program_passes() {
        let prog = and_program(3);
        let inputs: Vec<Vec<BitString>> = (0..20u64)
            .map(|s| (0..3).map(|i| BitString::from_u64(s >> i, 2)).collect())
            .collect();
        let report = verify_oblivious(&prog, &inputs, &[1, 2, 3]);
        assert!(report.is_oblivious(), "{report:?}");
        assert_eq!(report.executions, 60);
        assert_eq!(report.matches_schedule, Some(true));
        assert!(verify_oblivious(&silent_program(2), &[parse_inputs(&["00", "11"]).unwrap()], &[0])
            .is_oblivious());
    }

    #[test]
    fn conditional_send_is_detected() {
        let mut b = ProgramBuilder::new("leaky", Topology::point_to_point(2).unwrap(), 2, 0.0);
        let r = b.alloc(p(1), 1, "extra");
        b.guarded_send(p(1), p(2), r, 1, |v| v.bit(0));
        b.output(p(1), |_| false);
        b.output(p(2), |_| false);
        let prog = b.build_unchecked();
        assert!(matches!(derive_schedule(&prog), Err(Error::NotOblivious(_))));
        let inputs = vec![
            parse_inputs(&["00", "00"]).unwrap(),
            parse_inputs(&["10", "00"]).unwrap(),
        ];
        let report = verify_oblivious(&prog, &inputs, &[0]);
        assert!(!report.is_oblivious());
        let d = report.first_divergence.unwrap();
        assert_eq!(d.input_index, 1);
        assert_eq!(d.found, Some(LedgerEntry { round: 1, from: p(1), to: p(2), count: 1 }));
    }

    fn schedule_strategy() -> impl Strategy<Value = Schedule> {
        (2usize..7).prop_flat_map(|k| {
            proptest::collection::vec((1u32..6, 1..=k, 1..=k, 0u64..9), 0..30).prop_map(move |sends| {
                let mut s = Schedule::new(Topology::point_to_point(k).unwrap(), 8);
                for (r, f, t, c) in sends {
                    if f != t {
                        s.add(r, p(f), p(t), c).unwrap();
                    }
                }
                s
            })
        })
    }

    proptest! {
        #[test]
        fn double_counting(s in schedule_strategy()) {
            let total: u64 = s.topology().parties().into_iter().map(|q| s.qcc_per_party(q).unwrap()).sum();
            prop_assert_eq!(total, 2 * s.qcc());
        }
    }
}
