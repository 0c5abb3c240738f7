use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use super::program::{Instruction, ProtocolProgram};
use crate::error::{Error, Result};
use crate::party::{Party, Topology, TopologyKind};

/// Re-hosts the roles and relabels send rounds. `relabel` sees each send
/// with the hosts of the original program.
pub(crate) fn rehost(
    program: &ProtocolProgram,
    topology: Topology,
    hosts: BTreeMap<Party, Party>,
    relabel: impl Fn(u32, Party, Party) -> u32,
) -> ProtocolProgram {
    let instructions = program
        .instructions
        .iter()
        .map(|ins| match ins {
            Instruction::Send { from, to, reg, round } => Instruction::Send {
                from: *from,
                to: *to,
                reg: *reg,
                round: relabel(*round, program.host(*from), program.host(*to)),
            },
            other => other.clone(),
        })
        .collect();
    let mut out = program.clone();
    out.topology = topology;
    out.hosts = hosts;
    out.instructions = Arc::new(instructions);
    out
}

/// Renumbers the rounds that carry cross-host traffic as `1, 2, ...` in order.
pub(crate) fn compress_rounds(program: &ProtocolProgram) -> ProtocolProgram {
    let used: BTreeSet<u32> = program
        .instructions
        .iter()
        .filter_map(|ins| match ins {
            Instruction::Send { from, to, round, .. }
                if program.host(*from) != program.host(*to) =>
            {
                Some(*round)
            }
            _ => None,
        })
        .collect();
    let labels: Vec<u32> = used.into_iter().collect();
    let map = |r: u32| labels.partition_point(|&x| x <= r).max(1) as u32;
    let instructions = program
        .instructions
        .iter()
        .map(|ins| match ins {
            Instruction::Send { from, to, reg, round } => {
                Instruction::Send { from: *from, to: *to, reg: *reg, round: map(*round) }
            }
            other => other.clone(),
        })
        .collect();
    let mut out = program.clone();
    out.instructions = Arc::new(instructions);
    out
}

/// Uplink hops of round `m` become round `2m - 1`, downlink hops `2m`.
pub(crate) fn split_hops(round: u32, from_host: Party, to_host: Party) -> u32 {
    if from_host.is_coordinator() && !to_host.is_coordinator() {
        2 * round
    } else if to_host.is_coordinator() && !from_host.is_coordinator() {
        2 * round - 1
    } else {
        round
    }
}

/// Player 1 takes over the coordinator's role. Cost never grows and each
/// original round becomes at most two.
pub fn to_point_to_point(program: &ProtocolProgram) -> Result<ProtocolProgram> {
    if program.topology.kind != TopologyKind::Coordinator {
        return Err(Error::WrongTopology("to_point_to_point needs a coordinator program".into()));
    }
    let hosts = program
        .roles
        .parties()
        .into_iter()
        .map(|r| {
            let h = program.host(r);
            (r, if h.is_coordinator() { Party::player(1) } else { h })
        })
        .collect();
    let topology = Topology::point_to_point(program.topology.k)?;
    let converted = rehost(program, topology, hosts, split_hops);
    Ok(compress_rounds(&converted))
}

/// Every cross-host send is relayed through a new coordinator, so each
/// qubit is counted twice.
pub fn to_coordinator(program: &ProtocolProgram) -> Result<ProtocolProgram> {
    if program.topology.kind != TopologyKind::PointToPoint {
        return Err(Error::WrongTopology("to_coordinator needs a point-to-point program".into()));
    }
    if program.roles.has_coordinator() {
        return Err(Error::WrongTopology(
            "program already contains a coordinator role; relaying would need a second one".into(),
        ));
    }
    let mut instructions = Vec::with_capacity(program.instructions.len());
    for ins in program.instructions.iter() {
        match ins {
            Instruction::Send { from, to, reg, round }
                if program.host(*from) != program.host(*to) =>
            {
                let co = Party::Coordinator;
                instructions.push(Instruction::Send { from: *from, to: co, reg: *reg, round: *round });
                instructions.push(Instruction::Send { from: co, to: *to, reg: *reg, round: *round });
            }
            other => instructions.push(other.clone()),
        }
    }
    let mut out = program.clone();
    out.topology = Topology::coordinator(program.topology.k)?;
    out.roles = Topology::coordinator(program.roles.k)?;
    out.hosts.insert(Party::Coordinator, Party::Coordinator);
    out.instructions = Arc::new(instructions);
    Ok(out)
}

/// Splits rounds so that a single host sends in each round (coordinator
/// uplinks and downlinks stay in separate rounds). May multiply the round count.
pub fn normalize_single_sender(program: &ProtocolProgram) -> ProtocolProgram {
    let hop = |from: Party| -> u8 {
        (program.topology.kind == TopologyKind::Coordinator && program.host(from).is_coordinator())
            as u8
    };
    let keys: BTreeSet<(u32, u8, Party)> = program
        .instructions
        .iter()
        .filter_map(|ins| match ins {
            Instruction::Send { from, to, round, .. }
                if program.host(*from) != program.host(*to) =>
            {
                Some((*round, hop(*from), program.host(*from)))
            }
            _ => None,
        })
        .collect();
    let keys: Vec<(u32, u8, Party)> = keys.into_iter().collect();
    let instructions = program
        .instructions
        .iter()
        .map(|ins| match ins {
            Instruction::Send { from, to, reg, round } => {
                let key = (*round, hop(*from), program.host(*from));
                let label = keys.partition_point(|k| *k < key) as u32 + 1;
                Instruction::Send { from: *from, to: *to, reg: *reg, round: label }
            }
            other => other.clone(),
        })
        .collect();
    let mut out = program.clone();
    out.instructions = Arc::new(instructions);
    out
}
