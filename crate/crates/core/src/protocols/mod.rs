//! Protocol constructors: fingerprint equality, distributed Grover search
//! for Set-Disjointness and its bounded-round split, the symmetric-predicate
//! protocol, and the schedule-only model of the optimal search protocol.

use crate::error::{Error, Result};
use crate::functions::{Family, SymmetricSpec};
use crate::netmodel::ProtocolProgram;

mod aa;
mod equality;
mod gadget;
mod grover;
mod symmetric;

pub use aa::{build_aa_cost_model, ceil_sqrt, AaCostModel};
pub use equality::{build_equality, build_equality_poly, fingerprint_prime, is_prime, poly_fingerprint};
pub use gadget::{build_query_gadget, gadget_harness, QueryGadget};
pub use grover::{
    bounded_round_cost, build_bounded_round_disj, build_disj_grover, diffusion, emit_attempt,
    emit_search, search_cost, GroverPlan, HitFn, Iterations, GROWTH,
};
pub use symmetric::{
    binomial, build_f1_subprotocol, build_symmetric, counting_fragment, counting_precision,
    decode_count, emit_counting, emit_zero_report, rank_subset, small_subset_count,
    symmetric_cost, unrank_subset, zero_set_width,
};

/// The shipped protocol for `family`. `blocks_side` selects the
/// bounded-round split with blocks of `blocks_side^2` coordinates (DISJ only).
pub fn build_for_family(
    family: &Family,
    n: usize,
    k: usize,
    epsilon: f64,
    blocks_side: Option<usize>,
) -> Result<ProtocolProgram> {
    match (family, blocks_side) {
        (Family::Disj, None) => build_disj_grover(n, k, epsilon),
        (Family::Disj, Some(m)) => build_bounded_round_disj(n, k, m, epsilon),
        (_, Some(_)) => Err(Error::InvalidParameter(format!(
            "the bounded-round split exists only for disj, not {}",
            family.name()
        ))),
        (Family::Equality, None) => build_equality(n, k, 2),
        (Family::InnerProduct, None) => build_symmetric(&SymmetricSpec::inner_product(n, k), epsilon),
        (Family::Symmetric { spec }, None) => {
            if spec.n != n || spec.k != k {
                return Err(Error::InvalidParameter(format!(
                    "spec is for n = {}, k = {}, requested n = {n}, k = {k}",
                    spec.n, spec.k
                )));
            }
            build_symmetric(spec, epsilon)
        }
    }
}

/// `ceil(log2(x))`, with `ceil_log2(1) = 0`.
pub fn ceil_log2(x: u64) -> usize {
    assert!(x > 0, "ceil_log2 of zero");
    (u64::BITS - (x - 1).leading_zeros()) as usize
}
