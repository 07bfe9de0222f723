//! Achievable rate-equivocation regions for discrete memoryless wire-tap
//! channels with a helping interferer, plus a desk-scale random-coding
//! simulator that measures empirical decoding error and exact per-codebook
//! equivocation.
//!
//! The crate is organized around a small pipeline:
//!
//! * [`channel`]: validated channel tensors `p(y, z [, y1] | x1, x2)` and
//!   their JSON document format.
//! * [`info`]: exact entropies and conditional mutual informations over
//!   joints composed from a factored input chain and a channel.
//! * [`auxsearch`]: exhaustive simplex-grid enumeration of input chains and
//!   local refinement.
//! * [`region`]: the achievable-region formulas, their unions over the grid,
//!   and convex hulls.
//! * [`prop2`]: when does treating the helper as pure noise beat decoding
//!   it, per input chain.
//! * [`sim`]: random-coding schemes at small blocklength with exact
//!   equivocation accounting.
//!
//! All regions are inner bounds at the given grid resolution; nothing here
//! claims capacity.

pub mod auxsearch;
pub mod channel;
pub mod corpus;
pub mod error;
pub mod hull;
pub mod info;
pub mod prop2;
pub mod region;
pub mod sim;

pub use auxsearch::{enumerate_aux_chains, refine_around, simplex_grid, GridSpec};
pub use channel::{parse_channel, Channel, ChannelSlice};
pub use error::{Error, Result};
pub use info::{compose_joint, AuxChain, JointDist, Var};
pub use prop2::{brute_force_effective, check_prop2, Prop2Verdict};
pub use region::{
    bcc_helper_region, bcc_region, deaf_helper_region, deaf_ps_rate, lai_elgamal_region,
    mac_pentagon, per_pi_bounds_c, ps_rate_ctilde, ps_rate_le, region_c, region_cb, region_ctilde,
    region_subset, wiretap_ce_region, MacOutput, RatePoint, RateRegion, RegionMeta, TripleRegion,
};
pub use sim::{run_experiment, SimConfig, SimReport};
