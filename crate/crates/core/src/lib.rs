//! Zero-trust IPv6 edge defense.
//!
//! A single per-packet pipeline that checks source identity before rate:
//!
//! 1. **External spoofing**: the arrival Hop Limit must fall inside the band
//!    configured for the longest matching source prefix ([`lpm`]).
//! 2. **Internal spoofing**: internal sources must be bound to their ingress
//!    port, with bindings learned from Duplicate Address Detection probes
//!    ([`binding`]).
//! 3. **External flooding**: a per-prefix packet budget per tumbling window,
//!    counted in a Count-Min Sketch ([`sketch`]).
//! 4. **Internal flooding**: a per-flow budget with a stricter limit for
//!    multicast destinations.
//!
//! [`pipeline::Pipeline`] runs the stages. [`scenario`] synthesizes labeled
//! traffic for the fifteen single-, dual- and multi-vector attack mixes, and
//! [`metrics`] scores verdicts against ground truth. [`config`] and [`cli`]
//! wire everything together for the `ztedge` binary.

pub mod binding;
pub mod cli;
pub mod config;
pub mod harness;
pub mod lpm;
pub mod metrics;
pub mod packet;
pub mod pipeline;
pub mod scenario;
pub mod sketch;
pub mod trace;

pub use binding::{BindResult, BindingCheck, BindingTable};
pub use lpm::{HlBand, LpmTable, Prefix, PrefixEntry};
pub use packet::{FlowKey, LabeledPacket, Packet, PortId, PortRole, Truth, Vector, L4};
pub use pipeline::{compute_threshold, Action, Pipeline, PipelineConfig, Reason, Stage, Verdict};
pub use sketch::{BloomFilter, CountMinSketch};
