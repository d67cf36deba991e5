//! Alpha entanglement codes AE(alpha, s, p): lattice arithmetic, a streaming
//! XOR encoder with two-block repair, disaster-recovery simulation against
//! Reed-Solomon and replication, and minimal erasure search.

pub mod baselines;
pub mod codec;
pub mod lattice;
pub mod me;
pub mod sim;

pub use codec::{BlockStore, Entangler, Maintenance, Payload};
pub use lattice::{BlockId, CodeParams, StrandClass};
pub use sim::Scheme;
