//! The assembled multi-bubble field on the disk and its diagnostics.

pub mod energy;
pub mod expansion;
pub mod field;
pub mod green;
pub mod residual;
pub mod weak_limit;

pub use energy::{energy, EnergyReport};
pub use expansion::{pointwise_expansion_check, ExpansionReport};
pub use field::{assemble, assemble_at, AnsatzField, WeakLimitParams};
pub use green::{green_disk, DiskGeometry, Point};
pub use residual::{residual_norms, ResidualReport};
pub use weak_limit::ModelWeakLimit;
