#![no_std]

extern crate alloc;
#[cfg(feature = "std")]
extern crate std;

pub mod exact;
pub mod graph;
pub mod metric;
pub mod num;
pub mod hst;
pub mod instances;
pub mod ramsey;
pub mod spectral;
