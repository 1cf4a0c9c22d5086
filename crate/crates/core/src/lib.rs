#![no_std]
extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod catalog;
pub mod colehopf;
pub mod expr;
pub mod ledger;
pub mod lienard;
pub mod odesolve;
pub mod params;
pub mod reference;
pub mod wcalc;
