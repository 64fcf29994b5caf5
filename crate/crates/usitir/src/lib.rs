//! Quantum information heat engines (USITIR machines): extractable work,
//! uncontrollable entropies, controllability and thermalizability
//! diagnostics, and numerically integrated engine-cycle energy ledgers.

pub mod control;
pub mod cycle;
pub mod error;
pub mod operator;
pub mod optim;
pub mod oracle;
pub mod scenario;
pub mod work;
pub mod thermo;
