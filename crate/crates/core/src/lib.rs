pub mod cli;
pub mod error;
pub mod first_quant;
pub mod fock;
pub mod linalg;
pub mod measures;
pub mod rdm;
pub mod spinmap;
pub mod transform;
pub mod yang;
