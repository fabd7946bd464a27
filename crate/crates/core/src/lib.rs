pub mod compiler;
pub mod gcrypto;
pub mod isa;
pub mod netlist;
pub mod simulator;
