//! Exact modular-symbol computations for elliptic optimal quotients of `J_0(N)`:
//! modular degrees, congruence numbers, period lattices and a rule engine that
//! certifies valuations of the Manin constant.

pub mod arith;
pub mod certify;
pub mod elliptic;
pub mod hecke_forms;
pub mod invariants;
pub mod lattice;
pub mod modsym;
pub mod periods;
