//! Classical portfolio statistics, budget-constrained QUBO/Ising encoding,
//! and a dense state-vector QAOA simulator with a derivative-free outer loop.
//!
//! The pipeline runs end to end: ingest closing prices, compute mean returns
//! and the covariance/correlation matrices, sample the efficient frontier,
//! encode asset selection as a QUBO, map it to a diagonal Ising Hamiltonian,
//! and solve it either exhaustively or with QAOA on a simulated state vector.

pub mod market_data;
pub mod markowitz;
pub mod optim;
pub mod qaoa;
pub mod qubo_ising;
pub mod seed;
pub mod statevector;

pub use market_data::{AssetStats, PriceSeries, ReturnSeries};
pub use markowitz::{FrontierReport, Portfolio};
pub use qaoa::{QaoaParams, QaoaResult};
pub use qubo_ising::{BruteForceResult, IsingHamiltonian, QuboProblem};
pub use statevector::{GateOp, StateVector};
