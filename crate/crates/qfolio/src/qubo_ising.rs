//! Budget-constrained portfolio selection as a QUBO, its exhaustive solver,
//! and the mapping to a diagonal Ising Hamiltonian.
//!
//! The cost over bitstrings is `C(x) = b x^T sigma x - mu^T x + alpha (B - 1^T x)^2`,
//! expanded into an explicit quadratic/linear/constant form using `x_i^2 = x_i`.
//! Substituting `x_i = (1 - z_i) / 2` with `z_i in {+1, -1}` yields
//! `H = sum_{i<j} zz_ij Z_i Z_j + sum_i z_i Z_i + k`, diagonal in the
//! computational basis, whose energies agree with the QUBO on every bitstring.
//!
//! Bit ordering: asset 0 occupies the most significant bit of the state
//! index, so the index of bitstring `1001` on four assets is 9 and histogram
//! rows print in the same orientation as the ket labels.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market_data::AssetStats;

/// Exhaustive enumeration guard.
pub const MAX_BRUTE_FORCE_VARS: usize = 24;

#[derive(Debug, Error)]
pub enum QuboError {
    #[error("budget {0} out of range for {1} assets")]
    BudgetOutOfRange(usize, usize),
    #[error("risk aversion must be > 0, got {0}")]
    NonPositiveRiskAversion(f64),
    #[error("negative penalty scale {0}")]
    NegativePenalty(f64),
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("too many variables: {0} > {MAX_BRUTE_FORCE_VARS}")]
    TooManyVariables(usize),
}

/// Which matrix enters the risk term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MatrixKind {
    Covariance,
    Correlation,
}

impl std::str::FromStr for MatrixKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "covariance" => Ok(MatrixKind::Covariance),
            "correlation" => Ok(MatrixKind::Correlation),
            other => Err(format!("unknown matrix kind `{other}`")),
        }
    }
}

/// Quadratic binary cost in explicit form. The diagonal of `quad` is kept
/// as-is rather than folded into `lin`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct QuboProblem {
    pub n: usize,
    /// Symmetric `n x n`.
    pub quad: Vec<Vec<f64>>,
    pub lin: Vec<f64>,
    #[serde(rename = "const")]
    pub const_term: f64,
    pub labels: Vec<String>,
}

/// Diagonal Pauli-Z form of a [`QuboProblem`].
///
/// The quadratic part sums over unordered pairs: `H = sum_{i<j} zz[i][j] Z_i Z_j
/// + sum_i z[i] Z_i + k`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct IsingHamiltonian {
    pub n: usize,
    /// Symmetric with zero diagonal; only `i < j` entries enter the energy.
    pub zz: Vec<Vec<f64>>,
    pub z: Vec<f64>,
    pub k: f64,
}

/// Result of exhaustive enumeration over all `2^n` bitstrings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BruteForceResult {
    pub best_index: usize,
    pub best_bits: Vec<u8>,
    pub best_value: f64,
    pub energies: Vec<f64>,
}

/// Bit of asset `i` (0-based, most significant first) in state `index`.
pub fn bit_of(index: usize, i: usize, n: usize) -> u8 {
    ((index >> (n - 1 - i)) & 1) as u8
}

/// State index of an asset bit vector, most significant bit first.
pub fn index_of_bits(bits: &[u8]) -> usize {
    bits.iter().fold(0, |acc, &b| (acc << 1) | usize::from(b))
}

/// Render a state index as the ket-style bitstring, e.g. `1001`.
pub fn bitstring(index: usize, n: usize) -> String {
    (0..n)
        .map(|i| char::from(b'0' + bit_of(index, i, n)))
        .collect()
}

/// Build the portfolio QUBO from annualized stats.
pub fn build_portfolio_qubo(
    stats: &AssetStats,
    b: f64,
    budget: usize,
    alpha: f64,
    matrix_kind: MatrixKind,
) -> Result<QuboProblem, QuboError> {
    let n = stats.num_assets();
    if b <= 0.0 {
        return Err(QuboError::NonPositiveRiskAversion(b));
    }
    if alpha < 0.0 {
        return Err(QuboError::NegativePenalty(alpha));
    }
    if budget > n {
        return Err(QuboError::BudgetOutOfRange(budget, n));
    }
    let sigma = match matrix_kind {
        MatrixKind::Covariance => stats.annual_cov(),
        // Correlation is scale-free, so annualization leaves it unchanged.
        MatrixKind::Correlation => stats.corr.clone(),
    };
    let mu = stats.annual_mu();
    let budget_f = budget as f64;

    let mut quad = vec![vec![0.0; n]; n];
    for i in 0..n {
        for j in 0..n {
            quad[i][j] = b * sigma[i][j] + alpha;
        }
    }
    let lin: Vec<f64> = mu.iter().map(|m| -m - 2.0 * alpha * budget_f).collect();
    Ok(QuboProblem {
        n,
        quad,
        lin,
        const_term: alpha * budget_f * budget_f,
        labels: stats.tickers.clone(),
    })
}

/// `sum_{ij} Q_ij x_i x_j + sum_i L_i x_i + const`.
#[allow(clippy::needless_range_loop)] // paired index tests are clearer indexed
pub fn evaluate(q: &QuboProblem, x: &[u8]) -> Result<f64, QuboError> {
    if x.len() != q.n {
        return Err(QuboError::DimensionMismatch(x.len(), q.n));
    }
    let mut value = q.const_term;
    for i in 0..q.n {
        if x[i] == 0 {
            continue;
        }
        value += q.lin[i];
        for j in 0..q.n {
            if x[j] != 0 {
                value += q.quad[i][j];
            }
        }
    }
    Ok(value)
}

/// Enumerate all `2^n` bitstrings; ties break toward the lowest index.
pub fn brute_force_solve(q: &QuboProblem) -> Result<BruteForceResult, QuboError> {
    if q.n > MAX_BRUTE_FORCE_VARS {
        return Err(QuboError::TooManyVariables(q.n));
    }
    let size = 1usize << q.n;
    let mut energies = Vec::with_capacity(size);
    let mut best_index = 0;
    let mut best_value = f64::INFINITY;
    for index in 0..size {
        let bits: Vec<u8> = (0..q.n).map(|i| bit_of(index, i, q.n)).collect();
        let value = evaluate(q, &bits)?;
        if value < best_value {
            best_value = value;
            best_index = index;
        }
        energies.push(value);
    }
    Ok(BruteForceResult {
        best_index,
        best_bits: (0..q.n).map(|i| bit_of(best_index, i, q.n)).collect(),
        best_value,
        energies,
    })
}

/// Substitute `x_i = (1 - Z_i) / 2` and collect Pauli-Z coefficients.
/// Off-diagonal coefficients `Q_ij` and `Q_ji` aggregate into one `zz` entry;
/// diagonal quadratic terms act linearly since `Z_i^2 = I`.
pub fn qubo_to_ising(q: &QuboProblem) -> IsingHamiltonian {
    let n = q.n;
    let mut zz = vec![vec![0.0; n]; n];
    let mut z = vec![0.0; n];
    let mut k = q.const_term;

    for i in 0..n {
        // Q_ii x_i^2 = Q_ii x_i and L_i x_i both expand to (1 - Z_i)/2.
        let linear = q.quad[i][i] + q.lin[i];
        z[i] -= linear / 2.0;
        k += linear / 2.0;
        for j in (i + 1)..n {
            let pair = q.quad[i][j] + q.quad[j][i];
            zz[i][j] += pair / 4.0;
            zz[j][i] = zz[i][j];
            z[i] -= pair / 4.0;
            z[j] -= pair / 4.0;
            k += pair / 4.0;
        }
    }
    IsingHamiltonian { n, zz, z, k }
}

/// Energies of every computational basis state, indexed per the bit ordering
/// above. This is the diagonal the simulator applies phases and expectations
/// against.
pub fn diagonal_energies(h: &IsingHamiltonian) -> Result<Vec<f64>, QuboError> {
    if h.n > MAX_BRUTE_FORCE_VARS {
        return Err(QuboError::TooManyVariables(h.n));
    }
    let size = 1usize << h.n;
    let mut energies = Vec::with_capacity(size);
    for index in 0..size {
        let spins: Vec<f64> = (0..h.n)
            .map(|i| 1.0 - 2.0 * f64::from(bit_of(index, i, h.n)))
            .collect();
        let mut e = h.k;
        for i in 0..h.n {
            e += h.z[i] * spins[i];
            for j in (i + 1)..h.n {
                e += h.zz[i][j] * spins[i] * spins[j];
            }
        }
        energies.push(e);
    }
    Ok(energies)
}

/// The instance studied throughout: published mean returns and correlation
/// matrix, `b = 0.5`, `B = 2`, `alpha = 1`.
pub fn example_instance() -> QuboProblem {
    let stats = AssetStats::from_annual(
        vec![
            "BRKM5".into(),
            "ITUB4".into(),
            "KLBN4".into(),
            "VALE3".into(),
        ],
        vec![0.32, 0.06, 0.11, 0.30],
        vec![
            vec![1.00, 0.37, 0.28, 0.33],
            vec![0.37, 1.00, 0.18, 0.36],
            vec![0.28, 0.18, 1.00, 0.24],
            vec![0.33, 0.36, 0.24, 1.00],
        ],
    );
    build_portfolio_qubo(&stats, 0.5, 2, 1.0, MatrixKind::Correlation).unwrap()
}
