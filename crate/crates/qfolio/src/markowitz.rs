//! Monte Carlo efficient frontier over long-only portfolios.
//!
//! Weights are drawn as q independent uniforms normalized by their sum, so
//! every sample is strictly positive and sums to one. Named picks (minimum
//! risk, maximum return, maximum Sharpe per risk-free rate) are selected by
//! re-scan over the sample cloud, and the frontier itself is a degree-2
//! least-squares fit of volatility as a function of return over the upper
//! envelope of the cloud.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::market_data::AssetStats;
use crate::seed::stream_rng;

/// Default sample count for frontier runs.
pub const DEFAULT_SAMPLES: usize = 30_000;
/// Default risk-free rate presets.
pub const DEFAULT_RF: [f64; 3] = [0.015, 0.028, 0.10];
/// Volatility bins used to extract the upper envelope before fitting.
const ENVELOPE_BINS: usize = 50;

#[derive(Debug, Error)]
pub enum MarkowitzError {
    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),
    #[error("negative variance {0}: covariance input is not PSD")]
    NegativeVariance(f64),
    #[error("zero volatility: Sharpe ratio undefined")]
    ZeroVolatility,
    #[error("need at least 2 assets, got {0}")]
    InsufficientAssets(usize),
    #[error("degenerate fit: upper envelope has fewer than 3 usable points")]
    DegenerateFit,
}

/// One long-only portfolio with annualized return/volatility.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Portfolio {
    pub weights: Vec<f64>,
    pub ret: f64,
    pub vol: f64,
    /// `(rf, sharpe)` pairs for the configured risk-free rates.
    pub sharpe_by_rf: Vec<(f64, f64)>,
}

/// Labeled picks out of the sample cloud.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NamedPortfolios {
    pub min_risk: Portfolio,
    pub max_return: Portfolio,
    /// `(rf, portfolio)` pairs, one per risk-free rate.
    pub max_sharpe: Vec<(f64, Portfolio)>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrontierReport {
    pub samples: Vec<Portfolio>,
    pub named: NamedPortfolios,
    /// Coefficients `(c0, c1, c2)` of `vol = c0 + c1*ret + c2*ret^2`.
    pub fit_coeffs: [f64; 3],
}

/// Expected portfolio return, `mu . w`.
pub fn portfolio_return(w: &[f64], mu: &[f64]) -> Result<f64, MarkowitzError> {
    if w.len() != mu.len() {
        return Err(MarkowitzError::DimensionMismatch(w.len(), mu.len()));
    }
    Ok(w.iter().zip(mu).map(|(wi, mi)| wi * mi).sum())
}

/// Portfolio volatility, `sqrt(w^T Sigma w)`.
pub fn portfolio_volatility(w: &[f64], sigma: &[Vec<f64>]) -> Result<f64, MarkowitzError> {
    if sigma.len() != w.len() || sigma.iter().any(|row| row.len() != w.len()) {
        return Err(MarkowitzError::DimensionMismatch(w.len(), sigma.len()));
    }
    let mut quad = 0.0;
    for (i, wi) in w.iter().enumerate() {
        for (j, wj) in w.iter().enumerate() {
            quad += wi * wj * sigma[i][j];
        }
    }
    if quad < -1e-10 {
        return Err(MarkowitzError::NegativeVariance(quad));
    }
    Ok(quad.max(0.0).sqrt())
}

/// Excess return over the risk-free rate per unit of volatility.
pub fn sharpe_ratio(ret: f64, vol: f64, rf: f64) -> Result<f64, MarkowitzError> {
    if vol <= 0.0 {
        return Err(MarkowitzError::ZeroVolatility);
    }
    Ok((ret - rf) / vol)
}

/// Draw `n` random portfolios on the annualized stats and report named picks
/// plus the frontier fit. Deterministic for a fixed seed: sample `i` draws
/// from its own counter-based stream, so worker partitioning cannot change
/// the result.
pub fn sample_portfolios(
    stats: &AssetStats,
    n: usize,
    seed: u64,
    rfs: &[f64],
) -> Result<FrontierReport, MarkowitzError> {
    let q = stats.num_assets();
    if q < 2 {
        return Err(MarkowitzError::InsufficientAssets(q));
    }
    let mu = stats.annual_mu();
    let cov = stats.annual_cov();

    let mut samples = Vec::with_capacity(n);
    for i in 0..n {
        let mut rng = stream_rng(seed, i as u64);
        let mut w: Vec<f64> = (0..q).map(|_| rng.random::<f64>()).collect();
        let total: f64 = w.iter().sum();
        for wi in &mut w {
            *wi /= total;
        }
        let ret = portfolio_return(&w, &mu)?;
        let vol = portfolio_volatility(&w, &cov)?;
        let sharpe_by_rf = rfs
            .iter()
            .map(|&rf| Ok((rf, sharpe_ratio(ret, vol, rf)?)))
            .collect::<Result<Vec<_>, MarkowitzError>>()?;
        samples.push(Portfolio {
            weights: w,
            ret,
            vol,
            sharpe_by_rf,
        });
    }

    let min_risk = samples
        .iter()
        .enumerate()
        .min_by(|(ia, a), (ib, b)| a.vol.partial_cmp(&b.vol).unwrap().then(ia.cmp(ib)))
        .map(|(_, p)| p.clone())
        .expect("n >= 1");
    let max_return = samples
        .iter()
        .enumerate()
        .max_by(|(ia, a), (ib, b)| a.ret.partial_cmp(&b.ret).unwrap().then(ib.cmp(ia)))
        .map(|(_, p)| p.clone())
        .expect("n >= 1");
    let max_sharpe = rfs
        .iter()
        .enumerate()
        .map(|(k, &rf)| {
            let best = samples
                .iter()
                .enumerate()
                .max_by(|(ia, a), (ib, b)| {
                    let sa = a.sharpe_by_rf[k].1;
                    let sb = b.sharpe_by_rf[k].1;
                    sa.partial_cmp(&sb).unwrap().then(ib.cmp(ia))
                })
                .map(|(_, p)| p.clone())
                .expect("n >= 1");
            (rf, best)
        })
        .collect();

    let fit_coeffs = fit_frontier(&samples).unwrap_or([f64::NAN; 3]);

    Ok(FrontierReport {
        samples,
        named: NamedPortfolios {
            min_risk,
            max_return,
            max_sharpe,
        },
        fit_coeffs,
    })
}

/// Degree-2 least-squares fit of volatility as a function of return over the
/// upper envelope: volatility is bucketed into equal bins and only the
/// max-return sample per bin enters the fit.
pub fn fit_frontier(samples: &[Portfolio]) -> Result<[f64; 3], MarkowitzError> {
    let envelope = upper_envelope(samples);
    if envelope.len() < 3 {
        return Err(MarkowitzError::DegenerateFit);
    }
    polyfit2(&envelope)
}

fn upper_envelope(samples: &[Portfolio]) -> Vec<(f64, f64)> {
    if samples.is_empty() {
        return Vec::new();
    }
    let vmin = samples.iter().map(|p| p.vol).fold(f64::INFINITY, f64::min);
    let vmax = samples
        .iter()
        .map(|p| p.vol)
        .fold(f64::NEG_INFINITY, f64::max);
    if vmax <= vmin {
        // All volatilities equal: a single envelope point.
        let best = samples
            .iter()
            .max_by(|a, b| a.ret.partial_cmp(&b.ret).unwrap())
            .unwrap();
        return vec![(best.ret, best.vol)];
    }
    let width = (vmax - vmin) / ENVELOPE_BINS as f64;
    let mut best: Vec<Option<(f64, f64)>> = vec![None; ENVELOPE_BINS];
    for p in samples {
        let bin = (((p.vol - vmin) / width) as usize).min(ENVELOPE_BINS - 1);
        match best[bin] {
            Some((r, _)) if r >= p.ret => {}
            _ => best[bin] = Some((p.ret, p.vol)),
        }
    }
    best.into_iter().flatten().collect()
}

/// Least squares for `vol = c0 + c1*ret + c2*ret^2` via the 3x3 normal
/// equations with partial pivoting.
#[allow(clippy::needless_range_loop)] // row elimination is clearer indexed
fn polyfit2(points: &[(f64, f64)]) -> Result<[f64; 3], MarkowitzError> {
    let mut a = [[0.0f64; 3]; 3];
    let mut b = [0.0f64; 3];
    for &(x, y) in points {
        let basis = [1.0, x, x * x];
        for i in 0..3 {
            b[i] += basis[i] * y;
            for j in 0..3 {
                a[i][j] += basis[i] * basis[j];
            }
        }
    }
    // Gaussian elimination.
    let mut m = [[0.0f64; 4]; 3];
    for i in 0..3 {
        m[i][..3].copy_from_slice(&a[i]);
        m[i][3] = b[i];
    }
    for col in 0..3 {
        let pivot = (col..3)
            .max_by(|&i, &j| m[i][col].abs().partial_cmp(&m[j][col].abs()).unwrap())
            .unwrap();
        if m[pivot][col].abs() < 1e-12 {
            return Err(MarkowitzError::DegenerateFit);
        }
        m.swap(col, pivot);
        for row in 0..3 {
            if row != col {
                let f = m[row][col] / m[col][col];
                for k in col..4 {
                    m[row][k] -= f * m[col][k];
                }
            }
        }
    }
    Ok([m[0][3] / m[0][0], m[1][3] / m[1][1], m[2][3] / m[2][2]])
}
