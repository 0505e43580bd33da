//! Price ingestion and per-asset return statistics.
//!
//! Returns are simple (arithmetic) returns, `r_t = (p_{t+1} - p_t) / p_t`.
//! The covariance matrix uses the unbiased `1/(M-1)` normalization over the
//! column-centered return matrix. Per-period statistics are stored; annual
//! figures are obtained by scaling mean and covariance by `period_scale`
//! (250 trading days by default at the CLI layer).

use std::collections::HashSet;
use std::path::Path;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MarketDataError {
    #[error("file not found: {0}")]
    FileNotFound(String),
    #[error("malformed csv at line {line}: {reason}")]
    MalformedCsv { line: usize, reason: String },
    #[error("non-positive price at line {0}")]
    NonPositivePrice(usize),
    #[error("empty series: need at least 2 price rows")]
    EmptySeries,
    #[error("insufficient data: need at least 2 return rows, got {0}")]
    InsufficientData(usize),
}

/// Dated closing prices for one or more tickers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PriceSeries {
    pub tickers: Vec<String>,
    pub dates: Vec<NaiveDate>,
    /// Row-major `[num_dates x num_assets]`, every entry finite and > 0.
    pub prices: Vec<Vec<f64>>,
}

/// Simple per-period returns, `[M x num_assets]` with `M = num_dates - 1`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub tickers: Vec<String>,
    pub returns: Vec<Vec<f64>>,
}

/// Mean returns and covariance/correlation matrices, per period.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssetStats {
    pub tickers: Vec<String>,
    pub mu: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
    pub corr: Vec<Vec<f64>>,
    /// Periods per year, used for annualization.
    pub period_scale: u32,
    /// Indices of assets whose return variance was exactly zero. Their
    /// off-diagonal correlation entries are set to 0 (diagonal stays 1).
    #[serde(skip)]
    pub zero_variance: Vec<usize>,
}

impl AssetStats {
    /// Stats that are already annual figures (`period_scale = 1`).
    pub fn from_annual(tickers: Vec<String>, mu: Vec<f64>, cov: Vec<Vec<f64>>) -> Self {
        let corr = corr_from_cov(&cov).0;
        AssetStats {
            tickers,
            mu,
            cov,
            corr,
            period_scale: 1,
            zero_variance: Vec::new(),
        }
    }

    pub fn num_assets(&self) -> usize {
        self.tickers.len()
    }

    /// Mean returns scaled to one year.
    pub fn annual_mu(&self) -> Vec<f64> {
        let s = f64::from(self.period_scale);
        self.mu.iter().map(|m| m * s).collect()
    }

    /// Covariance scaled to one year (volatility scales by sqrt).
    pub fn annual_cov(&self) -> Vec<Vec<f64>> {
        let s = f64::from(self.period_scale);
        self.cov
            .iter()
            .map(|row| row.iter().map(|c| c * s).collect())
            .collect()
    }
}

/// Load a `date,T1,...,Tq` CSV of closing prices.
///
/// Rows are sorted by date. A row with any blank cell is dropped whole so the
/// price matrix stays rectangular; non-numeric cells and non-positive prices
/// are hard errors.
pub fn load_prices<P: AsRef<Path>>(path: P) -> Result<PriceSeries, MarketDataError> {
    let path = path.as_ref();
    if !path.exists() {
        return Err(MarketDataError::FileNotFound(path.display().to_string()));
    }
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_path(path)
        .map_err(|e| MarketDataError::MalformedCsv {
            line: 1,
            reason: e.to_string(),
        })?;

    let headers = reader
        .headers()
        .map_err(|e| MarketDataError::MalformedCsv {
            line: 1,
            reason: e.to_string(),
        })?
        .clone();
    if headers.len() < 2 || headers.get(0).map(str::trim) != Some("date") {
        return Err(MarketDataError::MalformedCsv {
            line: 1,
            reason: "header must be `date,<ticker1>,...`".into(),
        });
    }
    let tickers: Vec<String> = headers
        .iter()
        .skip(1)
        .map(|t| t.trim().to_string())
        .collect();
    let mut seen = HashSet::new();
    for t in &tickers {
        if t.is_empty() || !seen.insert(t.clone()) {
            return Err(MarketDataError::MalformedCsv {
                line: 1,
                reason: format!("duplicate or empty ticker `{t}`"),
            });
        }
    }

    let mut rows: Vec<(NaiveDate, Vec<f64>)> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let line = i + 2; // 1-based, after the header
        let record = record.map_err(|e| MarketDataError::MalformedCsv {
            line,
            reason: e.to_string(),
        })?;
        if record.len() != tickers.len() + 1 {
            return Err(MarketDataError::MalformedCsv {
                line,
                reason: format!("expected {} cells, got {}", tickers.len() + 1, record.len()),
            });
        }
        let date = NaiveDate::parse_from_str(record.get(0).unwrap_or("").trim(), "%Y-%m-%d")
            .map_err(|e| MarketDataError::MalformedCsv {
                line,
                reason: format!("bad date: {e}"),
            })?;
        let cells: Vec<&str> = record.iter().skip(1).map(str::trim).collect();
        if cells.iter().any(|c| c.is_empty()) {
            // Missing data drops the whole row to keep the matrix rectangular.
            continue;
        }
        let mut prices = Vec::with_capacity(tickers.len());
        for cell in cells {
            let p: f64 = cell.parse().map_err(|_| MarketDataError::MalformedCsv {
                line,
                reason: format!("non-numeric price `{cell}`"),
            })?;
            if !p.is_finite() || p <= 0.0 {
                return Err(MarketDataError::NonPositivePrice(line));
            }
            prices.push(p);
        }
        rows.push((date, prices));
    }

    rows.sort_by_key(|(d, _)| *d);
    for pair in rows.windows(2) {
        if pair[0].0 == pair[1].0 {
            return Err(MarketDataError::MalformedCsv {
                line: 1,
                reason: format!("duplicate date {}", pair[0].0),
            });
        }
    }
    if rows.len() < 2 {
        return Err(MarketDataError::EmptySeries);
    }
    let (dates, prices) = rows.into_iter().unzip();
    Ok(PriceSeries {
        tickers,
        dates,
        prices,
    })
}

/// `returns[t][i] = (prices[t+1][i] - prices[t][i]) / prices[t][i]`.
pub fn compute_returns(p: &PriceSeries) -> Result<ReturnSeries, MarketDataError> {
    if p.dates.len() < 2 {
        return Err(MarketDataError::EmptySeries);
    }
    let returns = p
        .prices
        .windows(2)
        .map(|w| {
            w[0].iter()
                .zip(&w[1])
                .map(|(prev, next)| (next - prev) / prev)
                .collect()
        })
        .collect();
    Ok(ReturnSeries {
        tickers: p.tickers.clone(),
        returns,
    })
}

/// Mean returns plus covariance/correlation with `1/(M-1)` normalization.
#[allow(clippy::needless_range_loop)] // symmetric fill-in is clearer indexed
pub fn compute_stats(r: &ReturnSeries, period_scale: u32) -> Result<AssetStats, MarketDataError> {
    let m = r.returns.len();
    if m < 2 {
        return Err(MarketDataError::InsufficientData(m));
    }
    let q = r.tickers.len();
    let mut mu = vec![0.0; q];
    for row in &r.returns {
        for (i, v) in row.iter().enumerate() {
            mu[i] += v;
        }
    }
    for v in &mut mu {
        *v /= m as f64;
    }

    let mut cov = vec![vec![0.0; q]; q];
    for row in &r.returns {
        for i in 0..q {
            let di = row[i] - mu[i];
            for j in i..q {
                cov[i][j] += di * (row[j] - mu[j]);
            }
        }
    }
    let norm = (m - 1) as f64;
    for i in 0..q {
        for j in i..q {
            cov[i][j] /= norm;
            cov[j][i] = cov[i][j];
        }
    }

    let (corr, zero_variance) = corr_from_cov(&cov);
    Ok(AssetStats {
        tickers: r.tickers.clone(),
        mu,
        cov,
        corr,
        period_scale,
        zero_variance,
    })
}

fn corr_from_cov(cov: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<usize>) {
    let q = cov.len();
    let sd: Vec<f64> = (0..q).map(|i| cov[i][i].max(0.0).sqrt()).collect();
    let zero_variance: Vec<usize> = (0..q).filter(|&i| sd[i] == 0.0).collect();
    let mut corr = vec![vec![0.0; q]; q];
    for i in 0..q {
        corr[i][i] = 1.0;
        for j in 0..i {
            let c = if sd[i] > 0.0 && sd[j] > 0.0 {
                cov[i][j] / (sd[i] * sd[j])
            } else {
                0.0
            };
            corr[i][j] = c;
            corr[j][i] = c;
        }
    }
    (corr, zero_variance)
}
