use std::collections::BTreeMap;
use std::fs::File;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::{McmcConfig, ModelSpec, PriorSpec};
use crate::error::{Error, Result};
use crate::numeric::{format_exact, quantile_sorted};
use crate::process::{
    DurationModel, Mixture, MtdcppModel, MtdppModel, PointPattern, SeasonalModel, SeasonalParams,
};

/// Provenance and layout stored next to the draws.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleMeta {
    pub model: ModelSpec,
    pub prior: PriorSpec,
    pub config: McmcConfig,
    pub seed: u64,
    pub config_hash: String,
    pub acceptance: BTreeMap<String, f64>,
    pub columns: Vec<String>,
    pub rows: usize,
    pub events: usize,
}

/// Retained MCMC draws, one row per kept iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct PosteriorSamples {
    pub meta: SampleMeta,
    data: Vec<f64>,
}

/// Posterior mean, standard deviation and equal-tailed 95% interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub sd: f64,
    pub lower: f64,
    pub upper: f64,
}

impl Summary {
    pub fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        let mut sorted = values.to_vec();
        sorted.sort_by(f64::total_cmp);
        Self {
            mean,
            sd: var.sqrt(),
            lower: quantile_sorted(&sorted, 0.025),
            upper: quantile_sorted(&sorted, 0.975),
        }
    }

    pub fn covers(&self, v: f64) -> bool {
        self.lower <= v && v <= self.upper
    }
}

/// A fully parameterised model reconstructed from one posterior draw.
#[derive(Debug, Clone, PartialEq)]
pub enum FittedModel {
    Mtdpp(MtdppModel),
    Mtdcpp(MtdcppModel),
    Seasonal(SeasonalModel),
}

impl FittedModel {
    pub fn order(&self) -> usize {
        match self {
            Self::Mtdpp(m) => m.order(),
            Self::Mtdcpp(m) => m.order(),
            Self::Seasonal(m) => m.inner.order(),
        }
    }

    pub fn seasonal(&self) -> Option<&SeasonalParams> {
        match self {
            Self::Seasonal(m) => Some(&m.seasonal),
            _ => None,
        }
    }

    /// Conditional mixture on the latent scale given latent lags.
    pub fn mixture(&self, lags: &[f64]) -> Mixture {
        match self {
            Self::Mtdpp(m) => m.mixture(lags),
            Self::Mtdcpp(m) => m.mixture(lags),
            Self::Seasonal(m) => m.inner.mixture(lags),
        }
    }

    /// Latent lags of duration `i` (1-based, `1..=n+1`), most recent first.
    pub fn latent_lags(&self, pattern: &PointPattern, i: usize) -> Vec<f64> {
        match self.seasonal() {
            None => pattern.history(i, self.order()),
            Some(s) => {
                let t = pattern.times();
                (1..=self.order().min(i - 1))
                    .map(|l| {
                        let j = i - 1 - l;
                        pattern.durations()[j] / s.mu(t[j])
                    })
                    .collect()
            }
        }
    }

    /// Factor mapping latent to observed scale for duration `i`: `μ(t_i)`,
    /// or `μ(T)` for the censored duration `n + 1`.
    pub fn scale(&self, pattern: &PointPattern, i: usize) -> f64 {
        match self.seasonal() {
            None => 1.0,
            Some(s) => s.mu(if i <= pattern.len() { pattern.times()[i - 1] } else { pattern.horizon() }),
        }
    }

    /// Mixture for duration `i` on the latent scale, with its scale factor.
    pub fn duration_mixture(&self, pattern: &PointPattern, i: usize) -> (Mixture, f64) {
        (self.mixture(&self.latent_lags(pattern, i)), self.scale(pattern, i))
    }
}

impl PosteriorSamples {
    pub fn new(meta: SampleMeta, data: Vec<f64>) -> Result<Self> {
        let width = meta.columns.len();
        if width == 0 || data.len() != meta.rows * width {
            return Err(Error::Data(format!(
                "sample matrix has {} values, expected {} rows x {} columns",
                data.len(),
                meta.rows,
                width
            )));
        }
        Ok(Self { meta, data })
    }

    /// Samples assembled from explicit parameter rows, with default prior
    /// and sampler settings recorded as provenance.
    pub fn from_rows(model: ModelSpec, columns: Vec<String>, rows: &[Vec<f64>], events: usize) -> Result<Self> {
        if let Some(bad) = rows.iter().find(|r| r.len() != columns.len()) {
            return Err(Error::Data(format!("row has {} values for {} columns", bad.len(), columns.len())));
        }
        let prior = PriorSpec::default();
        let config = McmcConfig::default();
        let meta = SampleMeta {
            config_hash: super::config_hash(&(&model, &prior, &config))?,
            model,
            prior,
            seed: config.seed,
            config,
            acceptance: BTreeMap::new(),
            columns,
            rows: rows.len(),
            events,
        };
        Self::new(meta, rows.concat())
    }

    pub fn rows(&self) -> usize {
        self.meta.rows
    }

    pub fn columns(&self) -> &[String] {
        &self.meta.columns
    }

    pub fn row(&self, r: usize) -> &[f64] {
        let w = self.meta.columns.len();
        &self.data[r * w..(r + 1) * w]
    }

    fn index(&self, name: &str) -> Option<usize> {
        self.meta.columns.iter().position(|c| c == name)
    }

    pub fn value(&self, r: usize, name: &str) -> Option<f64> {
        self.index(name).map(|j| self.row(r)[j])
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let j = self.index(name)?;
        Some((0..self.rows()).map(|r| self.row(r)[j]).collect())
    }

    pub fn summary(&self, name: &str) -> Option<Summary> {
        self.column(name).map(|c| Summary::of(&c))
    }

    /// Weight vector of row `r`.
    pub fn weights(&self, r: usize) -> Vec<f64> {
        let order = self.meta.model.order();
        (1..=order).map(|l| self.value(r, &format!("w_{l}")).unwrap_or(0.0)).collect()
    }

    /// Model implied by draw `r`.
    pub fn model_at(&self, r: usize) -> Result<FittedModel> {
        self.model_from(self.row(r))
    }

    /// Column-wise posterior means.
    pub fn mean_row(&self) -> Vec<f64> {
        let w = self.meta.columns.len();
        let mut m = vec![0.0; w];
        for r in 0..self.rows() {
            m.iter_mut().zip(self.row(r)).for_each(|(a, v)| *a += v);
        }
        m.iter_mut().for_each(|a| *a /= self.rows() as f64);
        m
    }

    /// Model implied by the posterior-mean parameters.
    pub fn mean_model(&self) -> Result<FittedModel> {
        let mut row = self.mean_row();
        let order = self.meta.model.order();
        // Renormalise the averaged weights against rounding.
        let idx: Vec<usize> = (1..=order).filter_map(|l| self.index(&format!("w_{l}"))).collect();
        let total: f64 = idx.iter().map(|&j| row[j]).sum();
        idx.iter().for_each(|&j| row[j] /= total);
        self.model_from(&row)
    }

    /// Model implied by a row laid out like [`columns`](Self::columns).
    pub fn model_from(&self, row: &[f64]) -> Result<FittedModel> {
        let get = |name: &str| {
            self.index(name).map(|j| row[j]).ok_or_else(|| Error::Data(format!("samples have no column {name}")))
        };
        let order = self.meta.model.order();
        let w: Vec<f64> = (1..=order).map(|l| get(&format!("w_{l}"))).collect::<Result<_>>()?;
        match &self.meta.model {
            ModelSpec::Burr { .. } => {
                Ok(FittedModel::Mtdpp(MtdppModel::burr(get("gamma")?, get("lambda")?, get("kappa")?, w)?))
            }
            ModelSpec::ScaledLomax { harmonics, .. } => {
                let inner = MtdppModel::scaled_lomax(get("alpha")?, get("phi")?, w)?;
                match harmonics {
                    None => Ok(FittedModel::Mtdpp(inner)),
                    Some(h) => {
                        let beta = self
                            .meta
                            .columns
                            .iter()
                            .zip(row)
                            .filter(|(c, _)| c.starts_with("beta_"))
                            .map(|(_, v)| *v)
                            .collect();
                        Ok(FittedModel::Seasonal(SeasonalModel {
                            inner,
                            seasonal: SeasonalParams::new(beta, h.period)?,
                        }))
                    }
                }
            }
            ModelSpec::LomaxMtdcpp { order } | ModelSpec::Poisson { order } => {
                let (phi, alpha) = (get("phi")?, get("alpha")?);
                let inner = MtdppModel::lomax(vec![phi; *order], vec![alpha; *order], w)?;
                Ok(FittedModel::Mtdcpp(MtdcppModel::new(get("pi0")?, get("mu")?, inner)?))
            }
        }
    }

    /// Sidecar path for a draws file: same stem, `.json` extension.
    pub fn sidecar_path(csv_path: &Path) -> PathBuf {
        csv_path.with_extension("json")
    }

    /// Write draws as CSV plus the JSON sidecar.
    pub fn write(&self, csv_path: &Path) -> Result<()> {
        let mut w = csv::Writer::from_path(csv_path)?;
        w.write_record(&self.meta.columns)?;
        for r in 0..self.rows() {
            w.write_record(self.row(r).iter().map(|&v| format_exact(v)))?;
        }
        w.flush()?;
        serde_json::to_writer_pretty(File::create(Self::sidecar_path(csv_path))?, &self.meta)?;
        Ok(())
    }

    pub fn read(csv_path: &Path) -> Result<Self> {
        let meta: SampleMeta = serde_json::from_reader(File::open(Self::sidecar_path(csv_path))?)?;
        let mut rdr = csv::Reader::from_path(csv_path)?;
        let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
        if header != meta.columns {
            return Err(Error::Data("draws header does not match the sidecar column list".into()));
        }
        let mut data = Vec::with_capacity(meta.rows * header.len());
        for rec in rdr.records() {
            for field in rec?.iter() {
                data.push(field.parse::<f64>().map_err(|e| Error::Data(format!("bad number {field:?}: {e}")))?);
            }
        }
        Self::new(meta, data)
    }
}
