//! Subcommand implementations. Each writes its artifacts under the output
//! directory and returns their paths.

use std::path::{Path, PathBuf};

use rayon::prelude::*;

use mtdpp::curves::{
    intensity_curve, linear_grid, marginal_density_curve, marginal_hazard_curve, weight_curve, CurveGrid,
};
use mtdpp::evaluate::{
    acf, forecast_scores, noise_band, pacf, predict_k_ahead, qq_uniform, rescaled_uniforms, PredictOptions,
};
use mtdpp::mcmc::{run_mcmc, PosteriorSamples, Summary};
use mtdpp::numeric::KsTest;
use mtdpp::process::PointPattern;
use mtdpp::Error;

use crate::config::{FitSection, RunConfig};
use crate::error::{CliError, CliResult};
use crate::table::{read_columns, read_pattern, write_pattern, write_table, Cell};

/// Writes artifacts into one directory.
pub struct Output {
    dir: PathBuf,
    written: Vec<PathBuf>,
}

impl Output {
    pub fn new(dir: &Path) -> CliResult<Self> {
        std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))?;
        Ok(Self { dir: dir.to_owned(), written: Vec::new() })
    }

    fn path(&mut self, name: &str) -> PathBuf {
        let p = self.dir.join(name);
        self.written.push(p.clone());
        p
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }
}

fn pattern(config: &RunConfig) -> CliResult<PointPattern> {
    read_pattern(RunConfig::require(&config.data, "data")?, config.horizon)
}

fn samples(config: &RunConfig) -> CliResult<PosteriorSamples> {
    Ok(PosteriorSamples::read(RunConfig::require(&config.samples, "samples")?)?)
}

pub fn simulate(config: &RunConfig, out: &mut Output) -> CliResult<()> {
    let sim = RunConfig::require(&config.simulation, "simulation")?.run()?;
    write_pattern(&out.path("pattern.csv"), &sim.pattern)?;
    write_table(
        &out.path("labels.csv"),
        &["index", "label"],
        sim.labels.iter().enumerate().map(|(i, &l)| vec![Cell::Int(i + 1), Cell::Int(l)]),
    )
}

fn parameter_columns(samples: &PosteriorSamples) -> Vec<String> {
    samples.columns().iter().filter(|c| !c.starts_with("m_")).cloned().collect()
}

fn summary_row(name: &str, s: Summary) -> Vec<Cell> {
    vec![Cell::Text(name.into()), Cell::Num(s.mean), Cell::Num(s.sd), Cell::Num(s.lower), Cell::Num(s.upper)]
}

fn write_fit(samples: &PosteriorSamples, out: &mut Output, prefix: &str) -> CliResult<()> {
    samples.write(&out.path(&format!("{prefix}samples.csv")))?;
    out.written.push(out.dir.join(format!("{prefix}samples.json")));
    let rows = parameter_columns(samples)
        .into_iter()
        .filter_map(|c| samples.summary(&c).map(|s| summary_row(&c, s)))
        .collect::<Vec<_>>();
    write_table(&out.path(&format!("{prefix}summary.csv")), &["parameter", "mean", "sd", "lower", "upper"], rows)
}

fn fit_one(path: &Path, fit: &FitSection, horizon: Option<f64>) -> CliResult<PosteriorSamples> {
    let pattern = read_pattern(path, horizon)?;
    Ok(run_mcmc(&pattern, &fit.model, &fit.prior, &fit.mcmc)?)
}

pub fn fit(config: &RunConfig, out: &mut Output) -> CliResult<()> {
    let fit = RunConfig::require(&config.fit, "fit")?;
    let data = RunConfig::require(&config.data, "data")?;
    if !data.is_dir() {
        let samples = fit_one(data, fit, config.horizon)?;
        return write_fit(&samples, out, "");
    }
    let files = pattern_files(data)?;
    if files.is_empty() {
        return Err(CliError::Usage(format!("{} holds no .csv pattern files", data.display())));
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.unwrap_or(1))
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let fits: Vec<CliResult<PosteriorSamples>> =
        pool.install(|| files.par_iter().map(|f| fit_one(f, fit, config.horizon)).collect());

    let mut header: Vec<String> = vec!["file".into(), "events".into()];
    let mut rows = Vec::with_capacity(files.len());
    for (file, result) in files.iter().zip(fits) {
        let samples = result?;
        let stem = file.file_stem().and_then(|s| s.to_str()).unwrap_or("pattern").to_string();
        write_fit(&samples, out, &format!("{stem}_"))?;
        let params = parameter_columns(&samples);
        if rows.is_empty() {
            header.extend(params.iter().map(|c| format!("{c}_mean")));
            if samples.column("pi0").is_some() {
                header.extend(["endogeneity_mean", "endogeneity_lower", "endogeneity_upper"].map(String::from));
            }
        }
        let mut row = vec![Cell::Text(stem), Cell::Int(samples.meta.events)];
        row.extend(params.iter().filter_map(|c| samples.summary(c)).map(|s| Cell::Num(s.mean)));
        if let Some(pi0) = samples.column("pi0") {
            let endo: Vec<f64> = pi0.iter().map(|p| 1.0 - p).collect();
            let s = Summary::of(&endo);
            row.extend([Cell::Num(s.mean), Cell::Num(s.lower), Cell::Num(s.upper)]);
        }
        rows.push(row);
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_table(&out.path("batch_summary.csv"), &header, rows)
}

fn pattern_files(dir: &Path) -> CliResult<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if path.extension().is_some_and(|e| e == "csv") {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

pub fn predict(config: &RunConfig, out: &mut Output) -> CliResult<()> {
    let pattern = pattern(config)?;
    let samples = samples(config)?;
    let options = PredictOptions { replicates: config.predict.replicates, seed: config.seed() };
    let draws = predict_k_ahead(&samples, &pattern, config.predict.steps, options)?;
    let header: Vec<String> = (1..=draws.steps).map(|k| format!("step_{k}")).collect();
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    write_table(
        &out.path("predictive_draws.csv"),
        &header,
        draws.values.chunks(draws.steps).map(|row| row.iter().map(|&v| Cell::Num(v)).collect()),
    )?;
    write_table(
        &out.path("predictive_summary.csv"),
        &["step", "mean", "sd", "lower", "upper"],
        (1..=draws.steps).map(|k| {
            let s = draws.summary(k);
            vec![Cell::Int(k), Cell::Num(s.mean), Cell::Num(s.sd), Cell::Num(s.lower), Cell::Num(s.upper)]
        }),
    )
}

fn ks_row(name: &str, ks: KsTest) -> Vec<Cell> {
    vec![Cell::Text(name.into()), Cell::Num(ks.statistic), Cell::Num(ks.p_value), Cell::Int(ks.n)]
}

pub fn check(config: &RunConfig, out: &mut Output) -> CliResult<()> {
    let pattern = pattern(config)?;
    let samples = samples(config)?;
    let u = rescaled_uniforms(&samples, &pattern)?;
    write_table(
        &out.path("rescaled.csv"),
        &["index", "mean", "lower", "upper", "plug_in"],
        (0..u.index.len()).map(|k| {
            vec![Cell::Int(u.index[k]), Cell::Num(u.mean[k]), Cell::Num(u.lower[k]), Cell::Num(u.upper[k]), Cell::Num(u.plug_in[k])]
        }),
    )?;
    let (qq_mean, qq_plug) = (qq_uniform(&u.mean), qq_uniform(&u.plug_in));
    write_table(
        &out.path("qq.csv"),
        &["theoretical", "mean", "plug_in"],
        qq_mean.iter().zip(&qq_plug).map(|(a, b)| vec![Cell::Num(a.0), Cell::Num(a.1), Cell::Num(b.1)]),
    )?;
    write_table(
        &out.path("ks.csv"),
        &["convention", "statistic", "p_value", "n"],
        [ks_row("posterior_mean", u.ks_mean()), ks_row("plug_in", u.ks_plug_in())],
    )
}

fn column<'a>(path: &Path, header: &[String], columns: &'a [Vec<f64>], name: &str) -> CliResult<&'a [f64]> {
    header
        .iter()
        .position(|h| h == name)
        .map(|j| columns[j].as_slice())
        .ok_or_else(|| CliError::Input { path: path.to_owned(), line: 1, message: format!("missing column `{name}`") })
}

pub fn score(config: &RunConfig, out: &mut Output) -> CliResult<()> {
    let section = RunConfig::require(&config.score, "score")?;
    let (draw_header, draw_cols) = read_columns(&section.draws)?;
    let (actual_header, actual_cols) = read_columns(&section.actuals)?;
    let actuals = column(&section.actuals, &actual_header, &actual_cols, "duration")?;
    if actuals.len() > draw_cols.len() {
        return Err(CliError::Core(Error::Contract(format!(
            "{} actual durations but only {} predicted steps",
            actuals.len(),
            draw_cols.len()
        ))));
    }
    let predictive = (1..=actuals.len())
        .map(|k| column(&section.draws, &draw_header, &draw_cols, &format!("step_{k}")).map(<[f64]>::to_vec))
        .collect::<CliResult<Vec<_>>>()?;
    let s = forecast_scores(actuals, &predictive)?;
    write_table(
        &out.path("scores.csv"),
        &["mad", "rmse", "crps", "interval_score"],
        [vec![Cell::Num(s.mad), Cell::Num(s.rmse), Cell::Num(s.crps), Cell::Num(s.interval_score)]],
    )
}

pub fn pacf_table(config: &RunConfig, out: &mut Output) -> CliResult<()> {
    let pattern = pattern(config)?;
    let max_lag = config.pacf.max_lag;
    let rho = acf(pattern.durations(), max_lag)?;
    let partial = pacf(pattern.durations(), max_lag)?;
    let band = noise_band(pattern.len());
    write_table(
        &out.path("pacf.csv"),
        &["lag", "acf", "pacf", "band"],
        (0..=max_lag).map(|h| {
            let p = if h == 0 { 1.0 } else { partial[h - 1] };
            vec![Cell::Int(h), Cell::Num(rho[h]), Cell::Num(p), Cell::Num(band)]
        }),
    )
}

fn write_curve(path: &Path, c: &CurveGrid) -> CliResult<()> {
    write_table(
        path,
        &["x", "mean", "lower", "upper"],
        (0..c.len()).map(|k| vec![Cell::Num(c.x[k]), Cell::Num(c.mean[k]), Cell::Num(c.lower[k]), Cell::Num(c.upper[k])]),
    )
}

/// Writes the weight curve always, the intensity curve unless the fit is
/// seasonally scaled, and the marginal curves when a stationary marginal
/// exists.
pub fn curves(config: &RunConfig, out: &mut Output) -> CliResult<()> {
    let pattern = pattern(config)?;
    let samples = samples(config)?;
    let points = config.curves.points;
    write_curve(&out.path("weights.csv"), &weight_curve(&samples)?)?;

    let time_grid = linear_grid(0.0, pattern.horizon(), points + 1)?;
    match intensity_curve(&samples, &pattern, &time_grid[1..]) {
        Ok(c) => write_curve(&out.path("intensity.csv"), &c)?,
        Err(Error::Contract(_)) => {}
        Err(e) => return Err(e.into()),
    }

    let top = config
        .curves
        .duration_max
        .unwrap_or_else(|| pattern.durations().iter().copied().fold(0.0, f64::max));
    let duration_grid = linear_grid(0.0, top, points + 1)?;
    match marginal_density_curve(&samples, &duration_grid[1..]) {
        Ok(c) => {
            write_curve(&out.path("density.csv"), &c)?;
            write_curve(&out.path("hazard.csv"), &marginal_hazard_curve(&samples, &duration_grid[1..])?)?;
        }
        Err(Error::NotStationary(_)) => {}
        Err(e) => return Err(e.into()),
    }
    Ok(())
}
