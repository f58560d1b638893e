//! Randomized-trial harness: sample parameter draws, build the average
//! two-site descending superoperator per decomposition, collect scaling
//! spectra, and summarize min/max envelopes against Kac-table targets.
//!
//! Trials are deterministic given (base_seed, config): trial i draws from a
//! ChaCha8 stream with `set_stream(i)`, so parallel and serial execution
//! produce identical records.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::channel::{self, scaling_spectrum, ScalingSpectrum};
use crate::decomposition::{bind_preset, decomposition_names};
use crate::families::ParameterSet;
use crate::kac;

#[derive(Debug, Error)]
pub enum TrialError {
    #[error("unknown decomposition `{0}` (expected one of {1:?})")]
    UnknownDecomposition(String, Vec<&'static str>),
    #[error("trial count must be >= 1")]
    NoTrials,
    #[error("no successful trials to summarize")]
    EmptyRecords,
    #[error("records mix decompositions `{0}` and `{1}`")]
    MixedRecords(String, String),
    #[error("unknown report format `{0}`")]
    UnknownFormat(String),
    #[error("config error: {0}")]
    Config(String),
    #[error(transparent)]
    Kac(#[from] kac::KacError),
}

pub type Result<T> = std::result::Result<T, TrialError>;

/// A Kac-table target the envelopes are compared against.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TargetSpec {
    pub label: String,
    /// minimal model (p', q')
    pub model: (u32, u32),
    /// Kac indices (r, s)
    pub rs: (u32, u32),
}

impl TargetSpec {
    pub fn delta(&self) -> Result<f64> {
        Ok(kac::kac_dimension(self.model, self.rs)?.double().to_f64())
    }
}

/// Campaign configuration (JSON).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialConfig {
    pub decomposition: String,
    pub trials: u64,
    pub base_seed: u64,
    #[serde(default = "default_k")]
    pub k: usize,
    /// Tiling grammar preset override; defaults to the decomposition's.
    #[serde(default)]
    pub tiling: Option<String>,
    /// Cone preset + weight overrides; defaults come from the decomposition.
    #[serde(default)]
    pub cones: Option<Vec<(String, f64)>>,
    /// Cone weight overrides (same cones as the preset mix).
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
    /// Per-parameter sampling ranges [(index, lo, hi)]; unlisted indices keep
    /// the defaults (θ₁…θ₅, θ₇ on [0,2π); θ₆, θ₈, θ₉ on [−5,5]).
    #[serde(default)]
    pub theta_ranges: Option<Vec<(u8, f64, f64)>>,
    #[serde(default = "default_targets")]
    pub targets: Vec<TargetSpec>,
}

fn default_k() -> usize {
    8
}

/// Ising σ and ε, the tricritical σ, and the Potts σ dimensions.
pub fn default_targets() -> Vec<TargetSpec> {
    vec![
        TargetSpec {
            label: "ising-sigma".into(),
            model: (4, 3),
            rs: (2, 2),
        },
        TargetSpec {
            label: "ising-epsilon".into(),
            model: (4, 3),
            rs: (2, 1),
        },
        TargetSpec {
            label: "tricritical-sigma".into(),
            model: (5, 4),
            rs: (2, 2),
        },
        TargetSpec {
            label: "potts3-sigma".into(),
            model: (6, 5),
            rs: (3, 3),
        },
    ]
}

impl TrialConfig {
    pub fn new(decomposition: &str, trials: u64, base_seed: u64) -> Self {
        Self {
            decomposition: decomposition.to_string(),
            trials,
            base_seed,
            k: default_k(),
            tiling: None,
            cones: None,
            weights: None,
            theta_ranges: None,
            targets: default_targets(),
        }
    }

    /// Short experiment names map onto the {5,4} presets.
    pub fn preset_name(&self) -> Result<String> {
        let name = match self.decomposition.as_str() {
            "YQR" => "yqr-54",
            "YQT" => "yqt-54",
            "YQS" => "yqs-54",
            other => other,
        };
        if !decomposition_names().contains(&name) {
            return Err(TrialError::UnknownDecomposition(
                self.decomposition.clone(),
                decomposition_names(),
            ));
        }
        Ok(name.to_string())
    }
}

/// One randomized diagonalization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TrialRecord {
    pub trial: u64,
    pub seed: u64,
    pub decomposition: String,
    pub params: ParameterSet,
    pub spectrum: Option<ScalingSpectrum>,
    /// Present when the trial failed (eigensolver or degenerate tensors);
    /// failed trials are excluded from envelopes.
    pub failure: Option<String>,
}

fn run_one(config: &TrialConfig, preset: &str, trial: u64) -> TrialRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(config.base_seed);
    rng.set_stream(trial);
    let params = match &config.theta_ranges {
        Some(ranges) => ParameterSet::sample_with_ranges(&mut rng, ranges),
        None => ParameterSet::sample(&mut rng),
    };
    let outcome = (|| -> std::result::Result<ScalingSpectrum, String> {
        let d = bind_preset(preset, params.clone()).map_err(|e| e.to_string())?;
        let op = match &config.cones {
            Some(mix) => {
                channel::average_descending_with_mix(&d, mix).map_err(|e| e.to_string())?
            }
            None => channel::average_descending(&d, 2, config.weights.as_deref())
                .map_err(|e| e.to_string())?,
        };
        let s = match &config.tiling {
            Some(name) => crate::decomposition::load_grammar(name)
                .map_err(|e| e.to_string())?
                .scale_factor(),
            None => d.scale_factor().map_err(|e| e.to_string())?,
        };
        let mut spec = scaling_spectrum(&op, s, config.k).map_err(|e| e.to_string())?;
        spec.trial_params = Some(params.clone());
        Ok(spec)
    })();
    match outcome {
        Ok(spec) => TrialRecord {
            trial,
            seed: config.base_seed,
            decomposition: config.decomposition.clone(),
            params,
            spectrum: Some(spec),
            failure: None,
        },
        Err(msg) => TrialRecord {
            trial,
            seed: config.base_seed,
            decomposition: config.decomposition.clone(),
            params,
            spectrum: None,
            failure: Some(msg),
        },
    }
}

/// Run the campaign serially.
pub fn run_trials(config: &TrialConfig) -> Result<Vec<TrialRecord>> {
    if config.trials == 0 {
        return Err(TrialError::NoTrials);
    }
    let preset = config.preset_name()?;
    Ok((0..config.trials)
        .map(|t| run_one(config, &preset, t))
        .collect())
}

/// Run the campaign across `threads` rayon workers; records come back in
/// trial order and are bit-identical to the serial run.
pub fn run_trials_parallel(config: &TrialConfig, threads: usize) -> Result<Vec<TrialRecord>> {
    if config.trials == 0 {
        return Err(TrialError::NoTrials);
    }
    let preset = config.preset_name()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| TrialError::Config(e.to_string()))?;
    Ok(pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|t| run_one(config, &preset, t))
            .collect()
    }))
}

/// Envelope statistics for one Δ index.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EnvelopeStat {
    pub index: usize,
    pub min: f64,
    pub max: f64,
    pub mean: f64,
    pub std: f64,
}

/// Containment flag for one Kac target.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Containment {
    pub label: String,
    pub delta: f64,
    /// Δ indices (≥ 1) whose min..max envelope contains the target.
    pub contained_in: Vec<usize>,
    pub contained: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EnvelopeSummary {
    pub decomposition: String,
    pub trials: u64,
    pub failed: u64,
    pub envelopes: Vec<EnvelopeStat>,
    pub containment: Vec<Containment>,
}

/// Min/max/mean/std per Δ index plus per-target containment flags.
///
/// Statistics run over sorted copies of the per-index values so the summary
/// is independent of record order.
pub fn summarize(records: &[TrialRecord], targets: &[TargetSpec]) -> Result<EnvelopeSummary> {
    if records.is_empty() {
        return Err(TrialError::EmptyRecords);
    }
    let decomposition = records[0].decomposition.clone();
    for r in records {
        if r.decomposition != decomposition {
            return Err(TrialError::MixedRecords(
                decomposition,
                r.decomposition.clone(),
            ));
        }
    }
    let successes: Vec<&ScalingSpectrum> =
        records.iter().filter_map(|r| r.spectrum.as_ref()).collect();
    if successes.is_empty() {
        return Err(TrialError::EmptyRecords);
    }
    let k = successes.iter().map(|s| s.dimensions.len()).min().unwrap();
    let mut envelopes = Vec::with_capacity(k);
    for i in 0..k {
        let mut vals: Vec<f64> = successes.iter().map(|s| s.dimensions[i]).collect();
        vals.sort_by(|a, b| a.partial_cmp(b).unwrap());
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<f64>() / n;
        let var = vals.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / n;
        envelopes.push(EnvelopeStat {
            index: i,
            min: vals[0],
            max: *vals.last().unwrap(),
            mean,
            std: var.sqrt(),
        });
    }
    let mut containment = Vec::new();
    for t in targets {
        let delta = t.delta()?;
        let contained_in: Vec<usize> = envelopes
            .iter()
            .skip(1)
            .filter(|e| e.min <= delta && delta <= e.max)
            .map(|e| e.index)
            .collect();
        containment.push(Containment {
            label: t.label.clone(),
            delta,
            contained: !contained_in.is_empty(),
            contained_in,
        });
    }
    Ok(EnvelopeSummary {
        decomposition,
        trials: records.len() as u64,
        failed: records.iter().filter(|r| r.failure.is_some()).count() as u64,
        envelopes,
        containment,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
    PlotData,
}

impl std::str::FromStr for ReportFormat {
    type Err = TrialError;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            "plot-data" => Ok(ReportFormat::PlotData),
            other => Err(TrialError::UnknownFormat(other.to_string())),
        }
    }
}

/// Wide per-trial export: one row per trial with θ₁…θ₉, |λ| magnitudes and Δs.
pub fn spectra_csv(records: &[TrialRecord]) -> String {
    let k = records
        .iter()
        .filter_map(|r| r.spectrum.as_ref())
        .map(|s| s.dimensions.len())
        .max()
        .unwrap_or(0);
    let mut out = String::from("trial_id");
    for i in 1..=9 {
        out.push_str(&format!(",theta{i}"));
    }
    for i in 0..k {
        out.push_str(&format!(",lambda_mag{i}"));
    }
    for i in 0..k {
        out.push_str(&format!(",delta{i}"));
    }
    out.push('\n');
    for r in records {
        out.push_str(&r.trial.to_string());
        for v in r.params.to_array() {
            out.push_str(&format!(",{v:.17e}"));
        }
        match &r.spectrum {
            Some(s) => {
                for (re, im) in &s.eigenvalues {
                    out.push_str(&format!(",{:.17e}", (re * re + im * im).sqrt()));
                }
                for _ in s.eigenvalues.len()..k {
                    out.push(',');
                }
                for d in &s.dimensions {
                    out.push_str(&format!(",{d:.17e}"));
                }
                for _ in s.dimensions.len()..k {
                    out.push(',');
                }
            }
            None => {
                for _ in 0..2 * k {
                    out.push(',');
                }
            }
        }
        out.push('\n');
    }
    out
}

/// Serialize a summary or the long-format per-(trial, index) rows.
///
/// * `csv` — long format with one row per (trial, Δ index): trials × k rows.
/// * `json` — the [`EnvelopeSummary`], loadable back through serde.
/// * `plot-data` — (trial_index, Δᵢ) columns per index, one block per index,
///   suitable for the scatter panels.
pub fn report(
    records: &[TrialRecord],
    summary: &EnvelopeSummary,
    format: ReportFormat,
) -> Result<String> {
    match format {
        ReportFormat::Json => {
            Ok(serde_json::to_string_pretty(summary).expect("summary serializes"))
        }
        ReportFormat::Csv => {
            let mut out = String::from("trial_id,delta_index,lambda_mag,delta\n");
            for r in records {
                if let Some(s) = &r.spectrum {
                    for (i, d) in s.dimensions.iter().enumerate() {
                        let (re, im) = s.eigenvalues[i];
                        out.push_str(&format!(
                            "{},{},{:.17e},{:.17e}\n",
                            r.trial,
                            i,
                            (re * re + im * im).sqrt(),
                            d
                        ));
                    }
                }
            }
            Ok(out)
        }
        ReportFormat::PlotData => {
            let mut out = String::new();
            let k = summary.envelopes.len();
            for i in 0..k {
                out.push_str(&format!("# delta_{i}\ntrial_index,delta\n"));
                for r in records {
                    if let Some(s) = &r.spectrum {
                        if let Some(d) = s.dimensions.get(i) {
                            out.push_str(&format!("{},{d:.17e}\n", r.trial));
                        }
                    }
                }
                out.push('\n');
            }
            Ok(out)
        }
    }
}

/// Per-index plot files (delta_i.csv contents), keyed by index.
pub fn plot_data_files(records: &[TrialRecord], k: usize) -> Vec<(String, String)> {
    let mut files = Vec::new();
    for i in 0..k {
        let mut body = String::from("trial_index,delta\n");
        for r in records {
            if let Some(s) = &r.spectrum {
                if let Some(d) = s.dimensions.get(i) {
                    body.push_str(&format!("{},{d:.17e}\n", r.trial));
                }
            }
        }
        files.push((format!("delta_{i}.csv"), body));
    }
    files
}
