use std::io::Read;
use std::path::Path;

use inferonomics_core::cost_model::{
    cluster_hourly, cluster_rate, ClusterSpec, GpuCostParams, REFERENCE_PER_CARD_USD_HR,
};
use inferonomics_core::dataset::{
    canonical_dataset, parse_dataset, parse_model_cards, Format, FIXTURE_DATASET_ID,
};
use inferonomics_core::{ModelCard, PerfThresholds, Sweep};

use crate::args::{DataArgs, ParamArgs, RateArgs, ThresholdArgs};
use crate::error::CliError;

/// Reads a file, or standard input for `-`.
pub fn read_text(path: &Path) -> Result<String, CliError> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| CliError::io("stdin", e))?;
        return Ok(s);
    }
    std::fs::read_to_string(path).map_err(|e| CliError::io(path.display(), e))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|e| CliError::io(path.display(), e))
}

/// File or preset first, then individual flags.
pub fn cost_params(args: &ParamArgs) -> Result<GpuCostParams, CliError> {
    let mut p = match &args.params {
        Some(path) => GpuCostParams::from_path(path)?,
        None => GpuCostParams::a800_baseline(),
    };
    let overrides = [
        (&mut p.purchase_price, args.price),
        (&mut p.depreciation_years, args.years),
        (&mut p.utilization, args.utilization),
        (&mut p.avg_power_kw, args.power_kw),
        (&mut p.pue, args.pue),
        (&mut p.electricity_price, args.electricity),
        (&mut p.maintenance_rate, args.maintenance),
        (&mut p.fx_cny_per_usd, args.fx),
    ];
    for (field, value) in overrides {
        if let Some(v) = value {
            *field = v;
        }
    }
    p.validate()?;
    Ok(p)
}

pub fn thresholds(args: &ThresholdArgs) -> Result<PerfThresholds, CliError> {
    let t = PerfThresholds {
        max_ttft_s: args.max_ttft,
        min_throughput_tok_s: args.min_throughput,
    };
    t.validate()?;
    Ok(t)
}

pub fn explicit_rate(rate: f64) -> Result<f64, CliError> {
    if rate.is_finite() && rate >= 0.0 {
        Ok(rate)
    } else {
        Err(CliError::Validation(format!(
            "invalid value for `hourly_rate`: {rate} (expected finite and >= 0)"
        )))
    }
}

/// `--hourly-rate`, else the rate derived from hardware parameters, else the
/// published per-card rate times `--gpus`.
pub fn hourly_rate(args: &RateArgs) -> Result<f64, CliError> {
    if let Some(rate) = args.hourly_rate {
        if args.params.any_set() {
            return Err(CliError::Validation(
                "--hourly-rate cannot be combined with cost parameters".into(),
            ));
        }
        return explicit_rate(rate);
    }
    if args.params.any_set() {
        return Ok(cluster_hourly(&ClusterSpec {
            gpu_count: args.gpus,
            params: cost_params(&args.params)?,
        })?);
    }
    Ok(cluster_rate(REFERENCE_PER_CARD_USD_HR, args.gpus)?)
}

pub struct Loaded {
    pub name: String,
    pub sweeps: Vec<Sweep>,
    pub cards: Vec<ModelCard>,
}

fn stem(path: &Path) -> String {
    path.file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("runs")
        .to_string()
}

pub fn scores(path: &Path) -> Result<Vec<ModelCard>, CliError> {
    Ok(parse_model_cards(&read_text(path)?, Format::from_path(path))?)
}

/// Runs from `--runs` or the embedded dataset; scores from `--scores` when
/// given, otherwise whatever the run source carries.
pub fn load(args: &DataArgs) -> Result<Loaded, CliError> {
    let (name, dataset) = match &args.runs {
        Some(path) => (stem(path), parse_dataset(&read_text(path)?, Format::from_path(path))?),
        None => (FIXTURE_DATASET_ID.to_string(), canonical_dataset()),
    };
    let cards = match &args.scores {
        Some(path) => scores(path)?,
        None => dataset.model_cards,
    };
    Ok(Loaded {
        name,
        sweeps: dataset.sweeps,
        cards,
    })
}
