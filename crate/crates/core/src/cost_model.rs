//! GPU hourly cost decomposition and run-cost conversion.
//!
//! The hourly cost of one bare-metal GPU is modelled as
//!
//! ```text
//! depreciation = P / (Y * 8760 * u)
//! power        = kW * PUE * E
//! maintenance  = P * m / 8760
//! ```
//!
//! with every term in the purchase currency (CNY) and converted to USD by the
//! explicit `fx_cny_per_usd` rate. A year is exactly 8760 hours.

use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const HOURS_PER_YEAR: f64 = 8760.0;
pub const SECONDS_PER_HOUR: f64 = 3600.0;
pub const DEFAULT_FX_CNY_PER_USD: f64 = 7.09;

/// Dual-card A800 rate that the published run costs were computed from.
pub const REFERENCE_DUAL_CARD_USD_HR: f64 = 1.58;
/// Rounded per-card A800 rate quoted alongside the dual-card rate.
pub const REFERENCE_PER_CARD_USD_HR: f64 = 0.79;

/// Cloud rental reference points, USD/hour.
pub const CLOUD_AWS_P4DE_USD_HR: f64 = 5.08;
pub const CLOUD_ALIBABA_GN7E_USD_HR: f64 = 4.80;
/// Range of comparable cloud offerings. Reference data only: no mapping from
/// instance size to a single card is implied.
pub const CLOUD_BAND_USD_HR: (f64, f64) = (2.82, 5.64);

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CostError {
    #[error("invalid value for `{field}`: {value} (expected {expected})")]
    Invalid {
        field: &'static str,
        value: f64,
        expected: &'static str,
    },
    #[error(
        "effective cost must be derived from a breakdown computed at utilization 1, got {utilization}"
    )]
    NonBaselineBreakdown { utilization: f64 },
    #[error("cannot read cost parameters: {0}")]
    Io(String),
    #[error("malformed cost parameters: {0}")]
    Parse(String),
}

impl CostError {
    /// Name of the offending field, when the error is a range violation.
    pub fn field(&self) -> Option<&'static str> {
        match self {
            CostError::Invalid { field, .. } => Some(field),
            CostError::NonBaselineBreakdown { .. } => Some("utilization"),
            _ => None,
        }
    }
}

fn check(
    field: &'static str,
    value: f64,
    ok: impl Fn(f64) -> bool,
    expected: &'static str,
) -> Result<(), CostError> {
    if value.is_finite() && ok(value) {
        Ok(())
    } else {
        Err(CostError::Invalid {
            field,
            value,
            expected,
        })
    }
}

fn default_fx() -> f64 {
    DEFAULT_FX_CNY_PER_USD
}

/// Hardware and facility parameters of a single GPU.
///
/// Monetary inputs are in CNY; `fx_cny_per_usd` converts to USD.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GpuCostParams {
    /// Purchase price P, CNY.
    pub purchase_price: f64,
    /// Depreciation period Y, years.
    pub depreciation_years: f64,
    /// Utilization u in (0, 1].
    pub utilization: f64,
    /// Average board power, kW.
    pub avg_power_kw: f64,
    /// Power usage effectiveness, >= 1.
    pub pue: f64,
    /// Electricity price E, CNY/kWh.
    pub electricity_price: f64,
    /// Annual maintenance fee as a fraction of the purchase price.
    pub maintenance_rate: f64,
    #[serde(default = "default_fx")]
    pub fx_cny_per_usd: f64,
}

impl GpuCostParams {
    /// A800 80G reference assumptions: 120k CNY, 3 years, full utilization,
    /// 0.4 kW at PUE 1.5 and 1 CNY/kWh, 3% maintenance, 7.09 CNY/USD.
    pub fn a800_baseline() -> Self {
        Self {
            purchase_price: 120_000.0,
            depreciation_years: 3.0,
            utilization: 1.0,
            avg_power_kw: 0.4,
            pue: 1.5,
            electricity_price: 1.0,
            maintenance_rate: 0.03,
            fx_cny_per_usd: DEFAULT_FX_CNY_PER_USD,
        }
    }

    pub fn validate(&self) -> Result<(), CostError> {
        check("purchase_price", self.purchase_price, |v| v >= 0.0, ">= 0")?;
        check("depreciation_years", self.depreciation_years, |v| v > 0.0, "> 0")?;
        check(
            "utilization",
            self.utilization,
            |v| v > 0.0 && v <= 1.0,
            "in (0, 1]",
        )?;
        check("avg_power_kw", self.avg_power_kw, |v| v >= 0.0, ">= 0")?;
        check("pue", self.pue, |v| v >= 1.0, ">= 1")?;
        check("electricity_price", self.electricity_price, |v| v >= 0.0, ">= 0")?;
        check(
            "maintenance_rate",
            self.maintenance_rate,
            |v| (0.0..=1.0).contains(&v),
            "in [0, 1]",
        )?;
        check("fx_cny_per_usd", self.fx_cny_per_usd, |v| v > 0.0, "> 0")?;
        Ok(())
    }

    /// Parses a flat key/value document. TOML is used when the text does not
    /// look like a JSON object.
    pub fn from_document(text: &str) -> Result<Self, CostError> {
        let params: Self = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| CostError::Parse(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| CostError::Parse(e.to_string()))?
        };
        params.validate()?;
        Ok(params)
    }

    pub fn from_path(path: &Path) -> Result<Self, CostError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CostError::Io(format!("{}: {e}", path.display())))?;
        Self::from_document(&text)
    }
}

impl Default for GpuCostParams {
    fn default() -> Self {
        Self::a800_baseline()
    }
}

/// Hourly cost of one GPU split by component, USD/hour.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HourlyCostBreakdown {
    pub depreciation_usd_hr: f64,
    pub power_usd_hr: f64,
    pub maintenance_usd_hr: f64,
    pub total_usd_hr: f64,
    /// Utilization the depreciation term was computed with.
    pub utilization: f64,
}

impl HourlyCostBreakdown {
    pub fn from_components(depreciation: f64, power: f64, maintenance: f64, utilization: f64) -> Self {
        Self {
            depreciation_usd_hr: depreciation,
            power_usd_hr: power,
            maintenance_usd_hr: maintenance,
            total_usd_hr: depreciation + power + maintenance,
            utilization,
        }
    }
}

/// The three hourly components in the purchase currency (CNY/hour):
/// `(depreciation, power, maintenance)`.
pub fn hourly_components_cny(params: &GpuCostParams) -> Result<(f64, f64, f64), CostError> {
    params.validate()?;
    let depreciation =
        params.purchase_price / (params.depreciation_years * HOURS_PER_YEAR * params.utilization);
    let power = params.avg_power_kw * params.pue * params.electricity_price;
    let maintenance = params.purchase_price * params.maintenance_rate / HOURS_PER_YEAR;
    Ok((depreciation, power, maintenance))
}

pub fn hourly_breakdown(params: &GpuCostParams) -> Result<HourlyCostBreakdown, CostError> {
    let (dep, power, maint) = hourly_components_cny(params)?;
    let fx = params.fx_cny_per_usd;
    Ok(HourlyCostBreakdown::from_components(
        dep / fx,
        power / fx,
        maint / fx,
        params.utilization,
    ))
}

/// Cost per effective compute hour when the card is busy only a fraction `u`
/// of the time.
///
/// `base` must be the standardized breakdown computed at `u = 1`; dividing a
/// breakdown that already carries a utilization discount would apply it twice.
pub fn effective_hourly(base: &HourlyCostBreakdown, u: f64) -> Result<f64, CostError> {
    check("utilization", u, |v| v > 0.0 && v <= 1.0, "in (0, 1]")?;
    if base.utilization != 1.0 {
        return Err(CostError::NonBaselineBreakdown {
            utilization: base.utilization,
        });
    }
    Ok(base.total_usd_hr / u)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClusterSpec {
    pub gpu_count: u32,
    pub params: GpuCostParams,
}

/// Hourly cost of `gpu_count` identical cards at `per_card_usd_hr`.
pub fn cluster_rate(per_card_usd_hr: f64, gpu_count: u32) -> Result<f64, CostError> {
    check("per_card_usd_hr", per_card_usd_hr, |v| v >= 0.0, ">= 0")?;
    if gpu_count == 0 {
        return Err(CostError::Invalid {
            field: "gpu_count",
            value: 0.0,
            expected: ">= 1",
        });
    }
    Ok(f64::from(gpu_count) * per_card_usd_hr)
}

pub fn cluster_hourly(spec: &ClusterSpec) -> Result<f64, CostError> {
    let per_card = hourly_breakdown(&spec.params)?.total_usd_hr;
    cluster_rate(per_card, spec.gpu_count)
}

/// Cost in USD of occupying hardware billed at `hourly_usd` for `duration_s`
/// seconds. Unrounded.
pub fn run_cost(hourly_usd: f64, duration_s: f64) -> Result<f64, CostError> {
    check("hourly_usd", hourly_usd, |v| v >= 0.0, "finite and >= 0")?;
    check("duration_s", duration_s, |v| v >= 0.0, "finite and >= 0")?;
    Ok(hourly_usd * duration_s / SECONDS_PER_HOUR)
}

/// Utilization above which a self-hosted card (base rate at u = 1) becomes
/// cheaper per effective hour than renting at `cloud_usd_hr`. Values above 1
/// mean self-hosting never breaks even at these rates.
pub fn break_even_utilization(self_host_base_usd_hr: f64, cloud_usd_hr: f64) -> Result<f64, CostError> {
    check("self_host_base_usd_hr", self_host_base_usd_hr, |v| v > 0.0, "> 0")?;
    check("cloud_usd_hr", cloud_usd_hr, |v| v > 0.0, "> 0")?;
    Ok(self_host_base_usd_hr / cloud_usd_hr)
}

/// Two-decimal display rounding used by every report.
pub fn round_cents(value: f64) -> f64 {
    (value * 100.0).round() / 100.0
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn baseline_components() {
        let b = hourly_breakdown(&GpuCostParams::a800_baseline()).unwrap();
        // 120000 / 26280 / 7.09, 0.6 / 7.09, 3600 / 8760 / 7.09
        assert_relative_eq!(b.depreciation_usd_hr, 120_000.0 / 26_280.0 / 7.09, max_relative = 1e-12);
        assert_relative_eq!(b.power_usd_hr, 0.6 / 7.09, max_relative = 1e-12);
        assert_relative_eq!(b.maintenance_usd_hr, 3600.0 / 8760.0 / 7.09, max_relative = 1e-12);
        assert!((b.depreciation_usd_hr - 0.644).abs() < 5e-4);
        assert!((b.power_usd_hr - 0.085).abs() < 5e-4);
        assert!((b.maintenance_usd_hr - 0.058).abs() < 5e-4);
        assert!((b.total_usd_hr - 0.787).abs() < 5e-4);
        assert_eq!(round_cents(b.depreciation_usd_hr), 0.64);
        assert_eq!(round_cents(b.power_usd_hr), 0.08);
        assert_eq!(round_cents(b.maintenance_usd_hr), 0.06);
    }

    #[test]
    fn zero_price_zero_power() {
        let params = GpuCostParams {
            purchase_price: 0.0,
            avg_power_kw: 0.0,
            ..GpuCostParams::a800_baseline()
        };
        let b = hourly_breakdown(&params).unwrap();
        assert_eq!(b.depreciation_usd_hr, 0.0);
        assert_eq!(b.power_usd_hr, 0.0);
        assert_eq!(b.maintenance_usd_hr, 0.0);
        assert_eq!(b.total_usd_hr, 0.0);
    }

    #[test]
    fn rejects_out_of_range_fields() {
        let base = GpuCostParams::a800_baseline();
        let cases: [(GpuCostParams, &str); 9] = [
            (GpuCostParams { utilization: 0.0, ..base }, "utilization"),
            (GpuCostParams { utilization: 1.5, ..base }, "utilization"),
            (GpuCostParams { depreciation_years: 0.0, ..base }, "depreciation_years"),
            (GpuCostParams { purchase_price: -1.0, ..base }, "purchase_price"),
            (GpuCostParams { pue: 0.9, ..base }, "pue"),
            (GpuCostParams { maintenance_rate: 1.2, ..base }, "maintenance_rate"),
            (GpuCostParams { fx_cny_per_usd: 0.0, ..base }, "fx_cny_per_usd"),
            (GpuCostParams { electricity_price: f64::NAN, ..base }, "electricity_price"),
            (GpuCostParams { avg_power_kw: f64::INFINITY, ..base }, "avg_power_kw"),
        ];
        for (params, field) in cases {
            let err = hourly_breakdown(&params).unwrap_err();
            assert_eq!(err.field(), Some(field), "{err}");
        }
    }

    #[test]
    fn effective_cost_examples() {
        let base = hourly_breakdown(&GpuCostParams::a800_baseline()).unwrap();
        assert_eq!(effective_hourly(&base, 1.0).unwrap(), base.total_usd_hr);
        let at_70 = effective_hourly(&base, 0.7).unwrap();
        assert!((at_70 - 1.124).abs() < 1e-3, "{at_70}");

        let rounded = HourlyCostBreakdown::from_components(0.79, 0.0, 0.0, 1.0);
        assert_relative_eq!(effective_hourly(&rounded, 0.5).unwrap(), 1.58, max_relative = 1e-15);
        assert!(effective_hourly(&rounded, 0.0).is_err());
        assert!(effective_hourly(&rounded, 1.01).is_err());
    }

    #[test]
    fn effective_cost_requires_baseline_breakdown() {
        let params = GpuCostParams {
            utilization: 0.7,
            ..GpuCostParams::a800_baseline()
        };
        let discounted = hourly_breakdown(&params).unwrap();
        assert!(matches!(
            effective_hourly(&discounted, 0.7),
            Err(CostError::NonBaselineBreakdown { .. })
        ));
    }

    #[test]
    fn cluster_examples() {
        assert_relative_eq!(cluster_rate(0.79, 2).unwrap(), 1.58, max_relative = 1e-15);
        assert_relative_eq!(cluster_rate(0.79, 8).unwrap(), 6.32, max_relative = 1e-15);
        assert!(cluster_rate(0.79, 0).is_err());

        let params = GpuCostParams::a800_baseline();
        let single = hourly_breakdown(&params).unwrap().total_usd_hr;
        let one = cluster_hourly(&ClusterSpec { gpu_count: 1, params }).unwrap();
        assert_eq!(one, single);
        let bad = ClusterSpec {
            gpu_count: 2,
            params: GpuCostParams { pue: 0.5, ..params },
        };
        assert_eq!(cluster_hourly(&bad).unwrap_err().field(), Some("pue"));
    }

    #[test]
    fn run_cost_examples() {
        let c = run_cost(1.58, 774.11).unwrap();
        assert_relative_eq!(c, 1.58 * 774.11 / 3600.0, max_relative = 1e-15);
        assert_eq!(round_cents(c), 0.34);
        assert_eq!(run_cost(1.58, 3600.0).unwrap(), 1.58);
        let c = run_cost(1.58, 249.17).unwrap();
        assert!((c - 0.1094).abs() < 1e-4);
        assert_eq!(round_cents(c), 0.11);
        assert!(run_cost(-1.0, 10.0).is_err());
        assert!(run_cost(1.0, -10.0).is_err());
        assert!(run_cost(1.0, f64::NAN).is_err());
        assert!(run_cost(f64::INFINITY, 1.0).is_err());
    }

    #[test]
    fn break_even_examples() {
        assert!((break_even_utilization(0.79, 4.80).unwrap() - 0.1646).abs() < 1e-4);
        assert_eq!(break_even_utilization(0.79, 0.79).unwrap(), 1.0);
        assert!((break_even_utilization(0.79, 5.08).unwrap() - 0.1555).abs() < 1e-4);
        assert!(break_even_utilization(0.0, 4.8).is_err());
        assert!(break_even_utilization(0.79, -1.0).is_err());
    }

    #[test]
    fn parses_json_and_toml_documents() {
        let json = r#"{"purchase_price":120000,"depreciation_years":3,"utilization":1,
            "avg_power_kw":0.4,"pue":1.5,"electricity_price":1.0,"maintenance_rate":0.03,
            "fx_cny_per_usd":7.09}"#;
        assert_eq!(GpuCostParams::from_document(json).unwrap(), GpuCostParams::a800_baseline());

        let toml = "purchase_price = 120000\ndepreciation_years = 3\nutilization = 1\n\
            avg_power_kw = 0.4\npue = 1.5\nelectricity_price = 1.0\nmaintenance_rate = 0.03\n";
        assert_eq!(GpuCostParams::from_document(toml).unwrap(), GpuCostParams::a800_baseline());

        let unknown = json.replace("\"pue\"", "\"puee\"");
        assert!(matches!(GpuCostParams::from_document(&unknown), Err(CostError::Parse(_))));
        let out_of_range = json.replace("\"utilization\":1", "\"utilization\":2");
        assert_eq!(
            GpuCostParams::from_document(&out_of_range).unwrap_err().field(),
            Some("utilization")
        );
    }
}
