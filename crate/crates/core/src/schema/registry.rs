//! The canonical 53-feature risk index registry.

use serde::{Deserialize, Serialize};

/// The seven index dimensions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum FeatureDimension {
    Macroeconomy,
    IndustryRegion,
    BasicFinancials,
    RepaymentAbility,
    Profitability,
    IssuerCharacteristics,
    MarketConditions,
}

/// How often the underlying series is observed before daily alignment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NativeFrequency {
    Daily,
    Monthly,
    Quarterly,
}

/// How a lower-frequency series is carried onto the daily grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FillRule {
    ForwardFill,
    LinearInterpolate,
}

/// One named feature in the index system.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSpec {
    /// 1-based feature id; the 0-based matrix column is `id - 1`.
    pub id: usize,
    pub name: String,
    pub dimension: FeatureDimension,
    pub native_frequency: NativeFrequency,
    pub fill_rule: FillRule,
    /// Derived features are produced by the labeling stage, never synthesized.
    pub derived: bool,
}

/// Ordered list of the 53 features.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureRegistry {
    pub entries: Vec<FeatureSpec>,
}

impl FeatureRegistry {
    /// Feature ids (1-based) for a dimension, in registry order.
    pub fn ids_in_dimension(&self, dimension: FeatureDimension) -> Vec<usize> {
        self.entries
            .iter()
            .filter(|e| e.dimension == dimension)
            .map(|e| e.id)
            .collect()
    }

    pub fn by_name(&self, name: &str) -> Option<&FeatureSpec> {
        self.entries.iter().find(|e| e.name == name)
    }

    /// Canonical JSON used for registry hashing and round-trip checks.
    pub fn canonical_json(&self) -> String {
        serde_json::to_string(self).expect("registry serializes")
    }
}

/// Builds the canonical 53-entry registry.
///
/// The source index table numbers its rows with a gap at 44 and a duplicated
/// 46 while the accompanying text introduces a forecast profit change index;
/// the registry renumbers all 53 names sequentially so ids are unique.
pub fn build_default_registry() -> FeatureRegistry {
    use FeatureDimension::*;
    use FillRule::*;
    use NativeFrequency::*;

    let rows: [(&str, FeatureDimension, NativeFrequency, FillRule); 53] = [
        ("leading economic index", Macroeconomy, Monthly, ForwardFill),
        ("manufacturing PMI", Macroeconomy, Monthly, ForwardFill),
        ("PPI mom", Macroeconomy, Monthly, ForwardFill),
        ("CPI mom", Macroeconomy, Monthly, ForwardFill),
        ("GDP qoq", Macroeconomy, Quarterly, ForwardFill),
        ("RMB to USD exchange rate", Macroeconomy, Daily, LinearInterpolate),
        ("3-month Shibor rate", Macroeconomy, Daily, LinearInterpolate),
        ("treasury rate", Macroeconomy, Daily, LinearInterpolate),
        ("stock of social financing scale", Macroeconomy, Monthly, ForwardFill),
        ("ShenWan primary industry", IndustryRegion, Daily, ForwardFill),
        ("bond default rate by industry", IndustryRegion, Daily, ForwardFill),
        ("bond default rate by region", IndustryRegion, Daily, ForwardFill),
        ("operating revenue", BasicFinancials, Quarterly, ForwardFill),
        ("operating cost", BasicFinancials, Quarterly, ForwardFill),
        ("total profit", BasicFinancials, Quarterly, ForwardFill),
        ("current assets", BasicFinancials, Quarterly, ForwardFill),
        ("non-current assets", BasicFinancials, Quarterly, ForwardFill),
        ("total assets", BasicFinancials, Quarterly, ForwardFill),
        ("current liabilities", BasicFinancials, Quarterly, ForwardFill),
        ("non-current liabilities", BasicFinancials, Quarterly, ForwardFill),
        ("total liabilities", BasicFinancials, Quarterly, ForwardFill),
        ("total stockholders equity", BasicFinancials, Quarterly, ForwardFill),
        ("cash flow from operations", BasicFinancials, Quarterly, ForwardFill),
        ("cash flow from investment", BasicFinancials, Quarterly, ForwardFill),
        ("cash flow from financing", BasicFinancials, Quarterly, ForwardFill),
        ("total cash flow", BasicFinancials, Quarterly, ForwardFill),
        ("current ratio", RepaymentAbility, Quarterly, ForwardFill),
        ("quick ratio", RepaymentAbility, Quarterly, ForwardFill),
        ("superquick ratio", RepaymentAbility, Quarterly, ForwardFill),
        ("assets-liabilities ratio", RepaymentAbility, Quarterly, ForwardFill),
        ("equity ratio", RepaymentAbility, Quarterly, ForwardFill),
        ("bond to tangible assets ratio", RepaymentAbility, Quarterly, ForwardFill),
        ("gross sales margin", RepaymentAbility, Quarterly, ForwardFill),
        ("net profit margin on sales", RepaymentAbility, Quarterly, ForwardFill),
        ("return on assets", RepaymentAbility, Quarterly, ForwardFill),
        ("operating profit margin", Profitability, Quarterly, ForwardFill),
        ("return on equity", Profitability, Quarterly, ForwardFill),
        ("operating cycle", Profitability, Quarterly, ForwardFill),
        ("inventory turnover ratio", Profitability, Quarterly, ForwardFill),
        ("receivables turnover ratio", Profitability, Quarterly, ForwardFill),
        ("current asset turnover ratio", Profitability, Quarterly, ForwardFill),
        ("equity turnover", Profitability, Quarterly, ForwardFill),
        ("total asset turnover", Profitability, Quarterly, ForwardFill),
        ("forecast profit change", IssuerCharacteristics, Quarterly, ForwardFill),
        ("credit residual ratio", IssuerCharacteristics, Monthly, ForwardFill),
        ("change in credit mom", IssuerCharacteristics, Monthly, ForwardFill),
        ("guaranteed credit ratio", IssuerCharacteristics, Monthly, ForwardFill),
        ("stock price fluctuations", IssuerCharacteristics, Daily, LinearInterpolate),
        ("trading volume", MarketConditions, Daily, LinearInterpolate),
        ("residual maturity", MarketConditions, Daily, LinearInterpolate),
        ("yield to maturity", MarketConditions, Daily, LinearInterpolate),
        ("risk spread", MarketConditions, Daily, LinearInterpolate),
        ("prior default probability", MarketConditions, Daily, LinearInterpolate),
    ];

    let entries = rows
        .iter()
        .enumerate()
        .map(|(i, (name, dimension, freq, fill))| FeatureSpec {
            id: i + 1,
            name: (*name).to_string(),
            dimension: *dimension,
            native_frequency: *freq,
            fill_rule: *fill,
            derived: *name == "prior default probability",
        })
        .collect();

    FeatureRegistry { entries }
}
