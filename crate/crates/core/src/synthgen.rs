//! Seeded synthetic bond market generator.
//!
//! Every bond carries 53 daily feature columns driven by a shared macro path
//! plus a per-bond latent distress state. Distress feeds the issuer
//! financials, the latent yield spread, and a deliberately lagged rating
//! view stored as the ground-truth grade path: ratings in this market adjust
//! late and stay inflated, so label-side estimators see trouble before the
//! rating reference does.

use crate::error::{CoreError, Result};
use crate::schema::{
    BondRecord, FeatureMatrix, Outcome, RatingGrade, COL_INDUSTRY_CODE,
    COL_INDUSTRY_DEFAULT_RATE, COL_PRIOR_DEFAULT_PROB, COL_REGION_DEFAULT_RATE,
    COL_RESIDUAL_MATURITY, COL_RISK_SPREAD, COL_TREASURY_RATE, COL_YIELD_TO_MATURITY,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

const N_INDUSTRIES: u16 = 8;
const N_REGIONS: u16 = 6;
/// Share of high-risk bonds that actually default; the rest stay alive with
/// low ratings.
const DEFAULTED_SHARE_OF_HIGH_RISK: f64 = 0.8;
/// Fraction of sprinkleable cells marked absent to exercise the fill stage.
const ABSENT_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MarketConfig {
    pub n_bonds: usize,
    /// Fraction of bonds that are high risk (defaulted or low-rated active).
    pub default_fraction: f64,
    /// Trading-day life bounds per bond.
    pub min_life: usize,
    pub max_life: usize,
    pub seed: u64,
    /// How many trading days before default the deterioration ramp begins.
    pub stress_onset_days: usize,
}

impl Default for MarketConfig {
    fn default() -> Self {
        Self {
            n_bonds: 200,
            default_fraction: 0.10,
            min_life: 100,
            max_life: 200,
            seed: 0,
            stress_onset_days: 120,
        }
    }
}

impl MarketConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_bonds == 0 {
            return Err(CoreError::Config("n_bonds must be positive".into()));
        }
        if !(self.default_fraction > 0.0 && self.default_fraction < 1.0) {
            return Err(CoreError::Config(format!(
                "default_fraction must lie in (0, 1), got {}",
                self.default_fraction
            )));
        }
        if self.min_life < 30 {
            return Err(CoreError::Config(format!(
                "min_life must be at least 30 trading days, got {}",
                self.min_life
            )));
        }
        if self.max_life < self.min_life {
            return Err(CoreError::Config(format!(
                "max_life {} below min_life {}",
                self.max_life, self.min_life
            )));
        }
        if self.stress_onset_days == 0 {
            return Err(CoreError::Config("stress_onset_days must be positive".into()));
        }
        Ok(())
    }
}

fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E3779B97F4A7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58476D1CE4E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D049BB133111EB);
    x ^ (x >> 31)
}

/// Approximately standard normal draw (sum of uniforms is plenty here).
fn normalish(rng: &mut ChaCha8Rng) -> f64 {
    let mut acc = 0.0;
    for _ in 0..4 {
        acc += rng.gen_range(-1.0f64..1.0);
    }
    acc * 0.8660254037844386 // variance correction for 4 uniforms
}

struct ArSpec {
    mean: f64,
    phi: f64,
    sigma: f64,
}

fn ar1_path(rng: &mut ChaCha8Rng, spec: &ArSpec, len: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(len);
    let mut x = spec.mean + spec.sigma * normalish(rng);
    for _ in 0..len {
        out.push(x);
        x = spec.mean + spec.phi * (x - spec.mean) + spec.sigma * normalish(rng);
    }
    out
}

/// Sample-and-hold: keeps the value of the most recent refresh day.
fn hold(path: &[f64], every: usize) -> Vec<f64> {
    path.iter()
        .enumerate()
        .map(|(t, _)| path[t - t % every])
        .collect()
}

fn macro_paths(seed: u64, horizon: usize) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ 0xA5CE_0001));
    let specs = [
        (ArSpec { mean: 100.0, phi: 0.995, sigma: 0.15 }, 21), // leading index, monthly
        (ArSpec { mean: 51.0, phi: 0.99, sigma: 0.25 }, 21),   // PMI, monthly
        (ArSpec { mean: 0.2, phi: 0.9, sigma: 0.12 }, 21),     // PPI mom
        (ArSpec { mean: 0.15, phi: 0.9, sigma: 0.08 }, 21),    // CPI mom
        (ArSpec { mean: 1.5, phi: 0.95, sigma: 0.1 }, 63),     // GDP qoq
        (ArSpec { mean: 6.8, phi: 0.999, sigma: 0.01 }, 1),    // FX, daily
        (ArSpec { mean: 0.025, phi: 0.997, sigma: 0.0004 }, 1), // Shibor, daily
        (ArSpec { mean: 0.028, phi: 0.998, sigma: 0.0003 }, 1), // treasury, daily
        (ArSpec { mean: 320.0, phi: 0.999, sigma: 0.8 }, 21),  // social financing
    ];
    specs
        .iter()
        .map(|(spec, every)| {
            let path = ar1_path(&mut rng, spec, horizon);
            if *every > 1 {
                hold(&path, *every)
            } else {
                path
            }
        })
        .collect()
}

struct BondPlan {
    life: usize,
    issue_date: usize,
    outcome: Outcome,
    industry_id: u16,
    region_id: u16,
}

/// Per-bond latent distress path in [0, 1], plus the lagged rating view.
struct Distress {
    /// Slow solvency state: calm drift, terminal ramp. Drives statements.
    s_slow: Vec<f64>,
    /// Market state: the slow state plus episodic flares. Drives the daily
    /// market columns.
    s_market: Vec<f64>,
    rating_grade: Vec<f64>,
}

/// Episodic stress events: a short rise, then exponential decay. The path
/// is what makes healthy bonds' risk move in bursts that the daily market
/// columns expose immediately.
fn flare_path(rng: &mut ChaCha8Rng, life: usize, daily_rate: f64, amp_lo: f64, amp_hi: f64) -> Vec<f64> {
    let mut path = vec![0.0; life];
    let mut t = 0usize;
    while t < life {
        if rng.gen_range(0.0..1.0) < daily_rate {
            let amp = rng.gen_range(amp_lo..amp_hi);
            for k in 0..life - t {
                let v = if k < 3 {
                    amp * (k as f64 + 1.0) / 3.0
                } else {
                    amp * (-((k - 2) as f64) / 8.0).exp()
                };
                if v < 0.005 {
                    break;
                }
                path[t + k] = (path[t + k] + v).min(0.6);
            }
            t += 6;
        }
        t += 1;
    }
    path
}

fn distress_path(rng: &mut ChaCha8Rng, plan: &BondPlan, stress_onset: usize) -> Distress {
    let life = plan.life;
    let mut s_slow = Vec::with_capacity(life);
    let mut flares = vec![0.0; life];
    // Cross-bond bases are kept in narrow bands so bonds of one class share
    // a comparable risk level; the learnable structure is in the dynamics:
    // a slow solvency state (with the terminal ramp for defaulters) plus
    // market-only stress flares.
    match plan.outcome {
        Outcome::Matured => {
            let base = rng.gen_range(0.10..0.18);
            let spec = ArSpec { mean: base, phi: 0.97, sigma: 0.005 };
            s_slow = ar1_path(rng, &spec, life);
            flares = flare_path(rng, life, 1.0 / 18.0, 0.15, 0.45);
        }
        Outcome::LowRatedActive => {
            let base = rng.gen_range(0.45..0.55);
            let drift = rng.gen_range(-0.00002..0.0001);
            // Choppier state plus frequent flares: distressed credits swing.
            let spec = ArSpec { mean: base, phi: 0.90, sigma: 0.02 };
            let raw = ar1_path(rng, &spec, life);
            for (t, v) in raw.iter().enumerate() {
                s_slow.push(v + drift * t as f64);
            }
            flares = flare_path(rng, life, 1.0 / 25.0, 0.08, 0.20);
        }
        Outcome::Defaulted => {
            let base = rng.gen_range(0.16..0.26);
            let peak = rng.gen_range(0.92..0.99);
            let onset = life.saturating_sub(stress_onset.min(life - 1));
            let spec = ArSpec { mean: base, phi: 0.97, sigma: 0.005 };
            let calm = ar1_path(rng, &spec, life);
            for (t, v) in calm.iter().enumerate() {
                if t < onset {
                    s_slow.push(*v);
                } else {
                    let frac = (t - onset) as f64 / (life - onset) as f64;
                    let ramp = base + (peak - base) * frac.powf(1.5);
                    s_slow.push(ramp.max(*v) + 0.01 * (v - base));
                }
            }
            flares = flare_path(rng, life, 1.0 / 17.0, 0.15, 0.45);
        }
    }
    for v in s_slow.iter_mut() {
        *v = v.clamp(0.0, 1.0);
    }
    let s_market: Vec<f64> =
        s_slow.iter().zip(&flares).map(|(v, f)| (v + f).clamp(0.0, 1.0)).collect();

    // Rating view: delayed by a per-bond lag and smoothed, mirroring slow
    // rating adjustment. Grade 22 is safest, 1 riskiest. The material
    // default itself forces the rating to the distressed floor over the
    // last few sessions.
    let lag = rng.gen_range(25..40usize);
    let ema_alpha = 0.10;
    let mut rating_grade = Vec::with_capacity(life);
    let mut ema = s_slow[0];
    for t in 0..life {
        let lagged = s_slow[t.saturating_sub(lag)];
        ema += ema_alpha * (lagged - ema);
        let mut grade = (22.0 - 21.0 * ema).clamp(1.0, 22.0);
        if plan.outcome == Outcome::Defaulted {
            let to_default = life - 1 - t;
            if to_default < 10 {
                let pull = 1.0 - to_default as f64 / 10.0;
                grade = grade.min(grade + pull * (2.0 - grade));
            }
        }
        rating_grade.push(grade);
    }
    Distress { s_slow, s_market, rating_grade }
}

/// Builds one bond's 53 feature columns from the macro slice and its own
/// distress path. Columns for the group default rates stay zero here; they
/// are overwritten by [`compute_group_default_rates`].
fn bond_features(
    rng: &mut ChaCha8Rng,
    plan: &BondPlan,
    distress: &Distress,
    macros: &[Vec<f64>],
) -> FeatureMatrix {
    let life = plan.life;
    let mut m = FeatureMatrix::absent(life);
    let s = &distress.s_slow;
    let sm = &distress.s_market;
    // High-risk issuers trade and report erratically: their idiosyncratic
    // noise is choppier (low persistence, larger innovations), which keeps
    // them identifiable after per-bond standardization. Low-rated survivors
    // are the extreme case, deteriorating issuers sit in between.
    let chop = match plan.outcome {
        Outcome::LowRatedActive => 1.0,
        Outcome::Defaulted => 0.6,
        Outcome::Matured => 0.0,
    };
    // Idiosyncratic noise is calibrated per column so its stationary spread
    // stays well below the distress loading: the cross-section then lives
    // near a common low-dimensional surface and clusters follow risk, not
    // noise. sigma_innov = ratio * |load| * sigma_s * sqrt(1 - phi^2).
    let s_scale = 0.08;
    let noise_ratio = 0.30 * (1.0 + 0.5 * chop);
    let innov = move |load: f64, phi: f64| -> f64 {
        (noise_ratio * load.abs() * s_scale * (1.0 - phi * phi).sqrt()).max(1e-4)
    };

    for (col, path) in macros.iter().enumerate() {
        for t in 0..life {
            m.set(t, col, path[plan.issue_date + t]);
        }
    }
    for t in 0..life {
        m.set(t, COL_INDUSTRY_CODE, f64::from(plan.industry_id));
        m.set(t, COL_INDUSTRY_DEFAULT_RATE, 0.0);
        m.set(t, COL_REGION_DEFAULT_RATE, 0.0);
    }

    // Issuer size factor scales the level columns.
    let scale = (1.0 + rng.gen_range(0.0f64..4.0)).powi(2);
    let quarter_offset = rng.gen_range(0..63usize);

    // Financial statement levels (ids 13..=26): quarterly refresh with a
    // distress-conditioned drift on the profitability and cash-flow lines.
    let fin_base: [(f64, f64); 14] = [
        (1000.0, -0.25), // operating revenue
        (800.0, 0.10),   // operating cost
        (120.0, -1.6),   // total profit
        (900.0, -0.3),
        (1100.0, -0.1),
        (2000.0, -0.2),
        (700.0, 0.5), // current liabilities grow under distress
        (600.0, 0.4),
        (1300.0, 0.5),
        (700.0, -0.5),
        (150.0, -1.4), // operating cash flow
        (-80.0, -0.6),
        (60.0, 1.2), // financing inflows spike then dry up
        (90.0, -1.5),
    ];
    for (i, (base, load)) in fin_base.iter().enumerate() {
        let col = 12 + i;
        let phi = 0.9 - 0.5 * chop;
        let noise_spec = ArSpec { mean: 0.0, phi, sigma: innov(*load, phi) };
        let noise = ar1_path(rng, &noise_spec, life);
        for t in 0..life {
            let refresh = t.saturating_sub((t + quarter_offset) % 63);
            let tq = refresh.min(life - 1);
            let v = scale * base * (1.0 + load * s[tq] + noise[tq]);
            m.set(t, col, v);
        }
    }

    // Ratio blocks (ids 27..=43): base level plus distress loading,
    // quarterly refresh.
    let ratio_base: [(f64, f64); 17] = [
        (1.8, -0.9),  // current ratio
        (1.2, -0.7),  // quick ratio
        (0.9, -0.6),  // superquick ratio
        (55.0, 28.0), // assets-liabilities ratio rises with distress
        (1.1, 0.9),   // equity ratio (liabilities over equity)
        (0.35, 0.4),  // bond to tangible assets
        (0.30, -0.22), // gross sales margin
        (0.12, -0.18), // net profit margin
        (0.08, -0.12), // return on assets
        (0.10, -0.16), // operating profit margin
        (0.13, -0.20), // return on equity
        (95.0, 60.0), // operating cycle lengthens
        (5.0, -2.5),  // inventory turnover
        (7.0, -3.0),  // receivables turnover
        (2.2, -1.0),  // current asset turnover
        (3.0, -1.2),  // equity turnover
        (0.8, -0.35), // total asset turnover
    ];
    for (i, (base, load)) in ratio_base.iter().enumerate() {
        let col = 26 + i;
        let phi = 0.85 - 0.55 * chop;
        let noise_spec = ArSpec { mean: 0.0, phi, sigma: innov(load / base.abs().max(1e-9), phi) * base.abs() };
        let noise = ar1_path(rng, &noise_spec, life);
        for t in 0..life {
            let refresh = t.saturating_sub((t + quarter_offset) % 63);
            let tq = refresh.min(life - 1);
            m.set(t, col, base + load * s[tq] + noise[tq]);
        }
    }

    // Forecast profit change (id 44): forward-looking quarterly signal of
    // the distress trend.
    {
        let noise_spec = ArSpec { mean: 0.0, phi: 0.8, sigma: innov(1.2, 0.8) };
        let noise = ar1_path(rng, &noise_spec, life);
        for t in 0..life {
            let refresh = t.saturating_sub((t + quarter_offset) % 63);
            let tq = refresh.min(life - 1);
            let ahead = (tq + 63).min(life - 1);
            m.set(t, 43, 0.05 - 1.2 * (s[ahead] - s[tq]) - 0.3 * s[tq] + noise[tq]);
        }
    }

    // Credit and equity indicators (ids 45..=48), monthly or daily.
    let monthly: [(usize, f64, f64); 3] = [
        (44, 0.55, -0.35), // credit residual ratio
        (45, 0.00, -0.12), // change in credit mom
        (46, 0.25, 0.30),  // guaranteed credit ratio
    ];
    for (col, base, load) in monthly {
        let noise_spec = ArSpec { mean: 0.0, phi: 0.9, sigma: innov(load, 0.9) };
        let noise = ar1_path(rng, &noise_spec, life);
        for t in 0..life {
            let tm = t - t % 21;
            m.set(t, col, base + load * s[tm] + noise[tm]);
        }
    }
    {
        let phi = 0.7 - 0.5 * chop;
        let noise_spec = ArSpec { mean: 0.0, phi, sigma: innov(0.06, phi) };
        let noise = ar1_path(rng, &noise_spec, life);
        for t in 0..life {
            m.set(t, 47, (0.015 + 0.06 * sm[t] + noise[t]).max(0.001));
        }
    }

    // Market columns: volume dries up, the yield carries the latent spread.
    let spread_base = rng.gen_range(0.045..0.060);
    let spread_load = rng.gen_range(0.32..0.38);
    let vol_phi = 0.5 - 0.3 * chop;
    let yld_phi = 0.3 - 0.3 * chop;
    let vol_noise = ar1_path(rng, &ArSpec { mean: 0.0, phi: vol_phi, sigma: innov(0.9, vol_phi) * 0.8 }, life);
    let yld_noise = ar1_path(rng, &ArSpec { mean: 0.0, phi: yld_phi, sigma: innov(0.35, yld_phi) }, life);
    for t in 0..life {
        let volume = 1.0e4 * scale * (1.25 - 0.9 * sm[t]) * (1.0 + vol_noise[t]).max(0.05);
        m.set(t, 48, volume.max(1.0));
        m.set(t, COL_RESIDUAL_MATURITY, (life - 1 - t) as f64);
        let treasury = m.get(t, COL_TREASURY_RATE);
        let spread = spread_base + spread_load * sm[t].powf(1.3) + yld_noise[t];
        let spread = spread.max(0.002);
        m.set(t, COL_YIELD_TO_MATURITY, treasury + spread);
        m.set(t, COL_RISK_SPREAD, spread);
        m.set(t, COL_PRIOR_DEFAULT_PROB, 0.5);
    }
    m
}

/// Generates the market. Pure function of the configuration: identical
/// configurations produce identical output, byte for byte.
pub fn generate_market(config: &MarketConfig) -> Result<Vec<BondRecord>> {
    config.validate()?;
    let n = config.n_bonds;
    let n_high = (n as f64 * config.default_fraction).round() as usize;
    let n_low_rated = (n_high as f64 * (1.0 - DEFAULTED_SHARE_OF_HIGH_RISK)).round() as usize;
    let n_defaulted = n_high - n_low_rated;
    let horizon = config.max_life * 2;
    let macros = macro_paths(config.seed, horizon + 1);

    let mut layout_rng = ChaCha8Rng::seed_from_u64(splitmix64(config.seed ^ 0xA5CE_0002));
    let mut bonds = Vec::with_capacity(n);
    for idx in 0..n {
        let outcome = if idx < n_defaulted {
            Outcome::Defaulted
        } else if idx < n_high {
            Outcome::LowRatedActive
        } else {
            Outcome::Matured
        };
        let life = layout_rng.gen_range(config.min_life..=config.max_life);
        let issue_date = layout_rng.gen_range(0..=horizon - life);
        let plan = BondPlan {
            life,
            issue_date,
            outcome,
            industry_id: layout_rng.gen_range(0..N_INDUSTRIES),
            region_id: layout_rng.gen_range(0..N_REGIONS),
        };

        let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(config.seed ^ (idx as u64 + 17)));
        let distress = distress_path(&mut rng, &plan, config.stress_onset_days);
        let mut features = bond_features(&mut rng, &plan, &distress, &macros);

        // Sprinkle absences over the issuer columns only; macro, group-rate
        // and market columns stay observed.
        for t in 0..life {
            for col in 12..48 {
                if rng.gen_range(0.0..1.0) < ABSENT_FRACTION {
                    features.set(t, col, f64::NAN);
                }
            }
        }

        let grade_at = |g: f64| RatingGrade::new(g.round().clamp(1.0, 22.0) as u8).unwrap();
        let issue_grade = grade_at(distress.rating_grade[0]);
        let final_grade = grade_at(*distress.rating_grade.last().unwrap());
        let (end_date, default_date) = match plan.outcome {
            Outcome::Defaulted => {
                let end = plan.issue_date + life - 1;
                (end, Some(end))
            }
            _ => (plan.issue_date + life - 1, None),
        };

        let bond = BondRecord {
            bond_id: format!("bond-{idx:05}"),
            issue_date: plan.issue_date,
            end_date,
            outcome: plan.outcome,
            issue_grade,
            final_grade,
            default_date,
            industry_id: plan.industry_id,
            region_id: plan.region_id,
            features,
            latent_grades: distress.rating_grade,
        };
        bond.validate()?;
        bonds.push(bond);
    }

    compute_group_default_rates(&mut bonds)?;
    Ok(bonds)
}

/// Cumulative default rates per trading day for one grouping.
pub type GroupRateTable = BTreeMap<u16, Vec<f64>>;

/// Per-day cumulative default rates by industry and by region.
pub struct GroupDefaultRates {
    pub industry: GroupRateTable,
    pub region: GroupRateTable,
    pub horizon: usize,
}

/// For each trading day and group, the rate is the number of group bonds
/// defaulted on or before the day over the number issued on or before it
/// (zero when nothing has been issued). Rates are written into the industry
/// and region rate columns of every bond.
pub fn compute_group_default_rates(bonds: &mut [BondRecord]) -> Result<GroupDefaultRates> {
    let horizon = bonds.iter().map(|b| b.end_date + 1).max().unwrap_or(0);
    let build = |key: fn(&BondRecord) -> u16, bonds: &[BondRecord]| -> GroupRateTable {
        let mut table: GroupRateTable = BTreeMap::new();
        let groups: std::collections::BTreeSet<u16> = bonds.iter().map(key).collect();
        for g in groups {
            let mut issued = vec![0.0; horizon];
            let mut defaulted = vec![0.0; horizon];
            for bond in bonds.iter().filter(|b| key(b) == g) {
                for d in bond.issue_date..horizon {
                    issued[d] += 1.0;
                }
                if let Some(dd) = bond.default_date {
                    for d in dd..horizon {
                        defaulted[d] += 1.0;
                    }
                }
            }
            let rates = issued
                .iter()
                .zip(&defaulted)
                .map(|(i, d)| if *i > 0.0 { d / i } else { 0.0 })
                .collect();
            table.insert(g, rates);
        }
        table
    };
    let industry = build(|b| b.industry_id, bonds);
    let region = build(|b| b.region_id, bonds);

    for bond in bonds.iter_mut() {
        let ind = &industry[&bond.industry_id];
        let reg = &region[&bond.region_id];
        for t in 0..bond.features.days() {
            let day = bond.issue_date + t;
            bond.features.set(t, COL_INDUSTRY_DEFAULT_RATE, ind[day]);
            bond.features.set(t, COL_REGION_DEFAULT_RATE, reg[day]);
        }
    }
    Ok(GroupDefaultRates { industry, region, horizon })
}
