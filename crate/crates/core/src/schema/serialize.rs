//! Bond set serialization: JSON-lines and a directory-of-CSV layout.
//!
//! Both formats carry absent cells explicitly (JSON `null`, empty CSV cell)
//! and round-trip every finite value bit-exactly.

use super::{BondRecord, FeatureMatrix, Outcome, RatingGrade, N_FEATURES};
use crate::error::{CoreError, Result};
use crate::schema::registry::build_default_registry;
use serde::{Deserialize, Serialize};
use std::fs;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

#[derive(Serialize, Deserialize)]
struct BondWire {
    bond_id: String,
    issue_date: usize,
    end_date: usize,
    outcome: Outcome,
    issue_grade: RatingGrade,
    final_grade: RatingGrade,
    default_date: Option<usize>,
    industry_id: u16,
    region_id: u16,
    /// Row-major day rows; absent cells are nulls.
    features: Vec<Vec<Option<f64>>>,
    latent_grades: Vec<f64>,
}

impl From<&BondRecord> for BondWire {
    fn from(bond: &BondRecord) -> Self {
        let features = (0..bond.features.days())
            .map(|d| {
                bond.features
                    .row(d)
                    .iter()
                    .map(|v| if v.is_nan() { None } else { Some(*v) })
                    .collect()
            })
            .collect();
        Self {
            bond_id: bond.bond_id.clone(),
            issue_date: bond.issue_date,
            end_date: bond.end_date,
            outcome: bond.outcome,
            issue_grade: bond.issue_grade,
            final_grade: bond.final_grade,
            default_date: bond.default_date,
            industry_id: bond.industry_id,
            region_id: bond.region_id,
            features,
            latent_grades: bond.latent_grades.clone(),
        }
    }
}

impl TryFrom<BondWire> for BondRecord {
    type Error = CoreError;

    fn try_from(wire: BondWire) -> Result<Self> {
        let days = wire.features.len();
        let mut values = Vec::with_capacity(days * N_FEATURES);
        for row in &wire.features {
            if row.len() != N_FEATURES {
                return Err(CoreError::Shape(format!(
                    "bond {}: feature row has {} columns, expected {N_FEATURES}",
                    wire.bond_id,
                    row.len()
                )));
            }
            values.extend(row.iter().map(|c| c.unwrap_or(f64::NAN)));
        }
        let bond = BondRecord {
            bond_id: wire.bond_id,
            issue_date: wire.issue_date,
            end_date: wire.end_date,
            outcome: wire.outcome,
            issue_grade: wire.issue_grade,
            final_grade: wire.final_grade,
            default_date: wire.default_date,
            industry_id: wire.industry_id,
            region_id: wire.region_id,
            features: FeatureMatrix::from_values(days, values)?,
            latent_grades: wire.latent_grades,
        };
        bond.validate()?;
        Ok(bond)
    }
}

/// Writes one bond per line.
pub fn write_bonds_jsonl(path: &Path, bonds: &[BondRecord]) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    for bond in bonds {
        serde_json::to_writer(&mut out, &BondWire::from(bond))?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_bonds_jsonl(path: &Path) -> Result<Vec<BondRecord>> {
    if !path.exists() {
        return Err(CoreError::MissingInput(path.display().to_string()));
    }
    let reader = BufReader::new(fs::File::open(path)?);
    let mut bonds = Vec::new();
    for line in reader.lines() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let wire: BondWire = serde_json::from_str(&line)?;
        bonds.push(BondRecord::try_from(wire)?);
    }
    Ok(bonds)
}

fn fmt_cell(v: f64) -> String {
    if v.is_nan() {
        String::new()
    } else {
        format!("{v}")
    }
}

fn parse_cell(s: &str, bond_id: &str) -> Result<f64> {
    if s.is_empty() {
        Ok(f64::NAN)
    } else {
        s.parse::<f64>().map_err(|e| {
            CoreError::Domain(format!("bond {bond_id}: unparseable cell {s:?}: {e}"))
        })
    }
}

/// Writes a directory layout: `bonds.csv` with static attributes plus one
/// `<bond_id>.csv` per bond holding the trading-day index, the 53 named
/// feature columns, and the latent grade path.
pub fn write_bonds_csv_dir(dir: &Path, bonds: &[BondRecord]) -> Result<()> {
    fs::create_dir_all(dir)?;
    let registry = build_default_registry();

    let mut index = csv::Writer::from_path(dir.join("bonds.csv"))?;
    index.write_record([
        "bond_id",
        "issue_date",
        "end_date",
        "outcome",
        "issue_grade",
        "final_grade",
        "default_date",
        "industry_id",
        "region_id",
    ])?;
    for bond in bonds {
        if bond.bond_id.contains(['/', '\\']) {
            return Err(CoreError::Domain(format!(
                "bond id {:?} is not filename-safe",
                bond.bond_id
            )));
        }
        index.write_record([
            bond.bond_id.clone(),
            bond.issue_date.to_string(),
            bond.end_date.to_string(),
            format!("{:?}", bond.outcome),
            bond.issue_grade.value().to_string(),
            bond.final_grade.value().to_string(),
            bond.default_date.map(|d| d.to_string()).unwrap_or_default(),
            bond.industry_id.to_string(),
            bond.region_id.to_string(),
        ])?;
    }
    index.flush()?;

    for bond in bonds {
        let mut w = csv::Writer::from_path(dir.join(format!("{}.csv", bond.bond_id)))?;
        let mut header = vec!["day".to_string()];
        header.extend(registry.entries.iter().map(|e| e.name.clone()));
        header.push("latent_grade".to_string());
        w.write_record(&header)?;
        for d in 0..bond.features.days() {
            let mut row = vec![(bond.issue_date + d).to_string()];
            row.extend(bond.features.row(d).iter().map(|v| fmt_cell(*v)));
            row.push(format!("{}", bond.latent_grades[d]));
            w.write_record(&row)?;
        }
        w.flush()?;
    }
    Ok(())
}

pub fn read_bonds_csv_dir(dir: &Path) -> Result<Vec<BondRecord>> {
    let index_path = dir.join("bonds.csv");
    if !index_path.exists() {
        return Err(CoreError::MissingInput(index_path.display().to_string()));
    }
    let mut bonds = Vec::new();
    let mut index = csv::Reader::from_path(&index_path)?;
    for rec in index.records() {
        let rec = rec?;
        let bond_id = rec[0].to_string();
        let issue_date: usize = rec[1].parse().map_err(|_| bad_field(&bond_id, "issue_date"))?;
        let end_date: usize = rec[2].parse().map_err(|_| bad_field(&bond_id, "end_date"))?;
        let outcome = match &rec[3] {
            "Matured" => Outcome::Matured,
            "Defaulted" => Outcome::Defaulted,
            "LowRatedActive" => Outcome::LowRatedActive,
            other => {
                return Err(CoreError::Domain(format!(
                    "bond {bond_id}: unknown outcome {other:?}"
                )))
            }
        };
        let issue_grade = RatingGrade::new(
            rec[4].parse().map_err(|_| bad_field(&bond_id, "issue_grade"))?,
        )?;
        let final_grade = RatingGrade::new(
            rec[5].parse().map_err(|_| bad_field(&bond_id, "final_grade"))?,
        )?;
        let default_date = if rec[6].is_empty() {
            None
        } else {
            Some(rec[6].parse().map_err(|_| bad_field(&bond_id, "default_date"))?)
        };
        let industry_id: u16 = rec[7].parse().map_err(|_| bad_field(&bond_id, "industry_id"))?;
        let region_id: u16 = rec[8].parse().map_err(|_| bad_field(&bond_id, "region_id"))?;

        let days = end_date - issue_date + 1;
        let mut values = Vec::with_capacity(days * N_FEATURES);
        let mut latent_grades = Vec::with_capacity(days);
        let mut body = csv::Reader::from_path(dir.join(format!("{bond_id}.csv")))?;
        for row in body.records() {
            let row = row?;
            if row.len() != N_FEATURES + 2 {
                return Err(CoreError::Shape(format!(
                    "bond {bond_id}: csv row has {} fields, expected {}",
                    row.len(),
                    N_FEATURES + 2
                )));
            }
            for col in 1..=N_FEATURES {
                values.push(parse_cell(&row[col], &bond_id)?);
            }
            latent_grades.push(parse_cell(&row[N_FEATURES + 1], &bond_id)?);
        }
        let bond = BondRecord {
            bond_id,
            issue_date,
            end_date,
            outcome,
            issue_grade,
            final_grade,
            default_date,
            industry_id,
            region_id,
            features: FeatureMatrix::from_values(days, values)?,
            latent_grades,
        };
        bond.validate()?;
        bonds.push(bond);
    }
    Ok(bonds)
}

fn bad_field(bond_id: &str, field: &str) -> CoreError {
    CoreError::Domain(format!("bond {bond_id}: unparseable {field}"))
}
