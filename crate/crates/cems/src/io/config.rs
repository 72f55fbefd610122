//! Configuration file ingestion: a JSON document describing the
//! community, referencing CSV series by path (relative to the JSON
//! file). Series files carry a `t,value` header, or `t,b,value` for
//! per-building series.

use crate::domain::{
    BuildingConfig, BuildingKind, CommunityConfig, EssParams, ExogenousData, HvacZoneParams,
    PriceSchedule, PvParams, PvTruth, ScenarioParams, TimeGrid,
};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {message}")]
    Parse { path: PathBuf, message: String },
    #[error("{path}:{line}: {message}")]
    Csv {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{path}: {source}")]
    Write {
        path: PathBuf,
        source: std::io::Error,
    },
}

#[derive(Debug, Serialize, Deserialize)]
struct RawConfig {
    time: TimeGrid,
    buildings: Vec<RawBuilding>,
    prices: RawPrices,
    exogenous: RawExogenous,
    #[serde(default)]
    scenario: ScenarioParams,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawBuilding {
    id: String,
    kind: BuildingKind,
    zones: Vec<HvacZoneParams>,
    ess: EssParams,
    pv: PvParams,
    demand_load_csv: String,
    demand_ev_csv: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawPrices {
    lambda_import_csv: String,
    lambda_export_csv: String,
    lambda_comfort: f64,
    lambda_ffr: f64,
}

#[derive(Debug, Serialize, Deserialize)]
struct RawExogenous {
    t_out_csv: String,
    clear_sky_csv: String,
    reg_signal_csv: String,
    /// Absent → the plant draws a fresh trajectory from the scenario
    /// model at simulation time.
    #[serde(skip_serializing_if = "Option::is_none")]
    pv_truth_csv: Option<String>,
}

/// A parsed series file: either one shared series or one per building.
#[derive(Debug)]
enum SeriesFile {
    Simple(BTreeMap<usize, f64>),
    PerBuilding(BTreeMap<(usize, usize), f64>),
}

fn read_to_string(path: &Path) -> Result<String, IoError> {
    std::fs::read_to_string(path).map_err(|source| IoError::Read {
        path: path.to_path_buf(),
        source,
    })
}

fn parse_series_file(path: &Path) -> Result<SeriesFile, IoError> {
    let text = read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| IoError::Csv {
        path: path.to_path_buf(),
        line: 1,
        message: "empty file".into(),
    })?;
    let header = header.trim();
    let per_building = match header {
        "t,value" => false,
        "t,b,value" => true,
        other => {
            return Err(IoError::Csv {
                path: path.to_path_buf(),
                line: 1,
                message: format!("expected header `t,value` or `t,b,value`, got {other:?}"),
            })
        }
    };

    let mut simple = BTreeMap::new();
    let mut keyed = BTreeMap::new();
    for (idx, line) in lines {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        let expect = if per_building { 3 } else { 2 };
        if fields.len() != expect {
            return Err(IoError::Csv {
                path: path.to_path_buf(),
                line: lineno,
                message: format!("expected {expect} fields, got {}", fields.len()),
            });
        }
        let cell = |k: usize| -> Result<f64, IoError> {
            fields[k].trim().parse().map_err(|e| IoError::Csv {
                path: path.to_path_buf(),
                line: lineno,
                message: format!("bad number {:?}: {e}", fields[k]),
            })
        };
        let t: usize = fields[0].trim().parse().map_err(|e| IoError::Csv {
            path: path.to_path_buf(),
            line: lineno,
            message: format!("bad step index {:?}: {e}", fields[0]),
        })?;
        if per_building {
            let b: usize = fields[1].trim().parse().map_err(|e| IoError::Csv {
                path: path.to_path_buf(),
                line: lineno,
                message: format!("bad building index {:?}: {e}", fields[1]),
            })?;
            keyed.insert((t, b), cell(2)?);
        } else {
            simple.insert(t, cell(1)?);
        }
    }
    Ok(if per_building {
        SeriesFile::PerBuilding(keyed)
    } else {
        SeriesFile::Simple(simple)
    })
}

fn dense(
    file: SeriesFile,
    path: &Path,
    len: usize,
    building: Option<usize>,
) -> Result<Vec<f64>, IoError> {
    let mut out = Vec::with_capacity(len);
    match (&file, building) {
        (SeriesFile::Simple(map), _) => {
            for t in 0..len {
                match map.get(&t) {
                    Some(v) => out.push(*v),
                    None => {
                        return Err(IoError::Parse {
                            path: path.to_path_buf(),
                            message: format!("missing step {t} (need 0..{len})"),
                        })
                    }
                }
            }
        }
        (SeriesFile::PerBuilding(map), Some(b)) => {
            for t in 0..len {
                match map.get(&(t, b)) {
                    Some(v) => out.push(*v),
                    None => {
                        return Err(IoError::Parse {
                            path: path.to_path_buf(),
                            message: format!("missing step {t} for building {b}"),
                        })
                    }
                }
            }
        }
        (SeriesFile::PerBuilding(_), None) => {
            return Err(IoError::Parse {
                path: path.to_path_buf(),
                message: "per-building series used where a shared series is required".into(),
            })
        }
    }
    Ok(out)
}

fn load_series(
    base: &Path,
    rel: &str,
    len: usize,
    building: Option<usize>,
) -> Result<Vec<f64>, IoError> {
    let path = base.join(rel);
    let file = parse_series_file(&path)?;
    dense(file, &path, len, building)
}

/// Loads a community configuration from a JSON document, resolving each
/// referenced CSV relative to the document's directory.
pub fn load_config(path: &Path) -> Result<CommunityConfig, IoError> {
    let text = read_to_string(path)?;
    let raw: RawConfig = serde_json::from_str(&text).map_err(|e| IoError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    let base = path.parent().unwrap_or(Path::new(".")).to_path_buf();
    let horizon = raw.time.horizon_steps;
    let substeps = if raw.time.rt_step_seconds > 0.0 {
        raw.time.total_substeps()
    } else {
        0
    };

    let mut buildings = Vec::with_capacity(raw.buildings.len());
    for (b, rb) in raw.buildings.iter().enumerate() {
        buildings.push(BuildingConfig {
            id: rb.id.clone(),
            kind: rb.kind,
            zones: rb.zones.clone(),
            ess: rb.ess.clone(),
            pv: rb.pv.clone(),
            demand_load: load_series(&base, &rb.demand_load_csv, horizon, Some(b))?,
            demand_ev: load_series(&base, &rb.demand_ev_csv, horizon, Some(b))?,
        });
    }

    let prices = PriceSchedule {
        lambda_import: load_series(&base, &raw.prices.lambda_import_csv, horizon, None)?,
        lambda_export: load_series(&base, &raw.prices.lambda_export_csv, horizon, None)?,
        lambda_comfort: raw.prices.lambda_comfort,
        lambda_ffr: raw.prices.lambda_ffr,
    };

    let pv_truth = match &raw.exogenous.pv_truth_csv {
        Some(rel) => PvTruth::Series(load_series(&base, rel, horizon, None)?),
        None => PvTruth::Draw,
    };
    let exogenous = ExogenousData {
        t_out: load_series(&base, &raw.exogenous.t_out_csv, horizon, None)?,
        clear_sky_irr: load_series(&base, &raw.exogenous.clear_sky_csv, horizon, None)?,
        reg_signal: load_series(&base, &raw.exogenous.reg_signal_csv, substeps, None)?,
        pv_truth,
    };

    Ok(CommunityConfig {
        time: raw.time,
        buildings,
        prices,
        exogenous,
        scenario: raw.scenario,
    })
}

fn write_file(path: &Path, contents: &str) -> Result<(), IoError> {
    std::fs::write(path, contents).map_err(|source| IoError::Write {
        path: path.to_path_buf(),
        source,
    })
}

fn series_csv(values: &[f64]) -> String {
    let mut out = String::from("t,value\n");
    for (t, v) in values.iter().enumerate() {
        out.push_str(&format!("{t},{v}\n"));
    }
    out
}

/// Materializes a configuration as `config.json` plus its CSV series in
/// `dir`. The written dataset loads back bit-identically.
pub fn write_dataset(cfg: &CommunityConfig, dir: &Path) -> Result<PathBuf, IoError> {
    std::fs::create_dir_all(dir).map_err(|source| IoError::Write {
        path: dir.to_path_buf(),
        source,
    })?;

    let mut raw_buildings = Vec::new();
    for b in &cfg.buildings {
        let load_name = format!("demand_load_{}.csv", b.id);
        let ev_name = format!("demand_ev_{}.csv", b.id);
        write_file(&dir.join(&load_name), &series_csv(&b.demand_load))?;
        write_file(&dir.join(&ev_name), &series_csv(&b.demand_ev))?;
        raw_buildings.push(RawBuilding {
            id: b.id.clone(),
            kind: b.kind,
            zones: b.zones.clone(),
            ess: b.ess.clone(),
            pv: b.pv.clone(),
            demand_load_csv: load_name,
            demand_ev_csv: ev_name,
        });
    }

    write_file(&dir.join("lambda_import.csv"), &series_csv(&cfg.prices.lambda_import))?;
    write_file(&dir.join("lambda_export.csv"), &series_csv(&cfg.prices.lambda_export))?;
    write_file(&dir.join("t_out.csv"), &series_csv(&cfg.exogenous.t_out))?;
    write_file(&dir.join("clear_sky.csv"), &series_csv(&cfg.exogenous.clear_sky_irr))?;
    write_file(&dir.join("reg_signal.csv"), &series_csv(&cfg.exogenous.reg_signal))?;
    let pv_truth_csv = match &cfg.exogenous.pv_truth {
        PvTruth::Series(s) => {
            write_file(&dir.join("pv_truth.csv"), &series_csv(s))?;
            Some("pv_truth.csv".to_string())
        }
        PvTruth::Draw => None,
    };

    let raw = RawConfig {
        time: cfg.time.clone(),
        buildings: raw_buildings,
        prices: RawPrices {
            lambda_import_csv: "lambda_import.csv".into(),
            lambda_export_csv: "lambda_export.csv".into(),
            lambda_comfort: cfg.prices.lambda_comfort,
            lambda_ffr: cfg.prices.lambda_ffr,
        },
        exogenous: RawExogenous {
            t_out_csv: "t_out.csv".into(),
            clear_sky_csv: "clear_sky.csv".into(),
            reg_signal_csv: "reg_signal.csv".into(),
            pv_truth_csv,
        },
        scenario: cfg.scenario.clone(),
    };
    let json = serde_json::to_string_pretty(&raw).expect("config serializes");
    let config_path = dir.join("config.json");
    write_file(&config_path, &json)?;
    Ok(config_path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::validate_config;
    use crate::io::bundled;

    #[test]
    fn dataset_round_trip() {
        let cfg = bundled::campus3();
        let dir = tempfile::tempdir().unwrap();
        let config_path = write_dataset(&cfg, dir.path()).unwrap();
        let loaded = load_config(&config_path).unwrap();
        assert!(validate_config(&loaded).is_empty());
        assert_eq!(loaded.buildings.len(), cfg.buildings.len());
        for (a, b) in loaded.buildings.iter().zip(&cfg.buildings) {
            assert_eq!(a.id, b.id);
            for (x, y) in a.demand_load.iter().zip(&b.demand_load) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
        for (x, y) in loaded
            .exogenous
            .reg_signal
            .iter()
            .zip(&cfg.exogenous.reg_signal)
        {
            assert_eq!(x.to_bits(), y.to_bits());
        }
        match (&loaded.exogenous.pv_truth, &cfg.exogenous.pv_truth) {
            (PvTruth::Series(a), PvTruth::Series(b)) => {
                for (x, y) in a.iter().zip(b) {
                    assert_eq!(x.to_bits(), y.to_bits());
                }
            }
            _ => panic!("truth series lost in round trip"),
        }
    }

    #[test]
    fn missing_header_is_reported_with_file() {
        let dir = tempfile::tempdir().unwrap();
        let bad = dir.path().join("series.csv");
        std::fs::write(&bad, "0,1.0\n1,2.0\n").unwrap();
        match parse_series_file(&bad) {
            Err(IoError::Csv { path, line, .. }) => {
                assert_eq!(path, bad);
                assert_eq!(line, 1);
            }
            other => panic!("expected csv error, got {other:?}"),
        }
    }

    #[test]
    fn per_building_series_selects_rows() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("shared.csv");
        let mut text = String::from("t,b,value\n");
        for t in 0..4 {
            for b in 0..2 {
                text.push_str(&format!("{t},{b},{}\n", (t * 10 + b) as f64));
            }
        }
        std::fs::write(&path, text).unwrap();
        let series = load_series(dir.path(), "shared.csv", 4, Some(1)).unwrap();
        assert_eq!(series, vec![1.0, 11.0, 21.0, 31.0]);
    }
}
