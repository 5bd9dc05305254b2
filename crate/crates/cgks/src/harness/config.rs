//! Flat `key = value` case configuration with `[section]` headers.
//! Unknown sections or keys are rejected.

use crate::error::{Error, Result};
use crate::evolution::FluxMode;
use crate::recon::ReconMode;
use std::path::Path;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CaseName {
    Sinwave,
    ShuOsher,
    Sod,
    Uniform,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MeshGenerator {
    Hex,
    Hybrid,
}

#[derive(Debug, Clone)]
pub struct CaseConfig {
    pub name: CaseName,
    pub end_time: Option<f64>,
    pub generator: MeshGenerator,
    pub n: usize,
    pub nx: usize,
    pub gamma: f64,
    pub mu: f64,
    pub cfl: f64,
    pub recon: ReconMode,
    pub flux: FluxMode,
    pub cf_enabled: bool,
    pub threads: usize,
    pub fixed_dt: f64,
    pub output_dir: String,
    pub write_vtk: bool,
    pub write_csv: bool,
}

impl Default for CaseConfig {
    fn default() -> Self {
        CaseConfig {
            name: CaseName::Sinwave,
            end_time: None,
            generator: MeshGenerator::Hex,
            n: 10,
            nx: 400,
            gamma: 1.4,
            mu: 0.0,
            cfl: 0.5,
            recon: ReconMode::Weno,
            flux: FluxMode::Full,
            cf_enabled: false,
            threads: 0,
            fixed_dt: 0.0,
            output_dir: "out".to_string(),
            write_vtk: false,
            write_csv: false,
        }
    }
}

fn parse_bool(v: &str, key: &str) -> Result<bool> {
    match v {
        "on" | "true" | "1" | "yes" => Ok(true),
        "off" | "false" | "0" | "no" => Ok(false),
        _ => Err(Error::Config(format!("bad boolean '{v}' for {key}"))),
    }
}

fn parse_num<T: std::str::FromStr>(v: &str, key: &str) -> Result<T> {
    v.parse()
        .map_err(|_| Error::Config(format!("bad number '{v}' for {key}")))
}

impl CaseConfig {
    pub fn parse(text: &str) -> Result<CaseConfig> {
        let mut cfg = CaseConfig::default();
        let mut section = String::new();
        let mut saw_name = false;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            if line.starts_with('[') && line.ends_with(']') {
                section = line[1..line.len() - 1].trim().to_string();
                match section.as_str() {
                    "case" | "mesh" | "gas" | "solver" | "output" => {}
                    other => {
                        return Err(Error::Config(format!(
                            "unknown section '[{other}]' at line {}",
                            lineno + 1
                        )))
                    }
                }
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!("expected 'key = value' at line {}", lineno + 1))
            })?;
            let key = key.trim();
            let value = value.trim();
            match (section.as_str(), key) {
                ("case", "name") => {
                    saw_name = true;
                    cfg.name = match value {
                        "sinwave" => CaseName::Sinwave,
                        "shu_osher" => CaseName::ShuOsher,
                        "sod" => CaseName::Sod,
                        "uniform" => CaseName::Uniform,
                        other => {
                            return Err(Error::Config(format!("unknown case '{other}'")))
                        }
                    };
                }
                ("case", "end_time") => cfg.end_time = Some(parse_num(value, "end_time")?),
                ("mesh", "generator") => {
                    cfg.generator = match value {
                        "hex" => MeshGenerator::Hex,
                        "hybrid" => MeshGenerator::Hybrid,
                        other => {
                            return Err(Error::Config(format!("unknown generator '{other}'")))
                        }
                    };
                }
                ("mesh", "n") => cfg.n = parse_num(value, "n")?,
                ("mesh", "nx") => cfg.nx = parse_num(value, "nx")?,
                ("gas", "gamma") => cfg.gamma = parse_num(value, "gamma")?,
                ("gas", "mu") => cfg.mu = parse_num(value, "mu")?,
                ("solver", "cfl") => cfg.cfl = parse_num(value, "cfl")?,
                ("solver", "reconstruction") => {
                    cfg.recon = match value {
                        "linear" => ReconMode::Linear,
                        "weno" => ReconMode::Weno,
                        other => {
                            return Err(Error::Config(format!(
                                "unknown reconstruction '{other}'"
                            )))
                        }
                    };
                }
                ("solver", "flux") => {
                    cfg.flux = match value {
                        "full" => FluxMode::Full,
                        "smooth" => FluxMode::Smooth,
                        other => return Err(Error::Config(format!("unknown flux '{other}'"))),
                    };
                }
                ("solver", "cf") => cfg.cf_enabled = parse_bool(value, "cf")?,
                ("solver", "threads") => cfg.threads = parse_num(value, "threads")?,
                ("solver", "fixed_dt") => cfg.fixed_dt = parse_num(value, "fixed_dt")?,
                ("output", "dir") => cfg.output_dir = value.to_string(),
                ("output", "vtk") => cfg.write_vtk = parse_bool(value, "vtk")?,
                ("output", "csv") => cfg.write_csv = parse_bool(value, "csv")?,
                (sec, key) => {
                    return Err(Error::Config(format!(
                        "unknown key '{key}' in section '[{sec}]' at line {}",
                        lineno + 1
                    )))
                }
            }
        }
        if !saw_name {
            return Err(Error::Config("missing 'name' in [case]".into()));
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<CaseConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::io(format!("reading config {}", path.display()), e))?;
        CaseConfig::parse(&text)
    }

    pub fn end_time_or_default(&self) -> f64 {
        self.end_time.unwrap_or(match self.name {
            CaseName::Sinwave => 2.0,
            CaseName::ShuOsher => 1.8,
            CaseName::Sod => 0.2,
            CaseName::Uniform => 1.0,
        })
    }
}
