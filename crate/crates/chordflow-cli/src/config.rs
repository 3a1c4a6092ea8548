//! Flat `key = value` run configuration with `[section]` headers.
//! Unknown sections or keys are hard errors so that a config diff always
//! means what it says.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use chordflow_core::{CoreError, HamiltonianModel, PhasePoint};

#[derive(Debug, Clone)]
pub struct RunConfig {
    pub model: HamiltonianModel,
    pub hbar: f64,
    pub t: f64,
    pub ode_tol: f64,
    pub newton_tol: f64,
    pub leaf: LeafSpec,
    pub region: Region,
    pub engines: Engines,
    pub oracle: OracleCfg,
    pub bench: BenchCfg,
    pub caustic_scan: usize,
    pub out_dir: PathBuf,
}

#[derive(Debug, Clone)]
pub enum LeafSpec {
    Circle {
        center: PhasePoint,
        radius: f64,
        n_samples: usize,
        quantum_number: Option<u32>,
    },
    File(PathBuf),
}

#[derive(Debug, Clone, Copy)]
pub struct Region {
    pub p_min: f64,
    pub p_max: f64,
    pub q_min: f64,
    pub q_max: f64,
    pub resolution: usize,
}

impl Region {
    pub fn points(&self) -> Vec<PhasePoint> {
        let n = self.resolution;
        let mut pts = Vec::with_capacity(n * n);
        for ip in 0..n {
            let p = self.p_min + (self.p_max - self.p_min) * ip as f64 / (n - 1) as f64;
            for iq in 0..n {
                let q = self.q_min + (self.q_max - self.q_min) * iq as f64 / (n - 1) as f64;
                pts.push(PhasePoint::new(p, q));
            }
        }
        pts
    }
}

#[derive(Debug, Clone, Copy)]
pub struct Engines {
    pub tips: bool,
    pub liouville: bool,
    pub leaf_evolution: bool,
    pub oracle: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct OracleCfg {
    pub n_grid: usize,
    pub fock_cutoff: usize,
    pub grid_half: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct BenchCfg {
    pub n_specs: usize,
    pub seed: u64,
    pub tolerance: f64,
    pub center_tolerance: f64,
    pub scaling_t: f64,
    pub scaling_n: usize,
    pub scaling_delta_min: f64,
    pub scaling_delta_max: f64,
    pub scaling_rbar: f64,
}

/// Parse the configuration text; every present key must be known.
pub fn parse_config(text: &str) -> Result<RunConfig, CoreError> {
    let mut map: BTreeMap<String, String> = BTreeMap::new();
    let mut section = String::new();
    for (ln, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            section = line[1..line.len() - 1].trim().to_string();
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CoreError::Parse(format!(
                "line {}: expected 'key = value', got '{raw}'",
                ln + 1
            )));
        };
        let full = if section.is_empty() {
            key.trim().to_string()
        } else {
            format!("{section}.{}", key.trim())
        };
        if map.insert(full.clone(), value.trim().to_string()).is_some() {
            return Err(CoreError::Parse(format!("duplicate key '{full}'")));
        }
    }

    let mut used: std::collections::BTreeSet<String> = std::collections::BTreeSet::new();
    let mut get = |key: &str| -> Option<String> {
        used.insert(key.to_string());
        map.get(key).cloned()
    };
    let parse_f64 = |key: &str, val: Option<String>, default: Option<f64>| -> Result<f64, CoreError> {
        match val {
            Some(v) => v
                .parse::<f64>()
                .map_err(|e| CoreError::Parse(format!("{key}: {e}"))),
            None => default.ok_or_else(|| CoreError::Parse(format!("missing key '{key}'"))),
        }
    };
    let parse_usize =
        |key: &str, val: Option<String>, default: Option<usize>| -> Result<usize, CoreError> {
            match val {
                Some(v) => v
                    .parse::<usize>()
                    .map_err(|e| CoreError::Parse(format!("{key}: {e}"))),
                None => default.ok_or_else(|| CoreError::Parse(format!("missing key '{key}'"))),
            }
        };
    let parse_bool =
        |key: &str, val: Option<String>, default: bool| -> Result<bool, CoreError> {
            match val.as_deref() {
                Some("true") => Ok(true),
                Some("false") => Ok(false),
                Some(other) => Err(CoreError::Parse(format!(
                    "{key}: expected true/false, got '{other}'"
                ))),
                None => Ok(default),
            }
        };

    let model = HamiltonianModel::from_name(
        &get("run.model").ok_or_else(|| CoreError::Parse("missing key 'run.model'".into()))?,
    )?;
    let hbar = parse_f64("run.hbar", get("run.hbar"), None)?;
    let t = parse_f64("run.t", get("run.t"), Some(0.0))?;
    let ode_tol = parse_f64("run.ode_tol", get("run.ode_tol"), Some(1e-11))?;
    let newton_tol = parse_f64("run.newton_tol", get("run.newton_tol"), Some(1e-9))?;
    if hbar <= 0.0 || ode_tol <= 0.0 || newton_tol <= 0.0 {
        return Err(CoreError::Parse(
            "hbar and tolerances must be positive".into(),
        ));
    }

    let leaf = match get("leaf.kind").as_deref() {
        Some("circle") | None => LeafSpec::Circle {
            center: PhasePoint::new(
                parse_f64("leaf.center_p", get("leaf.center_p"), Some(0.0))?,
                parse_f64("leaf.center_q", get("leaf.center_q"), Some(0.0))?,
            ),
            radius: parse_f64("leaf.radius", get("leaf.radius"), None)?,
            n_samples: parse_usize("leaf.n_samples", get("leaf.n_samples"), Some(384))?,
            quantum_number: get("leaf.quantum_number")
                .map(|v| {
                    v.parse::<u32>()
                        .map_err(|e| CoreError::Parse(format!("leaf.quantum_number: {e}")))
                })
                .transpose()?,
        },
        Some("file") => LeafSpec::File(PathBuf::from(get("leaf.file").ok_or_else(|| {
            CoreError::Parse("leaf.kind = file requires leaf.file".into())
        })?)),
        Some(other) => {
            return Err(CoreError::Parse(format!(
                "leaf.kind must be circle or file, got '{other}'"
            )))
        }
    };

    let region = Region {
        p_min: parse_f64("region.p_min", get("region.p_min"), Some(-2.0))?,
        p_max: parse_f64("region.p_max", get("region.p_max"), Some(2.0))?,
        q_min: parse_f64("region.q_min", get("region.q_min"), Some(-2.0))?,
        q_max: parse_f64("region.q_max", get("region.q_max"), Some(2.0))?,
        resolution: parse_usize("region.resolution", get("region.resolution"), Some(64))?,
    };
    if region.resolution < 2 {
        return Err(CoreError::Parse("region.resolution must be >= 2".into()));
    }
    if region.p_max <= region.p_min || region.q_max <= region.q_min {
        return Err(CoreError::Parse("region is empty".into()));
    }

    let engines = Engines {
        tips: parse_bool("engines.tips", get("engines.tips"), true)?,
        liouville: parse_bool("engines.liouville", get("engines.liouville"), true)?,
        leaf_evolution: parse_bool(
            "engines.leaf_evolution",
            get("engines.leaf_evolution"),
            true,
        )?,
        oracle: parse_bool("engines.oracle", get("engines.oracle"), false)?,
    };

    let oracle = OracleCfg {
        n_grid: parse_usize("oracle.n_grid", get("oracle.n_grid"), Some(2048))?,
        fock_cutoff: parse_usize("oracle.fock_cutoff", get("oracle.fock_cutoff"), Some(170))?,
        grid_half: parse_f64("oracle.grid_half", get("oracle.grid_half"), Some(4.5))?,
    };

    let bench = BenchCfg {
        n_specs: parse_usize("bench.n_specs", get("bench.n_specs"), Some(1000))?,
        seed: parse_usize("bench.seed", get("bench.seed"), Some(42))? as u64,
        tolerance: parse_f64("bench.tolerance", get("bench.tolerance"), Some(1e-6))?,
        center_tolerance: parse_f64(
            "bench.center_tolerance",
            get("bench.center_tolerance"),
            Some(1e-8),
        )?,
        scaling_t: parse_f64("bench.scaling_t", get("bench.scaling_t"), Some(0.05))?,
        scaling_n: parse_usize("bench.scaling_n", get("bench.scaling_n"), Some(9))?,
        scaling_delta_min: parse_f64(
            "bench.scaling_delta_min",
            get("bench.scaling_delta_min"),
            Some(0.1),
        )?,
        scaling_delta_max: parse_f64(
            "bench.scaling_delta_max",
            get("bench.scaling_delta_max"),
            Some(0.8),
        )?,
        scaling_rbar: parse_f64("bench.scaling_rbar", get("bench.scaling_rbar"), Some(1.1))?,
    };

    let caustic_scan = parse_usize("caustic.n_scan", get("caustic.n_scan"), Some(512))?;
    let out_dir = PathBuf::from(get("output.dir").unwrap_or_else(|| "out".to_string()));

    // reject unknown keys
    for key in map.keys() {
        if !used.contains(key) {
            return Err(CoreError::Parse(format!("unknown key '{key}'")));
        }
    }

    Ok(RunConfig {
        model,
        hbar,
        t,
        ode_tol,
        newton_tol,
        leaf,
        region,
        engines,
        oracle,
        bench,
        caustic_scan,
        out_dir,
    })
}

pub fn load_config(path: &Path) -> Result<(RunConfig, String), CoreError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CoreError::Parse(format!("cannot read {}: {e}", path.display())))?;
    let cfg = parse_config(&text)?;
    Ok((cfg, text))
}
