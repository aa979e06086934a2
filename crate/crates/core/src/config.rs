//! Flat `key = value` run configuration.

use crate::adapt::AdaptSettings;
use crate::error::{Error, Result};
use crate::fermion::PoolKind;
use crate::qeom::{IndicatorKind, RootSelector, ScreenMode, Tracking, Variant};
use crate::symmetry::PointGroup;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::PathBuf;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum SystemSource {
    Fcidump(PathBuf),
    /// Stretch parameter (bohr) and optional layout file.
    H8 { b: f64, layout: Option<PathBuf> },
    H2 { r: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Method {
    Qeom,
    Qse,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RunConfig {
    pub source: SystemSource,
    pub point_group: Option<PointGroup>,
    /// Zero-based spatial orbitals.
    pub frozen: Vec<usize>,
    pub active: Option<Vec<usize>>,
    pub method: Method,
    pub variants: Vec<Variant>,
    pub target_irrep: String,
    pub root: RootSelector,
    pub tracking: Tracking,
    pub screen: Option<ScreenMode>,
    pub indicator: IndicatorKind,
    pub adapt: AdaptSettings,
    pub lindep: f64,
    pub oracle: bool,
    pub rediagonalize_curve: bool,
    pub output_dir: Option<PathBuf>,
    /// Parameter values for `scan`.
    pub scan: Vec<f64>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            source: SystemSource::H2 { r: 1.4 },
            point_group: None,
            frozen: Vec::new(),
            active: None,
            method: Method::Qeom,
            variants: vec![Variant::Sd],
            target_irrep: "0".into(),
            root: RootSelector::default(),
            tracking: Tracking::Overlap,
            screen: None,
            indicator: IndicatorKind::RayleighSchroedinger,
            adapt: AdaptSettings::default(),
            lindep: crate::qse::LINDEP,
            oracle: true,
            rediagonalize_curve: false,
            output_dir: None,
            scan: Vec::new(),
        }
    }
}

const KEYS: &[&str] = &[
    "fcidump", "builtin", "b", "r", "h8_layout", "point_group", "frozen", "active", "method", "variant",
    "target_irrep", "target_root", "target_spin", "root_tracking", "screening_mode", "screening_f", "screening_eps",
    "screening_k", "indicator", "adapt_eps", "adapt_max_iters", "adapt_gtol", "adapt_optimizer_iters", "pool",
    "pool_symmetry_filter", "lindep", "oracle", "re_diagonalize_curve", "output_dir", "scan",
];

/// Parse `key = value` lines; `#` starts a comment.
pub fn parse_pairs(text: &str) -> Result<BTreeMap<String, String>> {
    let mut out = BTreeMap::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        let k = k.trim().to_ascii_lowercase();
        if !KEYS.contains(&k.as_str()) {
            return Err(Error::Config(format!("line {}: unknown key '{k}'", i + 1)));
        }
        if out.insert(k.clone(), v.trim().to_string()).is_some() {
            return Err(Error::Config(format!("line {}: key '{k}' given twice", i + 1)));
        }
    }
    Ok(out)
}

fn num<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
    v.parse().map_err(|_| Error::Config(format!("{key}: cannot parse '{v}'")))
}

fn list<T: std::str::FromStr>(key: &str, v: &str) -> Result<Vec<T>> {
    v.split(|c: char| c == ',' || c.is_whitespace()).filter(|s| !s.is_empty()).map(|s| num(key, s)).collect()
}

fn flag(key: &str, v: &str) -> Result<bool> {
    match v.to_ascii_lowercase().as_str() {
        "true" | "yes" | "1" | "on" => Ok(true),
        "false" | "no" | "0" | "off" => Ok(false),
        _ => Err(Error::Config(format!("{key}: expected true or false, got '{v}'"))),
    }
}

fn one_based(key: &str, v: &str) -> Result<Vec<usize>> {
    list::<usize>(key, v)?
        .into_iter()
        .map(|x| x.checked_sub(1).ok_or_else(|| Error::Config(format!("{key}: orbitals are numbered from 1"))))
        .collect()
}

impl RunConfig {
    /// Build from merged pairs; later maps override earlier ones.
    pub fn from_pairs(layers: &[BTreeMap<String, String>]) -> Result<Self> {
        let mut kv: BTreeMap<String, String> = BTreeMap::new();
        for layer in layers {
            for (k, v) in layer {
                if !KEYS.contains(&k.as_str()) {
                    return Err(Error::Config(format!("unknown key '{k}'")));
                }
                kv.insert(k.clone(), v.clone());
            }
        }
        let get = |k: &str| kv.get(k).map(String::as_str);
        let mut c = RunConfig::default();

        c.source = match (get("fcidump"), get("builtin")) {
            (Some(_), Some(_)) => return Err(Error::Config("give exactly one of fcidump and builtin".into())),
            (None, None) => return Err(Error::Config("no system: set fcidump or builtin".into())),
            (Some(p), None) => {
                for k in ["b", "r", "h8_layout"] {
                    if kv.contains_key(k) {
                        return Err(Error::Config(format!("{k} only applies to builtin systems")));
                    }
                }
                SystemSource::Fcidump(PathBuf::from(p))
            }
            (None, Some(name)) => match name.to_ascii_lowercase().as_str() {
                "h8" => {
                    if kv.contains_key("r") {
                        return Err(Error::Config("r applies to builtin = h2".into()));
                    }
                    SystemSource::H8 {
                        b: get("b").map(|v| num("b", v)).transpose()?.unwrap_or(0.0),
                        layout: get("h8_layout").map(PathBuf::from),
                    }
                }
                "h2" => {
                    if kv.contains_key("b") || kv.contains_key("h8_layout") {
                        return Err(Error::Config("b and h8_layout apply to builtin = h8".into()));
                    }
                    SystemSource::H2 { r: get("r").map(|v| num("r", v)).transpose()?.unwrap_or(1.4) }
                }
                other => return Err(Error::Config(format!("unknown builtin system '{other}'"))),
            },
        };
        if let Some(v) = get("point_group") {
            c.point_group = Some(v.parse().map_err(Error::Config)?);
        }
        if let Some(v) = get("frozen") {
            c.frozen = one_based("frozen", v)?;
        }
        if let Some(v) = get("active") {
            c.active = Some(one_based("active", v)?);
        }
        if let Some(v) = get("method") {
            c.method = match v.to_ascii_lowercase().as_str() {
                "qeom" => Method::Qeom,
                "qse" => Method::Qse,
                other => return Err(Error::Config(format!("unknown method '{other}'"))),
            };
        }
        if let Some(v) = get("variant") {
            c.variants = if v.eq_ignore_ascii_case("all") {
                vec![Variant::Sd, Variant::Sdt, Variant::SdtScreened, Variant::SdParenT]
            } else {
                let mut vs = vec![Variant::Sd];
                for part in v.split(',').map(str::trim).filter(|s| !s.is_empty()) {
                    let x: Variant = part.parse().map_err(Error::Config)?;
                    if !vs.contains(&x) {
                        vs.push(x);
                    }
                }
                vs
            };
        }
        if let Some(v) = get("target_irrep") {
            c.target_irrep = v.to_string();
        }
        if let Some(v) = get("target_root") {
            c.root.ordinal = num("target_root", v)?;
            if c.root.ordinal == 0 {
                return Err(Error::Config("target_root counts from 1".into()));
            }
        }
        if let Some(v) = get("target_spin") {
            c.root.spin = if v.eq_ignore_ascii_case("any") { None } else { Some(num("target_spin", v)?) };
        }
        if let Some(v) = get("root_tracking") {
            c.tracking = v.parse().map_err(Error::Config)?;
        }
        if let Some(v) = get("indicator") {
            c.indicator = v.parse().map_err(Error::Config)?;
        }

        let screened = c.variants.iter().any(|v| matches!(v, Variant::SdtScreened | Variant::SdParenT));
        let screening_keys = ["screening_mode", "screening_f", "screening_eps", "screening_k"];
        match get("screening_mode") {
            None => {
                if screened {
                    return Err(Error::Config("screened variants need screening_mode".into()));
                }
                if let Some(k) = screening_keys.iter().find(|k| kv.contains_key(**k)) {
                    return Err(Error::Config(format!("{k} given without screening_mode")));
                }
            }
            Some(mode) => {
                let need = |k: &str| get(k).ok_or_else(|| Error::Config(format!("screening_mode = {mode} needs {k}")));
                let (mode, used) = match mode.to_ascii_lowercase().as_str() {
                    "coverage" => (ScreenMode::Coverage(num("screening_f", need("screening_f")?)?), "screening_f"),
                    "threshold" => (ScreenMode::Threshold(num("screening_eps", need("screening_eps")?)?), "screening_eps"),
                    "top_k" | "top-k" => (ScreenMode::TopK(num("screening_k", need("screening_k")?)?), "screening_k"),
                    other => return Err(Error::Config(format!("unknown screening_mode '{other}'"))),
                };
                if let Some(k) = screening_keys[1..].iter().find(|k| **k != used && kv.contains_key(**k)) {
                    return Err(Error::Config(format!("{k} does not apply to this screening_mode")));
                }
                if let ScreenMode::Coverage(f) = mode {
                    if !(f > 0.0 && f <= 1.0) {
                        return Err(Error::Config(format!("screening_f = {f} outside (0, 1]")));
                    }
                }
                c.screen = Some(mode);
            }
        }

        if let Some(v) = get("adapt_eps") {
            c.adapt.epsilon = num("adapt_eps", v)?;
            if !(c.adapt.epsilon > 0.0) {
                return Err(Error::Config("adapt_eps must be positive".into()));
            }
        }
        if let Some(v) = get("adapt_max_iters") {
            c.adapt.max_iters = num("adapt_max_iters", v)?;
        }
        if let Some(v) = get("adapt_gtol") {
            c.adapt.optimizer_gtol = num("adapt_gtol", v)?;
        }
        if let Some(v) = get("adapt_optimizer_iters") {
            c.adapt.optimizer_max_iters = num("adapt_optimizer_iters", v)?;
        }
        if let Some(v) = get("pool") {
            c.adapt.pool = v.parse::<PoolKind>().map_err(Error::Config)?;
        }
        if let Some(v) = get("pool_symmetry_filter") {
            c.adapt.symmetry_filter = flag("pool_symmetry_filter", v)?;
        }
        if let Some(v) = get("lindep") {
            c.lindep = num("lindep", v)?;
        }
        if let Some(v) = get("oracle") {
            c.oracle = flag("oracle", v)?;
        }
        if let Some(v) = get("re_diagonalize_curve") {
            c.rediagonalize_curve = flag("re_diagonalize_curve", v)?;
        }
        if let Some(v) = get("output_dir") {
            c.output_dir = Some(PathBuf::from(v));
        }
        if let Some(v) = get("scan") {
            c.scan = list("scan", v)?;
        }
        Ok(c)
    }

    pub fn parse(text: &str, overrides: &[(String, String)]) -> Result<Self> {
        let base = parse_pairs(text)?;
        let over: BTreeMap<String, String> = overrides.iter().map(|(k, v)| (k.to_ascii_lowercase(), v.clone())).collect();
        Self::from_pairs(&[base, over])
    }

    pub fn needs_triples(&self) -> bool {
        self.variants.iter().any(|v| *v != Variant::Sd)
    }

    pub fn with_parameter(&self, x: f64) -> Result<Self> {
        let mut c = self.clone();
        c.source = match &self.source {
            SystemSource::H8 { layout, .. } => SystemSource::H8 { b: x, layout: layout.clone() },
            SystemSource::H2 { .. } => SystemSource::H2 { r: x },
            SystemSource::Fcidump(_) => return Err(Error::Config("scans need a builtin system".into())),
        };
        Ok(c)
    }
}
