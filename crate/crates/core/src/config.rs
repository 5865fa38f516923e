//! JSON surface documents and the built-in preset catalog.
//!
//! Complex numbers are written as `[re, im]`. A document looks like
//!
//! ```json
//! {
//!   "schema_version": 1,
//!   "name": "enneper",
//!   "data": { "kind": "munu", "mu": "2", "nu": "z" },
//!   "domain": { "kind": "rectangle", "min": [-1, -1], "max": [1, 1], "pole_margin": 0.1 },
//!   "basepoint": [0, 0],
//!   "base_value": [0, 0, 0],
//!   "grid": { "nx": 32, "ny": 32 }
//! }
//! ```
//!
//! `theta` rotates the data within its associate family and `moebius`
//! (`[[a, b], [c, d]]`) acts on it afterwards; both are applied by
//! [`SurfaceConfig::data`].

use std::f64::consts::FRAC_PI_2;
use std::path::Path;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::expr::parse;
use crate::immersion::associate_family;
use crate::paths::{puncture_loops, LoopSpec};
use crate::spinor::{act_data, MoebiusAction};
use crate::weierstrass::{Domain, Repr, Tolerances, WeierstrassData, R3};

pub const SCHEMA_VERSION: u32 = 1;

pub const PRESETS: [&str; 6] = ["plane", "enneper", "catenoid", "helicoid", "sphere", "order-demo"];

/// Inverse stereographic projection from the north pole,
/// `phi = (2z, |z|^2 - 1) / (1 + |z|^2)`, gives `w = 2 phi_z`:
pub const SPHERE_W: [&str; 3] = [
    "2*(1 - zbar^2)/(1 + z*zbar)^2",
    "-2*i*(1 + zbar^2)/(1 + z*zbar)^2",
    "4*zbar/(1 + z*zbar)^2",
];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum DataConfig {
    Munu { mu: String, nu: String },
    Omega { w: [String; 3] },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LoopConfig {
    Circle {
        label: String,
        center: Complex64,
        radius: f64,
    },
    /// Closed automatically when the last vertex differs from the first.
    Polyline { label: String, vertices: Vec<Complex64> },
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridConfig {
    pub nx: usize,
    pub ny: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { nx: 32, ny: 32 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurfaceConfig {
    pub schema_version: u32,
    pub name: String,
    pub data: DataConfig,
    pub domain: Domain,
    pub basepoint: Complex64,
    #[serde(default)]
    pub base_value: R3,
    /// Period loops; one circle per puncture when empty.
    #[serde(default)]
    pub loops: Vec<LoopConfig>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub theta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub moebius: Option<[[Complex64; 2]; 2]>,
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

impl SurfaceConfig {
    fn base(name: &str, data: DataConfig, domain: Domain, basepoint: Complex64, base_value: R3) -> Self {
        SurfaceConfig {
            schema_version: SCHEMA_VERSION,
            name: name.into(),
            data,
            domain,
            basepoint,
            base_value,
            loops: Vec::new(),
            grid: GridConfig::default(),
            tolerances: Tolerances::default(),
            theta: 0.0,
            moebius: None,
        }
    }

    pub fn preset(name: &str) -> Option<Self> {
        let munu = |mu: &str, nu: &str| DataConfig::Munu {
            mu: mu.into(),
            nu: nu.into(),
        };
        let square = Domain::rectangle(c(-1.0, -1.0), c(1.0, 1.0)).with_margin(0.1);
        let annulus = Domain::annulus(c(0.0, 0.0), 0.5, 2.0)
            .with_puncture(c(0.0, 0.0), 0)
            .with_margin(0.1);
        let cfg = match name {
            "plane" => Self::base(name, munu("1", "0"), square, c(0.0, 0.0), [0.0; 3]),
            "enneper" => Self::base(name, munu("2", "z"), square, c(0.0, 0.0), [0.0; 3]),
            // phi = (-cosh s cos t, -cosh s sin t, s) for z = exp(s + it)
            "catenoid" => Self::base(name, munu("1/z^2", "z"), annulus, c(1.0, 0.0), [-1.0, 0.0, 0.0]),
            "helicoid" => {
                let mut cfg = Self::base(name, munu("1/z^2", "z"), annulus, c(1.0, 0.0), [0.0; 3]);
                cfg.theta = FRAC_PI_2;
                cfg
            }
            "sphere" => {
                let w = SPHERE_W.map(String::from);
                Self::base(name, DataConfig::Omega { w }, square, c(0.0, 0.0), [0.0, 0.0, -1.0])
            }
            "order-demo" => Self::base(
                name,
                munu("z^2", "1/z"),
                square.with_puncture(c(0.0, 0.0), 1),
                c(0.5, 0.0),
                [0.0; 3],
            ),
            _ => return None,
        };
        Some(cfg)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: SurfaceConfig = serde_json::from_str(text).map_err(|e| Error::Invalid(format!("config: {e}")))?;
        if cfg.schema_version != SCHEMA_VERSION {
            return Err(Error::Invalid(format!(
                "unsupported schema_version {} (expected {SCHEMA_VERSION})",
                cfg.schema_version
            )));
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// A preset name, or a path to a JSON document.
    pub fn load(name_or_path: &str) -> Result<Self> {
        if let Some(cfg) = Self::preset(name_or_path) {
            return Ok(cfg);
        }
        let path = Path::new(name_or_path);
        let text = std::fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn moebius_action(&self) -> Result<Option<MoebiusAction>> {
        self.moebius
            .map(|[[a, b], [cc, d]]| MoebiusAction::new(a, b, cc, d))
            .transpose()
    }

    /// Data without `theta` and `moebius` applied.
    pub fn raw_data(&self) -> Result<WeierstrassData> {
        self.domain.check()?;
        match &self.data {
            DataConfig::Munu { mu, nu } => WeierstrassData::munu(parse(mu)?, parse(nu)?, self.domain.clone()),
            DataConfig::Omega { w } => {
                WeierstrassData::omega_triple([parse(&w[0])?, parse(&w[1])?, parse(&w[2])?], self.domain.clone())
            }
        }
    }

    /// Data with the associate rotation and the matrix action applied.
    pub fn data(&self) -> Result<WeierstrassData> {
        let mut d = self.raw_data()?;
        if self.theta != 0.0 {
            d = associate_family(&d, self.theta)?;
        }
        if let Some(t) = self.moebius_action()? {
            d = act_data(&d, &t)?;
        }
        Ok(d)
    }

    pub fn loops(&self) -> Result<Vec<LoopSpec>> {
        if self.loops.is_empty() {
            return Ok(puncture_loops(&self.domain));
        }
        self.loops
            .iter()
            .map(|l| match l {
                LoopConfig::Circle { label, center, radius } => Ok(LoopSpec::circle(label.clone(), *center, *radius)),
                LoopConfig::Polyline { label, vertices } => {
                    let mut v = vertices.clone();
                    if v.len() > 1 && v.first() == v.last() {
                        v.pop();
                    }
                    LoopSpec::polygon(label.clone(), v)
                }
            })
            .collect()
    }

    /// Checks that the document describes usable data: expressions parse,
    /// the matrix is invertible, and the basepoint and loops are admissible.
    pub fn check(&self) -> Result<WeierstrassData> {
        let d = self.data()?;
        if !self.domain.is_admissible(self.basepoint) {
            return Err(Error::Invalid(format!("basepoint {} is not admissible", self.basepoint)));
        }
        for l in self.loops()? {
            l.path.check_clearance(&self.domain)?;
        }
        if self.grid.nx < 2 || self.grid.ny < 2 {
            return Err(Error::Invalid("grid needs nx, ny >= 2".into()));
        }
        Ok(d)
    }

    /// Replaces the data by explicit expressions for `self.data()`, clearing
    /// `theta` and `moebius`.
    pub fn flattened(&self) -> Result<Self> {
        let d = self.data()?;
        let mut out = self.clone();
        out.data = match d.repr() {
            Repr::MuNu { mu, nu } => DataConfig::Munu {
                mu: mu.to_string(),
                nu: nu.to_string(),
            },
            Repr::OmegaTriple => DataConfig::Omega {
                w: d.exprs().clone().map(|e| e.to_string()),
            },
        };
        out.theta = 0.0;
        out.moebius = None;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weierstrass::validate;

    #[test]
    fn presets_validate() {
        for name in PRESETS {
            let cfg = SurfaceConfig::preset(name).unwrap();
            let d = cfg.check().unwrap();
            let r = validate(&d, 512, &cfg.tolerances);
            assert!(r.pass, "{name}: {:?}", r.reasons);
        }
    }

    #[test]
    fn json_round_trip() {
        for name in PRESETS {
            let cfg = SurfaceConfig::preset(name).unwrap();
            let back = SurfaceConfig::from_json(&cfg.to_json()).unwrap();
            assert_eq!(cfg, back);
        }
        let text = SurfaceConfig::preset("enneper").unwrap().to_json();
        assert!(text.contains("\"basepoint\": [\n    0.0,\n    0.0\n  ]"));
    }

    #[test]
    fn flattening_keeps_values() {
        let mut cfg = SurfaceConfig::preset("helicoid").unwrap();
        cfg.moebius = Some([[c(0.6, 0.0), c(0.0, -0.8)], [c(0.0, -0.8), c(0.6, 0.0)]]);
        let flat = cfg.flattened().unwrap();
        let (a, b) = (cfg.data().unwrap(), flat.data().unwrap());
        let z = c(1.1, 0.4);
        let (wa, wb) = (a.omega(z).unwrap(), b.omega(z).unwrap());
        for i in 0..3 {
            assert!((wa[i] - wb[i]).norm() < 1e-13 * (1.0 + wa[i].norm()));
        }
    }

    #[test]
    fn bad_documents() {
        let mut cfg = SurfaceConfig::preset("enneper").unwrap();
        cfg.data = DataConfig::Munu {
            mu: "z +".into(),
            nu: "z".into(),
        };
        assert!(matches!(cfg.check(), Err(Error::Parse(p)) if p.offset == 3));
        let mut cfg = SurfaceConfig::preset("enneper").unwrap();
        cfg.moebius = Some([[c(1.0, 0.0), c(2.0, 0.0)], [c(1.0, 0.0), c(2.0, 0.0)]]);
        assert!(matches!(cfg.check(), Err(Error::SingularMatrix)));
        let mut cfg = SurfaceConfig::preset("enneper").unwrap();
        cfg.basepoint = c(3.0, 0.0);
        assert!(cfg.check().is_err());
        let mut cfg = SurfaceConfig::preset("enneper").unwrap();
        cfg.schema_version = 7;
        assert!(SurfaceConfig::from_json(&cfg.to_json()).is_err());
    }
}
