//! Gate sizing from power-law melt rheology and the cavity pressure-drop metric.
//!
//! Unit regime: temperatures in °C, conductivity in W/(m·°C), viscosity in
//! Pa·s, shear rate in 1/s, lengths in mm. The front velocity is evaluated in
//! SI (m/s) and reported in mm/s.

use std::path::Path;

use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum RheologyError {
    #[error("invalid material '{name}': {reason}")]
    InvalidMaterial { name: String, reason: String },
    #[error("rectangular gate aspect ratio must be >= 1 (width >= height), got {0}")]
    BadAspect(f64),
    #[error("gate radius must be positive, got {0}")]
    BadRadius(f64),
    #[error("part thickness must be positive, got {0}")]
    BadThickness(f64),
    #[error("unknown material '{name}'; available: {}", available.join(", "))]
    UnknownMaterial { name: String, available: Vec<String> },
    #[error("material database parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("cannot read material database {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

/// One thermoplastic grade.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaterialParams {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub case_study: Option<u32>,
    /// Power-law index.
    pub n: f64,
    #[serde(rename = "T_melt")]
    pub t_melt: f64,
    #[serde(rename = "T_wall")]
    pub t_wall: f64,
    pub gamma_opt: f64,
    pub mu_opt: f64,
    pub kappa: f64,
}

impl MaterialParams {
    pub fn validate(&self) -> Result<(), RheologyError> {
        let fail = |reason: &str| {
            Err(RheologyError::InvalidMaterial {
                name: self.name.clone(),
                reason: reason.to_string(),
            })
        };
        let all = [
            self.n,
            self.t_melt,
            self.t_wall,
            self.gamma_opt,
            self.mu_opt,
            self.kappa,
        ];
        if !all.iter().all(|v| v.is_finite()) {
            return fail("non-finite parameter");
        }
        if !(self.n > 0.0 && self.n <= 1.0) {
            return fail("power-law index n must lie in (0, 1]");
        }
        if self.t_melt <= self.t_wall {
            return fail("T_melt must exceed T_wall");
        }
        if self.gamma_opt <= 0.0 {
            return fail("gamma_opt must be positive");
        }
        if self.mu_opt <= 0.0 {
            return fail("mu_opt must be positive");
        }
        if self.kappa <= 0.0 {
            return fail("kappa must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RectangularGate {
    /// mm
    pub width: f64,
    /// mm
    pub height: f64,
}

impl RectangularGate {
    pub fn hydraulic_radius(&self) -> f64 {
        self.width * self.height / (2.0 * (self.width + self.height))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateSizing {
    /// Mean melt-front velocity, mm/s.
    pub v_bar: f64,
    /// Circular gate radius, mm.
    pub r_gate: f64,
    pub rectangular: Option<RectangularGate>,
}

/// Mean melt-front velocity in mm/s: `sqrt(5 ΔT κ / (3 μ_opt))` in SI, times 1000.
pub fn mean_front_velocity(mat: &MaterialParams) -> Result<f64, RheologyError> {
    mat.validate()?;
    let radicand = 5.0 * (mat.t_melt - mat.t_wall) * mat.kappa / (3.0 * mat.mu_opt);
    Ok(radicand.sqrt() * 1000.0)
}

/// Circular gate radius in mm from the power-law wall shear rate relation
/// `γ̇ = (3 + 1/n) v̄ / R`.
pub fn gate_radius(mat: &MaterialParams) -> Result<f64, RheologyError> {
    let v_bar = mean_front_velocity(mat)?;
    Ok((3.0 + 1.0 / mat.n) * v_bar / mat.gamma_opt)
}

/// Width/height of a rectangular gate with hydraulic radius `r_gate`.
///
/// Hydraulic radius here is `w h / (2 (w + h))`; with `w = k h` this solves
/// to `h = 2 R (k + 1) / k`.
pub fn rectangular_gate(r_gate: f64, aspect: f64) -> Result<RectangularGate, RheologyError> {
    if !r_gate.is_finite() || r_gate <= 0.0 {
        return Err(RheologyError::BadRadius(r_gate));
    }
    if !aspect.is_finite() || aspect < 1.0 {
        return Err(RheologyError::BadAspect(aspect));
    }
    let height = 2.0 * r_gate * (aspect + 1.0) / aspect;
    Ok(RectangularGate {
        width: aspect * height,
        height,
    })
}

pub fn size_gate(mat: &MaterialParams, rect_aspect: Option<f64>) -> Result<GateSizing, RheologyError> {
    let v_bar = mean_front_velocity(mat)?;
    let r_gate = gate_radius(mat)?;
    let rectangular = rect_aspect.map(|k| rectangular_gate(r_gate, k)).transpose()?;
    Ok(GateSizing {
        v_bar,
        r_gate,
        rectangular,
    })
}

/// Cavity pressure drop `12 μ L v̄ / H²` in MPa.
///
/// Inputs: `mu` Pa·s, `flow_length` mm, `v_bar` mm/s, `thickness` mm.
pub fn pressure_drop(mu: f64, flow_length: f64, v_bar: f64, thickness: f64) -> Result<f64, RheologyError> {
    if thickness.is_nan() || thickness <= 0.0 {
        return Err(RheologyError::BadThickness(thickness));
    }
    let pa = 12.0 * mu * (flow_length * 1e-3) * (v_bar * 1e-3) / (thickness * 1e-3).powi(2);
    Ok(pa * 1e-6)
}

#[derive(Deserialize)]
struct DatabaseFile {
    #[serde(default)]
    material: Vec<MaterialParams>,
}

/// Ordered collection of material records.
#[derive(Debug, Clone)]
pub struct MaterialDatabase {
    materials: Vec<MaterialParams>,
}

pub const DEFAULT_DATABASE: &str = include_str!("materials.toml");

impl Default for MaterialDatabase {
    fn default() -> Self {
        MaterialDatabase::from_toml(DEFAULT_DATABASE).expect("bundled database parses")
    }
}

impl MaterialDatabase {
    pub fn from_toml(text: &str) -> Result<Self, RheologyError> {
        let file: DatabaseFile = toml::from_str(text)?;
        for m in &file.material {
            m.validate()?;
        }
        Ok(MaterialDatabase {
            materials: file.material,
        })
    }

    pub fn load(path: &Path) -> Result<Self, RheologyError> {
        let text = std::fs::read_to_string(path).map_err(|source| RheologyError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Self::from_toml(&text)
    }

    pub fn materials(&self) -> &[MaterialParams] {
        &self.materials
    }

    /// Distinct names in file order.
    pub fn names(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for m in &self.materials {
            if !names.contains(&m.name) {
                names.push(m.name.clone());
            }
        }
        names
    }

    /// `"PP"` returns the first PP record; `"ABS:4"` the ABS record of case study 4.
    /// Name matching ignores ASCII case.
    pub fn get(&self, key: &str) -> Result<&MaterialParams, RheologyError> {
        let unknown = || RheologyError::UnknownMaterial {
            name: key.to_string(),
            available: self.names(),
        };
        let (name, case) = match key.split_once(':') {
            Some((n, c)) => (n, Some(c.trim().parse::<u32>().map_err(|_| unknown())?)),
            None => (key, None),
        };
        self.materials
            .iter()
            .find(|m| m.name.eq_ignore_ascii_case(name.trim()) && (case.is_none() || m.case_study == case))
            .ok_or_else(unknown)
    }
}
