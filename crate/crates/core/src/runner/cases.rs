//! Built-in acquisition cases and material examples.

use super::config::{ExperimentConfig, InhomogeneitySpec, SceneSpec, DEFAULT_RADIUS, DEFAULT_WAVELENGTH};
use crate::error::{MusicError, Result};
use crate::forward::ContrastMode;
use crate::scene::{ApertureArc, Background, Vec2, DEFAULT_ARC_COUNT, DEFAULT_SEPARATION_MARGIN};
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};
use std::fmt;
use std::str::FromStr;

pub const PAPER_CENTERS: [Vec2; 3] = [Vec2::new(0.7, 0.5), Vec2::new(-0.7, 0.0), Vec2::new(0.2, -0.5)];

/// Observation widths of Cases 1–4, repeated for Cases 5–8.
pub const OBSERVATION_WIDTHS: [f64; 4] = [FRAC_PI_2, 2.0 * PI / 3.0, 5.0 * PI / 6.0, PI];

/// Material choices for the three paper inhomogeneities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Example {
    /// `ε ≡ 5`
    Eps1,
    /// `ε = (5, 3, 2)`
    Eps2,
    /// `μ ≡ 5`
    Mu1,
    /// `μ = (5, 3, 2)`
    Mu2,
}

impl Example {
    pub const ALL: [Example; 4] = [Example::Eps1, Example::Eps2, Example::Mu1, Example::Mu2];

    pub fn mode(self) -> ContrastMode {
        match self {
            Example::Eps1 | Example::Eps2 => ContrastMode::Permittivity,
            Example::Mu1 | Example::Mu2 => ContrastMode::Permeability,
        }
    }

    fn values(self) -> [f64; 3] {
        match self {
            Example::Eps1 | Example::Mu1 => [5.0; 3],
            Example::Eps2 | Example::Mu2 => [5.0, 3.0, 2.0],
        }
    }

    /// Paper scene (three disks of radius 0.1 at wavelength 0.4) with this
    /// example's materials; the other parameter stays at the background.
    pub fn scene(self) -> SceneSpec {
        let inhomogeneities = PAPER_CENTERS
            .iter()
            .zip(self.values())
            .map(|(&center, v)| match self.mode() {
                ContrastMode::Permittivity => InhomogeneitySpec { center, eps: Some(v), mu: Some(1.0) },
                ContrastMode::Permeability => InhomogeneitySpec { center, eps: Some(1.0), mu: Some(v) },
            })
            .collect();
        SceneSpec {
            background: Background::default(),
            wavelength: DEFAULT_WAVELENGTH,
            radius: DEFAULT_RADIUS,
            inhomogeneities,
            separation_margin: DEFAULT_SEPARATION_MARGIN,
        }
    }
}

impl fmt::Display for Example {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Example::Eps1 => "EPS1",
            Example::Eps2 => "EPS2",
            Example::Mu1 => "MU1",
            Example::Mu2 => "MU2",
        })
    }
}

impl FromStr for Example {
    type Err = MusicError;

    fn from_str(s: &str) -> Result<Self> {
        Example::ALL
            .into_iter()
            .find(|e| e.to_string().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| MusicError::Config(format!("unknown example {s:?}; valid examples are EPS1, EPS2, MU1, MU2")))
    }
}

/// Acquisition geometry of one numbered case.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CaseDescriptor {
    pub id: u8,
    pub incident: ApertureArc,
    pub observation: ApertureArc,
}

/// Cases 1–4 illuminate from `[-π/4, π/4]`, Cases 5–8 from `[-π/2, π/2]`;
/// observation arcs are centred at `π` with widths `π/2, 2π/3, 5π/6, π`.
pub fn case(id: u8) -> Result<CaseDescriptor> {
    if !(1..=8).contains(&id) {
        return Err(MusicError::Config(format!("unknown case {id}; valid cases are 1, 2, 3, 4, 5, 6, 7, 8")));
    }
    let half = if id <= 4 { FRAC_PI_4 } else { FRAC_PI_2 };
    let width = OBSERVATION_WIDTHS[usize::from((id - 1) % 4)];
    Ok(CaseDescriptor {
        id,
        incident: ApertureArc::new(-half, half, DEFAULT_ARC_COUNT)?,
        observation: ApertureArc::centered(PI, width, DEFAULT_ARC_COUNT)?,
    })
}

/// Default experiment (Foldy–Lax data, 20 dB) for a case and example.
pub fn case_config(id: u8, example: Example, seed: u64) -> Result<ExperimentConfig> {
    let c = case(id)?;
    let mut config = ExperimentConfig::new(example.scene(), c.incident, c.observation, example.mode());
    config.seed = seed;
    let config = config.resolved();
    config.validate()?;
    Ok(config)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn catalogue_constraints() {
        for id in 1..=8 {
            let c = case(id).unwrap();
            assert!((c.observation.start + c.observation.end - 2.0 * PI).abs() < 1e-12);
            if id >= 5 {
                assert_eq!(c.incident.width(), PI);
            } else {
                assert!(c.incident.width() < PI);
            }
            if id <= 3 {
                assert!(c.observation.width() < PI);
            }
        }
        assert!((case(4).unwrap().observation.width() - PI).abs() < 1e-15);
        assert!((case(8).unwrap().observation.width() - PI).abs() < 1e-15);
    }

    #[test]
    fn bad_ids_list_valid_ones() {
        let msg = case(9).unwrap_err().to_string();
        assert!(msg.contains("1, 2, 3, 4, 5, 6, 7, 8"));
        let msg = "EPS3".parse::<Example>().unwrap_err().to_string();
        assert!(msg.contains("EPS1, EPS2, MU1, MU2"));
        assert_eq!("mu2".parse::<Example>().unwrap(), Example::Mu2);
    }

    #[test]
    fn examples_set_one_parameter() {
        let s = Example::Eps2.scene().build().unwrap();
        let eps: Vec<f64> = s.inhomogeneities().iter().map(|i| i.eps).collect();
        assert_eq!(eps, vec![5.0, 3.0, 2.0]);
        assert!(s.inhomogeneities().iter().all(|i| i.mu == 1.0));
        let s = Example::Mu1.scene().build().unwrap();
        assert!(s.inhomogeneities().iter().all(|i| i.mu == 5.0 && i.eps == 1.0));
    }

    #[test]
    fn paper_baseline_passes_validation() {
        for e in Example::ALL {
            case_config(5, e, 1).unwrap();
        }
    }
}
