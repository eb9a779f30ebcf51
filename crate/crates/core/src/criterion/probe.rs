use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The separable two-copy test state `|φ₁⟩⊗|φ₂⟩`.
///
/// Sharp probes are position eigenstates. Box probes model finite detectors:
/// per subsystem a uniform amplitude `ξ^{−1/2}` on `[c − ξ/2, c + ξ/2]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Probe {
    Sharp { phi1: Vec<f64>, phi2: Vec<f64> },
    Box { phi1: Vec<f64>, phi2: Vec<f64>, width: f64 },
}

fn check_points(phi1: &[f64], phi2: &[f64]) -> Result<()> {
    if phi1.len() != phi2.len() || phi1.is_empty() {
        return Err(Error::InvalidProbe(format!(
            "probe points must have equal, non-zero dimension ({} vs {})",
            phi1.len(),
            phi2.len()
        )));
    }
    if phi1.iter().chain(phi2).any(|v| !v.is_finite()) {
        return Err(Error::InvalidProbe("probe coordinates must be finite".into()));
    }
    Ok(())
}

impl Probe {
    /// Sharp probe; every subsystem must see two distinct positions.
    pub fn sharp(phi1: Vec<f64>, phi2: Vec<f64>) -> Result<Self> {
        let p = Probe::Sharp { phi1, phi2 };
        p.validate()?;
        Ok(p)
    }

    /// Box probe of width `width`; the two boxes of each subsystem must not overlap.
    pub fn boxed(phi1: Vec<f64>, phi2: Vec<f64>, width: f64) -> Result<Self> {
        let p = Probe::Box { phi1, phi2, width };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            Probe::Sharp { phi1, phi2 } => {
                check_points(phi1, phi2)?;
                if let Some(i) = (0..phi1.len()).find(|&i| phi1[i] == phi2[i]) {
                    return Err(Error::InvalidProbe(format!(
                        "subsystem {} has coinciding probe positions {}",
                        i + 1,
                        phi1[i]
                    )));
                }
            }
            Probe::Box { phi1, phi2, width } => {
                check_points(phi1, phi2)?;
                if !(*width > 0.0 && width.is_finite()) {
                    return Err(Error::InvalidProbe(format!("box width must be positive, got {width}")));
                }
                if let Some(i) = (0..phi1.len()).find(|&i| (phi1[i] - phi2[i]).abs() < *width) {
                    return Err(Error::InvalidProbe(format!(
                        "boxes of subsystem {} overlap (centres {} and {}, width {width})",
                        i + 1,
                        phi1[i],
                        phi2[i]
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.points().0.len()
    }

    pub fn points(&self) -> (&[f64], &[f64]) {
        match self {
            Probe::Sharp { phi1, phi2 } | Probe::Box { phi1, phi2, .. } => (phi1, phi2),
        }
    }

    pub fn width(&self) -> Option<f64> {
        match self {
            Probe::Sharp { .. } => None,
            Probe::Box { width, .. } => Some(*width),
        }
    }

    /// Same centres with finite detectors of width `width`.
    pub fn with_width(&self, width: f64) -> Result<Self> {
        let (a, b) = self.points();
        Probe::boxed(a.to_vec(), b.to_vec(), width)
    }
}

/// One-parameter probe shapes matched to the state families.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProbeFamily {
    /// `±(x₀, x₀, x₀)`.
    GhzLike,
    /// `(x₀+Δ, x₀, x₀−Δ)` against `(−x₀−Δ, −x₀+Δ, −x₀)`.
    WLike { shift: f64 },
}

impl ProbeFamily {
    pub fn points(self, x0: f64) -> (Vec<f64>, Vec<f64>) {
        match self {
            ProbeFamily::GhzLike => (vec![x0; 3], vec![-x0; 3]),
            ProbeFamily::WLike { shift: d } => (vec![x0 + d, x0, x0 - d], vec![-x0 - d, -x0 + d, -x0]),
        }
    }
}

/// Sharp probe of the given family at position `x0`.
pub fn build_probe(family: ProbeFamily, x0: f64) -> Result<Probe> {
    let (a, b) = family.points(x0);
    Probe::sharp(a, b)
}

/// Box probe of the given family at position `x0`.
pub fn build_box_probe(family: ProbeFamily, x0: f64, width: f64) -> Result<Probe> {
    let (a, b) = family.points(x0);
    Probe::boxed(a, b, width)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_shapes() {
        assert_eq!(
            build_probe(ProbeFamily::GhzLike, 1.0).unwrap(),
            Probe::Sharp {
                phi1: vec![1.0; 3],
                phi2: vec![-1.0; 3]
            }
        );
        assert_eq!(
            build_probe(ProbeFamily::WLike { shift: 1.0 }, 1.5).unwrap().points(),
            (&[2.5, 1.5, 0.5][..], &[-2.5, -0.5, -1.5][..])
        );
        assert_eq!(
            build_probe(ProbeFamily::WLike { shift: 1.0 }, 0.0).unwrap().points(),
            (&[1.0, 0.0, -1.0][..], &[-1.0, 1.0, 0.0][..])
        );
    }

    #[test]
    fn orthogonality_is_enforced() {
        assert!(matches!(
            build_probe(ProbeFamily::GhzLike, 0.0),
            Err(Error::InvalidProbe(_))
        ));
        // 2x₀ = Δ makes subsystem 2 coincide
        assert!(matches!(
            build_probe(ProbeFamily::WLike { shift: 1.0 }, 0.5),
            Err(Error::InvalidProbe(_))
        ));
        assert!(matches!(
            build_box_probe(ProbeFamily::GhzLike, 0.04, 0.1),
            Err(Error::InvalidProbe(_))
        ));
        assert!(build_box_probe(ProbeFamily::GhzLike, 0.05, 0.1).is_ok());
        assert!(Probe::sharp(vec![1.0], vec![1.0, 2.0]).is_err());
        assert!(Probe::sharp(vec![f64::NAN], vec![1.0]).is_err());
    }
}
