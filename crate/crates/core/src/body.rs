//! The tray-shaped agent body: receptor specifications and the retina range.

use crate::error::{Result, SmcError};
use crate::geom::Vec2;
use crate::rng::stream_rng;
use rand::Rng;
use serde::{Deserialize, Serialize};

/// A pressure-sensitive cell on the body surface reporting retina position.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProprioceptorSpec {
    pub location: Vec2,
    pub acuity: f64,
}

/// A light-sensitive cell riding on the mobile retina.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotoreceptorSpec {
    pub offset: Vec2,
    pub acuity: f64,
}

/// Axis-aligned rectangle of admissible retina-center positions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RetinaRange {
    pub lo: Vec2,
    pub hi: Vec2,
}

impl RetinaRange {
    /// The unit square; retina movements are confined to it by default.
    pub fn unit() -> Self {
        RetinaRange {
            lo: Vec2::ZERO,
            hi: Vec2::new(1.0, 1.0),
        }
    }

    pub fn contains(&self, p: Vec2) -> bool {
        p.x >= self.lo.x - 1e-12
            && p.x <= self.hi.x + 1e-12
            && p.y >= self.lo.y - 1e-12
            && p.y <= self.hi.y + 1e-12
    }

    pub fn extent(&self) -> Vec2 {
        self.hi - self.lo
    }
}

/// Fixed non-uniform layout of the eight proprioceptors. The irregular
/// placement distorts the proprioceptive image of the retina plane while
/// keeping the map injective on the default scan grid: on 51x51 no two
/// nodes are closer than 0.015 in max-component distance, above the 0.01
/// dedup tolerance.
pub const PROPRIOCEPTOR_LAYOUT: [(f64, f64); 8] = [
    (0.13, 0.22),
    (0.52, 0.05),
    (0.75, 0.21),
    (0.07, 0.51),
    (0.46, 0.58),
    (0.88, 0.57),
    (0.28, 0.94),
    (0.65, 0.85),
];

/// Acuity shared by all proprioceptors.
pub const PROPRIOCEPTOR_ACUITY: f64 = 0.3;

/// Photoreceptor offsets are drawn from a square with this side length,
/// centered on the retina.
pub const PHOTORECEPTOR_SPREAD: f64 = 0.3;

/// Photoreceptor acuities are drawn uniformly from this interval.
pub const PHOTORECEPTOR_ACUITY_RANGE: (f64, f64) = (0.03, 0.3);

pub const DEFAULT_PROPRIOCEPTORS: usize = 8;
pub const DEFAULT_PHOTORECEPTORS: usize = 9;

/// The agent's body: receptor specs plus the admissible retina range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentBody {
    pub proprioceptors: Vec<ProprioceptorSpec>,
    pub photoreceptors: Vec<PhotoreceptorSpec>,
    pub retina_range: RetinaRange,
}

impl AgentBody {
    /// The standard body: eight fixed proprioceptors and nine photoreceptors
    /// drawn once from the run's seeded generator, then frozen so every
    /// experiment in a run shares one body.
    pub fn standard(seed: u64) -> AgentBody {
        let mut rng = stream_rng(seed, 0);
        let half = PHOTORECEPTOR_SPREAD / 2.0;
        let photoreceptors = (0..DEFAULT_PHOTORECEPTORS)
            .map(|_| {
                let x = rng.gen_range(-half..half);
                let y = rng.gen_range(-half..half);
                let acuity =
                    rng.gen_range(PHOTORECEPTOR_ACUITY_RANGE.0..PHOTORECEPTOR_ACUITY_RANGE.1);
                PhotoreceptorSpec {
                    offset: Vec2::new(x, y),
                    acuity,
                }
            })
            .collect();
        AgentBody {
            proprioceptors: PROPRIOCEPTOR_LAYOUT
                .iter()
                .map(|&(x, y)| ProprioceptorSpec {
                    location: Vec2::new(x, y),
                    acuity: PROPRIOCEPTOR_ACUITY,
                })
                .collect(),
            photoreceptors,
            retina_range: RetinaRange::unit(),
        }
    }

    pub fn n_proprio(&self) -> usize {
        self.proprioceptors.len()
    }

    pub fn n_photo(&self) -> usize {
        self.photoreceptors.len()
    }

    pub fn validate(&self) -> Result<()> {
        if self.proprioceptors.is_empty() || self.photoreceptors.is_empty() {
            return Err(SmcError::InvalidConfig(
                "body must have at least one receptor of each kind".into(),
            ));
        }
        for (i, p) in self.proprioceptors.iter().enumerate() {
            if p.acuity <= 0.0 {
                return Err(SmcError::InvalidConfig(format!(
                    "proprioceptor {i} acuity must be > 0"
                )));
            }
        }
        for (i, p) in self.photoreceptors.iter().enumerate() {
            if p.acuity <= 0.0 {
                return Err(SmcError::InvalidConfig(format!(
                    "photoreceptor {i} acuity must be > 0"
                )));
            }
        }
        let ext = self.retina_range.extent();
        if !(ext.x > 0.0 && ext.y > 0.0) {
            return Err(SmcError::InvalidConfig("retina range is degenerate".into()));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn standard_body_shape() {
        let body = AgentBody::standard(1);
        assert_eq!(body.n_proprio(), 8);
        assert_eq!(body.n_photo(), 9);
        assert_eq!(body.retina_range, RetinaRange::unit());
        body.validate().unwrap();
        for p in &body.photoreceptors {
            assert!(p.offset.linf() <= PHOTORECEPTOR_SPREAD / 2.0);
            assert!(p.acuity >= 0.03 && p.acuity <= 0.3);
        }
    }

    #[test]
    fn standard_body_is_seed_deterministic() {
        assert_eq!(AgentBody::standard(7), AgentBody::standard(7));
        assert_ne!(AgentBody::standard(7), AgentBody::standard(8));
    }

    #[test]
    fn validate_rejects_bad_acuity() {
        let mut body = AgentBody::standard(1);
        body.photoreceptors[0].acuity = 0.0;
        assert!(body.validate().is_err());
    }
}
