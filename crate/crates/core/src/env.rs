//! Environments: finite sets of point light sources in the agent's plane projection.

use crate::error::{Result, SmcError};
use crate::geom::{RigidDisplacement, Vec2};
use serde::{Deserialize, Serialize};

/// One spot light source, identified by its projection onto the agent's plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "LightWire", into = "LightWire")]
pub struct LightSource {
    pub position: Vec2,
    pub intensity: f64,
}

/// JSON wire format: {"x":..,"y":..,"intensity":..}
#[derive(Serialize, Deserialize)]
struct LightWire {
    x: f64,
    y: f64,
    intensity: f64,
}

impl From<LightWire> for LightSource {
    fn from(w: LightWire) -> Self {
        LightSource {
            position: Vec2::new(w.x, w.y),
            intensity: w.intensity,
        }
    }
}

impl From<LightSource> for LightWire {
    fn from(s: LightSource) -> Self {
        LightWire {
            x: s.position.x,
            y: s.position.y,
            intensity: s.intensity,
        }
    }
}

impl LightSource {
    pub fn new(x: f64, y: f64, intensity: f64) -> Self {
        LightSource {
            position: Vec2::new(x, y),
            intensity,
        }
    }
}

/// An ordered collection of light sources.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Environment {
    pub sources: Vec<LightSource>,
}

impl Environment {
    pub fn new(sources: Vec<LightSource>) -> Self {
        Environment { sources }
    }

    pub fn empty() -> Self {
        Environment { sources: vec![] }
    }

    pub fn len(&self) -> usize {
        self.sources.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sources.is_empty()
    }

    pub fn validate(&self) -> Result<()> {
        for (i, s) in self.sources.iter().enumerate() {
            if !s.position.is_finite() || !s.intensity.is_finite() {
                return Err(SmcError::InvalidConfig(format!(
                    "source {i} has non-finite fields"
                )));
            }
            if s.intensity < 0.0 {
                return Err(SmcError::InvalidConfig(format!(
                    "source {i} has negative intensity {}",
                    s.intensity
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(self)?)
    }

    pub fn from_json(text: &str) -> Result<Environment> {
        let env: Environment = serde_json::from_str(text)?;
        env.validate()?;
        Ok(env)
    }
}

/// Translate every source by `d.delta`; intensities and order unchanged.
pub fn displace_environment(env: &Environment, d: RigidDisplacement) -> Environment {
    Environment {
        sources: env
            .sources
            .iter()
            .map(|s| LightSource {
                position: s.position + d.delta,
                intensity: s.intensity,
            })
            .collect(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_displacement_keeps_env() {
        let env = Environment::new(vec![LightSource::new(1.0, 2.0, 0.7)]);
        let moved = displace_environment(&env, RigidDisplacement::identity());
        assert_eq!(env, moved);
    }

    #[test]
    fn component_addition() {
        let env = Environment::new(vec![LightSource::new(1.0, 2.0, 1.0)]);
        let moved = displace_environment(&env, RigidDisplacement::new(0.5, -0.5));
        assert_eq!(moved.sources[0].position, Vec2::new(1.5, 1.5));
        assert_eq!(moved.sources[0].intensity, 1.0);
    }

    #[test]
    fn json_round_trip_matches_schema() {
        let env = Environment::new(vec![LightSource::new(0.25, -1.0, 1.5)]);
        let text = env.to_json().unwrap();
        assert_eq!(
            text,
            r#"{"sources":[{"x":0.25,"y":-1.0,"intensity":1.5}]}"#
        );
        let back = Environment::from_json(&text).unwrap();
        assert_eq!(env, back);
    }

    #[test]
    fn json_rejects_negative_intensity() {
        let err = Environment::from_json(r#"{"sources":[{"x":0,"y":0,"intensity":-1}]}"#);
        assert!(err.is_err());
    }

    proptest! {
        // Round trip d then -d restores positions bit-exactly, and
        // displacing twice equals displacing by the composition.
        #[test]
        fn displacement_round_trip(
            xs in proptest::collection::vec((-10.0f64..10.0, -10.0f64..10.0, 0.0f64..5.0), 0..8),
            dx in -5.0f64..5.0, dy in -5.0f64..5.0,
            ex in -5.0f64..5.0, ey in -5.0f64..5.0,
        ) {
            let env = Environment::new(
                xs.iter().map(|&(x, y, i)| LightSource::new(x, y, i)).collect(),
            );
            let d = RigidDisplacement::new(dx, dy);
            let back = displace_environment(&displace_environment(&env, d), d.inverse());
            for (a, b) in env.sources.iter().zip(back.sources.iter()) {
                prop_assert!((a.position.x - b.position.x).abs() <= 1e-12);
                prop_assert!((a.position.y - b.position.y).abs() <= 1e-12);
            }
            let e = RigidDisplacement::new(ex, ey);
            let two = displace_environment(&displace_environment(&env, d), e);
            let one = displace_environment(&env, crate::geom::compose_displacements(d, e));
            for (a, b) in two.sources.iter().zip(one.sources.iter()) {
                prop_assert!((a.position.x - b.position.x).abs() <= 1e-12);
                prop_assert!((a.position.y - b.position.y).abs() <= 1e-12);
            }
        }
    }
}
