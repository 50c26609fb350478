//! Scene generators: light-point objects, rich random environments, and the
//! agent's home position.

use crate::env::{Environment, LightSource};
use crate::geom::Vec2;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// Agent position whose field of view is centered at the origin: the retina
/// range is [0,1]^2 relative to the agent, so parking the agent at
/// (-1/2, -1/2) centers the reachable world window on (0, 0). Scene
/// geometry throughout is expressed relative to that center.
pub const AGENT_HOME: Vec2 = Vec2 { x: -0.5, y: -0.5 };

/// Intensity range for randomly generated sources.
pub const INTENSITY_RANGE: (f64, f64) = (0.5, 1.5);

/// `n` sources uniform over a `side` x `side` square centered at the field
/// of view center, intensities uniform in `INTENSITY_RANGE`.
pub fn rich_environment(rng: &mut ChaCha8Rng, n: usize, side: f64) -> Environment {
    let half = side / 2.0;
    Environment::new(
        (0..n)
            .map(|_| {
                LightSource::new(
                    rng.gen_range(-half..half),
                    rng.gen_range(-half..half),
                    rng.gen_range(INTENSITY_RANGE.0..INTENSITY_RANGE.1),
                )
            })
            .collect(),
    )
}

pub fn random_intensities(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n)
        .map(|_| rng.gen_range(INTENSITY_RANGE.0..INTENSITY_RANGE.1))
        .collect()
}

/// The four test objects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ObjectShape {
    Circle,
    Square,
    Triangle,
    Star,
}

impl ObjectShape {
    pub fn all() -> [ObjectShape; 4] {
        [
            ObjectShape::Circle,
            ObjectShape::Square,
            ObjectShape::Triangle,
            ObjectShape::Star,
        ]
    }

    pub fn name(self) -> &'static str {
        match self {
            ObjectShape::Circle => "circle",
            ObjectShape::Square => "square",
            ObjectShape::Triangle => "triangle",
            ObjectShape::Star => "star",
        }
    }

    pub fn n_lights(self) -> usize {
        match self {
            ObjectShape::Triangle => 39,
            _ => 40,
        }
    }

    /// Characteristic size: circle radius, polygon side, or star ray length.
    pub fn size(self) -> f64 {
        match self {
            ObjectShape::Circle => 0.1,
            ObjectShape::Square | ObjectShape::Triangle => 0.2,
            ObjectShape::Star => 0.3,
        }
    }

    /// Light positions relative to the object center.
    pub fn unit_lights(self) -> Vec<Vec2> {
        match self {
            ObjectShape::Circle => {
                let n = self.n_lights();
                (0..n)
                    .map(|i| {
                        let a = 2.0 * PI * i as f64 / n as f64;
                        Vec2::new(0.1 * a.cos(), 0.1 * a.sin())
                    })
                    .collect()
            }
            ObjectShape::Square => {
                // 10 lights per side along the perimeter of a side-0.2 square
                let mut pts = Vec::with_capacity(40);
                for i in 0..40 {
                    let t = i as f64 / 10.0; // [0, 4)
                    let side = t as usize;
                    let f = t - side as f64;
                    let p = match side {
                        0 => Vec2::new(-0.1 + 0.2 * f, -0.1),
                        1 => Vec2::new(0.1, -0.1 + 0.2 * f),
                        2 => Vec2::new(0.1 - 0.2 * f, 0.1),
                        _ => Vec2::new(-0.1, 0.1 - 0.2 * f),
                    };
                    pts.push(p);
                }
                pts
            }
            ObjectShape::Triangle => {
                // equilateral, side 0.2, 13 lights per side
                let r = 0.2 / 3.0f64.sqrt();
                let verts: Vec<Vec2> = (0..3)
                    .map(|i| {
                        let a = PI / 2.0 + 2.0 * PI * i as f64 / 3.0;
                        Vec2::new(r * a.cos(), r * a.sin())
                    })
                    .collect();
                let mut pts = Vec::with_capacity(39);
                for side in 0..3 {
                    let a = verts[side];
                    let b = verts[(side + 1) % 3];
                    for j in 0..13 {
                        let f = j as f64 / 13.0;
                        pts.push(Vec2::new(
                            a.x + (b.x - a.x) * f,
                            a.y + (b.y - a.y) * f,
                        ));
                    }
                }
                pts
            }
            ObjectShape::Star => {
                // five rays of length 0.3, eight lights per ray
                let mut pts = Vec::with_capacity(40);
                for ray in 0..5 {
                    let a = PI / 2.0 + 2.0 * PI * ray as f64 / 5.0;
                    for j in 0..8 {
                        let r = 0.3 * (j + 1) as f64 / 8.0;
                        pts.push(Vec2::new(r * a.cos(), r * a.sin()));
                    }
                }
                pts
            }
        }
    }

    pub fn environment(self, center: Vec2, intensities: &[f64]) -> Environment {
        let lights = self.unit_lights();
        assert_eq!(lights.len(), intensities.len());
        Environment::new(
            lights
                .iter()
                .zip(intensities)
                .map(|(p, &i)| LightSource::new(center.x + p.x, center.y + p.y, i))
                .collect(),
        )
    }
}

/// A circle of 40 lights stretched or shrunk along the x axis about its own
/// center by factor `gamma` (1.0 = undeformed).
pub fn stretched_circle(center: Vec2, gamma: f64, intensities: &[f64]) -> Environment {
    let n = 40;
    assert_eq!(intensities.len(), n);
    Environment::new(
        (0..n)
            .map(|i| {
                let a = 2.0 * PI * i as f64 / n as f64;
                LightSource::new(
                    center.x + 0.1 * gamma * a.cos(),
                    center.y + 0.1 * a.sin(),
                    intensities[i],
                )
            })
            .collect(),
    )
}

/// Snap a coordinate to the scan lattice of step `h`.
pub fn snap(v: f64, h: f64) -> f64 {
    (v / h).round() * h
}

pub fn snap_vec(v: Vec2, h: f64) -> Vec2 {
    Vec2::new(snap(v.x, h), snap(v.y, h))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn light_counts_match_shapes() {
        for shape in ObjectShape::all() {
            assert_eq!(shape.unit_lights().len(), shape.n_lights());
        }
    }

    #[test]
    fn circle_lights_on_radius() {
        for p in ObjectShape::Circle.unit_lights() {
            assert!((p.norm() - 0.1).abs() < 1e-12);
        }
    }

    #[test]
    fn star_ray_reaches_size() {
        let max = ObjectShape::Star
            .unit_lights()
            .iter()
            .map(|p| p.norm())
            .fold(0.0, f64::max);
        assert!((max - 0.3).abs() < 1e-12);
    }

    #[test]
    fn stretch_moves_x_only() {
        let i = vec![1.0; 40];
        let a = stretched_circle(Vec2::ZERO, 1.0, &i);
        let b = stretched_circle(Vec2::ZERO, 1.5, &i);
        for (sa, sb) in a.sources.iter().zip(&b.sources) {
            assert!((sb.position.x - 1.5 * sa.position.x).abs() < 1e-12);
            assert_eq!(sb.position.y, sa.position.y);
        }
    }
}
