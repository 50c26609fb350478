//! Plane geometry primitives: points and the translation group.

use serde::{Deserialize, Serialize};
use std::ops::{Add, Neg, Sub};

/// A point or offset in the agent's plane, in simulation length units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vec2 {
    pub x: f64,
    pub y: f64,
}

impl Vec2 {
    pub const ZERO: Vec2 = Vec2 { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Vec2 { x, y }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    /// Largest absolute component; the metric used by per-axis bounds.
    pub fn linf(self) -> f64 {
        self.x.abs().max(self.y.abs())
    }

    pub fn dist(self, other: Vec2) -> f64 {
        (self - other).norm()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    pub fn scale(self, k: f64) -> Vec2 {
        Vec2::new(self.x * k, self.y * k)
    }
}

impl Add for Vec2 {
    type Output = Vec2;
    fn add(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Vec2 {
    type Output = Vec2;
    fn sub(self, rhs: Vec2) -> Vec2 {
        Vec2::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Neg for Vec2 {
    type Output = Vec2;
    fn neg(self) -> Vec2 {
        Vec2::new(-self.x, -self.y)
    }
}

/// A rigid displacement of the plane. This agent's body can only translate,
/// so the admissible group is pure 2-D translation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RigidDisplacement {
    pub delta: Vec2,
}

impl RigidDisplacement {
    pub fn new(dx: f64, dy: f64) -> Self {
        RigidDisplacement {
            delta: Vec2::new(dx, dy),
        }
    }

    pub fn identity() -> Self {
        RigidDisplacement { delta: Vec2::ZERO }
    }

    pub fn inverse(self) -> Self {
        RigidDisplacement { delta: -self.delta }
    }

    pub fn is_identity(self) -> bool {
        self.delta.x == 0.0 && self.delta.y == 0.0
    }
}

/// Composition of two displacements: apply `a`, then `b`.
pub fn compose_displacements(a: RigidDisplacement, b: RigidDisplacement) -> RigidDisplacement {
    RigidDisplacement {
        delta: a.delta + b.delta,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn identity_and_inverse() {
        let a = RigidDisplacement::new(0.1, 0.2);
        let id = RigidDisplacement::identity();
        assert_eq!(compose_displacements(a, id), a);
        let z = compose_displacements(a, RigidDisplacement::new(-0.1, -0.2));
        assert_eq!(z.delta, Vec2::ZERO);
    }

    #[test]
    fn segments_compose() {
        let seg = RigidDisplacement::new(0.2, 0.2);
        let total = compose_displacements(compose_displacements(seg, seg), seg);
        assert!((total.delta.x - 0.6).abs() <= 1e-12);
        assert!((total.delta.y - 0.6).abs() <= 1e-12);
    }

    proptest! {
        // Group axioms hold up to floating round-off for |delta| <= 10.
        #[test]
        fn group_axioms(
            ax in -10.0f64..10.0, ay in -10.0f64..10.0,
            bx in -10.0f64..10.0, by in -10.0f64..10.0,
            cx in -10.0f64..10.0, cy in -10.0f64..10.0,
        ) {
            let a = RigidDisplacement::new(ax, ay);
            let b = RigidDisplacement::new(bx, by);
            let c = RigidDisplacement::new(cx, cy);
            let left = compose_displacements(compose_displacements(a, b), c);
            let right = compose_displacements(a, compose_displacements(b, c));
            prop_assert!((left.delta.x - right.delta.x).abs() <= 1e-12);
            prop_assert!((left.delta.y - right.delta.y).abs() <= 1e-12);
            let back = compose_displacements(a, a.inverse());
            prop_assert!(back.delta.x.abs() <= 1e-12 && back.delta.y.abs() <= 1e-12);
        }
    }
}
