//! Receptor response models and environment scanning for the 2-D tray agent
//! and the pedagogical 1-D agent.

use crate::body::AgentBody;
use crate::env::Environment;
use crate::error::{Result, SmcError};
use crate::geom::Vec2;
use crate::table::{PhotoVector, ProprioVector, ScanGrid, SmcTable};

/// Proprioceptor outputs for a retina centered at `retina_pos`:
/// component j is exp(-d^2 / sigma_j^2) with d the distance from the retina
/// center to proprioceptor j. Errors when `retina_pos` leaves the range.
pub fn proprio_response(body: &AgentBody, retina_pos: Vec2) -> Result<ProprioVector> {
    if !body.retina_range.contains(retina_pos) {
        return Err(SmcError::OutOfRange {
            x: retina_pos.x,
            y: retina_pos.y,
        });
    }
    Ok(ProprioVector(proprio_raw(body, retina_pos)))
}

pub(crate) fn proprio_raw(body: &AgentBody, retina_pos: Vec2) -> Vec<f64> {
    body.proprioceptors
        .iter()
        .map(|spec| {
            let d2 = {
                let dx = retina_pos.x - spec.location.x;
                let dy = retina_pos.y - spec.location.y;
                dx * dx + dy * dy
            };
            (-d2 / (spec.acuity * spec.acuity)).exp()
        })
        .collect()
}

/// Photoreceptor outputs: component j sums, over all sources i, the term
/// I_i * exp(-d_ij^2 / sigma_j^2) where d_ij is the distance from source i
/// to the receptor's world position `agent_pos + retina_pos + offset_j`.
pub fn photo_response(
    env: &Environment,
    body: &AgentBody,
    agent_pos: Vec2,
    retina_pos: Vec2,
) -> PhotoVector {
    PhotoVector(photo_raw(env, body, agent_pos, retina_pos))
}

pub(crate) fn photo_raw(
    env: &Environment,
    body: &AgentBody,
    agent_pos: Vec2,
    retina_pos: Vec2,
) -> Vec<f64> {
    body.photoreceptors
        .iter()
        .map(|spec| {
            let rx = agent_pos.x + retina_pos.x + spec.offset.x;
            let ry = agent_pos.y + retina_pos.y + spec.offset.y;
            let inv = 1.0 / (spec.acuity * spec.acuity);
            let mut acc = 0.0;
            for src in &env.sources {
                let dx = src.position.x - rx;
                let dy = src.position.y - ry;
                acc += src.intensity * (-(dx * dx + dy * dy) * inv).exp();
            }
            acc
        })
        .collect()
}

/// Scan the environment by visiting every grid node in row-major order and
/// tabulating the <p, s> tuple at each node. Purely deterministic.
pub fn scan(env: &Environment, body: &AgentBody, agent_pos: Vec2, grid: ScanGrid) -> SmcTable {
    let np = body.n_proprio();
    let ns = body.n_photo();
    let n = grid.len();
    let mut p = Vec::with_capacity(n * np);
    let mut s = Vec::with_capacity(n * ns);
    for k in 0..n {
        let pos = grid.node_pos(k, &body.retina_range);
        p.extend_from_slice(&proprio_raw(body, pos));
        s.extend_from_slice(&photo_raw(env, body, agent_pos, pos));
    }
    SmcTable::from_rows(grid, np, ns, p, s)
}

/// A point light on the 1-D agent's line.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Light1d {
    pub position: f64,
    pub intensity: f64,
}

/// The one-dimensional agent of the introductory construction: one
/// photoreceptor sliding over [0, 1], one proprioceptive cell reporting the
/// muscle state through a fixed smooth nonlinearity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Agent1d {
    /// Photoreceptor acuity.
    pub acuity: f64,
}

impl Agent1d {
    pub fn new(acuity: f64) -> Agent1d {
        assert!(acuity > 0.0, "acuity must be positive");
        Agent1d { acuity }
    }

    /// Proprioception as a function of sensor position x in [0, 1]:
    /// p = (1 + tanh(2 (x - 1/2))) / 2. Strictly monotone, hence invertible,
    /// but nonlinear, so the agent's p axis distorts physical position.
    pub fn proprio(&self, x: f64) -> f64 {
        0.5 * (1.0 + (2.0 * (x - 0.5)).tanh())
    }

    /// Inverse of the proprio map, for oracle-side use.
    pub fn proprio_inverse(&self, p: f64) -> f64 {
        0.5 + 0.5 * (2.0 * p - 1.0).atanh()
    }

    /// Photoreceptor output at sensor position x.
    pub fn photo(&self, env: &[Light1d], x: f64) -> f64 {
        let inv = 1.0 / (self.acuity * self.acuity);
        env.iter()
            .map(|l| {
                let d = l.position - x;
                l.intensity * (-d * d * inv).exp()
            })
            .sum()
    }
}

/// Scan the 1-D environment over `n_nodes` evenly spaced sensor positions
/// in [0, 1]. One-component p and s per node; p strictly monotone.
pub fn scan_1d(agent: &Agent1d, env: &[Light1d], n_nodes: usize) -> Result<SmcTable> {
    if n_nodes < 2 {
        return Err(SmcError::InvalidConfig(format!(
            "1-D scan needs at least 2 nodes, got {n_nodes}"
        )));
    }
    let mut p = Vec::with_capacity(n_nodes);
    let mut s = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        let x = i as f64 / (n_nodes - 1) as f64;
        p.push(agent.proprio(x));
        s.push(agent.photo(env, x));
    }
    Ok(SmcTable::from_rows(ScanGrid::line(n_nodes), 1, 1, p, s))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::{AgentBody, ProprioceptorSpec};
    use crate::env::LightSource;
    use crate::geom::RigidDisplacement;

    fn body() -> AgentBody {
        AgentBody::standard(12345)
    }

    #[test]
    fn proprio_peak_is_one() {
        let mut b = body();
        b.proprioceptors[0] = ProprioceptorSpec {
            location: Vec2::new(0.5, 0.5),
            acuity: 0.3,
        };
        let p = proprio_response(&b, Vec2::new(0.5, 0.5)).unwrap();
        assert_eq!(p.0[0], 1.0);
    }

    #[test]
    fn proprio_at_one_acuity_distance() {
        let mut b = body();
        b.proprioceptors[0] = ProprioceptorSpec {
            location: Vec2::new(0.2, 0.5),
            acuity: 0.3,
        };
        let p = proprio_response(&b, Vec2::new(0.5, 0.5)).unwrap();
        assert!((p.0[0] - (-1.0f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn proprio_rejects_out_of_range() {
        let err = proprio_response(&body(), Vec2::new(1.5, 0.5));
        assert!(matches!(err, Err(SmcError::OutOfRange { .. })));
    }

    #[test]
    fn proprio_components_in_unit_interval() {
        let b = body();
        let p = proprio_response(&b, Vec2::new(0.0, 1.0)).unwrap();
        for v in &p.0 {
            assert!(*v > 0.0 && *v <= 1.0);
        }
    }

    #[test]
    fn photo_empty_environment_is_zero() {
        let s = photo_response(&Environment::empty(), &body(), Vec2::ZERO, Vec2::new(0.3, 0.3));
        assert!(s.0.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn photo_source_atop_receptor() {
        let b = body();
        let agent = Vec2::new(-0.5, -0.5);
        let retina = Vec2::new(0.5, 0.5);
        let world = agent + retina + b.photoreceptors[3].offset;
        let env = Environment::new(vec![LightSource::new(world.x, world.y, 2.0)]);
        let s = photo_response(&env, &b, agent, retina);
        assert_eq!(s.0[3], 2.0);
    }

    #[test]
    fn photo_is_linear_in_sources() {
        let b = body();
        let agent = Vec2::new(-0.5, -0.5);
        let retina = Vec2::new(0.4, 0.6);
        let e1 = Environment::new(vec![LightSource::new(0.1, 0.2, 0.8)]);
        let e2 = Environment::new(vec![LightSource::new(-0.2, 0.1, 1.3)]);
        let mut both = e1.sources.clone();
        both.extend(e2.sources.clone());
        let s12 = photo_response(&Environment::new(both), &b, agent, retina);
        let s1 = photo_response(&e1, &b, agent, retina);
        let s2 = photo_response(&e2, &b, agent, retina);
        for j in 0..b.n_photo() {
            assert!((s12.0[j] - (s1.0[j] + s2.0[j])).abs() <= 1e-12);
        }
    }

    #[test]
    fn scan_counts_nodes() {
        let b = body();
        let env = Environment::new(vec![LightSource::new(0.0, 0.0, 1.0)]);
        let t = scan(&env, &b, Vec2::new(-0.5, -0.5), ScanGrid::square(2).unwrap());
        assert_eq!(t.len(), 4);
        let t = scan(
            &Environment::empty(),
            &b,
            Vec2::ZERO,
            ScanGrid::square(201).unwrap(),
        );
        assert_eq!(t.len(), 40401);
    }

    #[test]
    fn scan_is_deterministic() {
        let b = body();
        let env = Environment::new(vec![
            LightSource::new(0.1, 0.3, 1.0),
            LightSource::new(-0.4, 0.2, 0.7),
        ]);
        let a = scan(&env, &b, Vec2::new(-0.5, -0.5), ScanGrid::square(11).unwrap());
        let c = scan(&env, &b, Vec2::new(-0.5, -0.5), ScanGrid::square(11).unwrap());
        assert_eq!(a, c);
    }

    // Supp compensation property: displacing the environment and the agent
    // by the same vector leaves every photoreceptor output unchanged up to
    // floating round-off.
    #[test]
    fn photo_depends_only_on_relative_position() {
        let b = body();
        let env = Environment::new(vec![
            LightSource::new(0.2, -0.1, 1.2),
            LightSource::new(-0.3, 0.4, 0.6),
        ]);
        let agent = Vec2::new(-0.5, -0.5);
        let d = RigidDisplacement::new(0.37, -0.21);
        let moved = crate::env::displace_environment(&env, d);
        for &(rx, ry) in &[(0.0, 0.0), (0.5, 0.5), (1.0, 0.25)] {
            let retina = Vec2::new(rx, ry);
            let s0 = photo_response(&env, &b, agent, retina);
            let s1 = photo_response(&moved, &b, agent + d.delta, retina);
            for j in 0..b.n_photo() {
                assert!((s0.0[j] - s1.0[j]).abs() <= 1e-12);
            }
        }
    }

    #[test]
    fn scan_1d_monotone_and_counted() {
        let agent = Agent1d::new(0.08);
        let env = [Light1d {
            position: 0.4,
            intensity: 1.0,
        }];
        let t = scan_1d(&agent, &env, 101).unwrap();
        assert_eq!(t.len(), 101);
        for k in 1..t.len() {
            assert!(t.p_row(k)[0] > t.p_row(k - 1)[0]);
        }
    }

    #[test]
    fn scan_1d_zero_env() {
        let agent = Agent1d::new(0.08);
        let t = scan_1d(&agent, &[], 11).unwrap();
        assert!((0..11).all(|k| t.s_row(k)[0] == 0.0));
    }

    #[test]
    fn scan_1d_needs_two_nodes() {
        assert!(scan_1d(&Agent1d::new(0.1), &[], 1).is_err());
    }
}
