//! Ground-truth instrumentation. Everything here reads or reconstructs true
//! retina positions, which the learning code must never see: tests and
//! plotting use these views, the matching and decision paths do not.

use crate::body::AgentBody;
use crate::env::Environment;
use crate::geom::{RigidDisplacement, Vec2};
use crate::phi::{PhiFunction, PhiPair};
use crate::sensors::{proprio_raw, Agent1d, Light1d};
use crate::table::{ProprioVector, ScanGrid, SmcTable};

/// True retina position of every node of a scan, row-major.
pub fn grid_positions(grid: ScanGrid, body: &AgentBody) -> Vec<Vec2> {
    (0..grid.len())
        .map(|k| grid.node_pos(k, &body.retina_range))
        .collect()
}

/// Scan plus the true retina positions that produced each sample.
pub fn scan_with_trace(
    env: &Environment,
    body: &AgentBody,
    agent_pos: Vec2,
    grid: ScanGrid,
) -> (SmcTable, Vec<Vec2>) {
    let table = crate::sensors::scan(env, body, agent_pos, grid);
    (table, grid_positions(grid, body))
}

/// The ideal phi for a relative displacement `d` of the agent: for every
/// grid node x with x - d also inside the retina range, the pair
/// <p(x), p(x - d)>. This is what an agent jumping by `d` (equivalently, an
/// environment displaced by -d) should learn. Built from true geometry;
/// never callable from learning code paths.
pub fn oracle_phi(body: &AgentBody, d: RigidDisplacement, grid: ScanGrid) -> PhiFunction {
    let mut pairs = Vec::new();
    for k in 0..grid.len() {
        let x = grid.node_pos(k, &body.retina_range);
        let shifted = x - d.delta;
        if body.retina_range.contains(shifted) {
            pairs.push(PhiPair {
                from: ProprioVector(proprio_raw(body, x)),
                to: ProprioVector(proprio_raw(body, shifted)),
            });
        }
    }
    PhiFunction { pairs }
}

/// Locate the scan node whose proprioception row matches `p` within `tol`
/// componentwise. Linear scan; plotting and diagnostics only.
pub fn locate_node(table: &SmcTable, p: &[f64], tol: f64) -> Option<usize> {
    (0..table.len()).find(|&k| {
        table
            .p_row(k)
            .iter()
            .zip(p)
            .all(|(a, b)| (a - b).abs() < tol)
    })
}

/// Analytic derivative of the 1-D photoreceptor output with respect to
/// sensor position, used to derive match-jitter bounds.
pub fn photo_derivative_1d(agent: &Agent1d, env: &[Light1d], x: f64) -> f64 {
    let inv = 1.0 / (agent.acuity * agent.acuity);
    env.iter()
        .map(|l| {
            let d = l.position - x;
            l.intensity * 2.0 * d * inv * (-d * d * inv).exp()
        })
        .sum()
}

/// Analytic slope of the 1-D proprioception map at sensor position x.
pub fn proprio_derivative_1d(_agent: &Agent1d, x: f64) -> f64 {
    let t = (2.0 * (x - 0.5)).tanh();
    1.0 - t * t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::body::AgentBody;

    #[test]
    fn oracle_identity_covers_all_nodes() {
        let body = AgentBody::standard(1);
        let grid = ScanGrid::square(11).unwrap();
        let phi = oracle_phi(&body, RigidDisplacement::identity(), grid);
        assert_eq!(phi.len(), grid.len());
        for pair in &phi.pairs {
            assert_eq!(pair.from, pair.to);
        }
    }

    #[test]
    fn oracle_too_far_is_empty() {
        let body = AgentBody::standard(1);
        let grid = ScanGrid::square(11).unwrap();
        let phi = oracle_phi(&body, RigidDisplacement::new(1.5, 0.0), grid);
        assert!(phi.is_empty());
    }

    #[test]
    fn oracle_half_shift_covers_half_the_nodes() {
        let body = AgentBody::standard(1);
        let grid = ScanGrid::square(11).unwrap();
        let phi = oracle_phi(&body, RigidDisplacement::new(0.5, 0.0), grid);
        // x - 0.5 in range means x >= 0.5: 6 of 11 columns
        assert_eq!(phi.len(), 6 * 11);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let agent = Agent1d::new(0.08);
        let env = [
            Light1d {
                position: 0.3,
                intensity: 1.2,
            },
            Light1d {
                position: 0.7,
                intensity: 0.8,
            },
        ];
        let h = 1e-6;
        for &x in &[0.1, 0.35, 0.62, 0.9] {
            let num = (agent.photo(&env, x + h) - agent.photo(&env, x - h)) / (2.0 * h);
            let ana = photo_derivative_1d(&agent, &env, x);
            assert!((num - ana).abs() < 1e-5, "x={x}: {num} vs {ana}");
            let nump = (agent.proprio(x + h) - agent.proprio(x - h)) / (2.0 * h);
            let anap = proprio_derivative_1d(&agent, x);
            assert!((nump - anap).abs() < 1e-5);
        }
    }
}
