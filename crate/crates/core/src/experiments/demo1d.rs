//! The introductory one-dimensional construction: scan, shift, rescan,
//! catalogue coincidences, and observe that two entirely different
//! environments shifted by the same amount yield the same phi.

use crate::error::Result;
use crate::experiments::report::{Curve, Report};
use crate::oracle::photo_derivative_1d;
use crate::phi::{learn_phi, MatchConfig, PhiFunction};
use crate::rng::trial_rng;
use crate::sensors::{scan_1d, Agent1d, Light1d};
use crate::table::SmcTable;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Demo1dParams {
    pub n_nodes: usize,
    /// Shift applied to the environment, in scan-lattice steps.
    pub shift_steps: usize,
    pub n_sources: usize,
    pub cfg: MatchConfig,
}

impl Default for Demo1dParams {
    fn default() -> Self {
        Demo1dParams {
            n_nodes: 201,
            shift_steps: 25,
            n_sources: 12,
            cfg: MatchConfig {
                photo_tol: 0.005,
                dedup_tol: 0.003,
                ..MatchConfig::unique_best()
            },
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Demo1dReport {
    pub experiment: &'static str,
    pub seed: u64,
    pub params: Demo1dParams,
    pub shift: f64,
    /// Sensorimotor contingencies for the first environment, before and
    /// after the shift: (p, s) per scan node.
    pub contingency_before: Vec<[f64; 2]>,
    pub contingency_after: Vec<[f64; 2]>,
    /// Learned phi curves for both environments: (p, p') pairs.
    pub phi_env1: Vec<[f64; 2]>,
    pub phi_env2: Vec<[f64; 2]>,
    /// Largest gap between the two phi curves over their shared domain.
    pub sup_gap: f64,
    /// Bound on the gap derived from the matching tolerance, the scan step
    /// and the sensor slopes observed in the two environments.
    pub jitter_bound: f64,
    pub zero_shift_is_identity: bool,
    pub out_of_reach_is_empty: bool,
    pub curves: Vec<Curve>,
}

impl Report for Demo1dReport {
    fn experiment(&self) -> &'static str {
        self.experiment
    }

    fn seed(&self) -> u64 {
        self.seed
    }

    fn curves(&self) -> &[Curve] {
        &self.curves
    }

    fn summary_lines(&self) -> Vec<String> {
        vec![
            format!(
                "phi agreement across environments: sup gap {:.3e} <= bound {:.3e}",
                self.sup_gap, self.jitter_bound
            ),
            format!(
                "zero shift identity: {}; unreachable shift empty: {}",
                self.zero_shift_is_identity, self.out_of_reach_is_empty
            ),
        ]
    }
}

fn random_env(rng: &mut ChaCha8Rng, n: usize) -> Vec<Light1d> {
    (0..n)
        .map(|_| Light1d {
            position: rng.gen_range(-0.5..1.5),
            intensity: rng.gen_range(0.5..1.5),
        })
        .collect()
}

fn shifted(env: &[Light1d], delta: f64) -> Vec<Light1d> {
    env.iter()
        .map(|l| Light1d {
            position: l.position + delta,
            intensity: l.intensity,
        })
        .collect()
}

fn phi_curve(phi: &PhiFunction) -> Vec<[f64; 2]> {
    phi.pairs
        .iter()
        .map(|p| [p.from.0[0], p.to.0[0]])
        .collect()
}

fn contingency(table: &SmcTable) -> Vec<[f64; 2]> {
    (0..table.len())
        .map(|k| [table.p_row(k)[0], table.s_row(k)[0]])
        .collect()
}

/// Largest image gap between two phi curves over domain points they share
/// within the dedup tolerance. None when the domains are disjoint.
fn sup_gap(a: &PhiFunction, b: &PhiFunction, tol: f64) -> Option<f64> {
    let mut sup: Option<f64> = None;
    for pa in &a.pairs {
        for pb in &b.pairs {
            if (pa.from.0[0] - pb.from.0[0]).abs() < tol {
                let gap = (pa.to.0[0] - pb.to.0[0]).abs();
                sup = Some(sup.map_or(gap, |s: f64| s.max(gap)));
            }
        }
    }
    sup
}

/// Bound on how far apart the two learned curves can sit: a matched image
/// may miss the true compensating position by the photo tolerance divided
/// by the local photoreceptor slope, plus up to one scan step of lattice
/// rounding; proprioception amplifies position error by at most its maximal
/// slope; two independently learned curves can each err that much. The
/// matched domains' minimum sensor slope enters through the oracle-side
/// analytic derivative.
fn jitter_bound(
    agent: &Agent1d,
    envs: [&[Light1d]; 2],
    phis: [&PhiFunction; 2],
    shift: f64,
    photo_tol: f64,
    step: f64,
) -> f64 {
    let max_p_slope = 1.0; // d/dx of (1 + tanh(2(x - 1/2))) / 2 peaks at 1
    let mut min_s_slope = f64::INFINITY;
    for (env, phi) in envs.iter().zip(phis) {
        let after = shifted(env, shift);
        for pair in &phi.pairs {
            // invert the (monotone) proprio map to recover positions
            let x = agent.proprio_inverse(pair.from.0[0]);
            let xp = agent.proprio_inverse(pair.to.0[0]);
            min_s_slope = min_s_slope.min(photo_derivative_1d(agent, env, x).abs());
            min_s_slope = min_s_slope.min(photo_derivative_1d(agent, &after, xp).abs());
        }
    }
    2.0 * max_p_slope * (photo_tol / min_s_slope + step)
}

pub fn run_1d_demo(agent: &Agent1d, seed: u64, params: &Demo1dParams) -> Result<Demo1dReport> {
    params.cfg.validate()?;
    let n = params.n_nodes;
    let step = 1.0 / (n - 1) as f64;
    let shift = params.shift_steps as f64 * step;

    let mut rng1 = trial_rng(seed, 0);
    let mut rng2 = trial_rng(seed, 1);
    let env1 = random_env(&mut rng1, params.n_sources);
    let env2 = random_env(&mut rng2, params.n_sources);

    let before1 = scan_1d(agent, &env1, n)?;
    let after1 = scan_1d(agent, &shifted(&env1, shift), n)?;
    let phi1 = learn_phi(&before1, &after1, &params.cfg)?;

    let before2 = scan_1d(agent, &env2, n)?;
    let after2 = scan_1d(agent, &shifted(&env2, shift), n)?;
    let phi2 = learn_phi(&before2, &after2, &params.cfg)?;

    let gap = sup_gap(&phi1, &phi2, params.cfg.dedup_tol).unwrap_or(f64::NAN);
    let bound = jitter_bound(
        agent,
        [&env1, &env2],
        [&phi1, &phi2],
        shift,
        params.cfg.photo_tol,
        step,
    );

    // zero shift reproduces the identity
    let phi_id = learn_phi(&before1, &before1, &params.cfg)?;
    let zero_shift_is_identity =
        !phi_id.is_empty() && phi_id.pairs.iter().all(|p| p.from == p.to);

    // a shift beyond the sensor's travel leaves nothing to match
    let phi_far = learn_phi(
        &before1,
        &scan_1d(agent, &shifted(&env1, 3.0), n)?,
        &params.cfg,
    )?;
    let out_of_reach_is_empty = phi_far.is_empty();

    let curves = vec![Curve {
        name: "phi_pairs".into(),
        bins: vec!["env1".into(), "env2".into()],
        values: vec![phi1.len() as f64, phi2.len() as f64],
        counts: vec![phi1.len(), phi2.len()],
    }];

    Ok(Demo1dReport {
        experiment: "demo1d",
        seed,
        params: *params,
        shift,
        contingency_before: contingency(&before1),
        contingency_after: contingency(&after1),
        phi_env1: phi_curve(&phi1),
        phi_env2: phi_curve(&phi2),
        sup_gap: gap,
        jitter_bound: bound,
        zero_shift_is_identity,
        out_of_reach_is_empty,
        curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_environments_agree_within_the_bound() {
        let agent = Agent1d::new(0.08);
        let report = run_1d_demo(&agent, 7, &Demo1dParams::default()).unwrap();
        assert!(!report.phi_env1.is_empty() && !report.phi_env2.is_empty());
        assert!(report.sup_gap.is_finite(), "curves must share domain");
        assert!(
            report.sup_gap <= report.jitter_bound,
            "gap {} exceeds bound {}",
            report.sup_gap,
            report.jitter_bound
        );
        assert!(report.zero_shift_is_identity);
        assert!(report.out_of_reach_is_empty);
    }

    #[test]
    fn shifted_table_matches_original_on_shared_positions() {
        // oracle view: node k of the shifted-environment scan must agree
        // with node k - m of the original scan
        let agent = Agent1d::new(0.08);
        let mut rng = trial_rng(3, 0);
        let env = random_env(&mut rng, 10);
        let n = 101;
        let step = 1.0 / (n - 1) as f64;
        let m = 13;
        let orig = scan_1d(&agent, &env, n).unwrap();
        let shift = scan_1d(&agent, &shifted(&env, m as f64 * step), n).unwrap();
        for k in m..n {
            let a = shift.s_row(k)[0];
            let b = orig.s_row(k - m)[0];
            assert!((a - b).abs() <= 1e-9, "node {k}: {a} vs {b}");
        }
    }
}
