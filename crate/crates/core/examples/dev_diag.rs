// Diagnostic: dissect nonzero-distance trials in the circle-scene
// calibration to see which matched pairs disagree and why.

use smcsim::experiments::scenes::{random_intensities, snap_vec, ObjectShape, AGENT_HOME};
use smcsim::phi::{learn_phi, phi_distance};
use smcsim::rng::trial_rng;
use smcsim::sensors::scan;
use smcsim::{displace_environment, MatchConfig, RigidDisplacement, ScanGrid, Vec2};
use rand::Rng;

fn main() {
    let seed = 20260810u64;
    let grid = ScanGrid::square(51).unwrap();
    let body = smcsim::AgentBody::standard(seed);
    let h = grid.step_x(&body.retina_range);
    let cfg = MatchConfig::unique_best();
    println!("cfg: {cfg:?}");

    for t in 0..50u64 {
        let mut rng = trial_rng(seed, t);
        // mirror of the calibration procedure
        let c0 = Vec2::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let ri = random_intensities(&mut rng, 40);
        let ref_env = ObjectShape::Circle.environment(c0, &ri);
        let c1 = Vec2::new(rng.gen_range(-0.5..0.5), rng.gen_range(-0.5..0.5));
        let d = RigidDisplacement {
            delta: snap_vec(c1 - c0, h),
        };
        let _ex: f64 = rng.gen_range(-0.005..0.005);
        let _ey: f64 = rng.gen_range(-0.005..0.005);
        // test scene
        let c0t = Vec2::new(rng.gen_range(-0.505..0.505), rng.gen_range(-0.505..0.505));
        let ti = random_intensities(&mut rng, 40);
        let test_env = ObjectShape::Circle.environment(c0t, &ti);

        let b1 = scan(&ref_env, &body, AGENT_HOME, grid);
        let a1 = scan(&displace_environment(&ref_env, d), &body, AGENT_HOME, grid);
        let phi_ref = learn_phi(&b1, &a1, &cfg).unwrap();
        let b2 = scan(&test_env, &body, AGENT_HOME, grid);
        let a2 = scan(&displace_environment(&test_env, d), &body, AGENT_HOME, grid);
        let phi_test = learn_phi(&b2, &a2, &cfg).unwrap();
        let rho = phi_distance(&phi_ref, &phi_test, cfg.dedup_tol);
        if let Some(r) = rho {
            if r > 0.0 {
                println!(
                    "trial {t}: rho = {r:.4}, |ref|={}, |test|={}, d=({:.2},{:.2})",
                    phi_ref.len(),
                    phi_test.len(),
                    d.delta.x,
                    d.delta.y
                );
                // locate disagreeing pairs via the oracle
                let mut shown = 0;
                for pr in &phi_ref.pairs {
                    for pt in &phi_test.pairs {
                        if smcsim::table::within_tol(
                            pr.from.as_slice(),
                            pt.from.as_slice(),
                            cfg.dedup_tol,
                        ) {
                            let gap = smcsim::table::euclid_dist(
                                pr.to.as_slice(),
                                pt.to.as_slice(),
                            );
                            if gap > 0.0 && shown < 4 {
                                shown += 1;
                                let kd =
                                    smcsim::oracle::locate_node(&b1, pr.from.as_slice(), 1e-9);
                                let kr =
                                    smcsim::oracle::locate_node(&b1, pr.to.as_slice(), 1e-9);
                                let kt =
                                    smcsim::oracle::locate_node(&b1, pt.to.as_slice(), 1e-9);
                                println!(
                                    "  domain node {kd:?} -> ref image {kr:?} vs test image {kt:?} (gap {gap:.3})"
                                );
                                if let (Some(kd), Some(kr), Some(kt)) = (kd, kr, kt) {
                                    let pos = |k: usize| grid.node_pos(k, &body.retina_range);
                                    let smax = |row: &[f64]| {
                                        row.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
                                    };
                                    println!(
                                        "    dom pos {:?} s_max(before ref) {:.4} s_max(before test) {:.4}",
                                        pos(kd),
                                        smax(b1.s_row(kd)),
                                        smax(b2.s_row(kd)),
                                    );
                                    println!(
                                        "    ref img pos {:?} s_max(after1) {:.4}; test img pos {:?} s_max(after2) {:.4}; expected img pos {:?}",
                                        pos(kr),
                                        smax(a1.s_row(kr)),
                                        pos(kt),
                                        smax(a2.s_row(kt)),
                                        Vec2::new(pos(kd).x + d.delta.x, pos(kd).y + d.delta.y),
                                    );
                                }
                            }
                        }
                    }
                }
            }
        }
    }
}
