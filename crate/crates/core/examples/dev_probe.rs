// Temporary development probe: desk-scale dry run of every experiment with
// timing and the statistics the acceptance suite will assert.

use smcsim::experiments::*;
use smcsim::{AgentBody, MatchConfig};
use std::time::Instant;

fn main() {
    let seed = 20260810;
    let profile = Profile::desk();
    let body = AgentBody::standard(seed);

    // ---- atlas + group law ----
    let t0 = Instant::now();
    let atlas = run_phi_atlas(
        &body,
        seed,
        smcsim::ScanGrid::square(profile.scan_grid).unwrap(),
        profile.atlas_step,
        profile.atlas_extent,
        profile.atlas_sources,
        &profile.match_config(),
    )
    .unwrap();
    println!(
        "atlas: {} phis in {:.1?}; pair counts min {} max {}",
        atlas.len(),
        t0.elapsed(),
        atlas.phis.iter().map(|p| p.len()).min().unwrap(),
        atlas.phis.iter().map(|p| p.len()).max().unwrap()
    );

    let t0 = Instant::now();
    let thr = circle_calibration(
        &body,
        seed,
        smcsim::ScanGrid::square(profile.scan_grid).unwrap(),
        profile.match_config(),
        profile.rigid_calib_trials,
    )
    .unwrap();
    println!(
        "circle calibration: threshold {} (undefined {}) in {:.1?}",
        thr.value, thr.calibration.n_undefined, t0.elapsed()
    );

    // group law over the atlas lattice, against directly learned sums
    let t0 = Instant::now();
    let cfg: MatchConfig = profile.match_config();
    let mut env_rng = smcsim::rng::stream_rng(seed, 1);
    let atlas_env =
        smcsim::experiments::scenes::rich_environment(&mut env_rng, profile.atlas_sources, 3.0);
    let stats = smcsim::experiments::atlas::check_group_law(
        &atlas,
        &body,
        &atlas_env,
        smcsim::ScanGrid::square(profile.scan_grid).unwrap(),
        &cfg,
        thr.value,
    );
    println!(
        "group law: {} nonempty compositions, {} within threshold, {} undefined, max rho {:.3e}, in {:.1?}",
        stats.nonempty, stats.held, stats.undefined, stats.max_rho, t0.elapsed()
    );

    // ---- rigid ----
    let t0 = Instant::now();
    let rigid = run_rigid_displacement(&body, seed, &profile.rigid_params()).unwrap();
    println!("rigid: {:.1?}", t0.elapsed());
    for line in rigid.summary_lines() {
        println!("  {line}");
    }
    let undef = rigid.trials.iter().filter(|t| t.rho.is_none()).count();
    println!("  undefined rho in {undef} of {} trials", rigid.trials.len());

    // ---- medium ----
    let t0 = Instant::now();
    let medium = run_unchanging_medium(&body, seed, &profile.medium_params()).unwrap();
    println!("medium: {:.1?}", t0.elapsed());
    for line in medium.summary_lines() {
        println!("  {line}");
    }

    // ---- relpos ----
    let t0 = Instant::now();
    let relpos = run_relative_position(&body, seed, &profile.relpos_params()).unwrap();
    println!("relpos: {:.1?}", t0.elapsed());
    for line in relpos.summary_lines() {
        println!("  {line}");
    }
    for sc in [2usize, 3, 4] {
        let empties = relpos
            .trials
            .iter()
            .filter(|t| t.n_segments == sc && t.truth_same && t.empty_composition)
            .count();
        let zeros = relpos
            .trials
            .iter()
            .filter(|t| t.n_segments == sc && t.truth_same)
            .count();
        println!("  {sc}-segment: {zeros} zero-offset trials, {empties} empty compositions");
    }

    // ---- demo1d ----
    let t0 = Instant::now();
    let agent = smcsim::Agent1d::new(0.08);
    let demo = run_1d_demo(&agent, seed, &profile.demo1d_params()).unwrap();
    println!("demo1d: {:.1?}", t0.elapsed());
    for line in demo.summary_lines() {
        println!("  {line}");
    }

    // ---- audio ----
    let t0 = Instant::now();
    let audio = run_audio(
        &smcsim::audio::HairCell::standard(),
        seed,
        &profile.audio_params(),
    )
    .unwrap();
    println!("audio: {:.1?}", t0.elapsed());
    for line in audio.summary_lines() {
        println!("  {line}");
    }
}
