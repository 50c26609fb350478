//! The audio agent's association experiment: transpositions of notes and
//! chords produce the same phi whenever the interval is the same, and
//! composed transpositions obey the partial group law.

use crate::audio::{audio_learn_phi, audio_match_config, transpose, Chord, HairCell, Note};
use crate::error::{Result, SmcError};
use crate::experiments::report::{BinnedMean, Curve, Report};
use crate::phi::{compose_phi, phi_distance, MatchConfig, PhiFunction};
use crate::rng::trial_rng;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AudioParams {
    pub n_nodes: usize,
    pub trials: usize,
    pub calib_trials: usize,
    pub group_cases: usize,
    /// Transpositions span this many scan-lattice steps either way.
    pub max_steps: i64,
    pub cfg: MatchConfig,
}

impl Default for AudioParams {
    fn default() -> Self {
        AudioParams {
            n_nodes: 201,
            trials: 100,
            calib_trials: 50,
            group_cases: 20,
            max_steps: 24,
            cfg: audio_match_config(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct AudioTrial {
    pub trial: u64,
    /// Transposition interval in lattice steps.
    pub steps: i64,
    pub rho: Option<f64>,
    pub associated: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct GroupCase {
    pub case: u64,
    pub steps_first: i64,
    pub steps_second: i64,
    pub rho: Option<f64>,
    pub holds: bool,
}

#[derive(Debug, Clone, Serialize)]
pub struct AudioReport {
    pub experiment: &'static str,
    pub seed: u64,
    pub params: AudioParams,
    pub threshold: f64,
    pub trials: Vec<AudioTrial>,
    pub group_cases: Vec<GroupCase>,
    pub association_rate: f64,
    pub group_law_rate: f64,
    pub curves: Vec<Curve>,
}

impl Report for AudioReport {
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
            format!("audio threshold rho = {:.6}", self.threshold),
            format!(
                "note/chord association rate = {:.3} over {} trials",
                self.association_rate,
                self.trials.len()
            ),
            format!(
                "transposition group law held in {:.3} of {} cases",
                self.group_law_rate,
                self.group_cases.len()
            ),
        ]
    }
}

/// A chord rooted at normalized log-frequency `register`, continuous in
/// log-frequency so note peaks avoid the scan lattice. Distances between
/// the phis of two sound environments are only defined where their
/// resonance regions overlap, so trial pairs share a register.
fn chord_at(rng: &mut ChaCha8Rng, cell: &HairCell, n_notes: usize, register: f64) -> Chord {
    let base = cell.f_min * (cell.f_max / cell.f_min).powf(register);
    let mut notes = vec![Note {
        freq: base,
        amp: rng.gen_range(0.7..1.3),
    }];
    for _ in 1..n_notes {
        notes.push(Note {
            freq: base * rng.gen_range(1.15..1.6),
            amp: rng.gen_range(0.7..1.3),
        });
    }
    Chord::new(notes)
}

fn random_register(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(0.35..0.65)
}

fn learn_transposition(
    chord: &Chord,
    cell: &HairCell,
    factor: f64,
    n: usize,
    cfg: &MatchConfig,
) -> PhiFunction {
    audio_learn_phi(chord, &transpose(chord, factor), cell, n, cfg)
        .expect("audio scans share the cell")
}

pub fn run_audio(cell: &HairCell, seed: u64, params: &AudioParams) -> Result<AudioReport> {
    params.cfg.validate()?;
    let n = params.n_nodes;

    // Calibration by the same 90% quantile rule as the 2-D agent: reference
    // and test transpositions differ by less than 0.005 in log-frequency.
    // The perturbation stays continuous, so the calibration distances carry
    // the off-lattice matching jitter and bound the on-lattice statistics
    // of the main trials from above.
    let rhos: Vec<Option<f64>> = (0..params.calib_trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, t);
            let steps = rng.gen_range(-params.max_steps..=params.max_steps);
            let k_ref = cell.lattice_factor(steps, n);
            let eta: f64 = rng.gen_range(-0.005..0.005);
            let k_test = k_ref * eta.exp();
            let register = random_register(&mut rng);
            let ref_chord = chord_at(&mut rng, cell, 1, register);
            let shift: f64 = rng.gen_range(-0.1..0.1);
            let test_chord = chord_at(&mut rng, cell, 1, register + shift);
            let phi_ref = learn_transposition(&ref_chord, cell, k_ref, n, &params.cfg);
            let phi_test = learn_transposition(&test_chord, cell, k_test, n, &params.cfg);
            phi_distance(&phi_ref, &phi_test, params.cfg.dedup_tol)
        })
        .collect();
    let undefined = rhos.iter().filter(|r| r.is_none()).count();
    if undefined * 2 > params.calib_trials {
        return Err(SmcError::CalibrationFailed {
            undefined,
            total: params.calib_trials,
        });
    }
    let mut values: Vec<f64> = rhos.into_iter().flatten().collect();
    values.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let idx = ((0.9 * values.len() as f64).ceil() as usize)
        .saturating_sub(1)
        .min(values.len() - 1);
    let threshold = values[idx];

    // Main trials: a single note and a two-note chord transposed by the
    // same lattice interval must map to the same phi.
    let base = params.calib_trials as u64;
    let trials: Vec<AudioTrial> = (0..params.trials as u64)
        .into_par_iter()
        .map(|t| {
            let mut rng = trial_rng(seed, base + t);
            let steps = rng.gen_range(-params.max_steps..=params.max_steps);
            let k = cell.lattice_factor(steps, n);
            let register = random_register(&mut rng);
            let note = chord_at(&mut rng, cell, 1, register);
            let shift: f64 = rng.gen_range(-0.1..0.1);
            let chord = chord_at(&mut rng, cell, 2, register + shift);
            let phi_note = learn_transposition(&note, cell, k, n, &params.cfg);
            let phi_chord = learn_transposition(&chord, cell, k, n, &params.cfg);
            let rho = phi_distance(&phi_note, &phi_chord, params.cfg.dedup_tol);
            AudioTrial {
                trial: t,
                steps,
                rho,
                associated: rho.map_or(false, |r| r <= threshold),
            }
        })
        .collect();

    // Partial group law on composed transpositions.
    let gbase = base + params.trials as u64;
    let group_cases: Vec<GroupCase> = (0..params.group_cases as u64)
        .into_par_iter()
        .map(|c| {
            let mut rng = trial_rng(seed, gbase + c);
            let half = params.max_steps / 2;
            let m1 = rng.gen_range(-half..=half);
            let m2 = rng.gen_range(-half..=half);
            // two notes break the reflection symmetry of a lone resonance
            let register = random_register(&mut rng);
            let chord = chord_at(&mut rng, cell, 2, register);
            let phi1 = learn_transposition(&chord, cell, cell.lattice_factor(m1, n), n, &params.cfg);
            let phi2 = learn_transposition(&chord, cell, cell.lattice_factor(m2, n), n, &params.cfg);
            let phi12 =
                learn_transposition(&chord, cell, cell.lattice_factor(m1 + m2, n), n, &params.cfg);
            let composed = compose_phi(&phi2, &phi1, params.cfg.dedup_tol);
            let rho = phi_distance(&phi12, &composed, params.cfg.dedup_tol);
            GroupCase {
                case: c,
                steps_first: m1,
                steps_second: m2,
                rho,
                holds: rho.map_or(false, |r| r <= threshold),
            }
        })
        .collect();

    let association_rate =
        trials.iter().filter(|t| t.associated).count() as f64 / trials.len().max(1) as f64;
    let group_law_rate = group_cases.iter().filter(|c| c.holds).count() as f64
        / group_cases.len().max(1) as f64;

    // association by interval magnitude
    let bins: Vec<String> = vec!["0-8".into(), "9-16".into(), "17-24".into()];
    let mut by_interval = BinnedMean::new("assoc_by_interval", bins);
    for t in &trials {
        let b = (t.steps.unsigned_abs() as usize / 9).min(2);
        by_interval.add(b, if t.associated { 1.0 } else { 0.0 });
    }

    Ok(AudioReport {
        experiment: "audio",
        seed,
        params: *params,
        threshold,
        trials,
        group_cases,
        association_rate,
        group_law_rate,
        curves: vec![by_interval.finish()],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smoke_run_is_deterministic() {
        let cell = HairCell::standard();
        let params = AudioParams {
            trials: 10,
            calib_trials: 20,
            group_cases: 5,
            ..AudioParams::default()
        };
        let a = run_audio(&cell, 31, &params).unwrap();
        let b = run_audio(&cell, 31, &params).unwrap();
        assert_eq!(a.to_json().unwrap(), b.to_json().unwrap());
        assert_eq!(a.trials.len(), 10);
        assert_eq!(a.group_cases.len(), 5);
        for t in &a.trials {
            assert_eq!(t.associated, t.rho.map_or(false, |r| r <= a.threshold));
        }
    }
}
