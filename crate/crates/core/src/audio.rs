//! The audio agent: a tunable hair-cell in a world of sustained notes and
//! chords. Transpositions of the sound environment play the role that rigid
//! displacements play for the 2-D agent, with pitch as the hidden variable.

use crate::error::{Result, SmcError};
use crate::phi::{learn_phi, MatchConfig, PhiFunction};
use crate::table::{ScanGrid, SmcTable};
use serde::{Deserialize, Serialize};

/// One sustained sine component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Note {
    pub freq: f64,
    pub amp: f64,
}

/// A chord: one or more simultaneously sounding notes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Chord {
    pub notes: Vec<Note>,
}

impl Chord {
    pub fn new(notes: Vec<Note>) -> Self {
        Chord { notes }
    }

    pub fn single(freq: f64, amp: f64) -> Self {
        Chord {
            notes: vec![Note { freq, amp }],
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (i, n) in self.notes.iter().enumerate() {
            if !(n.freq > 0.0) || !n.freq.is_finite() {
                return Err(SmcError::InvalidConfig(format!(
                    "note {i} frequency must be positive"
                )));
            }
            if n.amp < 0.0 || !n.amp.is_finite() {
                return Err(SmcError::InvalidConfig(format!(
                    "note {i} amplitude must be >= 0"
                )));
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.notes)?)
    }

    pub fn from_json(text: &str) -> Result<Chord> {
        let notes: Vec<Note> = serde_json::from_str(text)?;
        let chord = Chord { notes };
        chord.validate()?;
        Ok(chord)
    }
}

/// Transpose by factor k: every frequency is multiplied by k.
pub fn transpose(chord: &Chord, k: f64) -> Chord {
    Chord {
        notes: chord
            .notes
            .iter()
            .map(|n| Note {
                freq: n.freq * k,
                amp: n.amp,
            })
            .collect(),
    }
}

/// The hair-cell agent. Its eigenfrequency is tunable over
/// [f_min, f_max]; proprioception reports the tuning through a fixed
/// monotone nonlinearity of log-frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HairCell {
    pub f_min: f64,
    pub f_max: f64,
    /// Resonance width in log-frequency units. The response to a note is a
    /// log-Gaussian, so transposing by k shifts the response curve rigidly
    /// in log-frequency and the scaling property sigma'(f) = sigma(k f)
    /// holds exactly.
    pub width: f64,
}

impl HairCell {
    pub fn new(f_min: f64, f_max: f64, width: f64) -> Result<HairCell> {
        if !(f_min > 0.0 && f_max > f_min) {
            return Err(SmcError::InvalidConfig(
                "hair cell needs 0 < f_min < f_max".into(),
            ));
        }
        if !(width > 0.0) {
            return Err(SmcError::InvalidConfig(
                "hair cell resonance width must be > 0".into(),
            ));
        }
        Ok(HairCell {
            f_min,
            f_max,
            width,
        })
    }

    /// Six octaves around A, resonant enough to separate notes.
    pub fn standard() -> HairCell {
        HairCell {
            f_min: 55.0,
            f_max: 3520.0,
            width: 0.25,
        }
    }

    pub fn contains(&self, f: f64) -> bool {
        f >= self.f_min * (1.0 - 1e-12) && f <= self.f_max * (1.0 + 1e-12)
    }

    /// Normalized log-frequency coordinate in [0, 1].
    fn log_coord(&self, f: f64) -> f64 {
        (f / self.f_min).ln() / (self.f_max / self.f_min).ln()
    }

    /// Proprioception for eigenfrequency f: a monotone nonlinearity of the
    /// normalized log-frequency. Invertible but unknown to the agent.
    pub fn proprio(&self, f: f64) -> f64 {
        let q = self.log_coord(f);
        0.5 * (1.0 + (2.0 * (q - 0.5)).tanh())
    }

    /// Oracle-side inverse of the proprio map.
    pub fn proprio_inverse(&self, p: f64) -> f64 {
        let q = 0.5 + 0.5 * (2.0 * p - 1.0).atanh();
        self.f_min * (self.f_max / self.f_min).powf(q)
    }

    /// Eigenfrequency of grid node i of an n-node log-uniform scan.
    pub fn grid_freq(&self, i: usize, n: usize) -> f64 {
        let t = i as f64 / (n - 1) as f64;
        self.f_min * (self.f_max / self.f_min).powf(t)
    }

    /// Transposition factor lying exactly on the n-node scan lattice,
    /// `steps` nodes wide.
    pub fn lattice_factor(&self, steps: i64, n: usize) -> f64 {
        let dt = 1.0 / (n - 1) as f64;
        (self.f_max / self.f_min).powf(steps as f64 * dt)
    }
}

/// Oscillation amplitude of the hair-cell at eigenfrequency `f_eigen`:
/// the sum over notes of A_i * exp(-(ln(f_i / f_eigen))^2 / w^2).
pub fn haircell_response(chord: &Chord, cell: &HairCell, f_eigen: f64) -> Result<f64> {
    if !cell.contains(f_eigen) {
        return Err(SmcError::OutOfRange {
            x: f_eigen,
            y: 0.0,
        });
    }
    Ok(response_raw(chord, cell, f_eigen))
}

fn response_raw(chord: &Chord, cell: &HairCell, f_eigen: f64) -> f64 {
    let inv = 1.0 / (cell.width * cell.width);
    chord
        .notes
        .iter()
        .map(|n| {
            let d = (n.freq / f_eigen).ln();
            n.amp * (-d * d * inv).exp()
        })
        .sum()
}

/// Tabulate <p, s> over an n-node log-uniform sweep of the eigenfrequency.
pub fn scan_audio(chord: &Chord, cell: &HairCell, n_nodes: usize) -> Result<SmcTable> {
    if n_nodes < 2 {
        return Err(SmcError::InvalidConfig(format!(
            "audio scan needs at least 2 nodes, got {n_nodes}"
        )));
    }
    let mut p = Vec::with_capacity(n_nodes);
    let mut s = Vec::with_capacity(n_nodes);
    for i in 0..n_nodes {
        let f = cell.grid_freq(i, n_nodes);
        p.push(cell.proprio(f));
        s.push(response_raw(chord, cell, f));
    }
    Ok(SmcTable::from_rows(ScanGrid::line(n_nodes), 1, 1, p, s))
}

/// Matching configuration for the audio agent. One-component proprioception
/// is spaced much more finely than the 2-D default, so the duplicate
/// tolerance is tightened below the smallest scan-node spacing to keep
/// distinct nodes distinct.
pub fn audio_match_config() -> MatchConfig {
    MatchConfig {
        photo_tol: 0.005,
        dedup_tol: 0.001,
        ..MatchConfig::unique_best()
    }
}

/// Scan before and after a change of the sound environment and match
/// coincidences exactly as the 2-D learner does, on one-component vectors.
pub fn audio_learn_phi(
    before: &Chord,
    after: &Chord,
    cell: &HairCell,
    n_nodes: usize,
    cfg: &MatchConfig,
) -> Result<PhiFunction> {
    let tb = scan_audio(before, cell, n_nodes)?;
    let ta = scan_audio(after, cell, n_nodes)?;
    learn_phi(&tb, &ta, cfg)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::phi::phi_distance;

    #[test]
    fn peak_response_equals_amplitude() {
        let cell = HairCell::standard();
        let chord = Chord::single(440.0, 1.3);
        let s = haircell_response(&chord, &cell, 440.0).unwrap();
        assert_eq!(s, 1.3);
    }

    #[test]
    fn empty_chord_is_silent() {
        let cell = HairCell::standard();
        let s = haircell_response(&Chord::new(vec![]), &cell, 440.0).unwrap();
        assert_eq!(s, 0.0);
    }

    #[test]
    fn out_of_range_eigenfrequency_errors() {
        let cell = HairCell::standard();
        assert!(haircell_response(&Chord::single(440.0, 1.0), &cell, 10.0).is_err());
    }

    #[test]
    fn transposition_scaling_is_exact() {
        let cell = HairCell::standard();
        let chord = Chord::new(vec![
            Note {
                freq: 220.0,
                amp: 1.0,
            },
            Note {
                freq: 330.0,
                amp: 0.7,
            },
        ]);
        let k = 1.5;
        let up = transpose(&chord, k);
        for &f in &[110.0, 440.0, 900.0] {
            let a = response_raw(&chord, &cell, f);
            let b = response_raw(&up, &cell, f * k);
            assert!(
                (a - b).abs() <= 1e-12 * a.max(1.0),
                "scaling law violated at {f}"
            );
        }
    }

    // Note frequencies in these tests sit off the scan lattice: the response
    // curve of a lone note is symmetric about its peak, and a note placed
    // exactly on a node puts the mirror-image coincidence on the lattice
    // too, where it is indistinguishable from the true one and correctly
    // discarded as ambiguous.
    #[test]
    fn no_transposition_learns_identity() {
        let cell = HairCell::standard();
        let chord = Chord::single(439.37, 1.0);
        let cfg = MatchConfig::unique_best();
        let phi = audio_learn_phi(&chord, &chord, &cell, 101, &cfg).unwrap();
        assert!(!phi.is_empty());
        for pair in &phi.pairs {
            assert_eq!(pair.from, pair.to);
        }
    }

    #[test]
    fn transposition_out_of_range_learns_nothing() {
        // A cell resonant enough that its response never falls below the
        // match tolerance inside the range, eliminating silent-on-silent
        // coincidences; the transposition then leaves nothing to match.
        let cell = HairCell::new(110.0, 880.0, 1.0).unwrap();
        let chord = Chord::single(311.0, 1.0);
        let far = transpose(&chord, 64.0);
        let cfg = MatchConfig::unique_best();
        let phi = audio_learn_phi(&chord, &far, &cell, 101, &cfg).unwrap();
        assert!(phi.is_empty());
    }

    #[test]
    fn note_and_chord_share_the_transposition_phi() {
        let cell = HairCell::standard();
        let n = 201;
        let k = cell.lattice_factor(12, n);
        let note = Chord::single(439.37, 1.0);
        let chord = Chord::new(vec![
            Note {
                freq: 439.37,
                amp: 1.0,
            },
            Note {
                freq: 557.13,
                amp: 0.8,
            },
        ]);
        let cfg = audio_match_config();
        let phi_note = audio_learn_phi(&note, &transpose(&note, k), &cell, n, &cfg).unwrap();
        let phi_chord = audio_learn_phi(&chord, &transpose(&chord, k), &cell, n, &cfg).unwrap();
        assert!(!phi_note.is_empty() && !phi_chord.is_empty());
        let rho_same = phi_distance(&phi_note, &phi_chord, cfg.dedup_tol).unwrap();
        // A clearly different transposition of the same note for contrast.
        let k_far = cell.lattice_factor(42, n);
        let phi_far = audio_learn_phi(&note, &transpose(&note, k_far), &cell, n, &cfg).unwrap();
        let rho_far = phi_distance(&phi_note, &phi_far, cfg.dedup_tol).unwrap();
        assert!(
            rho_same < rho_far / 10.0,
            "same transposition must look far closer than a different one \
             (got {rho_same} vs {rho_far})"
        );
    }

    #[test]
    fn chord_json_round_trip() {
        let chord = Chord::new(vec![Note {
            freq: 440.0,
            amp: 1.0,
        }]);
        let text = chord.to_json().unwrap();
        assert_eq!(text, r#"[{"freq":440.0,"amp":1.0}]"#);
        assert_eq!(Chord::from_json(&text).unwrap(), chord);
    }
}
