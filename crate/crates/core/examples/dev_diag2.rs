// Diagnostic: dissect audio note-vs-chord trials with nonzero distance.

use rand::Rng;
use smcsim::audio::{audio_learn_phi, audio_match_config, transpose, Chord, HairCell, Note};
use smcsim::phi::phi_distance;
use smcsim::rng::trial_rng;

fn main() {
    let seed = 20260810u64;
    let cell = HairCell::standard();
    let n = 201;
    let cfg = audio_match_config();
    let base = 50u64; // calib_trials
    for t in 0..100u64 {
        let mut rng = trial_rng(seed, base + t);
        let steps: i64 = rng.gen_range(-24..=24);
        let k = cell.lattice_factor(steps, n);
        // mirror run_audio's random_chord draws
        let t1: f64 = rng.gen_range(0.3..0.7);
        let f1 = cell.f_min * (cell.f_max / cell.f_min).powf(t1);
        let a1: f64 = rng.gen_range(0.7..1.3);
        let note = Chord::new(vec![Note { freq: f1, amp: a1 }]);
        let t2: f64 = rng.gen_range(0.3..0.7);
        let f2 = cell.f_min * (cell.f_max / cell.f_min).powf(t2);
        let a2: f64 = rng.gen_range(0.7..1.3);
        let r: f64 = rng.gen_range(1.15..1.6);
        let a3: f64 = rng.gen_range(0.7..1.3);
        let chord = Chord::new(vec![
            Note { freq: f2, amp: a2 },
            Note {
                freq: f2 * r,
                amp: a3,
            },
        ]);
        let phi_note = audio_learn_phi(&note, &transpose(&note, k), &cell, n, &cfg).unwrap();
        let phi_chord = audio_learn_phi(&chord, &transpose(&chord, k), &cell, n, &cfg).unwrap();
        let rho = phi_distance(&phi_note, &phi_chord, cfg.dedup_tol);
        match rho {
            None => {
                println!(
                    "trial {t}: UNDEFINED steps={steps} |note|={} |chord|={}",
                    phi_note.len(),
                    phi_chord.len()
                );
            }
            Some(r) if r > 0.0 => {
                println!(
                    "trial {t}: rho={r:.4} steps={steps} |note|={} |chord|={}",
                    phi_note.len(),
                    phi_chord.len()
                );
                // offsets via proprio inversion
                let node_of = |p: f64| -> i64 {
                    let f = cell.proprio_inverse(p);
                    let q = (f / cell.f_min).ln() / (cell.f_max / cell.f_min).ln();
                    (q * (n - 1) as f64).round() as i64
                };
                for (name, phi) in [("note", &phi_note), ("chord", &phi_chord)] {
                    let mut offs: Vec<(i64, i64)> = phi
                        .pairs
                        .iter()
                        .map(|p| {
                            let d = node_of(p.from.0[0]);
                            (d, node_of(p.to.0[0]) - d)
                        })
                        .collect();
                    offs.sort();
                    let weird: Vec<&(i64, i64)> =
                        offs.iter().filter(|(_, o)| *o != steps).collect();
                    println!("  {name}: {} pairs, off-offset: {:?}", phi.len(), weird);
                }
            }
            _ => {}
        }
    }
}
