// Temporary probe: medium and audio statistics across several seeds.

use smcsim::experiments::*;
use smcsim::AgentBody;

fn main() {
    for seed in [20260810u64, 7, 42] {
        let profile = Profile::desk();
        let body = AgentBody::standard(seed);
        let medium = run_unchanging_medium(&body, seed, &profile.medium_params()).unwrap();
        println!("== medium seed {seed}");
        for line in medium.summary_lines() {
            println!("  {line}");
        }
        let audio = run_audio(
            &smcsim::audio::HairCell::standard(),
            seed,
            &profile.audio_params(),
        )
        .unwrap();
        println!("== audio seed {seed}");
        for line in audio.summary_lines() {
            println!("  {line}");
        }
    }
}
