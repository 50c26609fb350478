//! Simulation library for agents that discover spatial structure by
//! cataloguing compensable sensory changes.
//!
//! A naive agent knows only its proprioception p and exteroception s. By
//! scanning, it tabulates the lawful mapping between them; when the world
//! or the agent moves, coincidences between old and new tables define a
//! function p' = phi(p), the agent's internal stand-in for the physical
//! displacement. The crate provides the sensor models, the coincidence
//! matcher, the phi algebra (distance, composition, threshold calibration),
//! the experiment harness built on them, and the hair-cell audio agent that
//! develops the same constructs over pitch.

pub mod audio;
pub mod body;
pub mod env;
pub mod error;
pub mod experiments;
pub mod geom;
pub mod oracle;
pub mod phi;
pub mod rng;
pub mod sensors;
pub mod table;

pub use body::AgentBody;
pub use env::{displace_environment, Environment, LightSource};
pub use error::{Result, SmcError};
pub use geom::{compose_displacements, RigidDisplacement, Vec2};
pub use phi::{
    calibrate_threshold, compose_phi, learn_phi, phi_distance, MatchConfig, MatchMode,
    PhiFunction, PhiThreshold,
};
pub use sensors::{photo_response, proprio_response, scan, scan_1d, Agent1d};
pub use table::{PhotoVector, ProprioVector, ScanGrid, SmcTable};
