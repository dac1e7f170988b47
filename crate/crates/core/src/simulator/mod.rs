//! Monte Carlo generator of detector time-tag streams.
//!
//! Each excitation pulse passes through blinking, excitation, species
//! selection, emission timing, optical thinning, interferometer routing and
//! detector jitter. Uncorrelated background lines and dark counts are added on
//! top. Periods are simulated in fixed-size blocks, each with its own RNG
//! stream, so the output depends only on the configuration and seed.

mod blinking;
mod config;
mod engine;
mod format;
mod routing;
mod stream;

pub use blinking::Telegraph;
pub use config::{InterferenceSampler, Mode, SimConfig};
pub use engine::{simulate, BLOCK_PERIODS};
pub use format::{
    read_binary, read_csv, read_stream, write_binary, write_csv, StreamFormat, BINARY_MAGIC,
    BINARY_VERSION,
};
pub use routing::{route_hbt, route_hom, Detection, HomRouting, Photon, PhotonKind};
pub use stream::{TimeTag, TimeTagStream};
