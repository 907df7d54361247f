//! Seeded generators and hand-built fixtures shared by the sgml test suites.

pub mod build;
pub mod fixtures;
pub mod gen;
pub mod oracle;
pub mod rules;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub type Rng = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
