//! Synthetic tasks, heterogeneity-controlled partitioning and dataset file
//! formats.

mod io;
mod partition;
mod synthetic;

pub use io::{
    parse_csv, parse_libsvm, read_dataset, write_csv, write_dataset, write_libsvm, FileFormat,
};
pub use partition::{
    lambda_schedule, partition, HeterogeneityLambdaRule, PartitionKind, PartitionScheme,
};
pub use synthetic::{
    generate_synthetic, logistic_label, sample_mixture, tabular_surrogate, SyntheticConfig,
    SyntheticData, TEST_STREAM, VALIDATION_STREAM,
};

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;

/// Portable generator for `seed`, positioned on independent stream `stream`.
///
/// Every random quantity in the crate is drawn from a ChaCha20 generator seeded
/// with `seed_from_u64` and split into streams with `set_stream`, so distinct
/// consumers never share a sequence.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha20Rng {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}
