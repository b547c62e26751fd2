use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Seeded, reproducible random stream owned by a single chain.
///
/// Streams are ChaCha8 generators keyed by `seed`; `chain_index` selects the
/// ChaCha stream (nonce), so `(seed, chain_index)` pairs that differ in either
/// field never share keystream. Output is identical across platforms and
/// runs.
#[derive(Clone, Debug)]
pub struct RngStream {
    seed: u64,
    chain_index: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(seed: u64, chain_index: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(seed);
        inner.set_stream(chain_index);
        Self {
            seed,
            chain_index,
            inner,
        }
    }

    /// Stream for a named run: the chain index is the FNV-1a hash of `label`.
    pub fn for_label(seed: u64, label: &str) -> Self {
        Self::new(seed, label_stream(label))
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn chain_index(&self) -> u64 {
        self.chain_index
    }
}

/// 64-bit FNV-1a of the label bytes. Stable across releases and platforms.
pub fn label_stream(label: &str) -> u64 {
    const OFFSET: u64 = 0xcbf2_9ce4_8422_2325;
    const PRIME: u64 = 0x0000_0100_0000_01b3;
    label
        .bytes()
        .fold(OFFSET, |h, b| (h ^ u64::from(b)).wrapping_mul(PRIME))
}

impl RngCore for RngStream {
    fn next_u32(&mut self) -> u32 {
        self.inner.next_u32()
    }

    fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.inner.fill_bytes(dst)
    }
}
