//! FNV-1a, 64-bit. Used for mock embeddings, cache keys and store record ids.

const OFFSET_BASIS: u64 = 0xcbf2_9ce4_8422_2325;
const PRIME: u64 = 0x0000_0100_0000_01b3;

/// Incremental FNV-1a 64 hasher.
#[derive(Debug, Clone, Copy)]
pub struct Fnv1a64(u64);

impl Default for Fnv1a64 {
    fn default() -> Self {
        Self(OFFSET_BASIS)
    }
}

impl Fnv1a64 {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 ^= u64::from(b);
            self.0 = self.0.wrapping_mul(PRIME);
        }
    }

    pub fn finish(self) -> u64 {
        self.0
    }
}

pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut h = Fnv1a64::new();
    h.write(bytes);
    h.finish()
}

/// Seeded token hash: FNV-1a over the seed's 8 little-endian bytes followed by
/// the token's UTF-8 bytes.
pub fn seeded_hash(token: &str, seed: u64) -> u64 {
    let mut h = Fnv1a64::new();
    h.write(&seed.to_le_bytes());
    h.write(token.as_bytes());
    h.finish()
}
