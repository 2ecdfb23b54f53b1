use crate::{Error, Result};

/// Maps a word (with its surrounding words) to a fixed-size vector.
pub trait Embedder {
    fn dim(&self) -> usize;

    /// `left` holds the preceding words in reading order, `right` the following ones.
    fn embed(&self, word: &str, left: &[&str], right: &[&str]) -> Vec<f64>;
}

/// Context-free embedder: the L2-normalized sum of signed one-hot vectors, one per
/// character trigram of the word padded with `<` and `>`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HashingEmbedder {
    dim: usize,
    seed: u64,
}

pub fn hashing_embedder(dim: usize, seed: u64) -> Result<HashingEmbedder> {
    if dim == 0 {
        return Err(Error::invalid("embedder", "dimension must be positive"));
    }
    Ok(HashingEmbedder { dim, seed })
}

/// FNV-1a over UTF-8 bytes with a seeded basis and a splitmix finalizer.
fn hash_str(s: &str, seed: u64) -> u64 {
    let mut h = 0xcbf2_9ce4_8422_2325u64 ^ crate::mix_seed(seed, 0x7472_6967);
    for b in s.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    crate::mix_seed(h, 1)
}

impl HashingEmbedder {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Padded character trigrams of `word`, with repetition.
    pub fn trigrams(word: &str) -> Vec<String> {
        let chars: Vec<char> = std::iter::once('<')
            .chain(word.chars())
            .chain(std::iter::once('>'))
            .collect();
        chars.windows(3).map(|w| w.iter().collect()).collect()
    }
}

impl Embedder for HashingEmbedder {
    fn dim(&self) -> usize {
        self.dim
    }

    fn embed(&self, word: &str, _left: &[&str], _right: &[&str]) -> Vec<f64> {
        let mut v = vec![0.0; self.dim];
        for g in Self::trigrams(word) {
            let h = hash_str(&g, self.seed);
            let sign = if h >> 63 == 1 { -1.0 } else { 1.0 };
            v[(h % self.dim as u64) as usize] += sign;
        }
        let mut norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm == 0.0 {
            // All trigram contributions cancelled; fall back to the whole word.
            let h = hash_str(word, self.seed ^ 1);
            v[(h % self.dim as u64) as usize] = 1.0;
            norm = 1.0;
        }
        v.iter_mut().for_each(|x| *x /= norm);
        v
    }
}
