//! Character n-grams of `<token>` hashed into a fixed bucket space.

use serde::{Deserialize, Serialize};

use crate::seed::fnv1a_32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubwordConfig {
    pub min_n: usize,
    pub max_n: usize,
    pub buckets: u32,
}

impl Default for SubwordConfig {
    fn default() -> Self {
        SubwordConfig {
            min_n: 3,
            max_n: 6,
            buckets: 1 << 20,
        }
    }
}

impl SubwordConfig {
    /// All n-grams of the bracketed token with length in `min_n..=max_n` characters.
    pub fn ngrams(&self, token: &str) -> Vec<String> {
        let chars: Vec<char> = std::iter::once('<')
            .chain(token.chars())
            .chain(std::iter::once('>'))
            .collect();
        let mut out = Vec::new();
        for start in 0..chars.len() {
            for n in self.min_n..=self.max_n {
                if start + n > chars.len() {
                    break;
                }
                out.push(chars[start..start + n].iter().collect());
            }
        }
        out
    }

    pub fn bucket(&self, ngram: &str) -> u32 {
        fnv1a_32(ngram.as_bytes()) % self.buckets
    }

    pub fn buckets_of(&self, token: &str) -> Vec<u32> {
        self.ngrams(token).iter().map(|g| self.bucket(g)).collect()
    }
}
