//! Seeded enumeration of monomial samples.
//!
//! Samples are whole enumerations of monomials, pairs or triples, put in a
//! seed-dependent order and truncated to the configured cap, so a failing
//! case is always a single monomial combination.

use lie_star::poly::Multi;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use sha2::{Digest, Sha256};

/// A generator keyed by the suite seed and a per-identity label.
pub fn rng(seed: u64, label: &str) -> ChaCha8Rng {
    let mut h = Sha256::new();
    h.update(seed.to_le_bytes());
    h.update(label.as_bytes());
    ChaCha8Rng::from_seed(h.finalize().into())
}

/// Shuffles and keeps at most `cap` items.
pub fn pick<T>(mut items: Vec<T>, seed: u64, label: &str, cap: usize) -> Vec<T> {
    items.shuffle(&mut rng(seed, label));
    items.truncate(cap);
    items
}

pub fn monomials(n: usize, max_deg: u32) -> Vec<Multi> {
    Multi::all_up_to_degree(n, max_deg)
}

/// Ordered pairs with deg a + deg b ≤ total.
pub fn pairs(n: usize, total: u32) -> Vec<(Multi, Multi)> {
    let ms = monomials(n, total);
    let mut out = Vec::new();
    for a in &ms {
        for b in &ms {
            if a.degree() + b.degree() <= total {
                out.push((*a, *b));
            }
        }
    }
    out
}

/// Pairs with each factor of degree ≤ each.
pub fn pairs_each(n: usize, each: u32) -> Vec<(Multi, Multi)> {
    let ms = monomials(n, each);
    ms.iter().flat_map(|a| ms.iter().map(move |b| (*a, *b))).collect()
}

/// Ordered triples with total degree ≤ total.
pub fn triples(n: usize, total: u32) -> Vec<(Multi, Multi, Multi)> {
    let ms = monomials(n, total);
    let mut out = Vec::new();
    for a in &ms {
        for b in &ms {
            if a.degree() + b.degree() > total {
                continue;
            }
            for c in &ms {
                if a.degree() + b.degree() + c.degree() <= total {
                    out.push((*a, *b, *c));
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts() {
        // Triples of monomials in 3 variables of total degree ≤ 4 are the
        // monomials of degree ≤ 4 in 9 variables.
        assert_eq!(triples(3, 4).len(), 715);
        assert_eq!(pairs(2, 1).len(), 5);
    }

    #[test]
    fn seeded_order_is_stable() {
        let a = pick(pairs(3, 3), 11, "x", 10);
        assert_eq!(a, pick(pairs(3, 3), 11, "x", 10));
        assert_ne!(a, pick(pairs(3, 3), 12, "x", 10));
    }
}
