/// Generator of oblivious comparator networks. A comparator `(i, j)` with
/// `i < j` leaves the smaller key at position `i`.
pub trait SortingNetwork {
    fn comparators(&self, m: usize) -> Vec<(usize, usize)>;
}

/// Batcher's odd-even mergesort, `O(m log² m)` comparators.
#[derive(Clone, Copy, Debug, Default)]
pub struct Batcher;

impl SortingNetwork for Batcher {
    fn comparators(&self, m: usize) -> Vec<(usize, usize)> {
        // Built for the next power of two; comparators touching the padding are
        // no-ops when the padding holds +∞, so they are dropped.
        let size = m.next_power_of_two();
        let mut out = Vec::new();
        let mut p = 1;
        while p < size {
            let mut k = p;
            while k >= 1 {
                let mut j = k % p;
                while j + k < size {
                    for i in 0..k.min(size - j - k) {
                        if (i + j) / (2 * p) == (i + j + k) / (2 * p) && i + j + k < m {
                            out.push((i + j, i + j + k));
                        }
                    }
                    j += 2 * k;
                }
                k /= 2;
            }
            p *= 2;
        }
        out
    }
}

pub fn build_sorting_network(m: usize) -> Vec<(usize, usize)> {
    Batcher.comparators(m)
}

/// Runs `keys` through `network` and reports whether the result is sorted.
pub fn sorts<T: Ord + Clone>(network: &[(usize, usize)], keys: &[T]) -> bool {
    let mut v = keys.to_vec();
    for &(i, j) in network {
        if v[i] > v[j] {
            v.swap(i, j);
        }
    }
    v.windows(2).all(|w| w[0] <= w[1])
}
