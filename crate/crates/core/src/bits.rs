//! Dense square bit matrix used as an adjacency index.
//!
//! Rows are stored contiguously; the row stride grows by doubling when a
//! node id beyond the current capacity is inserted. Every row operation
//! works on whole `u64` words so the hot loops vectorize.

#[derive(Debug, Clone, Default)]
pub struct BitMatrix {
    rows: usize,
    words: usize,
    data: Vec<u64>,
}

#[inline]
fn word_bit(i: usize) -> (usize, u64) {
    (i / 64, 1u64 << (i % 64))
}

impl BitMatrix {
    pub fn new() -> Self {
        Self::default()
    }

    /// Number of `u64` words per row.
    pub fn words(&self) -> usize {
        self.words
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Make room for indices `0..n` (rows and columns).
    pub fn ensure(&mut self, n: usize) {
        let needed = n.div_ceil(64).max(1);
        if needed > self.words {
            let new_words = needed.max(self.words * 2);
            let mut data = vec![0u64; self.rows.max(n) * new_words];
            for r in 0..self.rows {
                data[r * new_words..r * new_words + self.words]
                    .copy_from_slice(&self.data[r * self.words..(r + 1) * self.words]);
            }
            self.words = new_words;
            self.data = data;
        }
        if n > self.rows {
            self.data.resize(n * self.words, 0);
            self.rows = n;
        }
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[u64] {
        &self.data[r * self.words..(r + 1) * self.words]
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> bool {
        let (w, b) = word_bit(c);
        self.data[r * self.words + w] & b != 0
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, on: bool) {
        let (w, b) = word_bit(c);
        let slot = &mut self.data[r * self.words + w];
        if on {
            *slot |= b;
        } else {
            *slot &= !b;
        }
    }

    /// Set or clear both `(a, b)` and `(b, a)`.
    pub fn set_sym(&mut self, a: usize, b: usize, on: bool) {
        self.set(a, b, on);
        self.set(b, a, on);
    }

    /// `|row(a) ∩ row(b)|`.
    #[inline]
    pub fn common_count(&self, a: usize, b: usize) -> u32 {
        self.row(a)
            .iter()
            .zip(self.row(b))
            .map(|(x, y)| (x & y).count_ones())
            .sum()
    }

    /// OR row `r` into `acc`.
    #[inline]
    pub fn or_into(&self, r: usize, acc: &mut [u64]) {
        for (a, x) in acc.iter_mut().zip(self.row(r)) {
            *a |= x;
        }
    }
}

/// Indices of set bits in a word slice, ascending.
pub fn ones(words: &[u64]) -> impl Iterator<Item = usize> + '_ {
    words.iter().enumerate().flat_map(|(wi, &w)| {
        let mut w = w;
        std::iter::from_fn(move || {
            if w == 0 {
                None
            } else {
                let tz = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + tz)
            }
        })
    })
}

pub fn count_ones(words: &[u64]) -> usize {
    words.iter().map(|w| w.count_ones() as usize).sum()
}

/// Index of the `k`-th set bit (0-based), if any.
pub fn nth_one(words: &[u64], mut k: usize) -> Option<usize> {
    for (wi, &w) in words.iter().enumerate() {
        let c = w.count_ones() as usize;
        if k < c {
            let mut w = w;
            for _ in 0..k {
                w &= w - 1;
            }
            return Some(wi * 64 + w.trailing_zeros() as usize);
        }
        k -= c;
    }
    None
}

#[inline]
pub fn clear_bit(words: &mut [u64], i: usize) {
    let (w, b) = word_bit(i);
    words[w] &= !b;
}

#[inline]
pub fn test_bit(words: &[u64], i: usize) -> bool {
    let (w, b) = word_bit(i);
    words[w] & b != 0
}
