use super::ChainError;

/// Largest chain accepted by sparse ground-state paths.
pub const MAX_SPARSE_SITES: usize = 24;
/// Largest chain accepted by dense full-spectrum paths.
pub const MAX_DENSE_SITES: usize = 14;

/// `σz` eigenvalue of `site` in `config`.
#[inline]
pub fn sigma_z(config: u32, site: usize) -> i32 {
    if config >> site & 1 == 1 {
        1
    } else {
        -1
    }
}

/// Total `Σσz` of an `n_sites` configuration.
#[inline]
pub fn magnetization(config: u32, n_sites: usize) -> i32 {
    2 * config.count_ones() as i32 - n_sites as i32
}

/// Computational basis, optionally restricted to one total-`σz` sector.
///
/// States are strictly increasing in their bit encoding, so lookup is a
/// binary search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpinBasis {
    n_sites: usize,
    sector: Option<i32>,
    states: Vec<u32>,
}

impl SpinBasis {
    pub fn new(n_sites: usize, sector: Option<i32>) -> Result<Self, ChainError> {
        if n_sites == 0 || n_sites > MAX_SPARSE_SITES {
            return Err(ChainError::SiteCount(n_sites));
        }
        let states = match sector {
            None => (0..1u32 << n_sites).collect(),
            Some(m) => {
                let n = n_sites as i32;
                if m.abs() > n || (n + m) % 2 != 0 {
                    return Err(ChainError::EmptySector { sector: m, n_sites });
                }
                fixed_weight_states(n_sites, ((n + m) / 2) as u32)
            }
        };
        Ok(Self {
            n_sites,
            sector,
            states,
        })
    }

    pub fn full(n_sites: usize) -> Result<Self, ChainError> {
        Self::new(n_sites, None)
    }

    /// Every nonempty sector of an `n_sites` chain, from all-down to all-up.
    pub fn sectors(n_sites: usize) -> impl Iterator<Item = i32> {
        let n = n_sites as i32;
        (0..=n).map(move |k| 2 * k - n)
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn sector(&self) -> Option<i32> {
        self.sector
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[u32] {
        &self.states
    }

    pub fn state(&self, index: usize) -> u32 {
        self.states[index]
    }

    pub fn index_of(&self, config: u32) -> Option<usize> {
        if self.sector.is_none() {
            return ((config as usize) < self.states.len()).then_some(config as usize);
        }
        self.states.binary_search(&config).ok()
    }
}

/// All `n`-bit words with `k` set bits, ascending (Gosper's hack).
fn fixed_weight_states(n: usize, k: u32) -> Vec<u32> {
    if k == 0 {
        return vec![0];
    }
    let limit = 1u64 << n;
    let mut out = Vec::new();
    let mut x: u64 = (1u64 << k) - 1;
    while x < limit {
        out.push(x as u32);
        let c = x & x.wrapping_neg();
        let r = x + c;
        x = (((r ^ x) >> 2) / c) | r;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn binomial(n: u64, k: u64) -> u64 {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }

    #[test]
    fn sizes() {
        assert_eq!(SpinBasis::full(2).unwrap().len(), 4);
        assert_eq!(SpinBasis::new(4, Some(0)).unwrap().len(), 6);
        let up = SpinBasis::new(3, Some(3)).unwrap();
        assert_eq!(up.states(), &[0b111]);
        for n in 1..=12 {
            let total: usize = SpinBasis::sectors(n)
                .map(|m| SpinBasis::new(n, Some(m)).unwrap().len())
                .sum();
            assert_eq!(total, 1 << n);
            for m in SpinBasis::sectors(n) {
                let k = ((n as i32 + m) / 2) as u64;
                assert_eq!(SpinBasis::new(n, Some(m)).unwrap().len() as u64, binomial(n as u64, k));
            }
        }
    }

    #[test]
    fn sector_states_are_sorted_and_indexed() {
        let b = SpinBasis::new(10, Some(-2)).unwrap();
        assert!(b.states().windows(2).all(|w| w[0] < w[1]));
        for (i, &s) in b.states().iter().enumerate() {
            assert_eq!(magnetization(s, 10), -2);
            assert_eq!(b.index_of(s), Some(i));
        }
        assert_eq!(b.index_of(0), None);
    }

    #[test]
    fn empty_sectors_rejected() {
        assert!(matches!(
            SpinBasis::new(4, Some(6)),
            Err(ChainError::EmptySector { .. })
        ));
        assert!(matches!(
            SpinBasis::new(4, Some(1)),
            Err(ChainError::EmptySector { .. })
        ));
        assert!(SpinBasis::new(0, None).is_err());
        assert!(SpinBasis::new(25, Some(1)).is_err());
    }

    #[test]
    fn bit_convention() {
        assert_eq!(sigma_z(0b01, 0), 1);
        assert_eq!(sigma_z(0b01, 1), -1);
        assert_eq!(magnetization(0b111, 3), 3);
    }
}
