use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::fields::Dims;
use crate::{Error, Result};

/// Non-overlapping tile origins in raster order (x fastest). Trailing
/// partial tiles are dropped.
pub fn tile_subvolumes(dims: Dims, tile: Dims) -> Result<Vec<[usize; 3]>> {
    tile.check_positive()?;
    let (d, t) = (dims.as_array(), tile.as_array());
    if (0..3).any(|a| t[a] > d[a]) {
        return Err(Error::InvalidArgument(format!("tile {tile} larger than domain {dims}")));
    }
    let counts = [0, 1, 2].map(|a| d[a] / t[a]);
    let mut out = Vec::with_capacity(counts.iter().product());
    for k in 0..counts[2] {
        for j in 0..counts[1] {
            for i in 0..counts[0] {
                out.push([i * t[0], j * t[1], k * t[2]]);
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Split {
    Train,
    Val,
    Test,
}

impl Split {
    pub const ALL: [Split; 3] = [Split::Train, Split::Val, Split::Test];

    pub fn name(self) -> &'static str {
        match self {
            Split::Train => "train",
            Split::Val => "val",
            Split::Test => "test",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitCounts {
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

/// 60:20:20 partition of `n` items by largest-remainder rounding; ties in
/// the remainder go to train, then val, then test.
pub fn split_counts(n: usize) -> SplitCounts {
    let parts = [3usize, 1, 1];
    let mut counts = parts.map(|p| n * p / 5);
    let remainders = parts.map(|p| n * p % 5);
    let mut left = n - counts.iter().sum::<usize>();
    let mut order = [0usize, 1, 2];
    order.sort_by_key(|&i| std::cmp::Reverse(remainders[i]));
    for &i in &order {
        if left == 0 {
            break;
        }
        if remainders[i] > 0 {
            counts[i] += 1;
            left -= 1;
        }
    }
    SplitCounts {
        train: counts[0],
        val: counts[1],
        test: counts[2],
    }
}

/// Seeded shuffle of tile indices followed by the 60:20:20 partition.
/// Returns the split of each tile in input order.
pub fn split_dataset(n_tiles: usize, seed: u64) -> Result<Vec<Split>> {
    if n_tiles == 0 {
        return Err(Error::InvalidArgument("cannot split zero tiles".into()));
    }
    let mut order: Vec<usize> = (0..n_tiles).collect();
    order.shuffle(&mut ChaCha8Rng::seed_from_u64(seed));
    let c = split_counts(n_tiles);
    let mut out = vec![Split::Test; n_tiles];
    for (rank, &tile) in order.iter().enumerate() {
        out[tile] = if rank < c.train {
            Split::Train
        } else if rank < c.train + c.val {
            Split::Val
        } else {
            Split::Test
        };
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tile_counts() {
        let t = Dims::new(256, 256, 3);
        assert_eq!(tile_subvolumes(Dims::new(512, 512, 3), t).unwrap().len(), 4);
        assert_eq!(tile_subvolumes(Dims::new(300, 300, 3), t).unwrap(), vec![[0, 0, 0]]);
        // floor-product oracle: 2000/256 = 7, 1600/256 = 6, 400/3 = 133
        let n = tile_subvolumes(Dims::new(2000, 1600, 400), t).unwrap().len();
        assert_eq!(n, (2000 / 256) * (1600 / 256) * (400 / 3));
        assert_eq!(n, 5586);
        assert!(tile_subvolumes(Dims::new(100, 300, 3), t).is_err());
    }

    #[test]
    fn origins_are_raster_ordered() {
        let o = tile_subvolumes(Dims::new(4, 4, 2), Dims::new(2, 2, 2)).unwrap();
        assert_eq!(o, vec![[0, 0, 0], [2, 0, 0], [0, 2, 0], [2, 2, 0]]);
    }

    #[test]
    fn largest_remainder_counts() {
        let c = |n| {
            let s = split_counts(n);
            (s.train, s.val, s.test)
        };
        assert_eq!(c(10), (6, 2, 2));
        assert_eq!(c(7), (4, 2, 1));
        assert_eq!(c(1), (1, 0, 0));
        assert_eq!(c(268), (161, 54, 53));
        for n in 1..200 {
            let s = split_counts(n);
            assert_eq!(s.train + s.val + s.test, n);
        }
    }

    #[test]
    fn split_is_seeded_and_covers() {
        let a = split_dataset(23, 9).unwrap();
        assert_eq!(a, split_dataset(23, 9).unwrap());
        assert_ne!(a, split_dataset(23, 10).unwrap());
        let train = a.iter().filter(|&&s| s == Split::Train).count();
        assert_eq!(train, split_counts(23).train);
        assert!(split_dataset(0, 1).is_err());
    }
}
