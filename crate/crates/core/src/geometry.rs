//! Periodic hypercubic boxes `{0..L-1}^d` with row-major site numbering.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest supported lattice dimension.
pub const MAX_DIM: usize = 3;

/// Multi-index offset; only the first `dim` components are meaningful.
pub type Shift = [i64; MAX_DIM];

/// A `d`-dimensional periodic box of side `L`.
///
/// Sites are linearized row-major: the first coordinate varies slowest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct BoxGeometry {
    dim: usize,
    side: usize,
}

impl BoxGeometry {
    /// `side >= 3` keeps the periodic wrap from producing a doubled bond.
    pub fn new(dim: usize, side: usize) -> Result<Self> {
        if !(1..=MAX_DIM).contains(&dim) {
            return Err(Error::Geometry(format!("dimension d must be 1, 2 or 3 (got {dim})")));
        }
        if side < 3 {
            return Err(Error::Geometry(format!(
                "side length L must be at least 3 (got {side})"
            )));
        }
        Ok(BoxGeometry { dim, side })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn side(&self) -> usize {
        self.side
    }

    pub fn site_count(&self) -> usize {
        self.side.pow(self.dim as u32)
    }

    pub fn coords(&self, site: usize) -> [usize; MAX_DIM] {
        debug_assert!(site < self.site_count());
        let mut out = [0; MAX_DIM];
        let mut rest = site;
        for axis in (0..self.dim).rev() {
            out[axis] = rest % self.side;
            rest /= self.side;
        }
        out
    }

    pub fn index(&self, coords: &[usize]) -> usize {
        coords[..self.dim]
            .iter()
            .fold(0, |acc, &c| acc * self.side + (c % self.side))
    }

    /// Site reached from `site` by `shift`, wrapping periodically.
    pub fn shifted(&self, site: usize, shift: &Shift) -> usize {
        let l = self.side as i64;
        let c = self.coords(site);
        let mut out = [0usize; MAX_DIM];
        for axis in 0..self.dim {
            out[axis] = (c[axis] as i64 + shift[axis]).rem_euclid(l) as usize;
        }
        self.index(&out)
    }

    /// The `2d` nearest neighbours of `site`, ordered `+e_0, -e_0, +e_1, ...`.
    pub fn neighbors(&self, site: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.dim).flat_map(move |axis| {
            [1i64, -1].into_iter().map(move |sign| {
                let mut shift = [0; MAX_DIM];
                shift[axis] = sign;
                self.shifted(site, &shift)
            })
        })
    }

    /// Site with every coordinate equal to `L / 2`.
    pub fn center(&self) -> usize {
        self.index(&[self.side / 2; MAX_DIM])
    }

    /// Offset placing a box of side `inner` centred inside this one.
    pub fn centered_offset(&self, inner: usize) -> usize {
        (self.side - inner) / 2
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_sides_and_bad_dims() {
        assert!(BoxGeometry::new(1, 2).is_err());
        assert!(BoxGeometry::new(0, 5).is_err());
        assert!(BoxGeometry::new(4, 5).is_err());
        let msg = BoxGeometry::new(2, 2).unwrap_err().to_string();
        assert!(msg.contains("L must be at least 3"), "{msg}");
    }

    #[test]
    fn coords_roundtrip() {
        let g = BoxGeometry::new(3, 4).unwrap();
        for s in 0..g.site_count() {
            assert_eq!(g.index(&g.coords(s)), s);
        }
        assert_eq!(g.coords(1), [0, 0, 1]);
        assert_eq!(g.coords(4), [0, 1, 0]);
    }

    #[test]
    fn every_site_has_2d_distinct_neighbors() {
        for d in 1..=3 {
            let g = BoxGeometry::new(d, 3).unwrap();
            for s in 0..g.site_count() {
                let mut nb: Vec<_> = g.neighbors(s).collect();
                nb.sort_unstable();
                nb.dedup();
                assert_eq!(nb.len(), 2 * d);
                assert!(!nb.contains(&s));
            }
        }
    }

    #[test]
    fn shift_by_side_is_identity() {
        let g = BoxGeometry::new(2, 5).unwrap();
        for s in 0..g.site_count() {
            assert_eq!(g.shifted(s, &[5, -10, 0]), s);
        }
    }
}
