use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform lattice of detection times.
///
/// `n` is odd so a window symmetric about zero contains `t = 0` as a node.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    t_min: f64,
    t_max: f64,
    n: usize,
    h: f64,
}

impl TimeGrid {
    pub fn new(t_min: f64, t_max: f64, n: usize) -> Result<Self> {
        if !(t_min.is_finite() && t_max.is_finite()) {
            return Err(Error::InvalidGrid("bounds must be finite".into()));
        }
        if t_max <= t_min {
            return Err(Error::InvalidGrid(format!(
                "empty window [{t_min}, {t_max}]"
            )));
        }
        if n < 3 || n % 2 == 0 {
            return Err(Error::InvalidGrid(format!(
                "point count must be odd and at least 3, got {n}"
            )));
        }
        Ok(TimeGrid {
            t_min,
            t_max,
            n,
            h: (t_max - t_min) / (n - 1) as f64,
        })
    }

    pub fn t_min(&self) -> f64 {
        self.t_min
    }

    pub fn t_max(&self) -> f64 {
        self.t_max
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        self.h
    }

    #[inline]
    pub fn time(&self, i: usize) -> f64 {
        if i + 1 == self.n {
            self.t_max
        } else {
            self.t_min + i as f64 * self.h
        }
    }

    pub fn times(&self) -> impl ExactSizeIterator<Item = f64> + '_ {
        (0..self.n).map(|i| self.time(i))
    }

    /// Index of the node at `t`, allowing for round-off in how `t` was produced.
    pub fn index_of(&self, t: f64) -> Option<usize> {
        let x = (t - self.t_min) / self.h;
        let i = x.round();
        if i < 0.0 || i >= self.n as f64 || (x - i).abs() > 1e-9 {
            return None;
        }
        Some(i as usize)
    }

    /// Trapezoid-rule weights for the nodes.
    pub fn trapezoid_weights(&self) -> Vec<f64> {
        let mut w = vec![self.h; self.n];
        w[0] *= 0.5;
        w[self.n - 1] *= 0.5;
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction() {
        let g = TimeGrid::new(-10.0, 10.0, 201).unwrap();
        assert!((g.spacing() - 0.1).abs() < 1e-15);
        assert_eq!(g.time(100), 0.0);
        assert_eq!(g.time(200), 10.0);
        assert_eq!(g.index_of(0.3), Some(103));
        assert_eq!(g.index_of(0.35), None);
        assert_eq!(g.index_of(10.1), None);
        let w = g.trapezoid_weights();
        assert!((w.iter().sum::<f64>() - 20.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(TimeGrid::new(0.0, 1.0, 2).is_err());
        assert!(TimeGrid::new(0.0, 1.0, 1).is_err());
        assert!(TimeGrid::new(5.0, 5.0, 11).is_err());
        assert!(TimeGrid::new(5.0, 4.0, 11).is_err());
    }

    #[test]
    fn strictly_increasing() {
        let g = TimeGrid::new(-3.7, 12.9, 129).unwrap();
        let t: Vec<f64> = g.times().collect();
        assert!(t.windows(2).all(|w| w[1] > w[0]));
        for w in t.windows(2) {
            assert!((w[1] - w[0] - g.spacing()).abs() < 1e-12);
        }
    }
}
