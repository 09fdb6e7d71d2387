//! Sampled tau-function fields over a mixed continuous/discrete index box.

use crate::error::{Error, Result};
use ndarray::Array3;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AxisKind {
    Continuous,
    Discrete,
}

/// One axis of a [`GridField`]: uniformly spaced samples starting at
/// `origin`. Discrete axes always have spacing 1.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct Axis {
    pub origin: f64,
    pub spacing: f64,
    pub kind: AxisKind,
}

impl Axis {
    pub fn continuous(origin: f64, spacing: f64) -> Self {
        assert!(spacing > 0.0, "spacing must be positive");
        Axis {
            origin,
            spacing,
            kind: AxisKind::Continuous,
        }
    }

    pub fn discrete(origin: i64) -> Self {
        Axis {
            origin: origin as f64,
            spacing: 1.0,
            kind: AxisKind::Discrete,
        }
    }

    pub fn coord(&self, idx: usize) -> f64 {
        self.origin + self.spacing * idx as f64
    }
}

/// Sampled field `F` over `(t, a, n)` (axes 0, 1, 2).
///
/// Values must stay finite; constructors check and reject NaN.
#[derive(Debug, Clone)]
pub struct GridField {
    pub values: Array3<f64>,
    pub axes: [Axis; 3],
}

impl GridField {
    pub fn new(values: Array3<f64>, axes: [Axis; 3]) -> Result<Self> {
        for ax in &axes {
            if ax.spacing <= 0.0 {
                return Err(Error::Config("axis spacing must be positive".into()));
            }
            if ax.kind == AxisKind::Discrete && ax.spacing != 1.0 {
                return Err(Error::Config("discrete axes must have spacing 1".into()));
            }
        }
        if let Some((idx, _)) = values.indexed_iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::NanAt([idx.0, idx.1, idx.2]));
        }
        Ok(GridField { values, axes })
    }

    /// Builds a field by sampling `f` at every grid coordinate.
    pub fn from_fn(
        shape: [usize; 3],
        axes: [Axis; 3],
        mut f: impl FnMut(f64, f64, f64) -> f64,
    ) -> Result<Self> {
        let values = Array3::from_shape_fn((shape[0], shape[1], shape[2]), |(i, j, k)| {
            f(axes[0].coord(i), axes[1].coord(j), axes[2].coord(k))
        });
        GridField::new(values, axes)
    }

    pub fn shape(&self) -> [usize; 3] {
        let s = self.values.shape();
        [s[0], s[1], s[2]]
    }

    pub fn get(&self, idx: [usize; 3]) -> f64 {
        self.values[[idx[0], idx[1], idx[2]]]
    }

    /// Value at `base + off`, failing when the shifted index leaves the grid.
    pub fn get_offset(&self, base: [usize; 3], off: [i64; 3]) -> Result<f64> {
        let shape = self.shape();
        let mut idx = [0usize; 3];
        for d in 0..3 {
            let i = base[d] as i64 + off[d];
            if i < 0 || i >= shape[d] as i64 {
                return Err(Error::OutOfRange(
                    [
                        base[0] as i64 + off[0],
                        base[1] as i64 + off[1],
                        base[2] as i64 + off[2],
                    ],
                    shape,
                ));
            }
            idx[d] = i as usize;
        }
        Ok(self.get(idx))
    }

    /// Coordinates of a grid index.
    pub fn coords(&self, idx: [usize; 3]) -> [f64; 3] {
        [
            self.axes[0].coord(idx[0]),
            self.axes[1].coord(idx[1]),
            self.axes[2].coord(idx[2]),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_nan() {
        let mut v = Array3::zeros((2, 2, 2));
        v[[1, 0, 1]] = f64::NAN;
        let axes = [
            Axis::continuous(0.0, 0.1),
            Axis::continuous(0.0, 0.1),
            Axis::discrete(0),
        ];
        assert!(matches!(
            GridField::new(v, axes),
            Err(Error::NanAt([1, 0, 1]))
        ));
    }

    #[test]
    fn rejects_discrete_spacing() {
        let axes = [
            Axis::continuous(0.0, 0.1),
            Axis::continuous(0.0, 0.1),
            Axis {
                origin: 0.0,
                spacing: 2.0,
                kind: AxisKind::Discrete,
            },
        ];
        assert!(GridField::new(Array3::zeros((1, 1, 1)), axes).is_err());
    }

    #[test]
    fn offsets_check_bounds() {
        let axes = [
            Axis::continuous(0.0, 1.0),
            Axis::continuous(0.0, 1.0),
            Axis::discrete(0),
        ];
        let f = GridField::from_fn([3, 3, 3], axes, |t, a, n| t + a + n).unwrap();
        assert_eq!(f.get_offset([1, 1, 1], [1, 0, -1]).unwrap(), 2.0 + 1.0);
        assert!(f.get_offset([2, 2, 2], [1, 0, 0]).is_err());
    }
}
