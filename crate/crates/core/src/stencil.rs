//! Second-order finite-difference stencils on ghost-padded cell arrays.
//!
//! Cells are indexed `0..n`; faces `0..=n`, face `f` sitting between
//! cells `f - 1` and `f`. Periodic grids wrap; reflective grids mirror,
//! with odd fields (velocities, fluxes) changing sign across the wall.

use crate::state::{Boundary, Grid1D};

pub const GHOSTS: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Even,
    Odd,
}

#[derive(Debug, Clone)]
pub struct Padded {
    data: Vec<f64>,
    n: usize,
}

impl Padded {
    pub fn new(values: &[f64], bc: Boundary, parity: Parity) -> Self {
        let n = values.len();
        let g = GHOSTS;
        let mut data = vec![0.0; n + 2 * g];
        data[g..g + n].copy_from_slice(values);
        let sign = match parity {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        };
        for k in 0..g {
            match bc {
                Boundary::Periodic => {
                    data[g - 1 - k] = values[(n - 1 - k % n) % n];
                    data[g + n + k] = values[k % n];
                }
                Boundary::Reflective => {
                    data[g - 1 - k] = sign * values[k.min(n - 1)];
                    data[g + n + k] = sign * values[n - 1 - k.min(n - 1)];
                }
            }
        }
        Self { data, n }
    }

    pub fn on(grid: &Grid1D, values: &[f64], parity: Parity) -> Self {
        Self::new(values, grid.bc, parity)
    }

    #[inline]
    pub fn at(&self, i: isize) -> f64 {
        self.data[(i + GHOSTS as isize) as usize]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn interior(&self) -> &[f64] {
        &self.data[GHOSTS..GHOSTS + self.n]
    }

    /// Central gradient at cell centers.
    pub fn grad(&self, dx: f64) -> Vec<f64> {
        (0..self.n as isize)
            .map(|i| (self.at(i + 1) - self.at(i - 1)) / (2.0 * dx))
            .collect()
    }

    /// Compact gradient at faces `0..=n`.
    pub fn face_grad(&self, dx: f64) -> Vec<f64> {
        (0..=self.n as isize)
            .map(|f| (self.at(f) - self.at(f - 1)) / dx)
            .collect()
    }

    /// Arithmetic mean at faces `0..=n`.
    pub fn face_avg(&self) -> Vec<f64> {
        (0..=self.n as isize)
            .map(|f| 0.5 * (self.at(f) + self.at(f - 1)))
            .collect()
    }
}

/// Cell divergence of face values.
pub fn face_divergence(faces: &[f64], dx: f64) -> Vec<f64> {
    faces.windows(2).map(|w| (w[1] - w[0]) / dx).collect()
}

/// Central gradient of a cell field with the grid's boundary treatment.
pub fn grad(grid: &Grid1D, values: &[f64], parity: Parity) -> Vec<f64> {
    Padded::on(grid, values, parity).grad(grid.dx)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn periodic_wrap() {
        let p = Padded::new(&[1.0, 2.0, 3.0, 4.0], Boundary::Periodic, Parity::Even);
        assert_eq!(p.at(-1), 4.0);
        assert_eq!(p.at(-2), 3.0);
        assert_eq!(p.at(4), 1.0);
        assert_eq!(p.at(5), 2.0);
    }

    #[test]
    fn reflective_mirror() {
        let p = Padded::new(&[1.0, 2.0, 3.0, 4.0], Boundary::Reflective, Parity::Odd);
        assert_eq!(p.at(-1), -1.0);
        assert_eq!(p.at(-2), -2.0);
        assert_eq!(p.at(4), -4.0);
        assert_eq!(p.at(5), -3.0);
        let face = p.face_avg();
        assert_eq!(face[0], 0.0);
        assert_eq!(face[4], 0.0);
    }

    #[test]
    fn periodic_divergence_telescopes() {
        let n = 64;
        let v: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin() + 2.0).collect();
        let p = Padded::new(&v, Boundary::Periodic, Parity::Even);
        let faces = p.face_grad(0.1);
        assert_eq!(faces[0], faces[n]);
        let s: f64 = face_divergence(&faces, 0.1).iter().sum();
        assert!(s.abs() < 1e-12);
    }

    #[test]
    fn gradient_second_order() {
        let err = |n: usize| {
            let dx = 2.0 * std::f64::consts::PI / n as f64;
            let v: Vec<f64> = (0..n).map(|i| ((i as f64 + 0.5) * dx).sin()).collect();
            let g = Padded::new(&v, Boundary::Periodic, Parity::Even).grad(dx);
            g.iter()
                .enumerate()
                .map(|(i, gi)| (gi - ((i as f64 + 0.5) * dx).cos()).abs())
                .fold(0.0, f64::max)
        };
        let order = (err(32) / err(64)).log2();
        assert!((order - 2.0).abs() < 0.05, "order {order}");
    }
}
