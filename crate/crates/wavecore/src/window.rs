use ndarray::{Array1, Array2};

use crate::grid::Grid;
use crate::{Result, WaveError};

/// Tukey (tapered cosine) window of length `n`.
///
/// Uses the symmetric convention with `n - 1` in the denominators, so
/// `taper_fraction = 0` gives a rectangular window and `taper_fraction = 1`
/// a Hann window with zero endpoints.
pub fn tukey_window(n: usize, taper_fraction: f64) -> Result<Array1<f64>> {
    if n < 2 {
        return Err(WaveError::invalid(format!("window length {n} < 2")));
    }
    if !(0.0..=1.0).contains(&taper_fraction) {
        return Err(WaveError::invalid(format!(
            "taper fraction {taper_fraction} outside [0, 1]"
        )));
    }
    let alpha = taper_fraction;
    let m = (n - 1) as f64;
    let mut w = Array1::ones(n);
    if alpha == 0.0 {
        return Ok(w);
    }
    let lo = alpha * m / 2.0;
    let hi = m * (1.0 - alpha / 2.0);
    for (i, wi) in w.iter_mut().enumerate() {
        let x = i as f64;
        if x < lo {
            *wi = 0.5 * (1.0 + (std::f64::consts::PI * (2.0 * x / (alpha * m) - 1.0)).cos());
        } else if x > hi {
            *wi = 0.5
                * (1.0
                    + (std::f64::consts::PI * (2.0 * x / (alpha * m) - 2.0 / alpha + 1.0)).cos());
        }
    }
    Ok(w)
}

/// Taper fraction of the spatial axis: flat region spans `[n_x/4, 3 n_x/4)`.
pub const SPACE_TAPER: f64 = 0.5;
/// Taper fraction of the time axis: flat region spans `[n_t/25, 24 n_t/25)`.
pub const TIME_TAPER: f64 = 2.0 / 25.0;

/// Half-open index ranges of the region unaffected by the tapers,
/// using floor rounding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FlatRegion {
    pub x_start: usize,
    pub x_end: usize,
    pub t_start: usize,
    pub t_end: usize,
}

impl FlatRegion {
    pub fn of_grid(n_x: usize, n_t: usize) -> Self {
        FlatRegion {
            x_start: n_x / 4,
            x_end: 3 * n_x / 4,
            t_start: n_t / 25,
            t_end: 24 * n_t / 25,
        }
    }

    pub fn n_cells(&self) -> usize {
        (self.x_end - self.x_start) * (self.t_end - self.t_start)
    }
}

/// Separable 2D Tukey window used when periodising fields for spectral work.
#[derive(Debug, Clone)]
pub struct LossWindows {
    pub space: Array1<f64>,
    pub time: Array1<f64>,
    pub region: FlatRegion,
}

impl LossWindows {
    pub fn for_grid(grid: &Grid) -> Self {
        // Window lengths >= 2 are guaranteed by Grid validation.
        let space = tukey_window(grid.n_x, SPACE_TAPER).expect("space window");
        let time = tukey_window(grid.n_t, TIME_TAPER).expect("time window");
        LossWindows {
            space,
            time,
            region: FlatRegion::of_grid(grid.n_x, grid.n_t),
        }
    }

    /// Apply the separable window to a `[space, time]` field.
    pub fn apply(&self, field: &Array2<f64>) -> Array2<f64> {
        let mut out = field.clone();
        self.apply_in_place(&mut out);
        out
    }

    pub fn apply_in_place(&self, field: &mut Array2<f64>) {
        for (i, mut row) in field.rows_mut().into_iter().enumerate() {
            let wx = self.space[i];
            for (j, v) in row.iter_mut().enumerate() {
                *v *= wx * self.time[j];
            }
        }
    }

    /// Apply only the spatial taper (for operators that transform the space
    /// axis alone and need no time periodicity).
    pub fn apply_space(&self, field: &Array2<f64>) -> Array2<f64> {
        let mut out = field.clone();
        for (i, mut row) in out.rows_mut().into_iter().enumerate() {
            let wx = self.space[i];
            row.mapv_inplace(|v| v * wx);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_taper_is_rectangular() {
        let w = tukey_window(17, 0.0).unwrap();
        assert!(w.iter().all(|&v| v == 1.0));
    }

    #[test]
    fn full_taper_is_hann() {
        let n = 33;
        let w = tukey_window(n, 1.0).unwrap();
        assert!(w[0].abs() < 1e-15);
        assert!(w[n - 1].abs() < 1e-15);
        let m = (n - 1) as f64;
        for i in 0..n {
            let hann = 0.5 * (1.0 - (std::f64::consts::TAU * i as f64 / m).cos());
            assert!((w[i] - hann).abs() < 1e-12, "index {i}");
        }
    }

    #[test]
    fn half_taper_flat_region_paper_grid() {
        // Closed-form Tukey: flat indices are ceil(alpha(n-1)/2) ..= floor((n-1)(1-alpha/2)).
        let w = tukey_window(500, 0.5).unwrap();
        for i in 0..500 {
            if (125..375).contains(&i) {
                assert_eq!(w[i], 1.0, "index {i} should be flat");
            } else {
                assert!(w[i] < 1.0, "index {i} should taper");
            }
        }
    }

    #[test]
    fn time_taper_flat_region_paper_grid() {
        let w = tukey_window(500, TIME_TAPER).unwrap();
        for i in 0..500 {
            if (20..480).contains(&i) {
                assert_eq!(w[i], 1.0, "index {i} should be flat");
            } else {
                assert!(w[i] < 1.0, "index {i} should taper");
            }
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(tukey_window(1, 0.5).is_err());
        assert!(tukey_window(8, -0.1).is_err());
        assert!(tukey_window(8, 1.1).is_err());
    }

    #[test]
    fn flat_region_paper_grid() {
        let r = FlatRegion::of_grid(500, 500);
        assert_eq!((r.x_start, r.x_end, r.t_start, r.t_end), (125, 375, 20, 480));
    }
}
