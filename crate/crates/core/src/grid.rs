use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Layout of the truncated momentum ladder `p = n * hbar_eff` with
/// `n in [-n_modes/2, n_modes/2)`.
///
/// Amplitudes are stored in FFT order: index `i` holds mode `n = i` for
/// `i < n_modes/2` and `n = i - n_modes` otherwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeGrid {
    n_modes: usize,
    hbar_eff: f64,
}

impl ModeGrid {
    pub const MIN_MODES: usize = 16;

    pub fn new(n_modes: usize, hbar_eff: f64) -> Result<Self> {
        if n_modes < Self::MIN_MODES || n_modes % 2 != 0 {
            return Err(invalid("n_modes", format!("must be even and at least {}, got {n_modes}", Self::MIN_MODES)));
        }
        if !(hbar_eff.is_finite() && hbar_eff > 0.0) {
            return Err(invalid("hbar_eff", format!("must be positive, got {hbar_eff}")));
        }
        Ok(Self { n_modes, hbar_eff })
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn hbar_eff(&self) -> f64 {
        self.hbar_eff
    }

    pub fn half(&self) -> i64 {
        (self.n_modes / 2) as i64
    }

    /// Momentum quantum number stored at array index `i`.
    #[inline]
    pub fn mode(&self, index: usize) -> i64 {
        let half = self.n_modes / 2;
        if index < half {
            index as i64
        } else {
            index as i64 - self.n_modes as i64
        }
    }

    /// Array index of mode `n`, if it lies inside the window.
    #[inline]
    pub fn index(&self, n: i64) -> Option<usize> {
        let half = self.half();
        if n < -half || n >= half {
            None
        } else {
            Some(n.rem_euclid(self.n_modes as i64) as usize)
        }
    }

    pub fn index_checked(&self, n: i64) -> Result<usize> {
        self.index(n).ok_or(Error::OffGrid { index: n, half: self.half() })
    }

    #[inline]
    pub fn momentum(&self, index: usize) -> f64 {
        self.mode(index) as f64 * self.hbar_eff
    }

    /// Mode numbers in array order.
    pub fn modes(&self) -> impl Iterator<Item = i64> + '_ {
        (0..self.n_modes).map(move |i| self.mode(i))
    }

    /// Array indices ordered by increasing mode number (for output and plots).
    pub fn ascending_indices(&self) -> Vec<usize> {
        let half = self.n_modes / 2;
        (half..self.n_modes).chain(0..half).collect()
    }

    /// Number of modes on each side that make up the outermost 1% of the window.
    pub fn edge_width(&self) -> usize {
        (self.n_modes / 200).max(1)
    }

    /// Whether array index `i` belongs to the monitored boundary layer.
    pub fn is_edge(&self, index: usize) -> bool {
        let n = self.mode(index);
        let w = self.edge_width() as i64;
        n < -self.half() + w || n >= self.half() - w
    }
}
