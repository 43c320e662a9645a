use crate::error::{Error, Result};

/// Uniform bandwidth grid `linspace(h_min, h_max, count)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridConfig {
    pub h_min: f64,
    pub h_max: f64,
    pub count: usize,
}

impl Default for GridConfig {
    /// 500 points uniformly spaced on `[0, 10]` with the zero endpoint replaced by `1e-100`.
    fn default() -> Self {
        GridConfig {
            h_min: 1e-100,
            h_max: 10.0,
            count: 500,
        }
    }
}

impl GridConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.h_min.is_finite() && self.h_max.is_finite() && self.h_min > 0.0) {
            return Err(Error::invalid("grid bounds must be finite and positive"));
        }
        if self.count == 1 {
            return Ok(());
        }
        if self.count == 0 || self.h_min >= self.h_max {
            return Err(Error::invalid(format!(
                "grid needs h_min < h_max and count >= 2, got [{}, {}] x {}",
                self.h_min, self.h_max, self.count
            )));
        }
        Ok(())
    }

    /// Grid points in ascending order. A one-point grid is `[h_min]`.
    pub fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.h_min];
        }
        let step = (self.h_max - self.h_min) / (self.count - 1) as f64;
        let mut pts: Vec<f64> = (0..self.count).map(|i| self.h_min + step * i as f64).collect();
        pts[self.count - 1] = self.h_max;
        pts
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridOutcome {
    pub h: f64,
    pub loss: f64,
    /// `(h, loss)` at every grid point.
    pub trace: Vec<(f64, f64)>,
}

/// Exhaustive scan; ties go to the smallest `h`.
pub fn grid_search<F>(grid: &GridConfig, mut loss: F) -> Result<GridOutcome>
where
    F: FnMut(f64) -> Result<f64>,
{
    grid.validate()?;
    let mut trace = Vec::with_capacity(grid.count);
    let mut best: Option<(f64, f64)> = None;
    for h in grid.points() {
        let l = loss(h)?;
        if !l.is_finite() {
            return Err(Error::Numeric(format!("loss is not finite at h = {h}")));
        }
        trace.push((h, l));
        if best.map_or(true, |(_, b)| l < b) {
            best = Some((h, l));
        }
    }
    let (h, loss) = best.expect("non-empty grid");
    Ok(GridOutcome { h, loss, trace })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_grid_layout() {
        let pts = GridConfig::default().points();
        assert_eq!(pts.len(), 500);
        assert_eq!(pts[0], 1e-100);
        assert_eq!(pts[499], 10.0);
        assert!((pts[1] - 10.0 / 499.0).abs() < 1e-15);
        assert!(pts.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn explicit_bounds() {
        let pts = GridConfig { h_min: 1.0, h_max: 3.0, count: 5 }.points();
        assert_eq!(pts, vec![1.0, 1.5, 2.0, 2.5, 3.0]);
    }

    #[test]
    fn single_point_grid() {
        let g = GridConfig { h_min: 0.7, h_max: 0.7, count: 1 };
        let out = grid_search(&g, |h| Ok(h * 2.0)).unwrap();
        assert_eq!((out.h, out.loss), (0.7, 1.4));
    }

    #[test]
    fn minimum_and_ties() {
        let g = GridConfig { h_min: 1.0, h_max: 5.0, count: 5 };
        let out = grid_search(&g, |h| Ok((h - 3.0) * (h - 3.0))).unwrap();
        assert_eq!(out.h, 3.0);
        let min = out.trace.iter().map(|t| t.1).fold(f64::INFINITY, f64::min);
        assert_eq!(out.loss, min);
        // symmetric loss: 2 and 4 tie, 2 wins
        let out = grid_search(&g, |h| Ok(((h - 3.0) * (h - 3.0) - 1.0).abs())).unwrap();
        assert_eq!(out.h, 2.0);
    }

    #[test]
    fn invalid_grids() {
        assert!(GridConfig { h_min: 0.0, h_max: 1.0, count: 3 }.validate().is_err());
        assert!(GridConfig { h_min: 2.0, h_max: 1.0, count: 3 }.validate().is_err());
        assert!(GridConfig { h_min: 1.0, h_max: 2.0, count: 0 }.validate().is_err());
    }
}
