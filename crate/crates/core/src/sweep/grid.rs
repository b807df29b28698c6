use std::fmt;
use std::str::FromStr;

use super::SweepError;

/// Equally spaced grid `start, …, stop` with `steps` points, both ends included.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub start: f64,
    pub stop: f64,
    pub steps: usize,
}

impl Grid {
    pub fn new(start: f64, stop: f64, steps: usize) -> Result<Self, SweepError> {
        let g = Self { start, stop, steps };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<(), SweepError> {
        if !self.start.is_finite() || !self.stop.is_finite() {
            return Err(SweepError::Grid("endpoints must be finite".into()));
        }
        if self.start >= self.stop {
            return Err(SweepError::Grid(format!(
                "start {} must be below stop {}",
                self.start, self.stop
            )));
        }
        if self.steps < 2 {
            return Err(SweepError::Grid(format!(
                "steps must be at least 2, got {}",
                self.steps
            )));
        }
        Ok(())
    }

    pub fn spacing(&self) -> f64 {
        (self.stop - self.start) / (self.steps - 1) as f64
    }

    pub fn point(&self, i: usize) -> f64 {
        if i + 1 == self.steps {
            return self.stop;
        }
        self.start + (self.stop - self.start) * i as f64 / (self.steps - 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.steps).map(|i| self.point(i)).collect()
    }

    /// Grid points with every point for which `degenerate` holds moved up by
    /// half a spacing. The flag records whether the point was moved.
    pub fn points_nudged(&self, degenerate: impl Fn(f64) -> bool) -> Vec<(f64, bool)> {
        let half = 0.5 * self.spacing();
        self.points()
            .into_iter()
            .map(|x| if degenerate(x) { (x + half, true) } else { (x, false) })
            .collect()
    }
}

impl FromStr for Grid {
    type Err = SweepError;

    /// Parses `start:stop:steps`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let parts: Vec<&str> = s.split(':').collect();
        let [a, b, n] = parts.as_slice() else {
            return Err(SweepError::Grid(format!("expected start:stop:steps, got {s:?}")));
        };
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| SweepError::Grid(format!("{t:?} is not a number")))
        };
        let steps = n
            .trim()
            .parse::<usize>()
            .map_err(|_| SweepError::Grid(format!("{n:?} is not a step count")))?;
        Grid::new(num(a)?, num(b)?, steps)
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.start, self.stop, self.steps)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_and_points() {
        let g: Grid = "-3:3:121".parse().unwrap();
        assert_eq!(g.steps, 121);
        assert!((g.spacing() - 0.05).abs() < 1e-15);
        let p = g.points();
        assert_eq!(p[0], -3.0);
        assert_eq!(p[20], -2.0);
        assert_eq!(p[60], 0.0);
        assert_eq!(p[120], 3.0);
        assert_eq!(g.to_string().parse::<Grid>().unwrap(), g);
    }

    #[test]
    fn rejects_bad_grids() {
        for bad in ["1:0:5", "0:1:1", "0:1", "a:1:3", "0:1:-2", "0:inf:4", "0:1:2:3"] {
            assert!(bad.parse::<Grid>().is_err(), "{bad}");
        }
    }

    #[test]
    fn nudging_moves_by_half_a_step() {
        let g = Grid::new(0.5, 1.5, 101).unwrap();
        let pts = g.points_nudged(|x| x == 1.0);
        assert_eq!(pts.iter().filter(|p| p.1).count(), 1);
        assert!((pts[50].0 - 1.005).abs() < 1e-15);
        assert_eq!(pts[49], (g.point(49), false));
    }
}
