use super::{SweepError, SweepRow};

pub const DEFAULT_THRESHOLD_FACTOR: f64 = 20.0;
/// Lower bound on the median so that flat columns never flag rounding noise.
pub const MEDIAN_FLOOR: f64 = 1e-12;

/// A discontinuity between two grid values.
///
/// Runs of consecutive flagged pairs are reported as one jump spanning the
/// whole run; `location` is the midpoint of its steepest pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jump {
    pub lo: f64,
    pub hi: f64,
    /// `y(hi) − y(lo)` across the interval.
    pub difference: f64,
    pub location: f64,
    /// Indices of the bracketing rows.
    pub lo_index: usize,
    pub hi_index: usize,
}

impl Jump {
    pub fn size(&self) -> f64 {
        self.difference.abs()
    }

    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }
}

/// Flags adjacent pairs whose difference in `column` exceeds
/// `threshold_factor` times the median absolute adjacent difference.
pub fn detect_jumps(rows: &[SweepRow], column: &str, threshold_factor: f64) -> Result<Vec<Jump>, SweepError> {
    if rows.len() < 4 {
        return Err(SweepError::TooFewRows(rows.len()));
    }
    let values: Vec<f64> = rows
        .iter()
        .map(|r| r.column(column).ok_or_else(|| SweepError::Column(column.to_string())))
        .collect::<Result<_, _>>()?;
    let diffs: Vec<f64> = values.windows(2).map(|w| w[1] - w[0]).collect();
    let mut finite: Vec<f64> = diffs.iter().filter(|d| d.is_finite()).map(|d| d.abs()).collect();
    if finite.is_empty() {
        return Ok(Vec::new());
    }
    finite.sort_by(f64::total_cmp);
    let mid = finite.len() / 2;
    let median = if finite.len() % 2 == 1 {
        finite[mid]
    } else {
        0.5 * (finite[mid - 1] + finite[mid])
    };
    let threshold = threshold_factor * median.max(MEDIAN_FLOOR);

    let flagged: Vec<bool> = diffs.iter().map(|d| d.is_finite() && d.abs() > threshold).collect();
    let mut jumps = Vec::new();
    let mut k = 0;
    while k < flagged.len() {
        if !flagged[k] {
            k += 1;
            continue;
        }
        let first = k;
        while k + 1 < flagged.len() && flagged[k + 1] {
            k += 1;
        }
        let last = k;
        let steepest = (first..=last)
            .max_by(|&a, &b| diffs[a].abs().total_cmp(&diffs[b].abs()))
            .expect("nonempty run");
        jumps.push(Jump {
            lo: rows[first].grid_value,
            hi: rows[last + 1].grid_value,
            difference: values[last + 1] - values[first],
            location: 0.5 * (rows[steepest].grid_value + rows[steepest + 1].grid_value),
            lo_index: first,
            hi_index: last + 1,
        });
        k += 1;
    }
    Ok(jumps)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sweep::Model;

    fn rows(xs: &[f64], ys: &[f64]) -> Vec<SweepRow> {
        xs.iter()
            .zip(ys)
            .map(|(&x, &y)| SweepRow {
                model: Model::Lz,
                n_sites: 1,
                param: "lambda".into(),
                grid_value: x,
                delta: 1e-5,
                e0_i: 0.0,
                e0_f: 0.0,
                avg_work: 0.0,
                delta_u: 0.0,
                irr_work: 0.0,
                variance: 0.0,
                avg_work_per_delta: y,
                irr_per_delta2: 0.0,
                eq2_discrepancy: 0.0,
                flags: vec![],
            })
            .collect()
    }

    #[test]
    fn step_function() {
        let xs: Vec<f64> = (0..10).map(f64::from).collect();
        let ys: Vec<f64> = xs.iter().map(|&x| if x < 4.5 { 1.0 } else { -1.0 }).collect();
        let j = detect_jumps(&rows(&xs, &ys), "avg_work_per_delta", 20.0).unwrap();
        assert_eq!(j.len(), 1);
        assert_eq!((j[0].lo, j[0].hi), (4.0, 5.0));
        assert_eq!(j[0].difference, -2.0);
        assert_eq!(j[0].size(), 2.0);
        assert!(j[0].contains(4.5));
    }

    #[test]
    fn constant_and_linear_columns_have_no_jumps() {
        let xs: Vec<f64> = (0..20).map(f64::from).collect();
        assert!(detect_jumps(&rows(&xs, &[3.0; 20]), "avg_work_per_delta", 20.0)
            .unwrap()
            .is_empty());
        let lin: Vec<f64> = xs.iter().map(|x| 0.1 * x).collect();
        assert!(detect_jumps(&rows(&xs, &lin), "avg_work_per_delta", 20.0)
            .unwrap()
            .is_empty());
    }

    #[test]
    fn contiguous_flags_merge() {
        let xs: Vec<f64> = (0..12).map(f64::from).collect();
        let mut ys = vec![0.0; 12];
        for (i, y) in ys.iter_mut().enumerate() {
            *y = 0.01 * i as f64;
        }
        ys[5] += 5.0;
        ys[6] += 3.0;
        let j = detect_jumps(&rows(&xs, &ys), "avg_work_per_delta", 20.0).unwrap();
        assert_eq!(j.len(), 1);
        assert_eq!((j[0].lo, j[0].hi), (4.0, 7.0));
        assert_eq!(j[0].location, 4.5);
    }

    #[test]
    fn nan_rows_are_skipped() {
        let xs: Vec<f64> = (0..8).map(f64::from).collect();
        let ys = [1.0, 1.0, f64::NAN, 1.0, 1.0, -1.0, -1.0, -1.0];
        let j = detect_jumps(&rows(&xs, &ys), "avg_work_per_delta", 20.0).unwrap();
        assert_eq!(j.len(), 1);
        assert_eq!(j[0].lo, 4.0);
    }

    #[test]
    fn errors() {
        let xs = [0.0, 1.0, 2.0];
        assert_eq!(
            detect_jumps(&rows(&xs, &xs), "avg_work_per_delta", 20.0),
            Err(SweepError::TooFewRows(3))
        );
        let xs = [0.0, 1.0, 2.0, 3.0];
        assert!(matches!(
            detect_jumps(&rows(&xs, &xs), "flags", 20.0),
            Err(SweepError::Column(_))
        ));
    }
}
