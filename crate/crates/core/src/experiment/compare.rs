//! Baseline ratios, unit-level contours and rank correlation.

use serde::{Deserialize, Serialize};

use super::aggregate::CellRecord;
use super::run::SweepResult;
use super::ExperimentError;

/// Ratio of mean rerostering costs; `None` when the denominator is zero or
/// either side is missing.
pub fn cost_ratio(numerator: &CellRecord, denominator: &CellRecord) -> Option<f64> {
    let (a, b) = (numerator.mean_reroster_cost?, denominator.mean_reroster_cost?);
    (b != 0.0).then(|| a / b)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContourSegment {
    /// `(rfpr, tpr)` end points.
    pub from: (f64, f64),
    pub to: (f64, f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioGrid {
    pub k: u32,
    pub tpr_values: Vec<f64>,
    pub rfpr_values: Vec<f64>,
    /// `ratios[i][j]` for `tpr_values[i]`, `rfpr_values[j]`.
    pub ratios: Vec<Vec<Option<f64>>>,
    /// Segments of the level set `ratio = 1`.
    pub contour: Vec<ContourSegment>,
}

impl RatioGrid {
    pub fn write_csv(&self, path: impl AsRef<std::path::Path>) -> Result<(), ExperimentError> {
        let path = path.as_ref();
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["tpr", "rfpr", "ratio"])?;
        for (i, &t) in self.tpr_values.iter().enumerate() {
            for (j, &r) in self.rfpr_values.iter().enumerate() {
                w.write_record([t.to_string(), r.to_string(), self.ratios[i][j].map(|v| v.to_string()).unwrap_or_default()])?;
            }
        }
        w.flush().map_err(|e| ExperimentError::io(path, e))
    }
}

/// Per-cell mean rerostering cost divided by that of baseline `k`, with the
/// `ratio = 1` contour.
pub fn compare_to_baseline(sweep: &SweepResult, k: u32) -> Result<RatioGrid, ExperimentError> {
    let label = format!("fixed-{k}");
    let base = sweep
        .cells
        .iter()
        .find(|c| c.policy == label)
        .ok_or(ExperimentError::MissingBaseline(k))?;
    if base.mean_reroster_cost == Some(0.0) {
        return Err(ExperimentError::ZeroBaseline(k));
    }
    let tprs = sweep.config.tpr_values.clone();
    let rfprs = sweep.config.rfpr_values.clone();
    let mut ratios = vec![vec![None; rfprs.len()]; tprs.len()];
    for c in sweep.cells.iter().filter(|c| c.policy == "ml") {
        let (Some(t), Some(r)) = (c.tpr, c.rfpr) else { continue };
        let i = tprs.iter().position(|&v| v == t);
        let j = rfprs.iter().position(|&v| v == r);
        if let (Some(i), Some(j)) = (i, j) {
            ratios[i][j] = cost_ratio(c, base);
        }
    }
    let contour = marching_squares(&rfprs, &tprs, &ratios, 1.0);
    Ok(RatioGrid {
        k,
        tpr_values: tprs,
        rfpr_values: rfprs,
        ratios,
        contour,
    })
}

/// Level-set segments of `values[i][j]` (row `i` at `ys[i]`, column `j` at
/// `xs[j]`) by marching squares with linear interpolation. Squares with a
/// missing corner are skipped; saddles are split by the centre average.
pub fn marching_squares(xs: &[f64], ys: &[f64], values: &[Vec<Option<f64>>], level: f64) -> Vec<ContourSegment> {
    let mut out = Vec::new();
    for i in 0..ys.len().saturating_sub(1) {
        for j in 0..xs.len().saturating_sub(1) {
            let corners = [
                (xs[j], ys[i], values[i][j]),
                (xs[j + 1], ys[i], values[i][j + 1]),
                (xs[j + 1], ys[i + 1], values[i + 1][j + 1]),
                (xs[j], ys[i + 1], values[i + 1][j]),
            ];
            let Some(v) = corners.iter().map(|c| c.2).collect::<Option<Vec<f64>>>() else {
                continue;
            };
            // Edge e joins corners e and e+1.
            let crossing = |e: usize| -> Option<(f64, f64)> {
                let (a, b) = (e, (e + 1) % 4);
                let (va, vb) = (v[a] - level, v[b] - level);
                if (va < 0.0) == (vb < 0.0) {
                    return None;
                }
                let t = va / (va - vb);
                let (ax, ay, _) = corners[a];
                let (bx, by, _) = corners[b];
                Some((ax + t * (bx - ax), ay + t * (by - ay)))
            };
            let points: Vec<(usize, (f64, f64))> = (0..4).filter_map(|e| crossing(e).map(|p| (e, p))).collect();
            match points.len() {
                2 => out.push(ContourSegment {
                    from: points[0].1,
                    to: points[1].1,
                }),
                4 => {
                    let centre = v.iter().sum::<f64>() / 4.0 - level;
                    let corner0_below = v[0] < level;
                    // Pair edges so that corner 0 is cut off alone unless the
                    // centre shares its side.
                    let (p, q) = if (centre < 0.0) == corner0_below {
                        ((0, 1), (2, 3))
                    } else {
                        ((3, 0), (1, 2))
                    };
                    out.push(ContourSegment {
                        from: points[p.0].1,
                        to: points[p.1].1,
                    });
                    out.push(ContourSegment {
                        from: points[q.0].1,
                        to: points[q.1].1,
                    });
                }
                _ => {}
            }
        }
    }
    out
}

fn ranks(v: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| v[a].total_cmp(&v[b]));
    let mut r = vec![0.0; v.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && v[idx[j + 1]] == v[idx[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &k in &idx[i..=j] {
            r[k] = avg;
        }
        i = j + 1;
    }
    r
}

/// Spearman rank correlation with average ranks for ties. `None` for fewer
/// than two points or a constant input.
pub fn spearman(x: &[f64], y: &[f64]) -> Option<f64> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let (rx, ry) = (ranks(x), ranks(y));
    let n = x.len() as f64;
    let (mx, my) = (rx.iter().sum::<f64>() / n, ry.iter().sum::<f64>() / n);
    let mut sxy = 0.0;
    let mut sxx = 0.0;
    let mut syy = 0.0;
    for (a, b) in rx.iter().zip(&ry) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx).powi(2);
        syy += (b - my).powi(2);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}
