use serde::{Deserialize, Serialize};

use super::{check_indices, Match, MatchError};
use crate::features::Keypoint;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GmsParams {
    pub grid_cols: usize,
    pub grid_rows: usize,
    pub alpha: f64,
    pub with_rotation: bool,
    pub with_scale: bool,
}

impl Default for GmsParams {
    fn default() -> Self {
        Self {
            grid_cols: 20,
            grid_rows: 20,
            alpha: 6.0,
            with_rotation: false,
            with_scale: false,
        }
    }
}

impl GmsParams {
    fn validate(&self) -> Result<(), MatchError> {
        if self.grid_cols < 4 || self.grid_rows < 4 {
            return Err(MatchError::InvalidParams("grid must be at least 4x4".into()));
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return Err(MatchError::InvalidParams("alpha must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GmsOutcome {
    pub matches: Vec<Match>,
    /// Set when every match fell into one cell; the input is passed through.
    pub degenerate: bool,
}

/// Score of one left cell against its best right cell for a single grid pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CellScore {
    pub left_cell: usize,
    pub right_cell: usize,
    pub score: f64,
    pub threshold: f64,
}

// Neighbour k of the left 3x3 block maps to ROTATION_PATTERNS[r][k] - 1 on the right.
const ROTATION_PATTERNS: [[usize; 9]; 8] = [
    [1, 2, 3, 4, 5, 6, 7, 8, 9],
    [4, 1, 2, 7, 5, 3, 8, 9, 6],
    [7, 4, 1, 8, 5, 2, 9, 6, 3],
    [8, 7, 4, 9, 5, 1, 6, 3, 2],
    [9, 8, 7, 6, 5, 4, 3, 2, 1],
    [6, 9, 8, 3, 5, 7, 2, 1, 4],
    [3, 6, 9, 2, 5, 8, 1, 4, 7],
    [2, 3, 6, 1, 5, 9, 4, 7, 8],
];
const SCALE_RATIOS: [f64; 5] = [1.0, 0.5, std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::SQRT_2, 2.0];
const SHIFTS: [(f64, f64); 4] = [(0.0, 0.0), (0.5, 0.0), (0.0, 0.5), (0.5, 0.5)];

struct Grid {
    cols: usize,
    rows: usize,
}

impl Grid {
    fn len(&self) -> usize {
        self.cols * self.rows
    }

    // Cell of a normalised position, or None when the shift pushes it off the grid.
    fn cell(&self, u: f64, v: f64, shift: (f64, f64)) -> Option<usize> {
        let gx = u * self.cols as f64 + shift.0;
        let gy = v * self.rows as f64 + shift.1;
        if gx < 0.0 || gy < 0.0 {
            return None;
        }
        let (cx, cy) = (gx.floor() as usize, gy.floor() as usize);
        if shift == (0.0, 0.0) {
            Some(cy.min(self.rows - 1) * self.cols + cx.min(self.cols - 1))
        } else if cx >= self.cols || cy >= self.rows {
            None
        } else {
            Some(cy * self.cols + cx)
        }
    }

    // 3x3 neighbourhood in row-major order; off-grid entries are None.
    fn neighbours(&self, cell: usize) -> [Option<usize>; 9] {
        let (cx, cy) = ((cell % self.cols) as isize, (cell / self.cols) as isize);
        let mut out = [None; 9];
        for (k, slot) in out.iter_mut().enumerate() {
            let x = cx + (k % 3) as isize - 1;
            let y = cy + (k / 3) as isize - 1;
            if x >= 0 && y >= 0 && (x as usize) < self.cols && (y as usize) < self.rows {
                *slot = Some(y as usize * self.cols + x as usize);
            }
        }
        out
    }
}

struct Pass {
    left_cells: Vec<Option<usize>>,
    right_cells: Vec<Option<usize>>,
    scores: Vec<CellScore>,
}

fn normalised(kps: &[Keypoint], size: (usize, usize)) -> Vec<(f64, f64)> {
    kps.iter()
        .map(|k| (k.x as f64 / size.0 as f64, k.y as f64 / size.1 as f64))
        .collect()
}

fn run_pass(
    matches: &[Match],
    pa: &[(f64, f64)],
    pb: &[(f64, f64)],
    left: &Grid,
    right: &Grid,
    shift: (f64, f64),
    pattern: &[usize; 9],
    alpha: f64,
) -> Pass {
    let left_cells: Vec<Option<usize>> = matches
        .iter()
        .map(|m| left.cell(pa[m.query_idx].0, pa[m.query_idx].1, shift))
        .collect();
    let right_cells: Vec<Option<usize>> = matches
        .iter()
        .map(|m| right.cell(pb[m.train_idx].0, pb[m.train_idx].1, (0.0, 0.0)))
        .collect();

    let mut per_left = vec![0u32; left.len()];
    let mut motion = vec![0u32; left.len() * right.len()];
    for (l, r) in left_cells.iter().zip(&right_cells) {
        if let (Some(l), Some(r)) = (l, r) {
            per_left[*l] += 1;
            motion[l * right.len() + r] += 1;
        }
    }

    let mut scores = Vec::new();
    for i in 0..left.len() {
        if per_left[i] == 0 {
            continue;
        }
        let row = &motion[i * right.len()..(i + 1) * right.len()];
        let mut best = 0;
        for (j, &c) in row.iter().enumerate() {
            if c > row[best] {
                best = j;
            }
        }
        let ln = left.neighbours(i);
        let rn = right.neighbours(best);
        let mut support = 0u32;
        let mut in_bounds = 0u32;
        let mut cell_total = 0u32;
        for k in 0..9 {
            if let Some(li) = ln[k] {
                in_bounds += 1;
                cell_total += per_left[li];
                if let Some(rj) = rn[pattern[k] - 1] {
                    support += motion[li * right.len() + rj];
                }
            }
        }
        let mean = cell_total as f64 / in_bounds as f64;
        scores.push(CellScore {
            left_cell: i,
            right_cell: best,
            score: support as f64 - 1.0,
            threshold: alpha * mean.sqrt(),
        });
    }
    Pass {
        left_cells,
        right_cells,
        scores,
    }
}

/// Per-cell scores for one grid pass with the base pattern and scale.
/// `shift` is one of the half-cell offsets `0..4`.
pub fn gms_cell_scores(
    matches: &[Match],
    kps_a: &[Keypoint],
    kps_b: &[Keypoint],
    size_a: (usize, usize),
    size_b: (usize, usize),
    params: &GmsParams,
    shift: usize,
) -> Result<Vec<CellScore>, MatchError> {
    params.validate()?;
    check_indices(matches, kps_a.len(), kps_b.len())?;
    let grid = Grid {
        cols: params.grid_cols,
        rows: params.grid_rows,
    };
    let right = Grid {
        cols: params.grid_cols,
        rows: params.grid_rows,
    };
    let pass = run_pass(
        matches,
        &normalised(kps_a, size_a),
        &normalised(kps_b, size_b),
        &grid,
        &right,
        SHIFTS[shift % 4],
        &ROTATION_PATTERNS[0],
        params.alpha,
    );
    Ok(pass.scores)
}

pub fn filter_gms(
    matches: &[Match],
    kps_a: &[Keypoint],
    kps_b: &[Keypoint],
    size_a: (usize, usize),
    size_b: (usize, usize),
    params: &GmsParams,
) -> Result<GmsOutcome, MatchError> {
    params.validate()?;
    if matches.is_empty() {
        return Err(MatchError::Empty);
    }
    check_indices(matches, kps_a.len(), kps_b.len())?;
    let pa = normalised(kps_a, size_a);
    let pb = normalised(kps_b, size_b);
    let left = Grid {
        cols: params.grid_cols,
        rows: params.grid_rows,
    };

    let base_cells: Vec<Option<usize>> = matches
        .iter()
        .map(|m| left.cell(pa[m.query_idx].0, pa[m.query_idx].1, (0.0, 0.0)))
        .collect();
    if base_cells.iter().all(|c| *c == base_cells[0]) {
        log::warn!("gms: all {} matches fall in one cell, passing through", matches.len());
        return Ok(GmsOutcome {
            matches: matches.to_vec(),
            degenerate: true,
        });
    }

    let scales: &[f64] = if params.with_scale { &SCALE_RATIOS } else { &SCALE_RATIOS[..1] };
    let patterns: &[[usize; 9]] = if params.with_rotation {
        &ROTATION_PATTERNS
    } else {
        &ROTATION_PATTERNS[..1]
    };

    let mut best_mask: Option<Vec<bool>> = None;
    let mut best_count = 0;
    for &scale in scales {
        let right = Grid {
            cols: ((params.grid_cols as f64 * scale).round() as usize).max(1),
            rows: ((params.grid_rows as f64 * scale).round() as usize).max(1),
        };
        for pattern in patterns {
            let mut mask = vec![false; matches.len()];
            for &shift in &SHIFTS {
                let pass = run_pass(matches, &pa, &pb, &left, &right, shift, pattern, params.alpha);
                let mut accepted = vec![usize::MAX; left.len()];
                for s in pass.scores.iter().filter(|s| s.score > s.threshold) {
                    accepted[s.left_cell] = s.right_cell;
                }
                for (k, flag) in mask.iter_mut().enumerate() {
                    if let (Some(l), Some(r)) = (pass.left_cells[k], pass.right_cells[k]) {
                        if accepted[l] == r {
                            *flag = true;
                        }
                    }
                }
            }
            let count = mask.iter().filter(|&&f| f).count();
            if best_mask.is_none() || count > best_count {
                best_count = count;
                best_mask = Some(mask);
            }
        }
    }
    let mask = best_mask.unwrap_or_default();
    Ok(GmsOutcome {
        matches: matches
            .iter()
            .zip(&mask)
            .filter(|(_, &keep)| keep)
            .map(|(m, _)| *m)
            .collect(),
        degenerate: false,
    })
}
