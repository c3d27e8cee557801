use nalgebra::DMatrix;
use serde::Serialize;

use super::{Result, TeleportError};

const SUPPORT_EPS: f64 = 1e-9;

/// A rank-one block `v vᵀ` on a set of coordinates.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectorBlock {
    pub coords: Vec<usize>,
    /// Non-negative unit vector on `coords`.
    pub vector: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectorBlocks {
    pub dim: usize,
    pub blocks: Vec<ProjectorBlock>,
    pub zero_coords: Vec<usize>,
    /// `max |P − Σ v vᵀ|`.
    pub reassembly_residual: f64,
    /// Rounded trace of `P`.
    pub rank: usize,
}

impl ProjectorBlocks {
    pub fn reassemble(&self) -> DMatrix<f64> {
        let mut p = DMatrix::zeros(self.dim, self.dim);
        for b in &self.blocks {
            for (x, &a) in b.coords.iter().enumerate() {
                for (y, &c) in b.coords.iter().enumerate() {
                    p[(a, c)] = b.vector[x] * b.vector[y];
                }
            }
        }
        p
    }

    /// One block per unit of rank, every coordinate accounted for.
    pub fn consistent(&self) -> bool {
        let covered: usize = self.blocks.iter().map(|b| b.coords.len()).sum::<usize>() + self.zero_coords.len();
        self.blocks.len() == self.rank && covered == self.dim
    }
}

/// Splits a projector with non-negative entries into zero and rank-one blocks.
pub fn nonneg_projector_blocks(p: &DMatrix<f64>) -> Result<ProjectorBlocks> {
    let n = p.nrows();
    if p.ncols() != n {
        return Err(TeleportError::NotProjector { residual: f64::INFINITY });
    }
    let idem = (p * p - p).abs().max();
    if idem > 1e-8 {
        return Err(TeleportError::NotProjector { residual: idem });
    }
    if let Some(&neg) = p.iter().find(|&&x| x < -1e-12) {
        return Err(TeleportError::NegativeEntry(neg));
    }
    let mut label = vec![usize::MAX; n];
    let mut zero_coords = Vec::new();
    let mut blocks = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        if p[(start, start)] <= SUPPORT_EPS {
            label[start] = usize::MAX - 1;
            zero_coords.push(start);
            continue;
        }
        let id = blocks.len();
        let mut coords = vec![start];
        label[start] = id;
        let mut head = 0;
        while head < coords.len() {
            let a = coords[head];
            head += 1;
            for b in 0..n {
                if label[b] == usize::MAX && p[(a, b)] > SUPPORT_EPS && p[(b, b)] > SUPPORT_EPS {
                    label[b] = id;
                    coords.push(b);
                }
            }
        }
        coords.sort_unstable();
        let vector = coords.iter().map(|&a| p[(a, a)].sqrt()).collect();
        blocks.push(ProjectorBlock { coords, vector });
    }
    let mut out =
        ProjectorBlocks { dim: n, blocks, zero_coords, reassembly_residual: 0.0, rank: p.trace().round() as usize };
    out.reassembly_residual = (out.reassemble() - p).abs().max();
    Ok(out)
}
