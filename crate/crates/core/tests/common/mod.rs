#![allow(dead_code)]

//! Independent reference implementations used by the integration and
//! acceptance tests. Nothing here calls into the crate's feature or
//! combiner code.

use texture_ensemble::classifiers::{Label, Prediction};
use texture_ensemble::seed::SplitMix64;

/// Raw co-occurrence count table built by enumerating every pixel and
/// checking whether its partner lies inside the image.
pub fn oracle_counts(w: usize, h: usize, px: &[u8], g: usize, dx: i32, dy: i32, symmetric: bool) -> Vec<Vec<u64>> {
    let mut t = vec![vec![0u64; g]; g];
    for y in 0..h as i32 {
        for x in 0..w as i32 {
            let (nx, ny) = (x + dx, y + dy);
            if nx < 0 || ny < 0 || nx >= w as i32 || ny >= h as i32 {
                continue;
            }
            let a = px[(y as usize) * w + x as usize] as usize;
            let b = px[(ny as usize) * w + nx as usize] as usize;
            t[a][b] += 1;
            if symmetric {
                t[b][a] += 1;
            }
        }
    }
    t
}

/// `[energy, contrast, homogeneity, entropy, correlation]` straight from
/// the textbook definitions over a count table.
pub fn oracle_features(counts: &[Vec<u64>]) -> [f64; 5] {
    let g = counts.len();
    let total: u64 = counts.iter().flatten().sum();
    let p = |i: usize, j: usize| counts[i][j] as f64 / total as f64;
    let (mut energy, mut contrast, mut homog, mut entropy) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..g {
        for j in 0..g {
            let v = p(i, j);
            let d = i as f64 - j as f64;
            energy += v * v;
            contrast += d * d * v;
            homog += v / (1.0 + d * d);
            if v > 0.0 {
                entropy -= v * v.log2();
            }
        }
    }
    let row: Vec<f64> = (0..g).map(|i| (0..g).map(|j| p(i, j)).sum()).collect();
    let col: Vec<f64> = (0..g).map(|j| (0..g).map(|i| p(i, j)).sum()).collect();
    let mean = |m: &[f64]| m.iter().enumerate().map(|(i, v)| i as f64 * v).sum::<f64>();
    let (mx, my) = (mean(&row), mean(&col));
    let sd = |m: &[f64], mu: f64| m.iter().enumerate().map(|(i, v)| (i as f64 - mu).powi(2) * v).sum::<f64>().sqrt();
    let (sx, sy) = (sd(&row, mx), sd(&col, my));
    let corr = if sx * sy < 1e-12 {
        0.0
    } else {
        let mut c = 0.0;
        for i in 0..g {
            for j in 0..g {
                c += (i as f64 - mx) * (j as f64 - my) * p(i, j);
            }
        }
        c / (sx * sy)
    };
    [energy, contrast, homog, entropy, corr]
}

/// `|a - b| <= tol * max(1, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

pub fn random_levels(rng: &mut SplitMix64, n: usize, g: usize) -> Vec<u8> {
    (0..n).map(|_| rng.below(g as u64) as u8).collect()
}

/// Majority vote by explicit counting over every candidate label.
/// Among labels with the top count, the one whose first vote comes
/// earliest wins.
pub fn reference_vote(row: &[Option<usize>]) -> (Option<usize>, f64) {
    let voters = row.iter().filter(|l| l.is_some()).count();
    if voters == 0 {
        return (None, 0.0);
    }
    let count = |c: usize| row.iter().filter(|l| **l == Some(c)).count();
    let first = |c: usize| row.iter().position(|l| *l == Some(c)).unwrap();
    let candidates: Vec<usize> = row.iter().flatten().copied().collect();
    let best = candidates.iter().map(|&c| count(c)).max().unwrap();
    let winner = candidates
        .iter()
        .copied()
        .filter(|&c| count(c) == best)
        .min_by_key(|&c| first(c))
        .unwrap();
    (Some(winner), best as f64 / voters as f64)
}

/// Walks models in order and stops at the first that answered; the last
/// model is returned whatever it said.
pub fn reference_cascade(row: &[Option<usize>]) -> Option<usize> {
    for (k, l) in row.iter().enumerate() {
        if l.is_some() || k == row.len() - 1 {
            return *l;
        }
    }
    unreachable!()
}

pub fn to_predictions(row: &[Option<usize>]) -> Vec<Prediction> {
    row.iter()
        .enumerate()
        .map(|(k, l)| match l {
            Some(c) => Prediction::new(*c, 0.5 + k as f64 / 20.0),
            None => Prediction::unknown(0.1),
        })
        .collect()
}

pub fn label_option(l: Label) -> Option<usize> {
    match l {
        Label::Class(c) => Some(c),
        Label::Unknown => None,
    }
}

/// Every assignment of `alphabet` symbols to `slots` positions, in
/// lexicographic order.
pub fn all_assignments(slots: usize, alphabet: &[Option<usize>]) -> Vec<Vec<Option<usize>>> {
    let mut out = vec![Vec::new()];
    for _ in 0..slots {
        out = out
            .into_iter()
            .flat_map(|prefix: Vec<Option<usize>>| {
                alphabet.iter().map(move |a| {
                    let mut p = prefix.clone();
                    p.push(*a);
                    p
                })
            })
            .collect();
    }
    out
}
