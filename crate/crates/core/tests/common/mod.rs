//! Reference implementations shared by the integration tests. Nothing here
//! calls into the code paths it is used to check.

#![allow(dead_code)]

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const CLUSTER_A: [&str; 10] = [
    "kare", "kyanwa", "doki", "saniya", "akuya", "tunkiya", "jaki", "raƙumi", "zaki", "giwa",
];
pub const CLUSTER_B: [&str; 10] = [
    "mota", "jirgi", "keke", "babur", "tasi", "bas", "kwale", "tirela", "tarakta", "ɗinki",
];

/// `n` sentences of eight words each, alternating between the two clusters,
/// every word drawn uniformly from the sentence's cluster.
pub fn planted_corpus(n: usize, seed: u64) -> Vec<Vec<String>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|i| {
            let cluster: &[&str] = if i % 2 == 0 { &CLUSTER_A } else { &CLUSTER_B };
            (0..8)
                .map(|_| cluster.choose(&mut rng).unwrap().to_string())
                .collect()
        })
        .collect()
}

fn softplus(x: f64) -> f64 {
    // ln(1 + e^x) without overflow
    x.max(0.0) + (-x.abs()).exp().ln_1p()
}

/// `-ln σ(t·h) - Σ ln σ(-n·h)` written out from scratch.
pub fn ns_loss(h: &[f64], target: &[f64], negatives: &[&[f64]]) -> f64 {
    let dot = |a: &[f64], b: &[f64]| -> f64 { a.iter().zip(b).map(|(x, y)| x * y).sum() };
    let mut loss = softplus(-dot(target, h));
    for n in negatives {
        loss += softplus(dot(n, h));
    }
    loss
}

/// Central difference of `f` at `x[i]`.
pub fn central_difference<F: FnMut(&[f64]) -> f64>(x: &[f64], i: usize, eps: f64, mut f: F) -> f64 {
    let mut p = x.to_vec();
    p[i] = x[i] + eps;
    let up = f(&p);
    p[i] = x[i] - eps;
    let down = f(&p);
    (up - down) / (2.0 * eps)
}

/// `|a - n| / max(|a|, |n|, 1e-6)`.
pub fn relative_error(a: f64, n: f64) -> f64 {
    (a - n).abs() / a.abs().max(n.abs()).max(1e-6)
}

/// Cosine in f64, accumulated in index order.
pub fn brute_cosine(u: &[f32], v: &[f32]) -> Option<f64> {
    let mut uv = 0.0f64;
    let mut uu = 0.0f64;
    let mut vv = 0.0f64;
    for (&x, &y) in u.iter().zip(v) {
        let (x, y) = (x as f64, y as f64);
        uv += x * y;
        uu += x * x;
        vv += y * y;
    }
    if uu == 0.0 || vv == 0.0 {
        return None;
    }
    Some((uv / (uu.sqrt() * vv.sqrt())).clamp(-1.0, 1.0))
}

/// Scores every other non-zero row, sorts by score descending then word
/// ascending, keeps the first `k`.
pub fn brute_top_k(
    words: &[String],
    rows: &[Vec<f32>],
    query: usize,
    k: usize,
) -> Vec<(String, f64)> {
    let mut all: Vec<(String, f64)> = (0..rows.len())
        .filter(|&j| j != query)
        .filter_map(|j| brute_cosine(&rows[query], &rows[j]).map(|s| (words[j].clone(), s)))
        .collect();
    all.sort_by(|a, b| b.1.partial_cmp(&a.1).unwrap().then_with(|| a.0.cmp(&b.0)));
    all.truncate(k);
    all
}

/// A random model with some rows copied (exact ties), some scaled copies
/// (equal cosine) and occasionally a zero row.
pub fn random_model(
    rng: &mut ChaCha8Rng,
    max_v: usize,
    max_dim: usize,
) -> (Vec<String>, Vec<Vec<f32>>) {
    let v = rng.random_range(2..=max_v);
    let dim = rng.random_range(1..=max_dim);
    let mut rows: Vec<Vec<f32>> = Vec::with_capacity(v);
    for i in 0..v {
        let roll = rng.random_range(0..10);
        let row = if i > 0 && roll < 2 {
            rows[rng.random_range(0..i)].clone()
        } else if i > 0 && roll == 2 {
            rows[rng.random_range(0..i)]
                .iter()
                .map(|x| x * 2.0)
                .collect()
        } else if roll == 3 && rng.random_bool(0.2) {
            vec![0.0; dim]
        } else {
            (0..dim).map(|_| rng.random_range(-1.0f32..1.0)).collect()
        };
        rows.push(row);
    }
    let words = (0..v).map(|i| format!("w{:03}", (i * 37) % 1000)).collect();
    (words, rows)
}
