//! Floating-point lattice geometry: Gram-Schmidt, LLL with an integer
//! transform, complete short-vector enumeration, shortest vectors, cusp
//! heights, and a basis distance that is invariant under the sign and
//! ordering ambiguity of reduced bases.

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Gram-Schmidt: returns (orthogonal rows b*, coefficients mu) with
/// `mu[i][j] = <b_i, b*_j> / <b*_j, b*_j>` for j < i.
pub fn gram_schmidt(rows: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let n = rows.len();
    let mut bstar: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut v = rows[i].clone();
        for j in 0..i {
            let bj = &bstar[j];
            let denom = dot(bj, bj);
            let m = if denom > 0.0 { dot(&rows[i], bj) / denom } else { 0.0 };
            mu[i][j] = m;
            for (vk, bk) in v.iter_mut().zip(bj) {
                *vk -= m * bk;
            }
        }
        bstar.push(v);
    }
    (bstar, mu)
}

#[derive(Debug, Clone)]
pub struct Lll {
    pub basis: Vec<Vec<f64>>,
    /// Integer transform: `basis[i] = sum_j transform[i][j] * original[j]`.
    pub transform: Vec<Vec<i64>>,
}

/// LLL reduction (delta = 0.99) in f64 arithmetic; adequate for the small
/// dimensions and conditioning used here.
pub fn lll_reduce(rows: &[Vec<f64>]) -> Lll {
    let delta = 0.99;
    let n = rows.len();
    let mut b: Vec<Vec<f64>> = rows.to_vec();
    let mut u: Vec<Vec<i64>> = (0..n)
        .map(|i| (0..n).map(|j| i64::from(i == j)).collect())
        .collect();
    if n < 2 {
        return Lll { basis: b, transform: u };
    }
    let (mut bstar, mut mu) = gram_schmidt(&b);
    let mut k = 1usize;
    let mut guard = 0usize;
    while k < n {
        guard += 1;
        assert!(guard < 10_000, "LLL failed to terminate");
        for j in (0..k).rev() {
            let q = mu[k][j].round();
            if q != 0.0 {
                let qi = q as i64;
                for c in 0..b[0].len() {
                    let s = b[j][c];
                    b[k][c] -= q * s;
                }
                for c in 0..n {
                    u[k][c] -= qi * u[j][c];
                }
                let (bs, m) = gram_schmidt(&b);
                bstar = bs;
                mu = m;
            }
        }
        let bk = dot(&bstar[k], &bstar[k]);
        let bk1 = dot(&bstar[k - 1], &bstar[k - 1]);
        if bk >= (delta - mu[k][k - 1] * mu[k][k - 1]) * bk1 {
            k += 1;
        } else {
            b.swap(k, k - 1);
            u.swap(k, k - 1);
            let (bs, m) = gram_schmidt(&b);
            bstar = bs;
            mu = m;
            k = k.max(2) - 1;
        }
    }
    Lll { basis: b, transform: u }
}

/// All nonzero lattice vectors of length at most `radius` (both signs),
/// as (integer coords in the given basis, embedded point). Complete up to a
/// tiny relative margin at the boundary.
pub fn vectors_in_ball(rows: &[Vec<f64>], radius: f64) -> Vec<(Vec<i64>, Vec<f64>)> {
    let reduced = lll_reduce(rows);
    let n = rows.len();
    let (bstar, mu) = gram_schmidt(&reduced.basis);
    let bnorm: Vec<f64> = bstar.iter().map(|v| dot(v, v)).collect();
    let r2 = radius * radius * (1.0 + 1e-9);
    let mut out = Vec::new();
    let mut x = vec![0i64; n];
    enumerate_level(
        n - 1,
        0.0,
        &mut x,
        &reduced,
        &mu,
        &bnorm,
        r2,
        radius * (1.0 + 1e-9),
        rows,
        &mut out,
    );
    out
}

#[allow(clippy::too_many_arguments)]
fn enumerate_level(
    level: usize,
    partial: f64,
    x: &mut Vec<i64>,
    reduced: &Lll,
    mu: &[Vec<f64>],
    bnorm: &[f64],
    r2: f64,
    radius: f64,
    orig_rows: &[Vec<f64>],
    out: &mut Vec<(Vec<i64>, Vec<f64>)>,
) {
    let n = x.len();
    // Center for this coordinate given the choices above it.
    let mut c = 0.0;
    for j in level + 1..n {
        c -= x[j] as f64 * mu[j][level];
    }
    if bnorm[level] <= 0.0 {
        return;
    }
    let room = ((r2 - partial) / bnorm[level]).max(0.0).sqrt();
    let lo = (c - room - 1e-12).ceil() as i64;
    let hi = (c + room + 1e-12).floor() as i64;
    for xi in lo..=hi {
        x[level] = xi;
        let d = xi as f64 - c;
        let newpart = partial + d * d * bnorm[level];
        if newpart > r2 {
            continue;
        }
        if level == 0 {
            if x.iter().all(|&v| v == 0) {
                continue;
            }
            // Map coords through the LLL transform back to the original basis.
            let coords: Vec<i64> = (0..n)
                .map(|j| (0..n).map(|i| x[i] * reduced.transform[i][j]).sum())
                .collect();
            let mut pt = vec![0.0; orig_rows[0].len()];
            for (j, &cj) in coords.iter().enumerate() {
                if cj != 0 {
                    for (pk, rk) in pt.iter_mut().zip(&orig_rows[j]) {
                        *pk += cj as f64 * rk;
                    }
                }
            }
            if norm(&pt) <= radius {
                out.push((coords, pt));
            }
        } else {
            enumerate_level(level - 1, newpart, x, reduced, mu, bnorm, r2, radius, orig_rows, out);
        }
    }
    x[level] = 0;
}

/// Shortest nonzero vector: (coords in the given basis, point, length).
pub fn shortest_vector(rows: &[Vec<f64>]) -> (Vec<i64>, Vec<f64>, f64) {
    let reduced = lll_reduce(rows);
    let start = reduced.basis.iter().map(|r| norm(r)).fold(f64::INFINITY, f64::min);
    let cands = vectors_in_ball(rows, start * (1.0 + 1e-9));
    cands
        .into_iter()
        .map(|(c, p)| {
            let l = norm(&p);
            (c, p, l)
        })
        .min_by(|a, b| a.2.partial_cmp(&b.2).unwrap())
        .expect("ball around shortest LLL row is nonempty")
}

/// Height in the cusp: 1 / (length of the shortest nonzero vector).
pub fn cusp_height(rows: &[Vec<f64>]) -> f64 {
    1.0 / shortest_vector(rows).2
}

/// LLL basis with deterministic per-row sign normalisation (first
/// significantly nonzero coordinate made positive).
pub fn canonical_basis(rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let mut b = lll_reduce(rows).basis;
    for row in b.iter_mut() {
        let scale = norm(row);
        if let Some(first) = row.iter().find(|v| v.abs() > 1e-9 * scale) {
            if *first < 0.0 {
                for v in row.iter_mut() {
                    *v = -*v;
                }
            }
        }
    }
    b
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..n).collect();
    permute(&mut idx, 0, &mut out);
    out
}

fn permute(idx: &mut Vec<usize>, k: usize, out: &mut Vec<Vec<usize>>) {
    if k == idx.len() {
        out.push(idx.clone());
        return;
    }
    for i in k..idx.len() {
        idx.swap(k, i);
        permute(idx, k + 1, out);
        idx.swap(k, i);
    }
}

/// Distance between two bases of the same dimension: the minimum Frobenius
/// norm of (a - s(b)) over all row permutations and row sign flips of b
/// (48 symmetries for n = 3).
pub fn basis_distance(a: &[Vec<f64>], b: &[Vec<f64>]) -> f64 {
    assert_eq!(a.len(), b.len());
    let n = a.len();
    let mut best = f64::INFINITY;
    for perm in permutations(n) {
        for signs in 0..(1u32 << n) {
            let mut acc = 0.0;
            for i in 0..n {
                let s = if signs & (1 << i) == 0 { 1.0 } else { -1.0 };
                for (x, y) in a[i].iter().zip(&b[perm[i]]) {
                    let d = x - s * y;
                    acc += d * d;
                }
            }
            best = best.min(acc);
        }
    }
    best.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    #[test]
    fn lll_recovers_standard_basis() {
        let rows = vec![vec![1.0, 0.0], vec![1000.0, 1.0]];
        let red = lll_reduce(&rows);
        let norms: Vec<f64> = red.basis.iter().map(|r| norm(r)).collect();
        assert!(norms.iter().all(|&l| (l - 1.0).abs() < 1e-9));
        // Transform consistency and unimodularity.
        for i in 0..2 {
            for c in 0..2 {
                let recon: f64 = (0..2).map(|j| red.transform[i][j] as f64 * rows[j][c]).sum();
                assert!((recon - red.basis[i][c]).abs() < 1e-9);
            }
        }
        let det = red.transform[0][0] * red.transform[1][1] - red.transform[0][1] * red.transform[1][0];
        assert_eq!(det.abs(), 1);
    }

    #[test]
    fn ball_counts_on_z2() {
        let rows = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        assert_eq!(vectors_in_ball(&rows, 1.0).len(), 4);
        assert_eq!(vectors_in_ball(&rows, 1.5).len(), 8);
        assert_eq!(vectors_in_ball(&rows, 2.0).len(), 12);
    }

    #[test]
    fn enumeration_matches_brute_force() {
        let mut rng = crate::rng::sample_rng(14, crate::rng::domains::PROPERTY, 0);
        for trial in 0..20 {
            let n = if trial % 2 == 0 { 2 } else { 3 };
            // Strictly diagonally dominant bases keep the smallest singular
            // value above 1.8, so the brute-force coefficient range below
            // provably covers the whole ball.
            let rows: Vec<Vec<f64>> = (0..n)
                .map(|i| {
                    (0..n)
                        .map(|j| rng.gen_range(-1.4..1.4) + if i == j { 6.0 } else { 0.0 })
                        .collect()
                })
                .collect();
            let radius = 7.0;
            let fast = vectors_in_ball(&rows, radius);
            let mut slow = 0usize;
            let range = 8i64;
            let mut coords = vec![0i64; n];
            fn rec(rows: &[Vec<f64>], coords: &mut Vec<i64>, level: usize, range: i64, radius: f64, count: &mut usize) {
                if level == rows.len() {
                    if coords.iter().all(|&c| c == 0) {
                        return;
                    }
                    let dim = rows[0].len();
                    let mut pt = vec![0.0; dim];
                    for (j, &cj) in coords.iter().enumerate() {
                        for k in 0..dim {
                            pt[k] += cj as f64 * rows[j][k];
                        }
                    }
                    if norm(&pt) <= radius {
                        *count += 1;
                    }
                    return;
                }
                for v in -range..=range {
                    coords[level] = v;
                    rec(rows, coords, level + 1, range, radius, count);
                }
                coords[level] = 0;
            }
            rec(&rows, &mut coords, 0, range, radius, &mut slow);
            assert_eq!(fast.len(), slow, "trial {trial}");
        }
    }

    #[test]
    fn hexagonal_shortest_and_height() {
        let rows = vec![vec![1.0, 0.0], vec![0.5, 3f64.sqrt() / 2.0]];
        let (_, _, l) = shortest_vector(&rows);
        assert!((l - 1.0).abs() < 1e-9);
        assert!((cusp_height(&rows) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn basis_distance_mod_symmetry_is_zero() {
        let a = vec![vec![1.0, 0.0], vec![0.0, 1.0]];
        let b = vec![vec![0.0, -1.0], vec![1.0, 0.0]];
        assert!(basis_distance(&a, &b) < 1e-12);
        let c = vec![vec![1.0, 0.1], vec![0.0, 1.0]];
        assert!(basis_distance(&a, &c) > 0.05);
    }
}
