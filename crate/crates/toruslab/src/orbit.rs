//! Embedded torus orbits: unimodular base points, unit-log stabilizer
//! lattices, orbit volumes and discriminants, and deterministic sampling.
//!
//! An ideal class with multiplier ring O becomes a compact orbit of the
//! diagonal group on the space of unimodular lattices: embed a representative
//! through the archimedean places, rescale to determinant one, and act by
//! diag(e^{t_1}, ..., e^{t_n}) with sum t_i = 0. The stabilizer is the image
//! of the unit group of O under the log embedding, so the orbit is a torus of
//! volume reg(O). Sampling is counter-seeded per sample index and therefore
//! independent of execution order.

use crate::embed::Embedding;
use crate::error::{Error, Result};
use crate::exec::Strategy;
use crate::lattice::{dot, gram_schmidt, lll_reduce, norm};
use crate::numfield::NumField;
use crate::order::{multiplier_ring, Order};
use crate::poly::MonicIntPoly;
use crate::reduce::unit_group;
use crate::rng::{domains, sample_rng};
use crate::zmat::QLattice;
use num_bigint::BigInt;
use rand::Rng;

/// Archimedean embedding data for P; thin alias over [`Embedding::new`].
pub fn real_embedding(poly: &MonicIntPoly) -> Result<Embedding> {
    Embedding::new(poly)
}

/// A lattice of covolume 1 in R^n, given by basis rows.
#[derive(Debug, Clone)]
pub struct EmbeddedLattice {
    /// Row basis; |det| = 1 within 1e-12.
    pub basis: Vec<Vec<f64>>,
    /// Scalar divided out of each row to normalize the covolume.
    pub scale: f64,
    /// Condition number of the basis (sqrt of the spectral condition
    /// number of B B^T); large values flag numerically fragile classes.
    pub condition: f64,
}

impl EmbeddedLattice {
    pub fn det(&self) -> f64 {
        det_rows(&self.basis)
    }
}

/// Determinant of a small row matrix by Gaussian elimination with partial
/// pivoting.
pub fn det_rows(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let mut a: Vec<Vec<f64>> = rows.to_vec();
    let mut det = 1.0;
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| a[i][c].abs().partial_cmp(&a[j][c].abs()).unwrap());
        let piv = piv.unwrap();
        if a[piv][c] == 0.0 {
            return 0.0;
        }
        if piv != c {
            a.swap(piv, c);
            det = -det;
        }
        det *= a[c][c];
        for i in c + 1..n {
            let f = a[i][c] / a[c][c];
            for j in c..n {
                let sub = f * a[c][j];
                a[i][j] -= sub;
            }
        }
    }
    det
}

/// Eigenvalues of a small symmetric matrix by cyclic Jacobi rotations.
fn sym_eigenvalues(g: &[Vec<f64>]) -> Vec<f64> {
    let n = g.len();
    let mut a: Vec<Vec<f64>> = g.to_vec();
    for _ in 0..60 {
        let mut off = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                off += a[i][j] * a[i][j];
            }
        }
        if off < 1e-300 {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = 0.5 * (a[q][q] - a[p][p]).atan2(2.0 * a[p][q]) - std::f64::consts::FRAC_PI_4;
                let (s, c) = theta.sin_cos();
                for k in 0..n {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
            }
        }
    }
    (0..n).map(|i| a[i][i]).collect()
}

fn condition_of(rows: &[Vec<f64>]) -> f64 {
    let n = rows.len();
    let g: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| dot(&rows[i], &rows[j])).collect()).collect();
    let ev = sym_eigenvalues(&g);
    let maxe = ev.iter().cloned().fold(f64::MIN, f64::max);
    let mine = ev.iter().cloned().fold(f64::MAX, f64::min);
    if mine <= 0.0 {
        f64::INFINITY
    } else {
        (maxe / mine).sqrt()
    }
}

/// Embed an ideal-class representative and rescale to covolume 1.
///
/// Row i is the archimedean embedding vector of the i-th HNF basis element,
/// divided by |det|^{1/n} of the unscaled rows.
pub fn embed_class(emb: &Embedding, lat: &QLattice) -> Result<EmbeddedLattice> {
    let rows = emb.lattice_rows(lat);
    let d = det_rows(&rows).abs();
    if !(d.is_finite() && d > 1e-250) {
        return Err(Error::invalid("degenerate class representative"));
    }
    let scale = d.powf(1.0 / rows.len() as f64);
    let basis: Vec<Vec<f64>> =
        rows.iter().map(|r| r.iter().map(|x| x / scale).collect()).collect();
    let condition = condition_of(&basis);
    debug_assert!((det_rows(&basis).abs() - 1.0).abs() <= 1e-12);
    Ok(EmbeddedLattice { basis, scale, condition })
}

/// A compact torus orbit: unimodular base point plus stabilizer data.
#[derive(Debug, Clone)]
pub struct TorusOrbitRep {
    pub base: EmbeddedLattice,
    /// Log embeddings of the fundamental units of the multiplier ring;
    /// rank r1 + r2 - 1 rows in the trace-zero hyperplane of R^{r1+r2}.
    pub unit_logs: Vec<Vec<f64>>,
    /// Covolume of `unit_logs` in the trace-zero hyperplane (1.0 at rank 0).
    pub regulator: f64,
    pub signature: (usize, usize),
}

/// Covolume of the span of `rows` inside the hyperplane sum = 0: the absolute
/// determinant of the minor that drops the last coordinate, up to the usual
/// normalization (exact for the log lattice of a unit group).
fn log_covolume(rows: &[Vec<f64>]) -> f64 {
    if rows.is_empty() {
        return 1.0;
    }
    let minor: Vec<Vec<f64>> = rows.iter().map(|r| r[..r.len() - 1].to_vec()).collect();
    det_rows(&minor).abs()
}

/// The orbit attached to a class representative: embed, normalize, and read
/// the stabilizer off the unit group of the multiplier ring.
pub fn orbit_of(field: &NumField, emb: &Embedding, lat: &QLattice) -> Result<TorusOrbitRep> {
    let rm = multiplier_ring(field, lat);
    let ord = Order::from_lattice(field, rm)?;
    let ug = unit_group(&ord)?;
    let unit_logs: Vec<Vec<f64>> =
        ug.fundamental.iter().map(|u| emb.log_embedding_q(u)).collect();
    if unit_logs.len() != emb.r1 + emb.r2 - 1 {
        return Err(Error::nonconv(format!(
            "unit rank {} does not match signature ({}, {})",
            unit_logs.len(),
            emb.r1,
            emb.r2
        )));
    }
    for row in &unit_logs {
        let tr: f64 = row.iter().sum();
        if tr.abs() > 1e-9 {
            return Err(Error::nonconv("unit log fell off the trace-zero hyperplane"));
        }
    }
    let regulator = if unit_logs.is_empty() { 1.0 } else { log_covolume(&unit_logs) };
    if (regulator - ug.regulator).abs() > 1e-9 * ug.regulator.max(1.0) {
        return Err(Error::nonconv("regulator mismatch between log lattice and unit walk"));
    }
    let base = embed_class(emb, lat)?;
    Ok(TorusOrbitRep { base, unit_logs, regulator, signature: (emb.r1, emb.r2) })
}

/// Pointwise product in R^{r1} x C^{r2}, in the sqrt(2)-scaled coordinates.
pub fn alg_mul(emb: &Embedding, x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; emb.n];
    for i in 0..emb.r1 {
        out[i] = x[i] * y[i];
    }
    for k in 0..emb.r2 {
        let i = emb.r1 + 2 * k;
        // Coordinates store (sqrt(2) Re z, sqrt(2) Im z).
        let (ur, ui) = (x[i], x[i + 1]);
        let (vr, vi) = (y[i], y[i + 1]);
        out[i] = (ur * vr - ui * vi) / std::f64::consts::SQRT_2;
        out[i + 1] = (ur * vi + ui * vr) / std::f64::consts::SQRT_2;
    }
    out
}

/// Trace of the multiplication operator of x on R^{r1} x C^{r2}.
pub fn alg_trace(emb: &Embedding, x: &[f64]) -> f64 {
    let mut tr = 0.0;
    for i in 0..emb.r1 {
        tr += x[i];
    }
    for k in 0..emb.r2 {
        // tr_{C/R}(z) = 2 Re z = sqrt(2) * (stored real coordinate).
        tr += std::f64::consts::SQRT_2 * x[emb.r1 + 2 * k];
    }
    tr
}

/// Archimedean discriminant factor |(2n)^{1-n} det(tr(f_i f_j))^{-1}| over an
/// orthonormalized basis of the embedded algebra; depends only on (r1, r2).
pub fn archimedean_factor(emb: &Embedding, rows: &[Vec<f64>]) -> f64 {
    let n = emb.n;
    let (bstar, _) = gram_schmidt(rows);
    let ortho: Vec<Vec<f64>> = bstar
        .iter()
        .map(|b| {
            let nb = norm(b);
            b.iter().map(|x| x / nb).collect()
        })
        .collect();
    let m: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| alg_trace(emb, &alg_mul(emb, &ortho[i], &ortho[j]))).collect())
        .collect();
    let two_n = (2 * n) as f64;
    (two_n.powi(1 - n as i32) / det_rows(&m)).abs()
}

/// Finite part of the orbit discriminant: |disc(O_L)| for the multiplier
/// ring O_L. The archimedean factor is returned alongside so callers can
/// assert its constancy across orbits of one signature.
pub fn orbit_discriminant(field: &NumField, emb: &Embedding, lat: &QLattice) -> Result<(BigInt, f64)> {
    let rm = multiplier_ring(field, lat);
    let ord = Order::from_lattice(field, rm)?;
    let finite = ord.disc().magnitude().clone().into();
    let base = embed_class(emb, lat)?;
    Ok((finite, archimedean_factor(emb, &base.basis)))
}

/// Sampling scheme over the fundamental parallelepiped of the unit logs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SampleScheme {
    /// k^{n-1} points at the cell centers of the centered parallelepiped;
    /// k = 1 returns the base point.
    Grid(usize),
    /// m points with coordinates drawn per sample index from the seed.
    MonteCarlo { m: usize, seed: u64 },
}

/// Apply the torus element diag(e^{t_i}) to the base point.
fn torus_translate(base: &EmbeddedLattice, t: &[f64]) -> EmbeddedLattice {
    let basis: Vec<Vec<f64>> = base
        .basis
        .iter()
        .map(|row| row.iter().zip(t).map(|(x, ti)| x * ti.exp()).collect())
        .collect();
    let condition = condition_of(&basis);
    EmbeddedLattice { basis, scale: base.scale, condition }
}

/// Sample the orbit: points a(t) B with t uniform over the fundamental
/// parallelepiped of the unit logs (LLL-reduced to keep the cell fat).
///
/// Restricted to totally real signature, where the log map fills the whole
/// trace-zero hyperplane and the orbit is the full (n-1)-torus.
pub fn sample_orbit(
    orbit: &TorusOrbitRep,
    scheme: SampleScheme,
    strategy: Strategy,
) -> Result<Vec<EmbeddedLattice>> {
    if orbit.signature.1 != 0 {
        return Err(Error::invalid("orbit sampling requires totally real signature"));
    }
    let dim = orbit.unit_logs.len();
    let reduced = if dim > 1 { lll_reduce(&orbit.unit_logs).basis } else { orbit.unit_logs.clone() };
    let point_at = |coords: &[f64]| -> EmbeddedLattice {
        let n = orbit.base.basis.len();
        let mut t = vec![0.0; n];
        for (c, u) in coords.iter().zip(&reduced) {
            for (ti, ui) in t.iter_mut().zip(u) {
                *ti += c * ui;
            }
        }
        torus_translate(&orbit.base, &t)
    };
    match scheme {
        SampleScheme::Grid(k) => {
            if k == 0 {
                return Err(Error::invalid("grid size must be positive"));
            }
            let total = k.pow(dim as u32);
            Ok(strategy.map(total, |idx| {
                let mut rem = idx;
                let coords: Vec<f64> = (0..dim)
                    .map(|_| {
                        let i = rem % k;
                        rem /= k;
                        (i as f64 + 0.5) / k as f64 - 0.5
                    })
                    .collect();
                point_at(&coords)
            }))
        }
        SampleScheme::MonteCarlo { m, seed } => Ok(strategy.map(m, |idx| {
            let mut rng = sample_rng(seed, domains::ORBIT_MC, idx as u64);
            let coords: Vec<f64> = (0..dim).map(|_| rng.gen::<f64>() - 0.5).collect();
            point_at(&coords)
        })),
    }
}
