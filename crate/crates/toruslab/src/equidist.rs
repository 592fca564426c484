//! Lattice-sum statistics over torus orbits: Siegel transforms, packet Weyl
//! averages, the torus-unfolding identity, and cusp/ball mass estimates.
//!
//! The central object is E_f(L) = sum of f over the nonzero vectors of L.
//! Averaged over a packet of torus orbits, E_f tests equidistribution against
//! the mean value of f; integrated over a single orbit it unfolds into a sum
//! of full-torus integrals over unit-orbit representatives, which this module
//! verifies numerically with exact representative reduction.

use crate::embed::Embedding;
use crate::error::{Error, Result};
use crate::exec::{tree_mean, tree_sum, Strategy};
use crate::lattice::{basis_distance, canonical_basis, cusp_height, lll_reduce, shortest_vector, vectors_in_ball};
use crate::latimer::Packet;
use crate::numfield::{Elt, NumField};
use crate::orbit::{embed_class, orbit_of, sample_orbit, EmbeddedLattice, SampleScheme};
use crate::order::{multiplier_ring, Order};
use crate::reduce::unit_group;
use crate::testfn::TestFunction;
use crate::zmat::QLattice;
use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive, Zero};
use std::collections::BTreeMap;

/// Closed-form mean value of f over R^n.
pub fn siegel_rhs(f: &TestFunction, n: usize) -> f64 {
    f.integral(n)
}

/// Truncation radius for summing f over lattice L: beyond it the discarded
/// tail is below 1e-15 of the retained sum (gaussian: shifted by the shortest
/// vector length so the bound is relative to the largest retained term).
fn sum_radius(f: &TestFunction, shortest: f64) -> f64 {
    match f {
        TestFunction::Gaussian { sigma } => {
            let slack = (15.0 * std::f64::consts::LN_10 + 5.0) / std::f64::consts::PI;
            (shortest * shortest + sigma * sigma * slack).sqrt()
        }
        _ => f.truncation_radius(),
    }
}

/// E_f(L) = sum of f over all nonzero lattice vectors, with tails below
/// 1e-15 relative.
pub fn siegel_transform(l: &EmbeddedLattice, f: &TestFunction) -> f64 {
    let s = shortest_vector(&l.basis).2;
    let r = sum_radius(f, s);
    let vals: Vec<f64> =
        vectors_in_ball(&l.basis, r).iter().map(|(_, v)| f.eval(v)).collect();
    tree_sum(&vals)
}

/// One packet row of a Weyl-average report.
#[derive(Debug, Clone)]
pub struct WeylRow {
    pub poly: String,
    pub disc: BigInt,
    /// Orbit volume (regulator of the shared multiplier ring).
    pub volume: f64,
    pub orbits: usize,
    pub samples: usize,
    /// Packet average of E_f, one entry per suite function.
    pub averages: Vec<f64>,
    /// Mean value of f over R^n, same order.
    pub rhs: Vec<f64>,
    /// averages - rhs, signed.
    pub deviations: Vec<f64>,
    /// Batch-means standard error (16 batches).
    pub stderr: Vec<f64>,
}

/// Equal-weight average of E_f over sampled points of every orbit in the
/// packet, for each function of the suite. Equal weights are correct because
/// all orbits of a packet share one stabilizer and hence one volume.
pub fn weyl_average(
    field: &NumField,
    emb: &Embedding,
    packet: &Packet,
    suite: &[TestFunction],
    scheme: SampleScheme,
    strategy: Strategy,
) -> Result<WeylRow> {
    let mut samples: Vec<EmbeddedLattice> = Vec::new();
    let mut volume = 1.0;
    for (i, class) in packet.classes.iter().enumerate() {
        let orbit = orbit_of(field, emb, class)?;
        volume = orbit.regulator;
        // Per-orbit seed derivation keeps Monte Carlo draws independent
        // across the packet while staying reproducible.
        let orbit_scheme = match scheme {
            SampleScheme::MonteCarlo { m, seed } => SampleScheme::MonteCarlo {
                m,
                seed: seed.wrapping_add((i as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15)),
            },
            g => g,
        };
        samples.extend(sample_orbit(&orbit, orbit_scheme, strategy)?);
    }
    if samples.is_empty() {
        return Err(Error::invalid("empty packet sample"));
    }
    let mut averages = Vec::new();
    let mut rhs = Vec::new();
    let mut deviations = Vec::new();
    let mut stderr = Vec::new();
    for f in suite {
        let vals = strategy.map(samples.len(), |i| siegel_transform(&samples[i], f));
        let mean = tree_mean(&vals);
        averages.push(mean);
        let r = siegel_rhs(f, field.n);
        rhs.push(r);
        deviations.push(mean - r);
        stderr.push(batch_means_error(&vals));
    }
    Ok(WeylRow {
        poly: field.poly.to_string(),
        disc: packet.disc.clone(),
        volume,
        orbits: packet.classes.len(),
        samples: samples.len(),
        averages,
        rhs,
        deviations,
        stderr,
    })
}

/// Standard error by batch means over 16 consecutive batches (fewer batches
/// only when there are fewer than 16 values).
pub fn batch_means_error(vals: &[f64]) -> f64 {
    let b = 16usize.min(vals.len().max(1));
    let size = vals.len() / b;
    if size == 0 {
        return f64::NAN;
    }
    let means: Vec<f64> = (0..b).map(|i| tree_mean(&vals[i * size..(i + 1) * size])).collect();
    let grand = tree_mean(&means);
    let var: f64 = means.iter().map(|m| (m - grand) * (m - grand)).sum::<f64>()
        / (b as f64 - 1.0).max(1.0);
    (var / b as f64).sqrt()
}

// ---------------------------------------------------------------------------
// Torus unfolding
// ---------------------------------------------------------------------------

/// Result of the unfolding identity check: the orbit average of E_f against
/// the sum of full-torus integrals over unit-orbit representatives.
#[derive(Debug, Clone)]
pub struct HeckeCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub relerr: f64,
    /// Number of unit-orbit representatives that carried mass.
    pub reps: usize,
}

/// Per-coordinate multipliers of the torus element with log-coordinates `l`
/// (length r1 + r2, weight-2 convention at complex places).
fn coord_multipliers(emb: &Embedding, l: &[f64]) -> Vec<f64> {
    let mut m = vec![0.0; emb.n];
    for i in 0..emb.r1 {
        m[i] = l[i].exp();
    }
    for k in 0..emb.r2 {
        let e = (l[emb.r1 + k] / 2.0).exp();
        m[emb.r1 + 2 * k] = e;
        m[emb.r1 + 2 * k + 1] = e;
    }
    m
}

/// Gauss-Legendre nodes and weights on [-1/2, 1/2], normalized to total
/// weight 1 (Newton iteration on the Legendre recurrence).
fn gauss_legendre_unit(m: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(m);
    for i in 0..m {
        let mut x =
            (std::f64::consts::PI * (i as f64 + 0.75) / (m as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..64 {
            let (mut p0, mut p1) = (1.0f64, x);
            for k in 2..=m {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            dp = m as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        out.push((x / 2.0, w / 2.0));
    }
    out
}

fn unit_power(field: &NumField, u: &Elt, uinv: &Elt, k: i64) -> Elt {
    if k >= 0 {
        field.pow(u, k as u64)
    } else {
        field.pow(uinv, (-k) as u64)
    }
}

/// Exact canonical representative of the unit orbit of x: reduce the log
/// vector into the centered fundamental cell, then take the Ord-least among
/// the +-1 neighbor reductions and both signs, so floating-point rounding at
/// cell boundaries cannot split one orbit into two representatives.
fn canonical_unit_orbit_rep(
    field: &NumField,
    emb: &Embedding,
    units: &[(Elt, Elt)],
    logs: &[Vec<f64>],
    x: &Elt,
) -> Elt {
    let rank = units.len();
    let lx = emb.log_embedding_q(x);
    // Least-squares coordinates of lx in the unit-log basis.
    let mut s = vec![0.0; rank];
    if rank == 1 {
        let g = dotv(&logs[0], &logs[0]);
        s[0] = dotv(&lx, &logs[0]) / g;
    } else if rank == 2 {
        let (a, b, c) = (dotv(&logs[0], &logs[0]), dotv(&logs[0], &logs[1]), dotv(&logs[1], &logs[1]));
        let (p, q) = (dotv(&lx, &logs[0]), dotv(&lx, &logs[1]));
        let det = a * c - b * b;
        s[0] = (p * c - q * b) / det;
        s[1] = (q * a - p * b) / det;
    }
    let k0: Vec<i64> = s.iter().map(|v| v.round() as i64).collect();
    let mut best: Option<Vec<BigRational>> = None;
    let neighbors: &[i64] = &[-1, 0, 1];
    let mut offsets = vec![0usize; rank];
    loop {
        let mut y = x.clone();
        for j in 0..rank {
            let k = k0[j] + neighbors[offsets[j]];
            if k != 0 {
                // Divide out u^k to land in the centered fundamental cell.
                y = field.mul(&y, &unit_power(field, &units[j].1, &units[j].0, -k));
            }
        }
        for cand in [y.clone(), field.neg(&y)] {
            if best.as_ref().map_or(true, |b| &cand < b) {
                best = Some(cand);
            }
        }
        // Odometer over the neighbor box; empty rank runs the body once.
        let mut j = 0;
        loop {
            if j == rank {
                return best.unwrap();
            }
            offsets[j] += 1;
            if offsets[j] < neighbors.len() {
                break;
            }
            offsets[j] = 0;
            j += 1;
        }
    }
}

fn dotv(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Full-torus integral of f along the orbit of the embedded vector `v`, in
/// the coordinates of the unit-log basis `logs` (Lebesgue measure there; the
/// value is basis-independent because basis changes are unimodular).
fn torus_line_integral(emb: &Embedding, logs: &[Vec<f64>], v: &[f64], f: &TestFunction) -> f64 {
    let rank = logs.len();
    let eval = |s: &[f64]| -> f64 {
        let mut l = vec![0.0; emb.r1 + emb.r2];
        for (sj, u) in s.iter().zip(logs) {
            for (li, ui) in l.iter_mut().zip(u) {
                *li += sj * ui;
            }
        }
        let m = coord_multipliers(emb, &l);
        let scaled: Vec<f64> = v.iter().zip(&m).map(|(x, mi)| x * mi).collect();
        f.eval(&scaled)
    };
    match rank {
        0 => eval(&[]),
        1 => adaptive_line(&|s| eval(&[s])),
        2 => adaptive_plane(&|s, t| eval(&[s, t])),
        _ => unreachable!("unit rank above 2 is out of scope"),
    }
}

/// Trapezoid integral of a smooth, double-exponentially decaying function on
/// the line: locate the support window on a coarse grid, then halve the step
/// until the value is stable to 1e-13 relative.
fn adaptive_line(g: &dyn Fn(f64) -> f64) -> f64 {
    let coarse: Vec<f64> = (-320..=320).map(|i| i as f64 * 0.25).collect();
    let gm = coarse.iter().map(|&s| g(s)).fold(0.0, f64::max);
    if gm <= 0.0 {
        return 0.0;
    }
    let mut lo = f64::MAX;
    let mut hi = f64::MIN;
    for &s in &coarse {
        if g(s) > 1e-22 * gm {
            lo = lo.min(s);
            hi = hi.max(s);
        }
    }
    lo -= 2.0;
    hi += 2.0;
    let mut h = 0.25;
    let mut prev = trapezoid(g, lo, hi, h);
    for _ in 0..8 {
        h /= 2.0;
        let cur = trapezoid(g, lo, hi, h);
        if (cur - prev).abs() <= 1e-13 * cur.abs().max(1e-300) {
            return cur;
        }
        prev = cur;
    }
    prev
}

fn trapezoid(g: &dyn Fn(f64) -> f64, lo: f64, hi: f64, h: f64) -> f64 {
    let steps = ((hi - lo) / h).ceil() as usize;
    let mut vals = Vec::with_capacity(steps + 1);
    for i in 0..=steps {
        let w = if i == 0 || i == steps { 0.5 } else { 1.0 };
        vals.push(w * g(lo + i as f64 * h));
    }
    tree_sum(&vals) * h
}

/// Tensor version of [`adaptive_line`] for unit rank 2.
fn adaptive_plane(g: &dyn Fn(f64, f64) -> f64) -> f64 {
    let mut gm = 0.0f64;
    let mut box_lo = [f64::MAX; 2];
    let mut box_hi = [f64::MIN; 2];
    for i in -80..=80 {
        for j in -80..=80 {
            let (s, t) = (i as f64 * 0.5, j as f64 * 0.5);
            let v = g(s, t);
            gm = gm.max(v);
            if v > 0.0 {
                box_lo[0] = box_lo[0].min(s);
                box_hi[0] = box_hi[0].max(s);
                box_lo[1] = box_lo[1].min(t);
                box_hi[1] = box_hi[1].max(t);
            }
        }
    }
    if gm <= 0.0 {
        return 0.0;
    }
    // Second pass with the proper relative threshold.
    let mut lo = [f64::MAX; 2];
    let mut hi = [f64::MIN; 2];
    for i in -80..=80 {
        for j in -80..=80 {
            let (s, t) = (i as f64 * 0.5, j as f64 * 0.5);
            if g(s, t) > 1e-22 * gm {
                lo[0] = lo[0].min(s);
                hi[0] = hi[0].max(s);
                lo[1] = lo[1].min(t);
                hi[1] = hi[1].max(t);
            }
        }
    }
    for d in 0..2 {
        lo[d] -= 2.0;
        hi[d] += 2.0;
    }
    let eval_grid = |h: f64| -> f64 {
        let rows = ((hi[0] - lo[0]) / h).ceil() as usize;
        let cols = ((hi[1] - lo[1]) / h).ceil() as usize;
        let mut vals = Vec::with_capacity((rows + 1) * (cols + 1));
        for i in 0..=rows {
            let wi = if i == 0 || i == rows { 0.5 } else { 1.0 };
            for j in 0..=cols {
                let wj = if j == 0 || j == cols { 0.5 } else { 1.0 };
                vals.push(wi * wj * g(lo[0] + i as f64 * h, lo[1] + j as f64 * h));
            }
        }
        tree_sum(&vals) * h * h
    };
    let mut h = 0.25;
    let mut prev = eval_grid(h);
    for _ in 0..5 {
        h /= 2.0;
        let cur = eval_grid(h);
        if (cur - prev).abs() <= 1e-13 * cur.abs().max(1e-300) {
            return cur;
        }
        prev = cur;
    }
    prev
}

/// Verify the torus-unfolding identity on one class: the average of E_f over
/// the compact orbit of the unit group equals the torsion order times the sum
/// over unit-orbit representatives of the full-torus integral of f.
///
/// f must be a gaussian (rotation invariance at complex places is assumed)
/// and the unit torsion must be +-1, which covers every field here except
/// discriminants -3 and -4.
pub fn hecke_unfolding_check(
    field: &NumField,
    emb: &Embedding,
    lat: &QLattice,
    sigma: f64,
) -> Result<HeckeCheck> {
    let f = TestFunction::gaussian(sigma);
    let rm = multiplier_ring(field, lat);
    let ord = Order::from_lattice(field, rm)?;
    let ug = unit_group(&ord)?;
    if ug.torsion != 2 {
        return Err(Error::invalid("unfolding check requires unit torsion {1, -1}"));
    }
    let base = embed_class(emb, lat)?;
    let rank = ug.rank;

    // Reduced unit-log basis with matching exact units (and inverses).
    let raw_logs: Vec<Vec<f64>> =
        ug.fundamental.iter().map(|u| emb.log_embedding_q(u)).collect();
    let (logs, units): (Vec<Vec<f64>>, Vec<(Elt, Elt)>) = if rank >= 2 {
        let red = lll_reduce(&raw_logs);
        let units = red
            .transform
            .iter()
            .map(|row| {
                let mut acc = field.one();
                for (j, &k) in row.iter().enumerate() {
                    let inv = field.inverse(&ug.fundamental[j]).expect("units invert");
                    acc = field.mul(&acc, &unit_power(field, &ug.fundamental[j], &inv, k));
                }
                let accinv = field.inverse(&acc).expect("units invert");
                (accinv, acc)
            })
            .collect();
        (red.basis, units)
    } else {
        let units = ug
            .fundamental
            .iter()
            .map(|u| (field.inverse(u).expect("units invert"), u.clone()))
            .collect();
        (raw_logs, units)
    };

    // Stretch of the centered fundamental cell on each coordinate.
    let mut amp = vec![0.0f64; emb.r1 + emb.r2];
    for u in &logs {
        for (a, ui) in amp.iter_mut().zip(u) {
            *a += 0.5 * ui.abs();
        }
    }
    let mut stretch = 1.0f64;
    for i in 0..emb.r1 {
        stretch = stretch.max(amp[i].exp());
    }
    for k in 0..emb.r2 {
        stretch = stretch.max((amp[emb.r1 + k] / 2.0).exp());
    }
    let shortest = shortest_vector(&base.basis).2;
    let r_f = sum_radius(&f, shortest * stretch);

    // Left side: Gauss-Legendre average of E_f over the fundamental cell,
    // with one shared vector enumeration covering every node.
    let vecs: Vec<Vec<f64>> = vectors_in_ball(&base.basis, r_f * stretch)
        .into_iter()
        .map(|(_, v)| v)
        .collect();
    let e_at = |s: &[f64]| -> f64 {
        let mut l = vec![0.0; emb.r1 + emb.r2];
        for (sj, u) in s.iter().zip(&logs) {
            for (li, ui) in l.iter_mut().zip(u) {
                *li += sj * ui;
            }
        }
        let m = coord_multipliers(emb, &l);
        let vals: Vec<f64> = vecs
            .iter()
            .map(|v| {
                let scaled: Vec<f64> = v.iter().zip(&m).map(|(x, mi)| x * mi).collect();
                f.eval(&scaled)
            })
            .collect();
        tree_sum(&vals)
    };
    let lhs = {
        let mut prev = f64::NAN;
        let mut converged = None;
        for m in [8usize, 16, 32, 64, 128] {
            let gl = gauss_legendre_unit(m);
            let cur = match rank {
                0 => e_at(&[]),
                1 => {
                    let vals: Vec<f64> = gl.iter().map(|&(x, w)| w * e_at(&[x])).collect();
                    tree_sum(&vals)
                }
                _ => {
                    let mut vals = Vec::with_capacity(m * m);
                    for &(x, wx) in &gl {
                        for &(y, wy) in &gl {
                            vals.push(wx * wy * e_at(&[x, y]));
                        }
                    }
                    tree_sum(&vals)
                }
            };
            if rank == 0 || (cur - prev).abs() <= 1e-10 * cur.abs().max(1e-30) {
                converged = Some(cur);
                break;
            }
            prev = cur;
        }
        converged.ok_or_else(|| Error::nonconv("orbit-average quadrature did not settle"))?
    };

    // Right side: torsion * sum over unit-orbit representatives. Vectors with
    // effective norm beyond the gaussian reach contribute below 1e-16 and are
    // dropped before the exact reduction.
    let basis_q = lat.to_qmat();
    let scale_n = base.scale.powi(field.n as i32);
    let nmax = (sigma * sigma * (22.0 * std::f64::consts::LN_10 + 2.0)
        / (std::f64::consts::PI * field.n as f64))
        .powf(field.n as f64 / 2.0);
    let mut integrals: BTreeMap<Vec<BigRational>, f64> = BTreeMap::new();
    let mut radius = r_f * stretch;
    let mut prev_rhs = f64::NAN;
    for round in 0..5 {
        for (coeffs, _) in vectors_in_ball(&base.basis, radius) {
            let mut x = vec![BigRational::zero(); field.n];
            for (i, &c) in coeffs.iter().enumerate() {
                if c == 0 {
                    continue;
                }
                let ci = BigRational::from_integer(c.into());
                for (xj, bj) in x.iter_mut().zip(basis_q.row(i)) {
                    *xj += &ci * bj;
                }
            }
            let neff = field.norm(&x).abs().to_f64().unwrap() / scale_n;
            if neff > nmax {
                continue;
            }
            let rep = canonical_unit_orbit_rep(field, emb, &units, &logs, &x);
            integrals.entry(rep).or_insert(f64::NAN);
        }
        for (rep, val) in integrals.iter_mut() {
            if val.is_nan() {
                let v: Vec<f64> =
                    emb.embed_q(rep).iter().map(|x| x / base.scale).collect();
                *val = torus_line_integral(emb, &logs, &v, &f);
            }
        }
        let vals: Vec<f64> = integrals.values().copied().collect();
        let rhs = ug.torsion as f64 * tree_sum(&vals);
        if round > 0 && (rhs - prev_rhs).abs() <= 1e-12 * rhs.abs().max(1e-30) {
            let relerr = (lhs - rhs).abs() / rhs.abs().max(1e-300);
            return Ok(HeckeCheck { lhs, rhs, relerr, reps: integrals.len() });
        }
        prev_rhs = rhs;
        radius *= 1.5;
    }
    Err(Error::nonconv("representative sum did not stabilize under enlargement"))
}

// ---------------------------------------------------------------------------
// Mass statistics
// ---------------------------------------------------------------------------

/// Statistic for [`empirical_mass`].
#[derive(Debug, Clone)]
pub enum MassStatistic {
    /// Fraction of samples with cusp height at least r.
    Cusp { r: f64 },
    /// Fraction of samples within basis distance eps of the given point.
    Ball { center: Vec<Vec<f64>>, eps: f64 },
}

/// Empirical mass of the statistic over a sample cloud.
pub fn empirical_mass(samples: &[EmbeddedLattice], stat: &MassStatistic) -> f64 {
    assert!(!samples.is_empty());
    let hits = match stat {
        MassStatistic::Cusp { r } => {
            samples.iter().filter(|l| cusp_height(&l.basis) >= *r).count()
        }
        MassStatistic::Ball { center, eps } => {
            let c0 = canonical_basis(center);
            samples
                .iter()
                .filter(|l| basis_distance(&canonical_basis(&l.basis), &c0) <= *eps)
                .count()
        }
    };
    hits as f64 / samples.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::latimer::packets;
    use crate::orbit::real_embedding;
    use crate::poly::MonicIntPoly;

    fn setup(p: &str) -> (NumField, Embedding) {
        let poly: MonicIntPoly = p.parse().unwrap();
        let emb = real_embedding(&poly).unwrap();
        (NumField::new(poly).unwrap(), emb)
    }

    fn unit_lattice(n: usize) -> EmbeddedLattice {
        let mut basis = vec![vec![0.0; n]; n];
        for (i, row) in basis.iter_mut().enumerate() {
            row[i] = 1.0;
        }
        EmbeddedLattice { basis, scale: 1.0, condition: 1.0 }
    }

    #[test]
    fn theta_squared_golden() {
        // E_gaussian(Z^2) = theta(1)^2 - 1 with theta the 1-d sum oracle.
        let theta: f64 = (-40..=40i64)
            .map(|k| (-std::f64::consts::PI * (k * k) as f64).exp())
            .sum();
        let got = siegel_transform(&unit_lattice(2), &TestFunction::gaussian(1.0));
        assert!((got - (theta * theta - 1.0)).abs() < 1e-12, "{got}");
        assert!((theta - 1.086435).abs() < 1e-6);
    }

    #[test]
    fn narrow_bump_sees_no_lattice_points() {
        let f = TestFunction::bump(vec![0.0, 0.0], 0.45); // support radius 0.9
        assert_eq!(siegel_transform(&unit_lattice(2), &f), 0.0);
        let f3 = TestFunction::bump(vec![0.0, 0.0, 0.0], 0.45);
        assert_eq!(siegel_transform(&unit_lattice(3), &f3), 0.0);
    }

    #[test]
    fn scaling_covariance() {
        // E_{f(x/c)}(L) = E_f(L/c) for the gaussian family.
        let c = 1.7;
        let mut shrunk = unit_lattice(2);
        for row in shrunk.basis.iter_mut() {
            for x in row.iter_mut() {
                *x /= c;
            }
        }
        let a = siegel_transform(&unit_lattice(2), &TestFunction::gaussian(c));
        let b = siegel_transform(&shrunk, &TestFunction::gaussian(1.0));
        assert!((a - b).abs() < 1e-12 * a);
    }

    #[test]
    fn unfolding_identity_real_quadratic() {
        let (field, emb) = setup("x^2 - x - 1");
        let chk = hecke_unfolding_check(&field, &emb, &QLattice::standard(2), 1.0).unwrap();
        assert!(chk.relerr <= 1e-6, "lhs {} rhs {} relerr {}", chk.lhs, chk.rhs, chk.relerr);
        assert!(chk.reps > 0);
    }

    #[test]
    fn unfolding_identity_complex_cubic() {
        let (field, emb) = setup("x^3 - x - 1");
        let chk = hecke_unfolding_check(&field, &emb, &QLattice::standard(3), 1.0).unwrap();
        assert!(chk.relerr <= 1e-4, "lhs {} rhs {} relerr {}", chk.lhs, chk.rhs, chk.relerr);
    }

    #[test]
    fn unfolding_identity_totally_real_cubic() {
        let (field, emb) = setup("x^3 - 4x - 1");
        let chk = hecke_unfolding_check(&field, &emb, &QLattice::standard(3), 1.0).unwrap();
        assert!(chk.relerr <= 1e-4, "lhs {} rhs {} relerr {}", chk.lhs, chk.rhs, chk.relerr);
    }

    #[test]
    fn weyl_average_matches_direct_mean() {
        let (field, emb) = setup("x^2 - 3");
        let ps = packets(&field).unwrap();
        let packet = &ps[0];
        let suite = [TestFunction::gaussian(1.0)];
        let row = weyl_average(
            &field,
            &emb,
            packet,
            &suite,
            SampleScheme::Grid(8),
            Strategy::Sequential,
        )
        .unwrap();
        assert_eq!(row.samples, 8 * packet.classes.len());
        assert!((row.deviations[0] - (row.averages[0] - row.rhs[0])).abs() < 1e-15);
        assert!(row.averages[0] > 0.0);
        let par = weyl_average(
            &field,
            &emb,
            packet,
            &suite,
            SampleScheme::Grid(8),
            Strategy::Parallel,
        )
        .unwrap();
        assert_eq!(row.averages[0].to_bits(), par.averages[0].to_bits());
    }

    #[test]
    fn monte_carlo_error_shrinks_like_root_m() {
        let (field, emb) = setup("x^2 - x - 1");
        let ps = packets(&field).unwrap();
        let suite = [TestFunction::gaussian(1.0)];
        let se = |m: usize| {
            weyl_average(
                &field,
                &emb,
                &ps[0],
                &suite,
                SampleScheme::MonteCarlo { m, seed: 424242 },
                Strategy::Sequential,
            )
            .unwrap()
            .stderr[0]
        };
        // Quadrupling the sample count should halve the standard error,
        // within 30 percent.
        let ratio = se(1024) / se(256);
        assert!(ratio > 0.35 && ratio < 0.68, "se ratio {ratio}");
    }

    #[test]
    fn packet_translation_invariance() {
        // Applying one torus element to every sample leaves the Weyl average
        // unchanged within a few standard errors.
        let (field, emb) = setup("x^2 - 7");
        let ps = packets(&field).unwrap();
        let packet = &ps[0];
        let f = TestFunction::gaussian(1.0);
        let mut samples = Vec::new();
        for class in &packet.classes {
            let orbit = orbit_of(&field, &emb, class).unwrap();
            samples
                .extend(sample_orbit(&orbit, SampleScheme::MonteCarlo { m: 400, seed: 9 }, Strategy::Sequential).unwrap());
        }
        let vals: Vec<f64> = samples.iter().map(|l| siegel_transform(l, &f)).collect();
        let translated: Vec<f64> = samples
            .iter()
            .map(|l| {
                let mut t = l.clone();
                for row in t.basis.iter_mut() {
                    row[0] *= 0.8f64.exp();
                    row[1] *= (-0.8f64).exp();
                }
                siegel_transform(&t, &f)
            })
            .collect();
        let (m1, m2) = (tree_mean(&vals), tree_mean(&translated));
        let se = batch_means_error(&vals) + batch_means_error(&translated);
        assert!((m1 - m2).abs() <= 5.0 * se, "means {m1} vs {m2}, se {se}");
    }

    #[test]
    fn mass_statistics_are_monotone() {
        let (field, emb) = setup("x^2 - 13");
        let ps = packets(&field).unwrap();
        let orbit = orbit_of(&field, &emb, &ps[0].classes[0]).unwrap();
        let samples =
            sample_orbit(&orbit, SampleScheme::MonteCarlo { m: 500, seed: 3 }, Strategy::Sequential)
                .unwrap();
        let cusp: Vec<f64> = [1.0, 1.3, 1.6, 2.0, 50.0]
            .iter()
            .map(|&r| empirical_mass(&samples, &MassStatistic::Cusp { r }))
            .collect();
        for w in cusp.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert_eq!(cusp[4], 0.0);
        let center = samples[7].basis.clone();
        let ball: Vec<f64> = [0.05, 0.2, 0.5, 1.0]
            .iter()
            .map(|&eps| empirical_mass(&samples, &MassStatistic::Ball { center: center.clone(), eps }))
            .collect();
        for w in ball.windows(2) {
            assert!(w[0] <= w[1]);
        }
        assert!(ball[3] > 0.0);
    }
}
