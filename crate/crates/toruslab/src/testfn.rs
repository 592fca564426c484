//! Test functions with closed-form integrals over R^n.
//!
//! Two families: normalized gaussians e^{-pi |x|^2 / sigma^2} (integral
//! sigma^n) and radial bumps that are 1 on B(v, eps), 0 outside B(v, 2 eps),
//! interpolated by the C^2 quintic smoothstep. Closed-form integrals make
//! these usable as the right-hand side of mean-value statements without any
//! numerical quadrature.

use crate::lattice::norm;

#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    Gaussian { sigma: f64 },
    /// 1 on B(center, eps), 0 off B(center, 2 eps).
    Bump { center: Vec<f64>, eps: f64 },
}

/// Descending quintic smoothstep: h(0) = 1, h(1) = 0, C^2 at both ends.
fn smoothfall(u: f64) -> f64 {
    if u <= 0.0 {
        1.0
    } else if u >= 1.0 {
        0.0
    } else {
        1.0 - u * u * u * (10.0 - 15.0 * u + 6.0 * u * u)
    }
}

/// Surface area of the unit sphere in R^n (n <= 3).
fn sphere_area(n: usize) -> f64 {
    match n {
        1 => 2.0,
        2 => 2.0 * std::f64::consts::PI,
        3 => 4.0 * std::f64::consts::PI,
        _ => panic!("dimension {n} out of scope"),
    }
}

fn ball_volume(n: usize, r: f64) -> f64 {
    sphere_area(n) * r.powi(n as i32) / n as f64
}

/// Integral of (1 - smoothstep(u)) (1+u)^{n-1} over [0, 1], exactly
/// (termwise integration of the degree-(n+4) polynomial).
fn shell_profile_integral(n: usize) -> f64 {
    // h(u) = 1 - 10 u^3 + 15 u^4 - 6 u^5.
    let h = [1.0, 0.0, 0.0, -10.0, 15.0, -6.0];
    // (1 + u)^{n-1}.
    let mut g = vec![0.0; n];
    for (k, gk) in g.iter_mut().enumerate() {
        *gk = binom(n - 1, k);
    }
    let mut total = 0.0;
    for (i, &hi) in h.iter().enumerate() {
        for (j, &gj) in g.iter().enumerate() {
            total += hi * gj / (i + j + 1) as f64;
        }
    }
    total
}

fn binom(n: usize, k: usize) -> f64 {
    let mut v = 1.0;
    for i in 0..k {
        v = v * (n - i) as f64 / (i + 1) as f64;
    }
    v
}

impl TestFunction {
    pub fn gaussian(sigma: f64) -> Self {
        assert!(sigma > 0.0);
        TestFunction::Gaussian { sigma }
    }

    /// Bump with inner radius eps and outer radius 2 eps.
    pub fn bump(center: Vec<f64>, eps: f64) -> Self {
        assert!(eps > 0.0);
        TestFunction::Bump { center, eps }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            TestFunction::Gaussian { sigma } => {
                let r2: f64 = x.iter().map(|v| v * v).sum();
                (-std::f64::consts::PI * r2 / (sigma * sigma)).exp()
            }
            TestFunction::Bump { center, eps } => {
                let r2: f64 = x.iter().zip(center).map(|(a, b)| (a - b) * (a - b)).sum();
                smoothfall((r2.sqrt() - eps) / eps)
            }
        }
    }

    /// Closed-form integral over R^n.
    pub fn integral(&self, n: usize) -> f64 {
        match self {
            TestFunction::Gaussian { sigma } => sigma.powi(n as i32),
            TestFunction::Bump { eps, .. } => {
                // Inner ball plus the radial shell eps <= r <= 2 eps with the
                // substitution r = eps (1 + u).
                ball_volume(n, *eps)
                    + sphere_area(n) * eps.powi(n as i32) * shell_profile_integral(n)
            }
        }
    }

    /// Radius beyond which the function is either identically zero (bump) or
    /// pointwise below 1e-18 relative to its peak (gaussian).
    pub fn truncation_radius(&self) -> f64 {
        match self {
            TestFunction::Gaussian { sigma } => {
                sigma * (18.0 * std::f64::consts::LN_10 / std::f64::consts::PI).sqrt()
            }
            TestFunction::Bump { center, eps } => norm(center) + 2.0 * eps,
        }
    }
}
