//! Negativity and quantum discord.

use nalgebra::Matrix2;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::domain;
use crate::qstate::{
    hermitian_eigenvalues, partial_transpose, pauli_x, pauli_y, pauli_z, qubit_entropy,
    Subsystem, TwoQubitDensityMatrix,
};
use crate::{Error, Result};

/// Roundoff allowance on the Bell-diagonal eigenvalues `(1 ± c1 ± c2 ± c3)/4`.
const BLOCH_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrelationPoint {
    pub time: f64,
    pub negativity: f64,
    pub discord: f64,
}

/// `N = 2 |Σ λ⁻|` over the negative eigenvalues of the partial transpose.
///
/// Capped at 1, the two-qubit maximum, so roundoff cannot push a Bell state above it.
pub fn negativity(rho: &TwoQubitDensityMatrix) -> f64 {
    let ev = hermitian_eigenvalues(&partial_transpose(rho, Subsystem::B));
    (2.0 * ev.iter().filter(|&&l| l < 0.0).sum::<f64>().abs()).min(1.0)
}

// y log2 y with the 0 log 0 = 0 convention; tiny negative roundoff counts as 0
fn ylog2y(y: f64) -> f64 {
    if y > 0.0 {
        y * y.log2()
    } else {
        0.0
    }
}

/// `h(x) = ½[(1+x)log₂(1+x) + (1−x)log₂(1−x)]`, the discord of a Bell mixture.
pub fn h_function(x: f64) -> Result<f64> {
    if !(x.abs() <= 1.0) {
        return Err(domain("h argument", x, "[-1, 1]"));
    }
    Ok(0.5 * (ylog2y(1.0 + x) + ylog2y(1.0 - x)))
}

/// Closed-form discord of the Bell-diagonal state `¼(I + Σ c_j σ_j ⊗ σ_j)`.
pub fn discord_bell_diagonal(c1: f64, c2: f64, c3: f64) -> Result<f64> {
    let terms = [
        1.0 - c1 - c2 - c3,
        1.0 - c1 + c2 + c3,
        1.0 + c1 - c2 + c3,
        1.0 + c1 + c2 - c3,
    ];
    if let Some(bad) = terms.iter().find(|&&v| !(v >= -BLOCH_TOL)) {
        return Err(Error::InvalidState(format!(
            "Bloch vector ({c1}, {c2}, {c3}) is not a state: eigenvalue {:e}",
            bad / 4.0
        )));
    }
    let c = c1.abs().max(c2.abs()).max(c3.abs());
    let mutual = 0.25 * terms.iter().map(|&v| ylog2y(v)).sum::<f64>();
    let classical = 0.5 * ylog2y(1.0 - c) + 0.5 * ylog2y(1.0 + c);
    Ok((mutual - classical).clamp(0.0, 1.0))
}

/// Discord of an arbitrary state whose Bell-diagonal part is read off its
/// correlation vector. Exact for Bell-diagonal states.
pub fn discord_of_bell_projection(rho: &TwoQubitDensityMatrix) -> Result<f64> {
    let [c1, c2, c3] = rho.correlation_vector();
    discord_bell_diagonal(c1, c2, c3)
}

/// Points of a Fibonacci lattice on the unit sphere, as `(polar, azimuth)`.
fn fibonacci_sphere(n: usize) -> impl Iterator<Item = (f64, f64)> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n).map(move |i| {
        let z = 1.0 - (2.0 * i as f64 + 1.0) / n as f64;
        (z.clamp(-1.0, 1.0).acos(), (i as f64 * golden).rem_euclid(std::f64::consts::TAU))
    })
}

// S(A | {Π±}) for the projective measurement of B along the given direction
fn conditional_entropy(rho: &TwoQubitDensityMatrix, polar: f64, azimuth: f64) -> f64 {
    let n = [polar.sin() * azimuth.cos(), polar.sin() * azimuth.sin(), polar.cos()];
    let sigma_n = pauli_x() * Complex64::from(n[0])
        + pauli_y() * Complex64::from(n[1])
        + pauli_z() * Complex64::from(n[2]);
    let m = rho.matrix();
    let mut s = 0.0;
    for sign in [1.0, -1.0] {
        let proj = (Matrix2::identity() + sigma_n * Complex64::from(sign)) * Complex64::from(0.5);
        // Tr_B[(I ⊗ Π) ρ (I ⊗ Π)] = Tr_B[(I ⊗ Π) ρ]
        let reduced = Matrix2::from_fn(|a, ap| {
            let mut z = Complex64::new(0.0, 0.0);
            for b in 0..2 {
                for k in 0..2 {
                    z += proj[(b, k)] * m[(2 * a + k, 2 * ap + b)];
                }
            }
            z
        });
        let p = reduced.trace().re;
        if p > 1e-15 {
            let r = reduced / Complex64::from(p);
            let r = (r + r.adjoint()) * Complex64::from(0.5);
            s += p * qubit_entropy(&r).unwrap_or(0.0);
        }
    }
    s
}

/// Brute-force discord `I − max_{Π} [S(A) − S(A|Π)]` over projective
/// measurements on B.
///
/// Directions are swept on a Fibonacci lattice of `grid_size` points, and the
/// best one is then polished by a compass search on the sphere. Every probed
/// direction is a valid measurement, so the result never undercuts the true
/// discord. Test oracle only.
pub fn discord_bruteforce_oracle(rho: &TwoQubitDensityMatrix, grid_size: usize) -> Result<f64> {
    if grid_size < 64 {
        return Err(Error::Config(format!(
            "brute-force discord needs at least 64 directions, got {grid_size}"
        )));
    }
    let s_ab = rho.entropy()?;
    let s_a = qubit_entropy(&rho.reduced_a())?;
    let s_b = qubit_entropy(&rho.reduced_b())?;

    let (mut polar, mut azimuth, mut best) = fibonacci_sphere(grid_size)
        .map(|(p, a)| (p, a, conditional_entropy(rho, p, a)))
        .min_by(|x, y| x.2.total_cmp(&y.2))
        .expect("grid is non-empty");

    let mut step = (4.0 * std::f64::consts::PI / grid_size as f64).sqrt();
    while step > 1e-9 {
        let stretch = polar.sin().max(1e-3);
        let moves = [(step, 0.0), (-step, 0.0), (0.0, step / stretch), (0.0, -step / stretch)];
        let improved = moves.iter().find_map(|&(dp, da)| {
            let v = conditional_entropy(rho, polar + dp, azimuth + da);
            (v < best).then_some((polar + dp, azimuth + da, v))
        });
        match improved {
            Some((p, a, v)) => {
                polar = p;
                azimuth = a;
                best = v;
            }
            None => step *= 0.5,
        }
    }

    let mutual = s_a + s_b - s_ab;
    let classical = s_a - best;
    Ok(mutual - classical)
}
