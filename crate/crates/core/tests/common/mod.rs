//! Dense reference arithmetic used as an oracle for the sparse state code.
//!
//! Everything here works on plain `Vec<Complex64>` over an explicitly
//! enumerated one-particle basis; nothing calls back into the sparse algebra
//! except to read amplitudes in and out.

#![allow(dead_code)]

use nalgebra::DMatrix;
use rand::Rng;
use symket::hilbert::Configuration;
use symket::{BasisLabel, Complex64, NParticleState};

pub const INTERNALS: [&str; 3] = ["a", "b", "c"];

/// One-particle basis with `internals` x `locations` labels, sorted.
pub fn basis(n_internal: usize, locations: &[&str]) -> Vec<BasisLabel> {
    let mut out = Vec::new();
    for i in &INTERNALS[..n_internal] {
        if locations.is_empty() {
            out.push(BasisLabel::internal(*i).unwrap());
        }
        for l in locations {
            out.push(BasisLabel::located(*i, l).unwrap());
        }
    }
    out.sort();
    out
}

/// Every basis with at most 3 internal and 2 location labels.
pub fn all_small_bases() -> Vec<Vec<BasisLabel>> {
    let location_sets: [&[&str]; 3] = [&[], &["h"], &["h", "t"]];
    let mut out = Vec::new();
    for n in 1..=3 {
        for locs in location_sets {
            out.push(basis(n, locs));
        }
    }
    out
}

fn index(basis: &[BasisLabel], label: &BasisLabel) -> usize {
    basis.iter().position(|b| b == label).expect("label in basis")
}

pub fn to_dense(state: &NParticleState, basis: &[BasisLabel]) -> Vec<Complex64> {
    let d = basis.len();
    let n = state.particle_count();
    let mut v = vec![Complex64::default(); d.pow(n as u32)];
    for (config, amp) in state.terms() {
        let k = config.iter().fold(0, |acc, l| acc * d + index(basis, l));
        v[k] += amp;
    }
    v
}

pub fn from_dense(v: &[Complex64], basis: &[BasisLabel], particles: usize) -> NParticleState {
    let d = basis.len();
    let terms = v.iter().enumerate().map(|(mut k, amp)| {
        let mut config: Configuration = vec![basis[0].clone(); particles];
        for slot in (0..particles).rev() {
            config[slot] = basis[k % d].clone();
            k /= d;
        }
        (config, *amp)
    });
    NParticleState::from_terms(particles, terms).unwrap()
}

pub fn kron(u: &[Complex64], v: &[Complex64]) -> Vec<Complex64> {
    u.iter().flat_map(|x| v.iter().map(move |y| x * y)).collect()
}

pub fn dot(u: &[Complex64], v: &[Complex64]) -> Complex64 {
    u.iter().zip(v).map(|(x, y)| x.conj() * y).sum()
}

pub fn norm(v: &[Complex64]) -> f64 {
    dot(v, v).re.sqrt()
}

/// Two-particle swap `(i, j) -> (j, i)`.
pub fn swap(v: &[Complex64], d: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::default(); d * d];
    for i in 0..d {
        for j in 0..d {
            out[j * d + i] = v[i * d + j];
        }
    }
    out
}

/// `(u (x) v + sign v (x) u)/sqrt 2`, renormalized; `None` when it vanishes.
pub fn dense_symmetrize(u: &[Complex64], v: &[Complex64], sign: f64) -> Option<Vec<Complex64>> {
    let uv = kron(u, v);
    let vu = kron(v, u);
    let raw: Vec<Complex64> = uv.iter().zip(&vu).map(|(x, y)| (x + y * sign) / 2f64.sqrt()).collect();
    let n = norm(&raw);
    (n >= 1e-12).then(|| raw.iter().map(|x| x / n).collect())
}

/// Squared Schmidt coefficients across the particle cut: eigenvalues of
/// `M M^dagger`, descending.
pub fn schmidt_weights(v: &[Complex64], d: usize) -> Vec<f64> {
    let m = DMatrix::from_fn(d, d, |i, j| v[i * d + j]);
    let rho = &m * m.adjoint();
    let mut eig: Vec<f64> = rho.symmetric_eigenvalues().iter().copied().collect();
    eig.sort_by(|a, b| b.total_cmp(a));
    eig
}

/// Schmidt coefficients across the particle cut: singular values of the
/// dense `d x d` amplitude matrix, descending.
pub fn singular_values(v: &[Complex64], d: usize) -> Vec<f64> {
    let m = DMatrix::from_fn(d, d, |i, j| v[i * d + j]);
    let mut s: Vec<f64> = m.singular_values().iter().copied().collect();
    s.sort_by(|a, b| b.total_cmp(a));
    s
}

/// One-particle populations of particle 1 (diagonal of the partial trace).
pub fn populations_first(v: &[Complex64], d: usize) -> Vec<f64> {
    (0..d).map(|i| (0..d).map(|j| v[i * d + j].norm_sqr()).sum()).collect()
}

pub fn populations_second(v: &[Complex64], d: usize) -> Vec<f64> {
    (0..d).map(|j| (0..d).map(|i| v[i * d + j].norm_sqr()).sum()).collect()
}

pub fn random_vector<R: Rng>(rng: &mut R, len: usize) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..len)
        .map(|_| Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
        .collect();
    let n = norm(&v);
    v.iter().map(|x| x / n).collect()
}

/// A random orthonormal pair in dimension `d >= 2`.
pub fn random_orthonormal_pair<R: Rng>(rng: &mut R, d: usize) -> (Vec<Complex64>, Vec<Complex64>) {
    let u = random_vector(rng, d);
    loop {
        let w = random_vector(rng, d);
        let p = dot(&u, &w);
        let v: Vec<Complex64> = w.iter().zip(&u).map(|(x, y)| x - y * p).collect();
        let n = norm(&v);
        if n > 1e-3 {
            return (u, v.iter().map(|x| x / n).collect());
        }
    }
}

pub fn max_diff(u: &[Complex64], v: &[Complex64]) -> f64 {
    u.iter().zip(v).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}
