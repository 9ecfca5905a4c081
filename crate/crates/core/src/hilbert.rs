//! Ket algebra over a finite, labeled orthonormal basis.
//!
//! A one-particle basis vector is a [`BasisLabel`]: an internal state
//! (`phi`, `psi`, `0`, `H`, ...) optionally pinned to a location or momentum
//! (`h`, `t`, `1`, `2`). Distinct labels are orthonormal, so a state "here"
//! is orthogonal to the same internal state "there" by construction.
//!
//! An [`NParticleState`] is a sparse map from configurations (one label per
//! particle, slot `k` holding particle `k + 1`) to complex amplitudes.

use std::collections::{BTreeMap, BTreeSet};
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{svd, KeyedMatrix};

/// Amplitudes with modulus below this are dropped.
pub const ZERO_THRESHOLD: f64 = 1e-12;
/// Tolerance on `norm^2 - 1` for states that are required to be normalized.
pub const NORM_TOLERANCE: f64 = 1e-12;
/// Looser gate used when *accepting* caller-supplied normalized inputs.
pub const INPUT_NORM_TOLERANCE: f64 = 1e-10;
/// Singular values above this count towards the Schmidt rank.
pub const RANK_THRESHOLD: f64 = 1e-10;

/// One-particle configuration tuple, slot `k` is particle `k + 1`.
pub type Configuration = Vec<BasisLabel>;

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct BasisLabel {
    internal: String,
    location: Option<String>,
}

impl BasisLabel {
    pub fn new(internal: impl Into<String>, location: Option<&str>) -> Result<Self> {
        let internal = internal.into();
        if internal.is_empty() {
            return Err(Error::EmptyInternalLabel);
        }
        Ok(BasisLabel {
            internal,
            location: location.map(str::to_owned),
        })
    }

    /// Label with no location, e.g. a bare polarization `H`.
    pub fn internal(internal: impl Into<String>) -> Result<Self> {
        Self::new(internal, None)
    }

    /// Label pinned to a location, e.g. `phi_h`.
    pub fn located(internal: impl Into<String>, location: &str) -> Result<Self> {
        Self::new(internal, Some(location))
    }

    pub fn internal_name(&self) -> &str {
        &self.internal
    }

    pub fn location(&self) -> Option<&str> {
        self.location.as_deref()
    }
}

impl fmt::Display for BasisLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.location {
            Some(loc) => write!(f, "{}_{}", self.internal, loc),
            None => f.write_str(&self.internal),
        }
    }
}

/// Exchange statistics; selects the sign in `(|a>|b> +/- |b>|a>)/sqrt 2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum ParticleStatistics {
    Boson,
    Fermion,
}

impl ParticleStatistics {
    pub const ALL: [ParticleStatistics; 2] = [ParticleStatistics::Boson, ParticleStatistics::Fermion];

    /// Eigenvalue under a pairwise exchange.
    pub fn sign(self) -> f64 {
        match self {
            ParticleStatistics::Boson => 1.0,
            ParticleStatistics::Fermion => -1.0,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            ParticleStatistics::Boson => "boson",
            ParticleStatistics::Fermion => "fermion",
        }
    }
}

impl fmt::Display for ParticleStatistics {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for ParticleStatistics {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "boson" | "bosons" | "+" => Ok(ParticleStatistics::Boson),
            "fermion" | "fermions" | "-" => Ok(ParticleStatistics::Fermion),
            other => Err(format!("unknown statistics `{other}` (expected boson|fermion)")),
        }
    }
}

/// Sparse pure state of a fixed number of particles.
///
/// Configurations are kept in lexicographic order, which is also the order
/// used to fix the global phase in [`NParticleState::canonical`].
#[derive(Debug, Clone, PartialEq)]
pub struct NParticleState {
    particle_count: usize,
    amplitudes: BTreeMap<Configuration, Complex64>,
}

#[allow(clippy::len_without_is_empty)]
impl NParticleState {
    /// The zero vector of an `particle_count`-particle space.
    pub fn zero(particle_count: usize) -> Result<Self> {
        if particle_count == 0 {
            return Err(Error::NoParticles);
        }
        Ok(NParticleState {
            particle_count,
            amplitudes: BTreeMap::new(),
        })
    }

    /// Single-particle basis ket `|label>`.
    pub fn ket(label: BasisLabel) -> Self {
        Self::product(vec![label]).expect("one label is a valid configuration")
    }

    /// Unit-amplitude product ket `|l1>|l2>...`.
    pub fn product(labels: Configuration) -> Result<Self> {
        let n = labels.len();
        Self::from_terms(n, [(labels, Complex64::new(1.0, 0.0))])
    }

    /// Builds a state from `(configuration, amplitude)` terms; repeated
    /// configurations are summed and negligible amplitudes dropped.
    pub fn from_terms<I>(particle_count: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Configuration, Complex64)>,
    {
        let mut state = Self::zero(particle_count)?;
        for (config, amp) in terms {
            if config.len() != particle_count {
                return Err(Error::ConfigurationLength {
                    expected: particle_count,
                    found: config.len(),
                });
            }
            *state.amplitudes.entry(config).or_default() += amp;
        }
        Ok(state.pruned())
    }

    fn from_map(particle_count: usize, amplitudes: BTreeMap<Configuration, Complex64>) -> Self {
        NParticleState {
            particle_count,
            amplitudes,
        }
        .pruned()
    }

    pub fn particle_count(&self) -> usize {
        self.particle_count
    }

    /// Number of stored (nonzero) configurations.
    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_zero(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn amplitude(&self, config: &[BasisLabel]) -> Complex64 {
        self.amplitudes.get(config).copied().unwrap_or_default()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Configuration, &Complex64)> {
        self.amplitudes.iter()
    }

    /// Every label that appears in some configuration.
    pub fn labels(&self) -> BTreeSet<BasisLabel> {
        self.amplitudes.keys().flatten().cloned().collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.values().map(|a| a.norm_sqr()).sum()
    }

    pub fn norm(&self) -> f64 {
        self.norm_sqr().sqrt()
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < NORM_TOLERANCE
    }

    pub fn scale(&self, factor: Complex64) -> Self {
        Self::from_map(
            self.particle_count,
            self.amplitudes.iter().map(|(k, v)| (k.clone(), v * factor)).collect(),
        )
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        same_count(self, other)?;
        let mut sum = self.amplitudes.clone();
        for (k, v) in &other.amplitudes {
            *sum.entry(k.clone()).or_default() += v;
        }
        Ok(Self::from_map(self.particle_count, sum))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// `sum_k coeff_k * state_k`; all states must share a particle count.
    pub fn linear_combination<'a, I>(particle_count: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Complex64, &'a NParticleState)>,
    {
        terms
            .into_iter()
            .try_fold(Self::zero(particle_count)?, |acc, (c, s)| acc.add(&s.scale(c)))
    }

    /// Drops amplitudes below [`ZERO_THRESHOLD`].
    pub fn pruned(mut self) -> Self {
        self.amplitudes.retain(|_, a| a.norm() >= ZERO_THRESHOLD);
        self
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < ZERO_THRESHOLD {
            return Err(Error::ZeroNormState);
        }
        Ok(self.scale(Complex64::new(1.0 / n, 0.0)))
    }

    /// Normalized, pruned, with the first amplitude (in configuration order)
    /// real and positive. Two states describe the same ray iff their
    /// canonical forms coincide.
    pub fn canonical(&self) -> Result<Self> {
        let unit = self.normalized()?;
        let first = *unit.amplitudes.values().next().ok_or(Error::ZeroNormState)?;
        let phase = first.conj() / first.norm();
        let mut out = unit.scale(phase);
        if let Some(a) = out.amplitudes.values_mut().next() {
            *a = Complex64::new(a.norm(), 0.0);
        }
        Ok(out)
    }

    /// Largest amplitude-wise deviation `max |self - other|`.
    pub fn distance(&self, other: &Self) -> Result<f64> {
        same_count(self, other)?;
        let keys: BTreeSet<&Configuration> =
            self.amplitudes.keys().chain(other.amplitudes.keys()).collect();
        Ok(keys
            .into_iter()
            .map(|k| (self.amplitude(k) - other.amplitude(k)).norm())
            .fold(0.0, f64::max))
    }

    /// Distance between canonical forms, i.e. a phase-blind comparison.
    pub fn ray_distance(&self, other: &Self) -> Result<f64> {
        self.canonical()?.distance(&other.canonical()?)
    }
}

impl fmt::Display for NParticleState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.amplitudes.is_empty() {
            return f.write_str("0");
        }
        for (i, (config, amp)) in self.amplitudes.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "({:.6}{:+.6}i)", amp.re, amp.im)?;
            for label in config {
                write!(f, "|{label}>")?;
            }
        }
        Ok(())
    }
}

fn same_count(a: &NParticleState, b: &NParticleState) -> Result<()> {
    if a.particle_count != b.particle_count {
        return Err(Error::ParticleCountMismatch {
            left: a.particle_count,
            right: b.particle_count,
        });
    }
    Ok(())
}

/// Direct product `|a>|b>`: configurations concatenate, amplitudes multiply.
pub fn tensor(a: &NParticleState, b: &NParticleState) -> NParticleState {
    let mut out = BTreeMap::new();
    for (ka, va) in &a.amplitudes {
        for (kb, vb) in &b.amplitudes {
            let mut key = ka.clone();
            key.extend(kb.iter().cloned());
            out.insert(key, va * vb);
        }
    }
    NParticleState::from_map(a.particle_count + b.particle_count, out)
}

/// `<a|b>`, antilinear in `a`.
pub fn inner(a: &NParticleState, b: &NParticleState) -> Result<Complex64> {
    same_count(a, b)?;
    let (small, large, conj_small) = if a.len() <= b.len() { (a, b, true) } else { (b, a, false) };
    Ok(small
        .amplitudes
        .iter()
        .filter_map(|(k, v)| large.amplitudes.get(k).map(|w| (v, w)))
        .map(|(v, w)| if conj_small { v.conj() * w } else { w.conj() * v })
        .sum())
}

/// Swaps particles `i` and `j` in every configuration.
pub fn exchange(state: &NParticleState, i: usize, j: usize) -> Result<NParticleState> {
    let n = state.particle_count;
    for index in [i, j] {
        if index >= n {
            return Err(Error::IndexOutOfRange { index, count: n });
        }
    }
    if i == j {
        return Err(Error::SameParticle(i));
    }
    let swapped = state
        .amplitudes
        .iter()
        .map(|(k, v)| {
            let mut key = k.clone();
            key.swap(i, j);
            (key, *v)
        })
        .collect();
    Ok(NParticleState::from_map(n, swapped))
}

/// `Some(+1.0)` / `Some(-1.0)` when the state is an exchange eigenstate for
/// particles `i`, `j` (amplitude-wise within `tol`), `None` otherwise.
pub fn exchange_eigenvalue(state: &NParticleState, i: usize, j: usize, tol: f64) -> Result<Option<f64>> {
    let swapped = exchange(state, i, j)?;
    if swapped.distance(state)? < tol {
        Ok(Some(1.0))
    } else if swapped.distance(&state.scale(Complex64::new(-1.0, 0.0)))? < tol {
        Ok(Some(-1.0))
    } else {
        Ok(None)
    }
}

fn require_one_particle(s: &NParticleState) -> Result<()> {
    if s.particle_count != 1 {
        return Err(Error::ParticleCountMismatch {
            left: s.particle_count,
            right: 1,
        });
    }
    Ok(())
}

/// `(a (x) b +/- b (x) a)/sqrt 2` without renormalization. Exactly bilinear.
pub fn symmetrize_unnormalized(
    a: &NParticleState,
    b: &NParticleState,
    stats: ParticleStatistics,
) -> Result<NParticleState> {
    require_one_particle(a)?;
    require_one_particle(b)?;
    let direct = tensor(a, b);
    let swapped = tensor(b, a);
    direct
        .add(&swapped.scale(Complex64::new(stats.sign(), 0.0)))
        .map(|s| s.scale(Complex64::new(FRAC_1_SQRT_2, 0.0)))
}

/// Exchange-symmetrized two-particle state `|a, b>`, renormalized.
///
/// Two bosons may share a state (`|chi, chi>` is the plain product), while
/// two fermions in the same state give [`Error::ZeroNormState`].
pub fn symmetrize(a: &NParticleState, b: &NParticleState, stats: ParticleStatistics) -> Result<NParticleState> {
    for s in [a, b] {
        require_one_particle(s)?;
        let n2 = s.norm_sqr();
        if (n2 - 1.0).abs() > INPUT_NORM_TOLERANCE {
            return Err(Error::NotNormalized(n2));
        }
    }
    symmetrize_unnormalized(a, b, stats)?.normalized()
}

/// Symmetrized state of two basis labels, the common case `|x_h, y_t>`.
pub fn symmetrize_labels(a: &BasisLabel, b: &BasisLabel, stats: ParticleStatistics) -> Result<NParticleState> {
    symmetrize(
        &NParticleState::ket(a.clone()),
        &NParticleState::ket(b.clone()),
        stats,
    )
}

/// Splits a two-particle state into `internal (x) location` factors.
///
/// The internal factor uses location-free labels; the location factor uses
/// labels whose internal field is the location tag (`|h>|t>` etc.). The
/// location factor is normalized with its first amplitude real positive, the
/// internal factor carries norm and phase so that [`join_location`] gives the
/// input back. Fails with [`Error::NotSeparable`] when the Schmidt rank across
/// the internal/location cut exceeds one.
pub fn factorize_location(state: &NParticleState) -> Result<(NParticleState, NParticleState)> {
    if state.particle_count != 2 {
        return Err(Error::ParticleCountMismatch {
            left: state.particle_count,
            right: 2,
        });
    }
    if state.is_zero() {
        return Err(Error::ZeroNormState);
    }
    let mut entries = Vec::with_capacity(state.len());
    for (config, amp) in &state.amplitudes {
        let mut internals = Vec::with_capacity(2);
        let mut locations = Vec::with_capacity(2);
        for label in config {
            let loc = label.location().ok_or_else(|| Error::MissingLocation(label.to_string()))?;
            internals.push(label.internal.clone());
            locations.push(loc.to_owned());
        }
        entries.push((internals, locations, *amp));
    }
    let matrix = KeyedMatrix::from_entries(entries);
    let decomposition = svd(&matrix.data);
    let rank = decomposition.values.iter().filter(|&&s| s > RANK_THRESHOLD).count();
    if rank != 1 {
        return Err(Error::NotSeparable { rank });
    }

    let weight = decomposition.values[0];
    let loc_vec = &decomposition.right[0];
    let anchor = loc_vec
        .iter()
        .find(|c| c.norm() >= ZERO_THRESHOLD)
        .copied()
        .ok_or(Error::ZeroNormState)?;
    let phase = anchor / anchor.norm();

    let location = NParticleState::from_terms(
        2,
        matrix.cols.iter().zip(loc_vec).map(|(locs, c)| {
            (
                locs.iter().map(|l| BasisLabel::internal(l.clone()).expect("non-empty location")).collect(),
                c * phase.conj(),
            )
        }),
    )?;
    let internal = NParticleState::from_terms(
        2,
        matrix.rows.iter().zip(&decomposition.left[0]).map(|(ints, c)| {
            (
                ints.iter().map(|l| BasisLabel::internal(l.clone()).expect("validated label")).collect(),
                c * phase * weight,
            )
        }),
    )?;
    Ok((internal, location))
}

/// Inverse of [`factorize_location`]: pins each particle's internal label to
/// the location carried by the matching slot of the location factor.
pub fn join_location(internal: &NParticleState, location: &NParticleState) -> Result<NParticleState> {
    same_count(internal, location)?;
    let n = internal.particle_count;
    let mut terms = Vec::with_capacity(internal.len() * location.len());
    for (ki, vi) in &internal.amplitudes {
        for (kl, vl) in &location.amplitudes {
            let config = ki
                .iter()
                .zip(kl)
                .map(|(i, l)| BasisLabel::located(i.internal.clone(), &l.internal))
                .collect::<Result<Configuration>>()?;
            terms.push((config, vi * vl));
        }
    }
    NParticleState::from_terms(n, terms)
}
