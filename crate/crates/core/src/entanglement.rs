//! Bipartite entanglement: Schmidt decomposition, the down-converted photon
//! pair in its naive and exchange-symmetrized forms, and projective
//! measurement with collapse.
//!
//! Measurements address a particle by its location/momentum tag rather than
//! by tuple slot. In a symmetrized state "the photon with momentum 1" sits in
//! both slots, so a slot-based projector would be meaningless there.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::hilbert::{
    join_location, symmetrize_labels, tensor, BasisLabel, Configuration, NParticleState, ParticleStatistics,
    INPUT_NORM_TOLERANCE, RANK_THRESHOLD,
};
use crate::linalg::{svd, KeyedMatrix};

pub const HORIZONTAL: &str = "H";
pub const VERTICAL: &str = "V";
pub const MOMENTUM_1: &str = "1";
pub const MOMENTUM_2: &str = "2";

/// Tolerance on Born probabilities and their completeness.
pub const PROBABILITY_TOLERANCE: f64 = 1e-12;

/// How a two-particle basis is cut into subsystems A and B.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum BipartiteSplit {
    /// A = particle 1, B = particle 2.
    ParticleSlots,
    /// A = both internal labels, B = both location labels.
    InternalLocation,
}

#[derive(Debug, Clone)]
pub struct SchmidtResult {
    pub split: BipartiteSplit,
    /// Descending, non-negative.
    pub coefficients: Vec<f64>,
    pub left_vectors: Vec<NParticleState>,
    pub right_vectors: Vec<NParticleState>,
    /// Number of coefficients above [`RANK_THRESHOLD`].
    pub rank: usize,
}

impl SchmidtResult {
    /// `sum_i c_i |l_i> (x) |r_i>`, mapped back into the original basis.
    pub fn reconstruct(&self) -> Result<NParticleState> {
        let mut out = NParticleState::zero(2)?;
        for ((c, l), r) in self.coefficients.iter().zip(&self.left_vectors).zip(&self.right_vectors) {
            let term = match self.split {
                BipartiteSplit::ParticleSlots => tensor(l, r),
                BipartiteSplit::InternalLocation => join_location(l, r)?,
            };
            out = out.add(&term.scale(Complex64::new(*c, 0.0)))?;
        }
        Ok(out)
    }

    /// Sum of squared coefficients.
    pub fn weight(&self) -> f64 {
        self.coefficients.iter().map(|c| c * c).sum()
    }
}

fn require_two(state: &NParticleState) -> Result<()> {
    if state.particle_count() != 2 {
        return Err(Error::ParticleCountMismatch {
            left: state.particle_count(),
            right: 2,
        });
    }
    Ok(())
}

/// Schmidt decomposition of a two-particle state across `split`.
pub fn schmidt(state: &NParticleState, split: BipartiteSplit) -> Result<SchmidtResult> {
    require_two(state)?;
    if state.is_zero() {
        return Err(Error::ZeroNormState);
    }
    let mut entries: Vec<(Configuration, Configuration, Complex64)> = Vec::with_capacity(state.len());
    for (config, amp) in state.terms() {
        let (row, col) = match split {
            BipartiteSplit::ParticleSlots => (vec![config[0].clone()], vec![config[1].clone()]),
            BipartiteSplit::InternalLocation => {
                let mut internals = Vec::with_capacity(2);
                let mut locations = Vec::with_capacity(2);
                for label in config {
                    let loc = label.location().ok_or_else(|| Error::MissingLocation(label.to_string()))?;
                    internals.push(BasisLabel::internal(label.internal_name())?);
                    locations.push(BasisLabel::internal(loc)?);
                }
                (internals, locations)
            }
        };
        entries.push((row, col, *amp));
    }
    let matrix = KeyedMatrix::from_entries(entries);
    let decomposition = svd(&matrix.data);
    let width = match split {
        BipartiteSplit::ParticleSlots => 1,
        BipartiteSplit::InternalLocation => 2,
    };
    let to_state = |keys: &[Configuration], amps: &[Complex64]| {
        NParticleState::from_terms(width, keys.iter().cloned().zip(amps.iter().copied()))
    };
    let left_vectors = decomposition
        .left
        .iter()
        .map(|u| to_state(&matrix.rows, u))
        .collect::<Result<Vec<_>>>()?;
    let right_vectors = decomposition
        .right
        .iter()
        .map(|v| to_state(&matrix.cols, v))
        .collect::<Result<Vec<_>>>()?;
    let rank = decomposition.values.iter().filter(|&&s| s > RANK_THRESHOLD).count();
    Ok(SchmidtResult {
        split,
        coefficients: decomposition.values,
        left_vectors,
        right_vectors,
        rank,
    })
}

fn photon(polarization: &str, momentum: &str) -> BasisLabel {
    BasisLabel::located(polarization, momentum).expect("static labels are valid")
}

/// `(|H>_1 |H>_2 + |V>_1 |V>_2)/sqrt 2`, treating the photons as
/// distinguishable by momentum.
pub fn photon_pair_naive() -> NParticleState {
    NParticleState::from_terms(
        2,
        [HORIZONTAL, VERTICAL].map(|p| {
            (
                vec![photon(p, MOMENTUM_1), photon(p, MOMENTUM_2)],
                Complex64::new(FRAC_1_SQRT_2, 0.0),
            )
        }),
    )
    .expect("two-slot configurations")
}

/// `(|H_1, H_2> + |V_1, V_2>)/sqrt 2` with both terms boson-symmetrized.
pub fn photon_pair_symmetrized() -> NParticleState {
    let pair = |p: &str| {
        symmetrize_labels(&photon(p, MOMENTUM_1), &photon(p, MOMENTUM_2), ParticleStatistics::Boson)
            .expect("distinct momenta never cancel")
    };
    pair(HORIZONTAL)
        .add(&pair(VERTICAL))
        .expect("same particle count")
        .scale(Complex64::new(FRAC_1_SQRT_2, 0.0))
}

/// Internal labels carried by particles at `location` anywhere in the state.
pub fn internal_labels_at(state: &NParticleState, location: &str) -> BTreeSet<String> {
    state
        .labels()
        .into_iter()
        .filter(|l| l.location() == Some(location))
        .map(|l| l.internal_name().to_owned())
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Outcome {
    /// The particle at the measured location has this internal label.
    Internal(String),
    /// None of the listed outcomes (or no particle at that location).
    Unlisted,
}

impl Outcome {
    pub fn label(&self) -> Option<&str> {
        match self {
            Outcome::Internal(s) => Some(s),
            Outcome::Unlisted => None,
        }
    }
}

/// Born probabilities for every listed outcome at one location.
#[derive(Debug, Clone, Serialize)]
pub struct OutcomeTable {
    pub location: String,
    pub entries: Vec<(String, f64)>,
    /// `1 - sum(entries)`: weight not covered by the listed outcomes.
    pub deficit: f64,
}

impl OutcomeTable {
    pub fn probability(&self, outcome: &str) -> Option<f64> {
        self.entries.iter().find(|(o, _)| o == outcome).map(|(_, p)| *p)
    }

    pub fn total(&self) -> f64 {
        self.entries.iter().map(|(_, p)| p).sum()
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct MeasurementRecord {
    pub location: String,
    pub outcome: Outcome,
    pub probability: f64,
    #[serde(skip)]
    pub post_state: NParticleState,
}

/// The internal label of whichever particle sits at `location`, if any.
fn internal_at<'a>(config: &'a [BasisLabel], location: &str) -> Result<Option<&'a str>> {
    let mut found = None;
    for label in config {
        if label.location() == Some(location) {
            if found.is_some() {
                return Err(Error::AmbiguousLocation(location.to_owned()));
            }
            found = Some(label.internal_name());
        }
    }
    Ok(found)
}

fn check_measurable(state: &NParticleState, location: &str) -> Result<()> {
    let n2 = state.norm_sqr();
    if (n2 - 1.0).abs() > INPUT_NORM_TOLERANCE {
        return Err(Error::NotNormalized(n2));
    }
    if internal_labels_at(state, location).is_empty() {
        return Err(Error::LocationAbsent(location.to_owned()));
    }
    Ok(())
}

fn outcome_matches(found: Option<&str>, outcome: &Outcome, listed: &[&str]) -> bool {
    match outcome {
        Outcome::Internal(x) => found == Some(x.as_str()),
        Outcome::Unlisted => found.is_none_or(|f| !listed.contains(&f)),
    }
}

/// Applies the projector for `outcome` at `location`; returns the Born
/// probability and, when it is nonzero, the renormalized post-measurement
/// state.
pub fn project(
    state: &NParticleState,
    location: &str,
    outcome: &Outcome,
    listed: &[&str],
) -> Result<(f64, Option<NParticleState>)> {
    check_measurable(state, location)?;
    let mut kept = Vec::new();
    for (config, amp) in state.terms() {
        if outcome_matches(internal_at(config, location)?, outcome, listed) {
            kept.push((config.clone(), *amp));
        }
    }
    let projected = NParticleState::from_terms(state.particle_count(), kept)?;
    let probability = projected.norm_sqr();
    let post = if probability > PROBABILITY_TOLERANCE {
        Some(projected.normalized()?)
    } else {
        None
    };
    Ok((probability, post))
}

/// Born probabilities of each listed outcome. If the outcomes do not exhaust
/// the internal states found at `location`, the shortfall is reported as
/// `deficit`, not renormalized away.
pub fn outcome_table(state: &NParticleState, location: &str, outcomes: &[&str]) -> Result<OutcomeTable> {
    check_measurable(state, location)?;
    let mut entries: Vec<(String, f64)> = outcomes.iter().map(|o| ((*o).to_owned(), 0.0)).collect();
    for (config, amp) in state.terms() {
        if let Some(found) = internal_at(config, location)? {
            if let Some(slot) = entries.iter_mut().find(|(o, _)| o == found) {
                slot.1 += amp.norm_sqr();
            }
        }
    }
    let total: f64 = entries.iter().map(|(_, p)| p).sum();
    Ok(OutcomeTable {
        location: location.to_owned(),
        entries,
        deficit: (1.0 - total).max(0.0),
    })
}

/// Samples one outcome at `location` with Born weights and collapses.
pub fn measure<R: Rng + ?Sized>(
    state: &NParticleState,
    location: &str,
    outcomes: &[&str],
    rng: &mut R,
) -> Result<MeasurementRecord> {
    let table = outcome_table(state, location, outcomes)?;
    let draw: f64 = rng.random();
    let mut cumulative = 0.0;
    let mut chosen = None;
    for (label, p) in &table.entries {
        if *p <= PROBABILITY_TOLERANCE {
            continue;
        }
        cumulative += p;
        chosen = Some(Outcome::Internal(label.clone()));
        if draw < cumulative {
            break;
        }
    }
    // A draw past every listed outcome lands in the deficit when there is
    // one; otherwise it is round-off and the last positive outcome stands.
    let outcome = match chosen {
        Some(o) if draw < cumulative || table.deficit <= PROBABILITY_TOLERANCE => o,
        _ => Outcome::Unlisted,
    };
    let (probability, post) = project(state, location, &outcome, outcomes)?;
    Ok(MeasurementRecord {
        location: location.to_owned(),
        outcome,
        probability,
        post_state: post.ok_or(Error::ZeroNormState)?,
    })
}

/// Deterministic generator used for every sampled measurement.
pub fn seeded_rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn measure_seeded(state: &NParticleState, location: &str, outcomes: &[&str], seed: u64) -> Result<MeasurementRecord> {
    measure(state, location, outcomes, &mut seeded_rng(seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hilbert::{exchange_eigenvalue, inner, symmetrize_labels};

    const HV: [&str; 2] = [HORIZONTAL, VERTICAL];

    #[test]
    fn naive_pair_amplitudes() {
        let s = photon_pair_naive();
        let hh = s.amplitude(&[photon("H", "1"), photon("H", "2")]);
        assert!((hh.re - FRAC_1_SQRT_2).abs() < 1e-15);
        assert_eq!(s.amplitude(&[photon("H", "1"), photon("V", "2")]), Complex64::default());
        assert!(s.is_normalized());
    }

    #[test]
    fn symmetrized_pair_amplitudes() {
        let s = photon_pair_symmetrized();
        for config in [[photon("H", "1"), photon("H", "2")], [photon("H", "2"), photon("H", "1")]] {
            assert!((s.amplitude(&config).re - 0.5).abs() < 1e-15);
        }
        assert!((inner(&s, &s).unwrap().re - 1.0).abs() < 1e-12);
        assert_eq!(exchange_eigenvalue(&s, 0, 1, 1e-12).unwrap(), Some(1.0));
        assert_eq!(exchange_eigenvalue(&photon_pair_naive(), 0, 1, 1e-12).unwrap(), None);
    }

    #[test]
    fn schmidt_ranks() {
        let product = tensor(
            &NParticleState::ket(BasisLabel::internal("phi").unwrap()),
            &NParticleState::ket(BasisLabel::internal("psi").unwrap()),
        );
        assert_eq!(schmidt(&product, BipartiteSplit::ParticleSlots).unwrap().rank, 1);

        let naive = schmidt(&photon_pair_naive(), BipartiteSplit::ParticleSlots).unwrap();
        assert_eq!(naive.rank, 2);
        for c in &naive.coefficients {
            assert!((c - FRAC_1_SQRT_2).abs() < 1e-12);
        }

        let pre_clone = symmetrize_labels(
            &BasisLabel::located("phi", "h").unwrap(),
            &BasisLabel::located("0", "t").unwrap(),
            ParticleStatistics::Boson,
        )
        .unwrap();
        let r = schmidt(&pre_clone, BipartiteSplit::ParticleSlots).unwrap();
        assert_eq!(r.rank, 2);
        assert!(r.reconstruct().unwrap().distance(&pre_clone).unwrap() < 1e-12);
    }

    #[test]
    fn schmidt_internal_location_split() {
        let s = photon_pair_symmetrized();
        // (HH + VV)/sqrt2 (x) (12 + 21)/sqrt2
        let r = schmidt(&s, BipartiteSplit::InternalLocation).unwrap();
        assert_eq!(r.rank, 1);
        assert!((r.weight() - 1.0).abs() < 1e-12);
        assert!(r.reconstruct().unwrap().distance(&s).unwrap() < 1e-12);
    }

    #[test]
    fn schmidt_of_zero_state_fails() {
        assert_eq!(
            schmidt(&NParticleState::zero(2).unwrap(), BipartiteSplit::ParticleSlots).unwrap_err(),
            Error::ZeroNormState
        );
    }

    #[test]
    fn collapse_onto_symmetrized_horizontal_pair() {
        let s = photon_pair_symmetrized();
        let table = outcome_table(&s, MOMENTUM_1, &HV).unwrap();
        assert!((table.probability("H").unwrap() - 0.5).abs() < 1e-12);
        assert!((table.probability("V").unwrap() - 0.5).abs() < 1e-12);
        assert!(table.deficit < 1e-12);

        let (p, post) = project(&s, MOMENTUM_1, &Outcome::Internal("H".into()), &HV).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        let post = post.unwrap();
        let expected =
            symmetrize_labels(&photon("H", "1"), &photon("H", "2"), ParticleStatistics::Boson).unwrap();
        assert!(post.canonical().unwrap().distance(&expected.canonical().unwrap()).unwrap() < 1e-12);

        let second = outcome_table(&post, MOMENTUM_2, &HV).unwrap();
        assert!((second.probability("H").unwrap() - 1.0).abs() < 1e-12);
        assert!(second.probability("V").unwrap() < 1e-12);
    }

    #[test]
    fn sampled_measurement_is_repeatable() {
        for seed in 0..20 {
            let first = measure_seeded(&photon_pair_symmetrized(), MOMENTUM_1, &HV, seed).unwrap();
            let again = measure_seeded(&first.post_state, MOMENTUM_1, &HV, seed + 1000).unwrap();
            assert_eq!(first.outcome, again.outcome);
            assert!((again.probability - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn measurement_errors_and_deficit() {
        let s = photon_pair_naive();
        assert!(matches!(outcome_table(&s, "3", &HV), Err(Error::LocationAbsent(_))));
        assert!(matches!(outcome_table(&s.scale(Complex64::new(2.0, 0.0)), "1", &HV), Err(Error::NotNormalized(_))));
        let partial = outcome_table(&s, MOMENTUM_1, &["H"]).unwrap();
        assert!((partial.deficit - 0.5).abs() < 1e-12);
        let (p, post) = project(&s, MOMENTUM_1, &Outcome::Unlisted, &["H"]).unwrap();
        assert!((p - 0.5).abs() < 1e-12);
        assert!(post.is_some());
    }

    #[test]
    fn shared_location_is_ambiguous() {
        let s = tensor(&NParticleState::ket(photon("H", "1")), &NParticleState::ket(photon("V", "1")));
        assert!(matches!(outcome_table(&s, "1", &HV), Err(Error::AmbiguousLocation(_))));
    }
}
