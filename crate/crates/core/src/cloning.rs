//! The cloning map `T` on symmetrized two-particle states.
//!
//! `T` is defined extensionally: for each internal state `x` it sends
//! `|x_h, 0_t>` (particle to copy "here", blank "there") to `|x_h, x_t>`,
//! and it acts on everything else in the span by linearity. Comparing that
//! linear extension against the ideal copy of a superposition is the
//! no-cloning argument, quantified as a fidelity.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hilbert::{
    inner, symmetrize, symmetrize_labels, BasisLabel, Configuration, NParticleState, ParticleStatistics,
};

/// Internal label of the blank target state.
pub const BLANK: &str = "0";
/// Location of the original.
pub const HERE: &str = "h";
/// Location of the copy.
pub const THERE: &str = "t";

/// Fidelity at or above `1 - CLONE_TOLERANCE` counts as a perfect copy.
pub const CLONE_TOLERANCE: f64 = 1e-12;
/// Maximum residual norm for a state to count as inside the declared span.
pub const SPAN_TOLERANCE: f64 = 1e-10;
/// Tolerance on `|a|^2 + |b|^2 = 1` for superposition amplitudes.
pub const AMPLITUDE_TOLERANCE: f64 = 1e-12;

fn here(internal: &str) -> Result<BasisLabel> {
    BasisLabel::located(internal, HERE)
}

fn there(internal: &str) -> Result<BasisLabel> {
    BasisLabel::located(internal, THERE)
}

fn check_copyable(label: &str) -> Result<()> {
    if label.is_empty() {
        return Err(Error::EmptyInternalLabel);
    }
    if label == BLANK {
        return Err(Error::BlankLabel(label.to_owned()));
    }
    Ok(())
}

/// `|x_h, 0_t>`, the state before copying `x`.
pub fn clone_input(internal: &str, stats: ParticleStatistics) -> Result<NParticleState> {
    symmetrize_labels(&here(internal)?, &there(BLANK)?, stats)
}

/// `|x_h, x_t>`, the state after copying `x`.
pub fn clone_output(internal: &str, stats: ParticleStatistics) -> Result<NParticleState> {
    symmetrize_labels(&here(internal)?, &there(internal)?, stats)
}

#[derive(Debug, Clone)]
pub struct CloneMap {
    statistics: ParticleStatistics,
    actions: Vec<(NParticleState, NParticleState)>,
}

impl CloneMap {
    /// Declares `T|x_h, 0_t> = |x_h, x_t>` for every `x` in `internals`.
    pub fn for_internal_states(internals: &[&str], statistics: ParticleStatistics) -> Result<Self> {
        let mut actions = Vec::with_capacity(internals.len());
        for (k, &x) in internals.iter().enumerate() {
            check_copyable(x)?;
            if internals[..k].contains(&x) {
                return Err(Error::IdenticalLabels(x.to_owned()));
            }
            actions.push((clone_input(x, statistics)?, clone_output(x, statistics)?));
        }
        for (i, (u, _)) in actions.iter().enumerate() {
            for (v, _) in &actions[..i] {
                let overlap = inner(u, v)?.norm();
                if overlap > SPAN_TOLERANCE {
                    return Err(Error::NonOrthogonalInputs { overlap });
                }
            }
        }
        Ok(CloneMap { statistics, actions })
    }

    pub fn statistics(&self) -> ParticleStatistics {
        self.statistics
    }

    /// Declared `(input, output)` pairs.
    pub fn actions(&self) -> &[(NParticleState, NParticleState)] {
        &self.actions
    }

    /// Applies the linear extension of `T`.
    pub fn apply(&self, state: &NParticleState) -> Result<NParticleState> {
        if state.particle_count() != 2 {
            return Err(Error::ParticleCountMismatch {
                left: state.particle_count(),
                right: 2,
            });
        }
        let coefficients = self
            .actions
            .iter()
            .map(|(input, _)| inner(input, state))
            .collect::<Result<Vec<_>>>()?;
        let projection = NParticleState::linear_combination(
            2,
            coefficients.iter().zip(&self.actions).map(|(&c, (input, _))| (c, input)),
        )?;
        let residual = state.sub(&projection)?.norm();
        if residual > SPAN_TOLERANCE {
            return Err(Error::OutsideSpan { residual });
        }
        NParticleState::linear_combination(
            2,
            coefficients.iter().zip(&self.actions).map(|(&c, (_, output))| (c, output)),
        )
    }
}

pub fn apply_clone_map(map: &CloneMap, state: &NParticleState) -> Result<NParticleState> {
    map.apply(state)
}

fn check_superposition(a: Complex64, b: Complex64, psi: &str, phi: &str) -> Result<()> {
    check_copyable(psi)?;
    check_copyable(phi)?;
    if psi == phi {
        return Err(Error::IdenticalLabels(psi.to_owned()));
    }
    let weight = a.norm_sqr() + b.norm_sqr();
    if (weight - 1.0).abs() > AMPLITUDE_TOLERANCE {
        return Err(Error::AmplitudesNotNormalized(weight));
    }
    Ok(())
}

/// `a|psi_l> + b|phi_l>` for a single particle at location `l`.
fn superposed(a: Complex64, b: Complex64, psi: &str, phi: &str, location: &str) -> Result<NParticleState> {
    NParticleState::ket(BasisLabel::located(psi, location)?)
        .scale(a)
        .add(&NParticleState::ket(BasisLabel::located(phi, location)?).scale(b))
}

/// What a true copier would produce: `|a psi_h + b phi_h, a psi_t + b phi_t>`.
pub fn ideal_clone(
    a: Complex64,
    b: Complex64,
    psi: &str,
    phi: &str,
    stats: ParticleStatistics,
) -> Result<NParticleState> {
    check_superposition(a, b, psi, phi)?;
    symmetrize(
        &superposed(a, b, psi, phi, HERE)?,
        &superposed(a, b, psi, phi, THERE)?,
        stats,
    )
}

/// The ideal clone written out term by term:
/// `a^2 |psi_h,psi_t> + ab (|psi_h,phi_t> + |phi_h,psi_t>) + b^2 |phi_h,phi_t>`.
pub fn ideal_clone_expansion(
    a: Complex64,
    b: Complex64,
    psi: &str,
    phi: &str,
    stats: ParticleStatistics,
) -> Result<NParticleState> {
    check_superposition(a, b, psi, phi)?;
    let pair = |x: &str, y: &str| symmetrize_labels(&here(x)?, &there(y)?, stats);
    let terms = [
        (a * a, pair(psi, psi)?),
        (a * b, pair(psi, phi)?),
        (a * b, pair(phi, psi)?),
        (b * b, pair(phi, phi)?),
    ];
    NParticleState::linear_combination(2, terms.iter().map(|(c, s)| (*c, s)))
}

/// `a|psi_h, 0_t> + b|phi_h, 0_t>`, the superposition handed to `T`.
pub fn superposed_input(
    a: Complex64,
    b: Complex64,
    psi: &str,
    phi: &str,
    stats: ParticleStatistics,
) -> Result<NParticleState> {
    let u = clone_input(psi, stats)?;
    let v = clone_input(phi, stats)?;
    NParticleState::linear_combination(2, [(a, &u), (b, &v)])
}

#[derive(Debug, Clone)]
pub struct CloneVerdict {
    pub ideal_state: NParticleState,
    pub linear_state: NParticleState,
    /// `|<ideal|linear>|`, in `[0, 1]`.
    pub fidelity: f64,
    pub is_clone: bool,
}

/// Runs `T` on `a|psi_h,0_t> + b|phi_h,0_t>` and compares the outcome with
/// the ideal copy. For real non-negative `a`, `b` the fidelity is `a^3 + b^3`,
/// reaching one only when `a` or `b` vanishes.
pub fn no_cloning_gap(
    a: Complex64,
    b: Complex64,
    psi: &str,
    phi: &str,
    stats: ParticleStatistics,
) -> Result<CloneVerdict> {
    let ideal_state = ideal_clone(a, b, psi, phi, stats)?;
    let map = CloneMap::for_internal_states(&[psi, phi], stats)?;
    let linear_state = map.apply(&superposed_input(a, b, psi, phi, stats)?)?;
    let fidelity = inner(&ideal_state, &linear_state)?.norm().min(1.0);
    Ok(CloneVerdict {
        ideal_state,
        linear_state,
        fidelity,
        is_clone: fidelity >= 1.0 - CLONE_TOLERANCE,
    })
}

/// `(cos t, sin t)` for `points` angles evenly spaced over `[0, pi/2]`,
/// endpoints included.
pub fn quarter_circle(points: usize) -> Vec<(f64, f64)> {
    let last = points.saturating_sub(1).max(1) as f64;
    (0..points)
        .map(|k| {
            let theta = std::f64::consts::FRAC_PI_2 * k as f64 / last;
            (theta.cos(), theta.sin())
        })
        .collect()
}

/// Batch [`no_cloning_gap`] over many amplitude pairs.
pub fn clone_sweep(
    amplitudes: &[(Complex64, Complex64)],
    psi: &str,
    phi: &str,
    stats: ParticleStatistics,
    exec: Exec,
) -> Vec<Result<CloneVerdict>> {
    exec.map_slice(amplitudes, |&(a, b)| no_cloning_gap(a, b, psi, phi, stats))
}

/// Copies particle 1's internal state onto particle 2, slot by slot:
/// `|x_l>|y_m>  ->  |x_l>|x_m>`. This is the per-product reading of `T` that
/// ignores exchange symmetry.
pub fn naive_slot_clone(state: &NParticleState) -> Result<NParticleState> {
    if state.particle_count() != 2 {
        return Err(Error::ParticleCountMismatch {
            left: state.particle_count(),
            right: 2,
        });
    }
    let mut terms: Vec<(Configuration, Complex64)> = Vec::with_capacity(state.len());
    for (config, amp) in state.terms() {
        let (first, second) = (&config[0], &config[1]);
        let target = second.location().ok_or_else(|| Error::MissingLocation(second.to_string()))?;
        let copy = BasisLabel::located(first.internal_name(), target)?;
        terms.push((vec![first.clone(), copy], *amp));
    }
    NParticleState::from_terms(2, terms)
}

#[derive(Debug, Clone)]
pub struct WrongClone {
    /// `(|phi_h>|phi_t> +/- |0_t>|0_h>)/sqrt 2`
    pub wrong: NParticleState,
    /// `|phi_h, phi_t>`
    pub ideal: NParticleState,
    pub fidelity: f64,
}

/// Applies [`naive_slot_clone`] to `|phi_h, 0_t>` and measures how far the
/// result is from a genuine copy.
pub fn wrong_clone_demo(phi: &str, stats: ParticleStatistics) -> Result<WrongClone> {
    check_copyable(phi)?;
    let wrong = naive_slot_clone(&clone_input(phi, stats)?)?;
    let ideal = clone_output(phi, stats)?;
    let fidelity = inner(&ideal, &wrong)?.norm();
    Ok(WrongClone { wrong, ideal, fidelity })
}
