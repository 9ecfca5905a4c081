//! One-particle probability densities on uniform 1-D grids.
//!
//! For the symmetrized state of two orthogonal orbitals each particle sees
//! `(|phi|^2 + |psi|^2)/2`; for the plain product particle 1 sees `|phi|^2`
//! and particle 2 sees `|psi|^2`. When the orbitals live in disjoint wells,
//! restricting the symmetrized density to one well and renormalizing gives
//! back the product-state answer.
//!
//! Integrals use the trapezoidal rule.

use std::fmt::Write as _;
use std::ops::Range;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hilbert::ParticleStatistics;

/// Normalization tolerance for grid wavefunctions.
pub const GRID_NORM_TOLERANCE: f64 = 1e-8;
/// Largest `|<phi|psi>|` accepted as orthogonal.
pub const ORTHOGONALITY_TOLERANCE: f64 = 1e-6;
/// Default shared-weight threshold for [`disjoint_support`].
pub const DISJOINT_THRESHOLD: f64 = 1e-10;

/// Uniform grid `x_k = x0 + k dx`, `k < points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridSpec {
    pub x0: f64,
    pub dx: f64,
    pub points: usize,
}

impl GridSpec {
    pub fn new(x0: f64, dx: f64, points: usize) -> Result<Self> {
        if !(dx > 0.0 && dx.is_finite() && x0.is_finite()) {
            return Err(Error::InvalidGrid(format!("spacing {dx} must be positive and finite")));
        }
        if points < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {points}")));
        }
        Ok(GridSpec { x0, dx, points })
    }

    /// `points` samples spanning `[x_min, x_max]`, both ends included.
    pub fn spanning(x_min: f64, x_max: f64, points: usize) -> Result<Self> {
        if points < 2 {
            return Err(Error::InvalidGrid(format!("need at least 2 points, got {points}")));
        }
        if x_min.is_nan() || x_max.is_nan() || x_max <= x_min {
            return Err(Error::InvalidGrid(format!("empty range [{x_min}, {x_max}]")));
        }
        Self::new(x_min, (x_max - x_min) / (points - 1) as f64, points)
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x0 + k as f64 * self.dx
    }

    pub fn x_max(&self) -> f64 {
        self.x(self.points - 1)
    }

    /// Indices whose abscissa lies in `[left, right]` (with a small slack for
    /// round-off on the endpoints).
    pub fn index_range(&self, left: f64, right: f64) -> Range<usize> {
        let slack = 1e-9 * self.dx;
        let lo = ((left - self.x0) / self.dx - slack).ceil().max(0.0) as usize;
        let hi = (((right - self.x0) / self.dx + slack).floor() + 1.0).max(0.0) as usize;
        lo.min(self.points)..hi.min(self.points)
    }

    /// The same spacing restricted to `region`.
    pub fn subgrid(&self, region: &Range<usize>) -> GridSpec {
        GridSpec {
            x0: self.x(region.start),
            dx: self.dx,
            points: region.len(),
        }
    }

    fn same_as(&self, other: &GridSpec) -> bool {
        self.points == other.points && self.x0 == other.x0 && self.dx == other.dx
    }
}

/// Trapezoidal `sum f_k dx` with half weight on the two end samples.
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    match values {
        [] | [_] => 0.0,
        [first, .., last] => dx * (values.iter().sum::<f64>() - 0.5 * (first + last)),
    }
}

fn trapezoid_complex(values: impl Iterator<Item = Complex64>, n: usize, dx: f64) -> Complex64 {
    let mut total = Complex64::default();
    for (k, v) in values.enumerate() {
        let w = if k == 0 || k + 1 == n { 0.5 } else { 1.0 };
        total += v * w;
    }
    total * dx
}

#[derive(Debug, Clone, PartialEq)]
pub struct WaveFunctionGrid {
    grid: GridSpec,
    samples: Vec<Complex64>,
}

impl WaveFunctionGrid {
    pub fn new(grid: GridSpec, samples: Vec<Complex64>) -> Result<Self> {
        if samples.len() != grid.points {
            return Err(Error::InvalidGrid(format!(
                "{} samples for a {}-point grid",
                samples.len(),
                grid.points
            )));
        }
        Ok(WaveFunctionGrid { grid, samples })
    }

    pub fn from_fn(grid: GridSpec, f: impl Fn(f64) -> Complex64 + Sync + Send, exec: Exec) -> Self {
        let samples = exec.map_range(grid.points, |k| f(grid.x(k)));
        WaveFunctionGrid { grid, samples }
    }

    pub fn grid(&self) -> &GridSpec {
        &self.grid
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn abs_sqr(&self) -> Vec<f64> {
        self.samples.iter().map(|s| s.norm_sqr()).collect()
    }

    pub fn norm_sqr(&self) -> f64 {
        trapezoid(&self.abs_sqr(), self.grid.dx)
    }

    pub fn is_normalized(&self) -> bool {
        (self.norm_sqr() - 1.0).abs() < GRID_NORM_TOLERANCE
    }

    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm_sqr().sqrt();
        if n < 1e-300 {
            return Err(Error::ZeroNormState);
        }
        Ok(WaveFunctionGrid {
            grid: self.grid,
            samples: self.samples.iter().map(|s| s / n).collect(),
        })
    }

    /// `<self|other>` by trapezoid quadrature.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        check_geometry(self, other)?;
        Ok(trapezoid_complex(
            self.samples.iter().zip(&other.samples).map(|(a, b)| a.conj() * b),
            self.grid.points,
            self.grid.dx,
        ))
    }

    /// Plain `sum |f_k|^2 dx` over `region`.
    fn weight_in(&self, region: &Range<usize>) -> f64 {
        self.samples[region.clone()].iter().map(|s| s.norm_sqr()).sum::<f64>() * self.grid.dx
    }

    /// Pointwise sum `a f + b g`, e.g. an orbital spread over two wells.
    pub fn superpose(&self, a: Complex64, other: &Self, b: Complex64) -> Result<Self> {
        check_geometry(self, other)?;
        Ok(WaveFunctionGrid {
            grid: self.grid,
            samples: self.samples.iter().zip(&other.samples).map(|(f, g)| a * f + b * g).collect(),
        })
    }
}

fn check_geometry(a: &WaveFunctionGrid, b: &WaveFunctionGrid) -> Result<()> {
    if a.grid.same_as(&b.grid) {
        Ok(())
    } else {
        Err(Error::GeometryMismatch)
    }
}

fn check_normalized(w: &WaveFunctionGrid) -> Result<()> {
    let n = w.norm_sqr();
    if (n - 1.0).abs() > GRID_NORM_TOLERANCE {
        return Err(Error::WaveNotNormalized(n));
    }
    Ok(())
}

fn check_particle(which: usize) -> Result<()> {
    if which == 1 || which == 2 {
        Ok(())
    } else {
        Err(Error::InvalidParticle(which))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityProfile {
    pub grid: GridSpec,
    pub values: Vec<f64>,
}

impl DensityProfile {
    pub fn integral(&self) -> f64 {
        trapezoid(&self.values, self.grid.dx)
    }

    /// `|f(x)|^2` as a profile.
    pub fn of_wave(wave: &WaveFunctionGrid) -> Self {
        DensityProfile {
            grid: wave.grid,
            values: wave.abs_sqr(),
        }
    }

    pub fn restrict(&self, region: &Range<usize>) -> Self {
        DensityProfile {
            grid: self.grid.subgrid(region),
            values: self.values[region.clone()].to_vec(),
        }
    }

    pub fn max_abs_diff(&self, other: &Self) -> Result<f64> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GeometryMismatch);
        }
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max))
    }

    /// `x,rho` rows preceded by a `#` line echoing the grid.
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(48 * (self.values.len() + 2));
        let _ = writeln!(
            out,
            "# x0={} dx={} points={}",
            sig15(self.grid.x0),
            sig15(self.grid.dx),
            self.grid.points
        );
        out.push_str("x,rho\n");
        for (k, v) in self.values.iter().enumerate() {
            let _ = writeln!(out, "{},{}", sig15(self.grid.x(k)), sig15(*v));
        }
        out
    }
}

/// Fixed 15-significant-digit scientific rendering used in every artifact.
pub fn sig15(x: f64) -> String {
    format!("{x:.14e}")
}

/// `sqrt(2/L) sin(n pi (x - left)/L)` inside `[left, right]`, zero outside,
/// renormalized on the grid.
pub fn make_box_eigenstate(n: u32, left: f64, right: f64, grid: &GridSpec) -> Result<WaveFunctionGrid> {
    make_box_eigenstate_with(n, left, right, grid, Exec::default())
}

pub fn make_box_eigenstate_with(
    n: u32,
    left: f64,
    right: f64,
    grid: &GridSpec,
    exec: Exec,
) -> Result<WaveFunctionGrid> {
    if n == 0 {
        return Err(Error::InvalidQuantumNumber);
    }
    let width = right - left;
    if !width.is_finite() || width <= 0.0 {
        return Err(Error::DegenerateInterval { left, right });
    }
    let slack = 1e-9 * grid.dx;
    if left < grid.x0 - slack || right > grid.x_max() + slack {
        return Err(Error::InvalidGrid(format!(
            "well [{left}, {right}] leaves the grid [{}, {}]",
            grid.x0,
            grid.x_max()
        )));
    }
    let amplitude = (2.0 / width).sqrt();
    let k = n as f64 * std::f64::consts::PI / width;
    let wave = WaveFunctionGrid::from_fn(
        *grid,
        |x| {
            if x < left - slack || x > right + slack {
                Complex64::default()
            } else {
                Complex64::new(amplitude * (k * (x - left)).sin(), 0.0)
            }
        },
        exec,
    );
    wave.normalized().map_err(|_| Error::DegenerateInterval { left, right })
}

/// Density of either particle in the symmetrized state of orthogonal
/// orbitals `phi`, `psi`: `(|phi|^2 + |psi|^2)/2`. The same for particle 1
/// and 2, and for bosons and fermions, since the exchange cross terms vanish
/// once the other particle is traced out.
pub fn density_symmetrized(
    phi: &WaveFunctionGrid,
    psi: &WaveFunctionGrid,
    stats: ParticleStatistics,
    which: usize,
) -> Result<DensityProfile> {
    density_symmetrized_with(phi, psi, stats, which, Exec::default())
}

pub fn density_symmetrized_with(
    phi: &WaveFunctionGrid,
    psi: &WaveFunctionGrid,
    _stats: ParticleStatistics,
    which: usize,
    exec: Exec,
) -> Result<DensityProfile> {
    check_particle(which)?;
    check_geometry(phi, psi)?;
    check_normalized(phi)?;
    check_normalized(psi)?;
    let overlap = phi.inner(psi)?.norm();
    if overlap > ORTHOGONALITY_TOLERANCE {
        return Err(Error::NotOrthogonal { overlap });
    }
    let values = exec.zip_map(&phi.samples, &psi.samples, |f, g| 0.5 * (f.norm_sqr() + g.norm_sqr()));
    Ok(DensityProfile { grid: phi.grid, values })
}

/// Density of particle `which` in the unsymmetrized product `|phi>|psi>`.
pub fn density_product(phi: &WaveFunctionGrid, psi: &WaveFunctionGrid, which: usize) -> Result<DensityProfile> {
    density_product_with(phi, psi, which, Exec::default())
}

pub fn density_product_with(
    phi: &WaveFunctionGrid,
    psi: &WaveFunctionGrid,
    which: usize,
    exec: Exec,
) -> Result<DensityProfile> {
    check_particle(which)?;
    check_geometry(phi, psi)?;
    check_normalized(phi)?;
    check_normalized(psi)?;
    let source = if which == 1 { phi } else { psi };
    Ok(DensityProfile {
        grid: source.grid,
        values: exec.map_slice(&source.samples, |s| s.norm_sqr()),
    })
}

/// `sum_k min(|phi_k|^2, |psi_k|^2) dx`.
pub fn shared_weight(phi: &WaveFunctionGrid, psi: &WaveFunctionGrid) -> Result<f64> {
    check_geometry(phi, psi)?;
    Ok(phi
        .samples
        .iter()
        .zip(&psi.samples)
        .map(|(f, g)| f.norm_sqr().min(g.norm_sqr()))
        .sum::<f64>()
        * phi.grid.dx)
}

/// True when the two orbitals (essentially) never occupy the same point.
pub fn disjoint_support(phi: &WaveFunctionGrid, psi: &WaveFunctionGrid, threshold: f64) -> Result<bool> {
    Ok(shared_weight(phi, psi)? < threshold)
}

/// Symmetrized density restricted to `region` (which must hold the whole
/// support of exactly one orbital and none of the other) and renormalized
/// there. For disjoint wells this equals `|phi|^2` of the orbital inside.
pub fn restricted_density(
    phi: &WaveFunctionGrid,
    psi: &WaveFunctionGrid,
    stats: ParticleStatistics,
    region: Range<usize>,
) -> Result<DensityProfile> {
    check_geometry(phi, psi)?;
    let points = phi.grid.points;
    if region.is_empty() || region.end > points {
        return Err(Error::RegionOutOfRange {
            start: region.start,
            end: region.end,
            points,
        });
    }
    let overlap = shared_weight(phi, psi)?;
    if overlap >= DISJOINT_THRESHOLD {
        return Err(Error::SupportsOverlap { overlap });
    }
    let outside = |w: &WaveFunctionGrid| w.weight_in(&(0..region.start)) + w.weight_in(&(region.end..points));
    let holds_only = |inside: &WaveFunctionGrid, excluded: &WaveFunctionGrid| {
        outside(inside) < DISJOINT_THRESHOLD && excluded.weight_in(&region) < DISJOINT_THRESHOLD
    };
    if !(holds_only(phi, psi) || holds_only(psi, phi)) {
        return Err(Error::RegionStraddles {
            start: region.start,
            end: region.end,
        });
    }
    let restricted = density_symmetrized(phi, psi, stats, 1)?.restrict(&region);
    let mass = restricted.integral();
    if mass <= 0.0 {
        return Err(Error::ZeroNormState);
    }
    Ok(DensityProfile {
        grid: restricted.grid,
        values: restricted.values.iter().map(|v| v / mass).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_grid() -> GridSpec {
        GridSpec::spanning(0.0, 1.0, 1001).unwrap()
    }

    fn two_well_grid() -> GridSpec {
        GridSpec::spanning(0.0, 3.0, 3001).unwrap()
    }

    #[test]
    fn ground_state_peak_and_first_excited_node() {
        let g = unit_grid();
        let ground = make_box_eigenstate(1, 0.0, 1.0, &g).unwrap();
        assert!((ground.samples()[500].re - 2f64.sqrt()).abs() < 1e-3);
        let excited = make_box_eigenstate(2, 0.0, 1.0, &g).unwrap();
        assert!(excited.samples()[500].norm() < 1e-6);
        assert!(ground.inner(&excited).unwrap().norm() < 1e-8);
        assert!(ground.is_normalized() && excited.is_normalized());
    }

    #[test]
    fn box_eigenstate_errors() {
        let g = unit_grid();
        assert_eq!(make_box_eigenstate(0, 0.0, 1.0, &g), Err(Error::InvalidQuantumNumber));
        assert!(matches!(make_box_eigenstate(1, 0.5, 0.5, &g), Err(Error::DegenerateInterval { .. })));
        assert!(matches!(make_box_eigenstate(1, 0.0, 2.0, &g), Err(Error::InvalidGrid(_))));
    }

    #[test]
    fn misaligned_well_still_normalized() {
        let g = GridSpec::spanning(0.0, 1.0, 401).unwrap();
        let w = make_box_eigenstate(3, 0.1234, 0.9876, &g).unwrap();
        assert!((w.norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn symmetrized_density_is_the_average() {
        let g = unit_grid();
        let phi = make_box_eigenstate(1, 0.0, 1.0, &g).unwrap();
        let psi = make_box_eigenstate(2, 0.0, 1.0, &g).unwrap();
        let rho1 = density_symmetrized(&phi, &psi, ParticleStatistics::Boson, 1).unwrap();
        let rho2 = density_symmetrized(&phi, &psi, ParticleStatistics::Boson, 2).unwrap();
        assert_eq!(rho1, rho2);
        for k in 0..g.points {
            let expected = 0.5 * (phi.samples()[k].norm_sqr() + psi.samples()[k].norm_sqr());
            assert!((rho1.values[k] - expected).abs() < 1e-12);
        }
        assert!((rho1.integral() - 1.0).abs() < 1e-8);
        let fermion = density_symmetrized(&psi, &phi, ParticleStatistics::Fermion, 1).unwrap();
        assert!(fermion.max_abs_diff(&rho1).unwrap() < 1e-15);
    }

    #[test]
    fn product_density_picks_one_orbital() {
        let g = unit_grid();
        let phi = make_box_eigenstate(1, 0.0, 1.0, &g).unwrap();
        let psi = make_box_eigenstate(2, 0.0, 1.0, &g).unwrap();
        assert_eq!(density_product(&phi, &psi, 1).unwrap(), DensityProfile::of_wave(&phi));
        assert_eq!(density_product(&phi, &psi, 2).unwrap(), DensityProfile::of_wave(&psi));
        assert_eq!(density_product(&phi, &phi, 1).unwrap(), density_product(&phi, &phi, 2).unwrap());
        assert_eq!(density_product(&phi, &psi, 3), Err(Error::InvalidParticle(3)));
    }

    #[test]
    fn non_orthogonal_and_mismatched_inputs_rejected() {
        let g = unit_grid();
        let phi = make_box_eigenstate(1, 0.0, 1.0, &g).unwrap();
        assert!(matches!(
            density_symmetrized(&phi, &phi, ParticleStatistics::Boson, 1),
            Err(Error::NotOrthogonal { .. })
        ));
        let other = make_box_eigenstate(1, 0.0, 1.0, &GridSpec::spanning(0.0, 1.0, 501).unwrap()).unwrap();
        assert_eq!(density_product(&phi, &other, 1), Err(Error::GeometryMismatch));
        let loose = WaveFunctionGrid::new(g, phi.samples().iter().map(|s| s * 2.0).collect()).unwrap();
        assert!(matches!(density_product(&loose, &phi, 1), Err(Error::WaveNotNormalized(_))));
    }

    #[test]
    fn disjoint_support_cases() {
        let g = two_well_grid();
        let left = make_box_eigenstate(1, 0.0, 1.0, &g).unwrap();
        let right = make_box_eigenstate(1, 2.0, 3.0, &g).unwrap();
        let left_excited = make_box_eigenstate(2, 0.0, 1.0, &g).unwrap();
        assert!(disjoint_support(&left, &right, DISJOINT_THRESHOLD).unwrap());
        assert!(!disjoint_support(&left, &left_excited, DISJOINT_THRESHOLD).unwrap());
        assert!(!disjoint_support(&left, &left, DISJOINT_THRESHOLD).unwrap());
    }

    #[test]
    fn restricted_density_recovers_each_well() {
        let g = two_well_grid();
        let phi = make_box_eigenstate(1, 0.0, 1.0, &g).unwrap();
        let psi = make_box_eigenstate(2, 2.0, 3.0, &g).unwrap();
        for (range, wave) in [(g.index_range(0.0, 1.0), &phi), (g.index_range(2.0, 3.0), &psi)] {
            let rho = restricted_density(&phi, &psi, ParticleStatistics::Fermion, range.clone()).unwrap();
            let expected = DensityProfile::of_wave(wave).restrict(&range);
            assert!(rho.max_abs_diff(&expected).unwrap() < 1e-8);
        }
    }

    #[test]
    fn restricted_density_errors() {
        let g = two_well_grid();
        let phi = make_box_eigenstate(1, 0.0, 1.0, &g).unwrap();
        let psi = make_box_eigenstate(1, 2.0, 3.0, &g).unwrap();
        let s = ParticleStatistics::Boson;
        assert!(matches!(
            restricted_density(&phi, &psi, s, 0..g.points),
            Err(Error::RegionStraddles { .. })
        ));
        assert!(matches!(
            restricted_density(&phi, &psi, s, 0..400),
            Err(Error::RegionStraddles { .. })
        ));
        assert!(matches!(
            restricted_density(&phi, &psi, s, 10..10),
            Err(Error::RegionOutOfRange { .. })
        ));
        let excited = make_box_eigenstate(2, 0.0, 1.0, &g).unwrap();
        assert!(matches!(
            restricted_density(&phi, &excited, s, g.index_range(0.0, 1.0)),
            Err(Error::SupportsOverlap { .. })
        ));
    }

    #[test]
    fn orbital_spanning_both_wells_is_not_disjoint() {
        let g = two_well_grid();
        let left = make_box_eigenstate(1, 0.0, 1.0, &g).unwrap();
        let right = make_box_eigenstate(1, 2.0, 3.0, &g).unwrap();
        let h = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let spread = left.superpose(h, &right, h).unwrap();
        let antispread = left.superpose(h, &right, -h).unwrap();
        assert!(spread.is_normalized());
        assert!(!disjoint_support(&spread, &antispread, DISJOINT_THRESHOLD).unwrap());
        assert!(!disjoint_support(&spread, &right, DISJOINT_THRESHOLD).unwrap());
        let rho = density_symmetrized(&spread, &antispread, ParticleStatistics::Boson, 1).unwrap();
        assert!((rho.integral() - 1.0).abs() < 1e-8);
    }

    #[test]
    fn trapezoid_converges_at_second_order() {
        // Partial integral of the symmetrized density over [0, 0.3].
        let partial = |points: usize| {
            let g = GridSpec::spanning(0.0, 1.0, points).unwrap();
            let phi = make_box_eigenstate(1, 0.0, 1.0, &g).unwrap();
            let psi = make_box_eigenstate(2, 0.0, 1.0, &g).unwrap();
            let rho = density_symmetrized(&phi, &psi, ParticleStatistics::Boson, 1).unwrap();
            rho.restrict(&g.index_range(0.0, 0.3)).integral()
        };
        let values: Vec<f64> = [101, 201, 401, 801].map(partial).to_vec();
        let changes: Vec<f64> = values.windows(2).map(|w| (w[1] - w[0]).abs()).collect();
        for pair in changes.windows(2) {
            let ratio = pair[0] / pair[1];
            assert!((3.5..4.5).contains(&ratio), "ratio {ratio}");
        }
    }

    #[test]
    fn csv_has_header_and_rows() {
        let g = GridSpec::spanning(0.0, 1.0, 3).unwrap();
        let rho = DensityProfile { grid: g, values: vec![0.0, 2.0, 0.0] };
        let csv = rho.to_csv();
        let lines: Vec<&str> = csv.lines().collect();
        assert!(lines[0].starts_with("# x0="));
        assert_eq!(lines[1], "x,rho");
        assert_eq!(lines[3], "5.00000000000000e-1,2.00000000000000e0");
        assert_eq!(lines.len(), 5);
    }
}
