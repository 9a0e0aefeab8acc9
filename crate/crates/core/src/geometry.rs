//! URA element coordinates, wave vectors, array factors and node placement.
//!
//! Azimuth φ ∈ [-π, π) is measured from the positive x-axis, elevation
//! θ ∈ [-π/2, π/2) from the x-y plane. Arrays are uniform rectangular
//! grids with half-wavelength pitch; the corner element is the phase
//! reference, and corner-to-corner separation is used as the link distance
//! between arrays (far-field operation makes the residual error
//! negligible at the scales simulated here).

use crate::{CRow, Cx, Error, Result};
use nalgebra::Vector3;
use std::f64::consts::{FRAC_PI_2, PI, TAU};

/// Propagation direction in the global spherical frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Direction {
    azimuth_rad: f64,
    elevation_rad: f64,
}

impl Direction {
    /// Builds a direction, wrapping azimuth into [-π, π).
    pub fn new(azimuth_rad: f64, elevation_rad: f64) -> Result<Self> {
        if !azimuth_rad.is_finite() || !elevation_rad.is_finite() {
            return Err(Error::InvalidInput("non-finite direction angles".into()));
        }
        if !(-FRAC_PI_2..FRAC_PI_2).contains(&elevation_rad) {
            return Err(Error::InvalidInput(format!(
                "elevation {elevation_rad} rad outside [-pi/2, pi/2)"
            )));
        }
        let mut az = (azimuth_rad + PI).rem_euclid(TAU) - PI;
        if az >= PI {
            az = -PI;
        }
        Ok(Self {
            azimuth_rad: az,
            elevation_rad,
        })
    }

    pub fn azimuth_rad(&self) -> f64 {
        self.azimuth_rad
    }

    pub fn elevation_rad(&self) -> f64 {
        self.elevation_rad
    }

    /// Unit vector pointing along the direction.
    pub fn unit_vector(&self) -> Vector3<f64> {
        let (az, el) = (self.azimuth_rad, self.elevation_rad);
        Vector3::new(el.cos() * az.cos(), el.cos() * az.sin(), el.sin())
    }
}

/// Coordinate plane an array lies in.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Plane {
    Xy,
    Xz,
    /// Array on the y-z plane, the paper's convention for both Rx and RIS.
    Yz,
}

impl Plane {
    fn axes(self) -> (Vector3<f64>, Vector3<f64>) {
        match self {
            Plane::Xy => (Vector3::x(), Vector3::y()),
            Plane::Xz => (Vector3::x(), Vector3::z()),
            Plane::Yz => (Vector3::y(), Vector3::z()),
        }
    }
}

/// Element coordinates of a planar array (the matrix U, one column per element).
#[derive(Debug, Clone)]
pub struct ArrayLayout {
    positions: Vec<Vector3<f64>>,
}

impl ArrayLayout {
    pub fn from_positions(positions: Vec<Vector3<f64>>) -> Result<Self> {
        if positions.is_empty() {
            return Err(Error::InvalidInput("array layout must be non-empty".into()));
        }
        Ok(Self { positions })
    }

    pub fn count(&self) -> usize {
        self.positions.len()
    }

    pub fn positions(&self) -> &[Vector3<f64>] {
        &self.positions
    }
}

/// Square URA with λ/2 pitch; `count` must be a perfect square. Elements are
/// laid out row-major over the two axes of `plane`, with the corner element
/// at `origin`.
pub fn build_square_ura(
    count: usize,
    wavelength_m: f64,
    origin: Vector3<f64>,
    plane: Plane,
) -> Result<ArrayLayout> {
    if count == 0 {
        return Err(Error::InvalidInput("URA element count must be positive".into()));
    }
    if !(wavelength_m > 0.0) {
        return Err(Error::InvalidInput(format!(
            "wavelength must be positive, got {wavelength_m}"
        )));
    }
    let side = (count as f64).sqrt().round() as usize;
    if side * side != count {
        return Err(Error::InvalidInput(format!(
            "URA element count {count} is not a perfect square"
        )));
    }
    let pitch = wavelength_m / 2.0;
    let (a, b) = plane.axes();
    let mut positions = Vec::with_capacity(count);
    for i in 0..side {
        for j in 0..side {
            positions.push(origin + a * (pitch * i as f64) + b * (pitch * j as f64));
        }
    }
    ArrayLayout::from_positions(positions)
}

/// Wave vector `k(φ,θ) = (2π/λ) [cosθ cosφ, cosθ sinφ, sinθ]`, rad/m.
pub fn wave_vector(dir: &Direction, wavelength_m: f64) -> Vector3<f64> {
    dir.unit_vector() * (TAU / wavelength_m)
}

/// Array factor `a(φ,θ,U)`: row vector with entries `exp(j k·u_m)`.
pub fn array_factor(dir: &Direction, layout: &ArrayLayout, wavelength_m: f64) -> CRow {
    let k = wave_vector(dir, wavelength_m);
    CRow::from_iterator(
        layout.count(),
        layout.positions().iter().map(|u| {
            let phase = k.dot(u);
            Cx::new(phase.cos(), phase.sin())
        }),
    )
}

/// Spherical (r, azimuth, elevation) to Cartesian, angles in radians.
pub fn spherical_to_cartesian(r: f64, azimuth_rad: f64, elevation_rad: f64) -> Vector3<f64> {
    Vector3::new(
        r * elevation_rad.cos() * azimuth_rad.cos(),
        r * elevation_rad.cos() * azimuth_rad.sin(),
        r * elevation_rad.sin(),
    )
}

/// Direction of `to` as seen from `from`.
pub fn direction_between(from: &Vector3<f64>, to: &Vector3<f64>) -> Result<Direction> {
    let v = to - from;
    let r = v.norm();
    if r <= 0.0 {
        return Err(Error::InvalidInput("coincident nodes have no direction".into()));
    }
    let elevation = (v.z / r).asin();
    // asin returns exactly pi/2 for v along +z; nudge inside the open bound.
    let elevation = elevation.clamp(-FRAC_PI_2, FRAC_PI_2 - f64::EPSILON);
    Direction::new(v.y.atan2(v.x), elevation)
}

/// Node coordinates for one scenario, prior to channel drawing.
#[derive(Debug, Clone)]
pub struct PlacementSpec {
    pub wavelength_m: f64,
    /// RIS element count N (perfect square).
    pub n_ris: usize,
    /// Rx antenna count N_R (perfect square).
    pub n_rx: usize,
    /// RIS corner translation along +x from the Rx corner, meters.
    pub ris_offset_m: f64,
    /// Spherical (r, azimuth rad, elevation rad) of Tx0 and the interferers,
    /// relative to the Rx corner at the origin. Index 0 is the signal Tx.
    pub tx_spherical: Vec<(f64, f64, f64)>,
}

/// Per-transmitter link geometry (distances and LOS directions).
#[derive(Debug, Clone)]
pub struct TxLinkGeometry {
    /// d_i: Tx_i to Rx corner.
    pub d_rx_m: f64,
    /// Arrival direction of Tx_i at the Rx array.
    pub dir_at_rx: Direction,
    /// d_{γ_i}: Tx_i to RIS corner.
    pub d_ris_m: f64,
    /// Arrival direction of Tx_i at the RIS.
    pub dir_at_ris: Direction,
}

/// Placed scenario: local array layouts plus the pairwise link table.
#[derive(Debug, Clone)]
pub struct ScenarioGeometry {
    /// Rx array, corner-referenced local coordinates (y-z plane).
    pub rx_layout: ArrayLayout,
    /// RIS array, corner-referenced local coordinates (y-z plane).
    pub ris_layout: ArrayLayout,
    pub rx_corner: Vector3<f64>,
    pub ris_corner: Vector3<f64>,
    pub tx_positions: Vec<Vector3<f64>>,
    /// d_α: RIS corner to Rx corner.
    pub d_sr_m: f64,
    /// Arrival direction of the RIS at the Rx array (φ_α, θ_α).
    pub dir_ris_at_rx: Direction,
    /// Arrival direction of the Rx at the RIS (φ_β, θ_β).
    pub dir_rx_at_ris: Direction,
    /// One entry per Tx, index 0 = signal.
    pub links: Vec<TxLinkGeometry>,
    pub wavelength_m: f64,
}

impl ScenarioGeometry {
    pub fn n_ris(&self) -> usize {
        self.ris_layout.count()
    }

    pub fn n_rx(&self) -> usize {
        self.rx_layout.count()
    }
}

/// Places Rx, RIS and transmitters and derives every link distance and
/// direction used by the channel model.
pub fn place_scenario(spec: &PlacementSpec) -> Result<ScenarioGeometry> {
    if spec.tx_spherical.is_empty() {
        return Err(Error::InvalidInput("at least the signal Tx must be placed".into()));
    }
    let rx_corner = Vector3::zeros();
    let ris_corner = Vector3::new(spec.ris_offset_m, 0.0, 0.0);
    if (ris_corner - rx_corner).norm() <= 0.0 {
        return Err(Error::InvalidInput("RIS and Rx reference points coincide".into()));
    }
    // Layouts are corner-referenced local coordinates; the inter-array phase
    // is carried by the channel's random phase and path loss.
    let rx_layout = build_square_ura(spec.n_rx, spec.wavelength_m, Vector3::zeros(), Plane::Yz)?;
    let ris_layout = build_square_ura(spec.n_ris, spec.wavelength_m, Vector3::zeros(), Plane::Yz)?;

    let tx_positions: Vec<Vector3<f64>> = spec
        .tx_spherical
        .iter()
        .map(|&(r, az, el)| spherical_to_cartesian(r, az, el))
        .collect();

    let mut links = Vec::with_capacity(tx_positions.len());
    for tx in &tx_positions {
        let d_rx = (tx - rx_corner).norm();
        let d_ris = (tx - ris_corner).norm();
        if d_rx <= 0.0 || d_ris <= 0.0 {
            return Err(Error::InvalidInput("a Tx coincides with an array corner".into()));
        }
        links.push(TxLinkGeometry {
            d_rx_m: d_rx,
            dir_at_rx: direction_between(&rx_corner, tx)?,
            d_ris_m: d_ris,
            dir_at_ris: direction_between(&ris_corner, tx)?,
        });
    }

    Ok(ScenarioGeometry {
        rx_layout,
        ris_layout,
        rx_corner,
        ris_corner,
        tx_positions,
        d_sr_m: (ris_corner - rx_corner).norm(),
        dir_ris_at_rx: direction_between(&rx_corner, &ris_corner)?,
        dir_rx_at_ris: direction_between(&ris_corner, &rx_corner)?,
        links,
        wavelength_m: spec.wavelength_m,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn single_element_ura_at_origin() {
        let layout = build_square_ura(1, 0.01, Vector3::zeros(), Plane::Yz).unwrap();
        assert_eq!(layout.count(), 1);
        assert_eq!(layout.positions()[0], Vector3::zeros());
    }

    #[test]
    fn two_by_two_ura_pitch() {
        // λ = 2 m gives a 1 m pitch.
        let layout = build_square_ura(4, 2.0, Vector3::zeros(), Plane::Yz).unwrap();
        let pos = layout.positions();
        assert_eq!(pos.len(), 4);
        assert_eq!(pos[0], Vector3::new(0.0, 0.0, 0.0));
        assert_eq!(pos[1], Vector3::new(0.0, 0.0, 1.0));
        assert_eq!(pos[2], Vector3::new(0.0, 1.0, 0.0));
        assert_eq!(pos[3], Vector3::new(0.0, 1.0, 1.0));
    }

    #[test]
    fn hundred_element_ura_corner_at_origin() {
        let layout = build_square_ura(100, 0.0013629, Vector3::zeros(), Plane::Yz).unwrap();
        assert_eq!(layout.count(), 100);
        assert_eq!(layout.positions()[0], Vector3::zeros());
        // All elements on the y-z plane.
        assert!(layout.positions().iter().all(|p| p.x == 0.0));
    }

    #[test]
    fn non_square_count_rejected() {
        assert!(build_square_ura(7, 0.01, Vector3::zeros(), Plane::Yz).is_err());
        assert!(build_square_ura(0, 0.01, Vector3::zeros(), Plane::Yz).is_err());
    }

    #[test]
    fn wave_vector_axes() {
        let lambda = 0.5;
        let k = wave_vector(&Direction::new(0.0, 0.0).unwrap(), lambda);
        assert_relative_eq!(k, Vector3::new(TAU / lambda, 0.0, 0.0), max_relative = 1e-15);

        let almost_up = Direction::new(0.0, FRAC_PI_2 - 1e-12).unwrap();
        let k_up = wave_vector(&almost_up, lambda);
        assert_abs_diff_eq!(k_up.x, 0.0, epsilon = 1e-9);
        assert_relative_eq!(k_up.z, TAU / lambda, max_relative = 1e-9);

        let k60 = wave_vector(&Direction::new(60f64.to_radians(), 0.0).unwrap(), lambda);
        assert_relative_eq!(
            k60,
            Vector3::new(0.5, 3f64.sqrt() / 2.0, 0.0) * (TAU / lambda),
            max_relative = 1e-12
        );
    }

    #[test]
    fn array_factor_degenerate_layouts() {
        let dir = Direction::new(0.7, 0.2).unwrap();
        let single = build_square_ura(1, 0.01, Vector3::zeros(), Plane::Yz).unwrap();
        let af = array_factor(&dir, &single, 0.01);
        assert_relative_eq!(af[0].re, 1.0, max_relative = 1e-15);
        assert_abs_diff_eq!(af[0].im, 0.0);

        // All elements at the same point: zero relative phase everywhere.
        let stacked = ArrayLayout::from_positions(vec![Vector3::zeros(); 5]).unwrap();
        let af = array_factor(&dir, &stacked, 0.01);
        assert!(af.iter().all(|e| (e - Cx::new(1.0, 0.0)).norm() < 1e-15));
    }

    #[test]
    fn array_factor_broadside_symmetry() {
        // Two elements along y; broadside arrival (along x) sees equal phases.
        let layout =
            ArrayLayout::from_positions(vec![Vector3::zeros(), Vector3::new(0.0, 0.005, 0.0)])
                .unwrap();
        let af = array_factor(&Direction::new(0.0, 0.0).unwrap(), &layout, 0.01);
        assert!((af[0] - af[1]).norm() < 1e-15);
    }

    #[test]
    fn place_scenario_paper_coordinates() {
        let spec = PlacementSpec {
            wavelength_m: crate::SPEED_OF_LIGHT / 220e9,
            n_ris: 100,
            n_rx: 100,
            ris_offset_m: 1.0,
            tx_spherical: vec![
                (1.0, 60f64.to_radians(), 0.0),
                (1.5, 110f64.to_radians(), 0.0),
            ],
        };
        let scene = place_scenario(&spec).unwrap();
        assert_relative_eq!(scene.links[0].d_rx_m, 1.0, max_relative = 1e-12);
        assert_relative_eq!(scene.links[1].d_rx_m, 1.5, max_relative = 1e-12);
        assert_relative_eq!(scene.d_sr_m, 1.0, max_relative = 1e-15);
        assert_relative_eq!(scene.dir_ris_at_rx.azimuth_rad(), 0.0, max_relative = 1e-15);
        // Rx seen from the RIS along -x wraps to azimuth -π.
        assert_relative_eq!(scene.dir_rx_at_ris.azimuth_rad(), -PI, max_relative = 1e-15);
        // Tx0 at (1, 60°, 0°): distance to the RIS corner is exactly 1 m.
        assert_relative_eq!(scene.links[0].d_ris_m, 1.0, max_relative = 1e-12);
    }

    #[test]
    fn place_scenario_rejects_coincident_nodes() {
        let spec = PlacementSpec {
            wavelength_m: 0.0013,
            n_ris: 4,
            n_rx: 4,
            ris_offset_m: 1.0,
            tx_spherical: vec![(0.0, 0.0, 0.0)],
        };
        assert!(place_scenario(&spec).is_err());
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn array_factor_entries_unit_modulus(
                az in -PI..PI,
                el in -FRAC_PI_2..FRAC_PI_2 - 1e-9,
                n in 1usize..5,
            ) {
                let dir = Direction::new(az, el).unwrap();
                let layout = build_square_ura(n * n, 0.0013, Vector3::zeros(), Plane::Yz).unwrap();
                let af = array_factor(&dir, &layout, 0.0013);
                for e in af.iter() {
                    prop_assert!((e.norm() - 1.0).abs() < 1e-12);
                }
            }

            #[test]
            fn array_factor_conjugates_under_wave_vector_negation(
                az in -PI..PI,
                el in -1.5..1.5f64,
            ) {
                let dir = Direction::new(az, el).unwrap();
                let layout = build_square_ura(9, 0.0013, Vector3::zeros(), Plane::Yz).unwrap();
                let af = array_factor(&dir, &layout, 0.0013);
                // Negating the wave vector means flipping the unit vector:
                // azimuth + π, elevation negated.
                let neg = Direction::new(az + PI, -el).unwrap();
                let af_neg = array_factor(&neg, &layout, 0.0013);
                for (a, b) in af.iter().zip(af_neg.iter()) {
                    prop_assert!((a.conj() - b).norm() < 1e-9);
                }
            }

            #[test]
            fn distances_symmetric_and_triangle(
                r1 in 0.2..5.0f64, az1 in -3.0..3.0f64,
                r2 in 0.2..5.0f64, az2 in -3.0..3.0f64,
                el in -1.0..1.0f64,
            ) {
                let spec = PlacementSpec {
                    wavelength_m: 0.0013,
                    n_ris: 4,
                    n_rx: 4,
                    ris_offset_m: 1.0,
                    tx_spherical: vec![(r1, az1, el), (r2, az2, -el)],
                };
                let scene = place_scenario(&spec).unwrap();
                for (tx, link) in scene.tx_positions.iter().zip(&scene.links) {
                    // Symmetry: recompute from the other endpoint.
                    prop_assert!((link.d_rx_m - (scene.rx_corner - tx).norm()).abs() < 1e-12);
                    prop_assert!((link.d_ris_m - (scene.ris_corner - tx).norm()).abs() < 1e-12);
                    // Triangle inequality through the RIS.
                    prop_assert!(link.d_rx_m <= link.d_ris_m + scene.d_sr_m + 1e-12);
                    prop_assert!(link.d_ris_m <= link.d_rx_m + scene.d_sr_m + 1e-12);
                    prop_assert!(scene.d_sr_m <= link.d_rx_m + link.d_ris_m + 1e-12);
                }
            }
        }
    }
}
