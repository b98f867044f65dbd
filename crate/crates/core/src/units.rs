//! Conversion of laboratory quantities to the dimensionless kicked-rotor model.
//!
//! Lengths are measured in units of `(2 k_L)^{-1}` and time in kick periods, so
//! `hbar_eff = 4 hbar k_L^2 T_1 / M` and the 1D coupling follows from the
//! transverse confinement.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};

/// Reduced Planck constant (J s).
pub const HBAR: f64 = 1.054_571_817e-34;
/// Atomic mass unit (kg).
pub const ATOMIC_MASS_UNIT: f64 = 1.660_539_066_60e-27;
/// Bohr radius (m).
pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;

/// How tightly the gas is confined transverse to the ring.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TransverseConfinement {
    /// Harmonic trap angular frequency `omega_perp` (rad/s).
    Frequency(f64),
    /// Transverse size `L_perp` (m).
    Size(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalParams {
    /// s-wave scattering length `a` (m); negative values are attractive.
    pub scattering_length: f64,
    pub atom_number: u64,
    pub transverse: TransverseConfinement,
    /// Kicking laser wavenumber `k_L` (1/m).
    pub laser_wavenumber: f64,
    /// Atomic mass (kg).
    pub mass: f64,
    /// Kick period `T_1` (s).
    pub kick_period: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessParams {
    pub hbar_eff: f64,
    pub coupling: f64,
    /// Recoil frequency `omega_R = hbar k_L^2 / (2M)` (rad/s).
    pub recoil_frequency: f64,
    /// Set when the scattering length is negative; the coupling is then
    /// negative and the attractive regime lies outside the validated model.
    pub attractive: bool,
}

impl PhysicalParams {
    /// Potassium-39 at `a = 50 a_0` (Feshbach-tuned), 1600 atoms, a
    /// 766.7 nm kicking lattice, and a kick period chosen so that
    /// `hbar_eff = 2.89`.
    pub fn potassium_example(transverse: TransverseConfinement) -> Self {
        let mass = 38.963_706_5 * ATOMIC_MASS_UNIT;
        let laser_wavenumber = 2.0 * PI / 766.701e-9;
        let kick_period = 2.89 * mass / (4.0 * HBAR * laser_wavenumber * laser_wavenumber);
        Self {
            scattering_length: 50.0 * BOHR_RADIUS,
            atom_number: 1600,
            transverse,
            laser_wavenumber,
            mass,
            kick_period,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |field: &'static str, v: f64| {
            if v.is_finite() && v > 0.0 {
                Ok(())
            } else {
                Err(invalid(field, format!("must be positive, got {v}")))
            }
        };
        if !self.scattering_length.is_finite() {
            return Err(invalid("scattering_length", "must be finite"));
        }
        match self.transverse {
            TransverseConfinement::Frequency(w) => positive("transverse_freq", w)?,
            TransverseConfinement::Size(l) => positive("transverse_size", l)?,
        }
        positive("laser_wavenumber", self.laser_wavenumber)?;
        positive("mass", self.mass)?;
        positive("kick_period", self.kick_period)
    }
}

/// Effective Planck constant and 1D coupling for the given lab parameters.
pub fn to_dimensionless(phys: &PhysicalParams) -> Result<DimensionlessParams> {
    phys.validate()?;
    let k = phys.laser_wavenumber;
    let hbar_eff = 4.0 * HBAR * k * k * phys.kick_period / phys.mass;
    let recoil = HBAR * k * k / (2.0 * phys.mass);
    let n = phys.atom_number as f64;
    let ka = k * phys.scattering_length;
    let coupling = match phys.transverse {
        TransverseConfinement::Frequency(omega_perp) => 0.5 * hbar_eff * hbar_eff * ka * (omega_perp / recoil) * n,
        TransverseConfinement::Size(l_perp) => {
            PI * hbar_eff * hbar_eff * ka * HBAR / (recoil * phys.mass * l_perp * l_perp) * n
        }
    };
    Ok(DimensionlessParams { hbar_eff, coupling, recoil_frequency: recoil, attractive: phys.scattering_length < 0.0 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn trap() -> TransverseConfinement {
        TransverseConfinement::Frequency(2.0 * PI * 62.0)
    }

    #[test]
    fn potassium_example_gives_unit_coupling() {
        let d = to_dimensionless(&PhysicalParams::potassium_example(trap())).unwrap();
        assert!((d.hbar_eff - 2.89).abs() < 1e-12);
        assert!((d.coupling - 1.0).abs() < 0.1, "g = {}", d.coupling);
        let d = to_dimensionless(&PhysicalParams::potassium_example(TransverseConfinement::Size(5e-6))).unwrap();
        assert!((d.coupling - 1.0).abs() < 0.1, "g = {}", d.coupling);
        assert!(!d.attractive);
    }

    #[test]
    fn coupling_is_linear_in_atom_number() {
        let mut p = PhysicalParams::potassium_example(trap());
        let g1 = to_dimensionless(&p).unwrap().coupling;
        p.atom_number *= 2;
        let g2 = to_dimensionless(&p).unwrap().coupling;
        assert!((g2 - 2.0 * g1).abs() < 1e-12 * g2);
        p.atom_number = 0;
        assert_eq!(to_dimensionless(&p).unwrap().coupling, 0.0);
    }

    #[test]
    fn attractive_gas_is_flagged() {
        let mut p = PhysicalParams::potassium_example(trap());
        p.scattering_length = -20.0 * BOHR_RADIUS;
        let d = to_dimensionless(&p).unwrap();
        assert!(d.attractive);
        assert!(d.coupling < 0.0);
    }

    #[test]
    fn non_positive_mass_is_rejected() {
        let mut p = PhysicalParams::potassium_example(trap());
        p.mass = 0.0;
        assert!(to_dimensionless(&p).is_err());
    }
}
