//! Physical constants and energy-unit conversions.
//!
//! The dynamics stack works in natural units: `hbar = 1`, energies measured
//! in a caller-declared reference energy `E_ref`, time measured in
//! `hbar / E_ref`. This module is the single bridge between those
//! dimensionless numbers and SI device quantities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA 2018 values, hard-coded and never configurable.
pub mod consts {
    /// Elementary charge e (C). Exact since the 2019 SI redefinition.
    pub const E_CHARGE: f64 = 1.602_176_634e-19;
    /// Reduced Planck constant h / 2 pi (J s), h exact.
    pub const HBAR: f64 = 1.054_571_817_646_156_5e-34;
    /// Boltzmann constant (J/K). Exact.
    pub const K_BOLTZMANN: f64 = 1.380_649e-23;
    /// Vacuum permittivity (F/m).
    pub const EPSILON_0: f64 = 8.854_187_812_8e-12;
    /// Speed of light in vacuum (m/s). Exact.
    pub const C_LIGHT: f64 = 2.997_924_58e8;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyUnit {
    /// SI joules.
    Joule,
    /// Temperature-equivalent energy, magnitude * k_B joules.
    Kelvin,
    /// Dimensionless multiple of a reference energy.
    Natural,
}

/// An energy tagged with its unit. Magnitudes may be negative (bias
/// offsets); conversions require them to be finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyValue {
    pub magnitude: f64,
    pub unit: EnergyUnit,
}

impl EnergyValue {
    pub fn joules(magnitude: f64) -> Self {
        EnergyValue { magnitude, unit: EnergyUnit::Joule }
    }

    pub fn kelvin(magnitude: f64) -> Self {
        EnergyValue { magnitude, unit: EnergyUnit::Kelvin }
    }

    pub fn natural(magnitude: f64) -> Self {
        EnergyValue { magnitude, unit: EnergyUnit::Natural }
    }
}

fn checked_reference(e_ref: EnergyValue) -> Result<f64> {
    if e_ref.unit != EnergyUnit::Joule {
        return Err(Error::invalid(
            "reference energy must be expressed in joules",
        ));
    }
    if !(e_ref.magnitude.is_finite() && e_ref.magnitude > 0.0) {
        return Err(Error::invalid(format!(
            "reference energy must be finite and positive, got {}",
            e_ref.magnitude
        )));
    }
    Ok(e_ref.magnitude)
}

/// Express `v` as a dimensionless multiple of `e_ref` (which must be a
/// positive energy in joules). Natural-unit inputs pass through unchanged.
pub fn to_natural(v: EnergyValue, e_ref: EnergyValue) -> Result<f64> {
    let e_ref = checked_reference(e_ref)?;
    if !v.magnitude.is_finite() {
        return Err(Error::invalid("energy magnitude must be finite"));
    }
    Ok(match v.unit {
        EnergyUnit::Joule => v.magnitude / e_ref,
        EnergyUnit::Kelvin => v.magnitude * consts::K_BOLTZMANN / e_ref,
        EnergyUnit::Natural => v.magnitude,
    })
}

/// Express `v` in joules. The reference energy is only consulted for
/// natural-unit inputs.
pub fn to_joules(v: EnergyValue, e_ref: EnergyValue) -> Result<f64> {
    if !v.magnitude.is_finite() {
        return Err(Error::invalid("energy magnitude must be finite"));
    }
    Ok(match v.unit {
        EnergyUnit::Joule => v.magnitude,
        EnergyUnit::Kelvin => v.magnitude * consts::K_BOLTZMANN,
        EnergyUnit::Natural => v.magnitude * checked_reference(e_ref)?,
    })
}

/// Angular frequency E / hbar (rad/s) of a non-negative energy.
///
/// Natural-unit energies carry no absolute scale; convert them with
/// [`to_joules`] first.
pub fn energy_to_angular_frequency(v: EnergyValue) -> Result<f64> {
    if !(v.magnitude.is_finite() && v.magnitude >= 0.0) {
        return Err(Error::invalid(format!(
            "energy must be finite and non-negative, got {}",
            v.magnitude
        )));
    }
    match v.unit {
        EnergyUnit::Joule => Ok(v.magnitude / consts::HBAR),
        EnergyUnit::Kelvin => Ok(v.magnitude * consts::K_BOLTZMANN / consts::HBAR),
        EnergyUnit::Natural => Err(Error::invalid(
            "natural-unit energy has no absolute frequency; convert via to_joules",
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    #[test]
    fn constants_are_pinned() {
        assert_eq!(consts::E_CHARGE, 1.602176634e-19);
        assert_eq!(consts::HBAR, 1.0545718176461565e-34);
        assert_eq!(consts::K_BOLTZMANN, 1.380649e-23);
        assert_eq!(consts::EPSILON_0, 8.8541878128e-12);
        assert_eq!(consts::C_LIGHT, 2.99792458e8);
    }

    #[test]
    fn resistance_quantum_scale() {
        let r = consts::HBAR / (consts::E_CHARGE * consts::E_CHARGE);
        assert!(rel(r, 4108.235902227661) < 1e-12);
        // Coarse anchor: 4108.24 ohms within 0.01%.
        assert!(rel(r, 4108.24) < 1e-4);
    }

    #[test]
    fn to_natural_by_unit() {
        let e_ref = EnergyValue::joules(2.0e-23);
        assert_eq!(to_natural(EnergyValue::joules(4.0e-23), e_ref).unwrap(), 2.0);
        let k = to_natural(EnergyValue::kelvin(1.0), e_ref).unwrap();
        assert!(rel(k, consts::K_BOLTZMANN / 2.0e-23) < 1e-15);
        assert_eq!(to_natural(EnergyValue::natural(-3.5), e_ref).unwrap(), -3.5);
    }

    #[test]
    fn to_natural_rejects_bad_reference() {
        let v = EnergyValue::joules(1.0e-23);
        assert!(to_natural(v, EnergyValue::kelvin(1.0)).is_err());
        assert!(to_natural(v, EnergyValue::joules(0.0)).is_err());
        assert!(to_natural(v, EnergyValue::joules(-1.0)).is_err());
        assert!(to_natural(v, EnergyValue::joules(f64::NAN)).is_err());
        assert!(to_natural(EnergyValue::joules(f64::INFINITY), EnergyValue::joules(1.0)).is_err());
    }

    #[test]
    fn joule_kelvin_round_trips() {
        let mut rng = ChaCha12Rng::seed_from_u64(77);
        let e_ref = EnergyValue::joules(1.3806e-23);
        for _ in 0..200 {
            let x = rng.gen_range(-10.0..10.0) * 10f64.powi(rng.gen_range(-25..-18));
            let n = to_natural(EnergyValue::joules(x), e_ref).unwrap();
            let back = to_joules(EnergyValue::natural(n), e_ref).unwrap();
            assert!(rel(back, x) < 1e-12 || x == 0.0);

            let j = to_joules(EnergyValue::kelvin(x * 1e23), e_ref).unwrap();
            let kelvin_back = j / consts::K_BOLTZMANN;
            assert!(rel(kelvin_back, x * 1e23) < 1e-12 || x == 0.0);
        }
    }

    #[test]
    fn to_natural_is_linear() {
        let e_ref = EnergyValue::joules(7.7e-24);
        let v = to_natural(EnergyValue::joules(3.0e-23), e_ref).unwrap();
        let v5 = to_natural(EnergyValue::joules(5.0 * 3.0e-23), e_ref).unwrap();
        assert!(rel(v5, 5.0 * v) < 1e-14);
    }

    #[test]
    fn angular_frequency_of_one_kelvin() {
        let w = energy_to_angular_frequency(EnergyValue::kelvin(1.0)).unwrap();
        assert!(rel(w, 1.30920339126989e11) < 1e-12);
    }

    #[test]
    fn angular_frequency_is_linear_in_energy() {
        let w1 = energy_to_angular_frequency(EnergyValue::joules(1.0e-23)).unwrap();
        let w3 = energy_to_angular_frequency(EnergyValue::joules(3.0e-23)).unwrap();
        assert!(rel(w3, 3.0 * w1) < 1e-15);
    }

    #[test]
    fn angular_frequency_domain_errors() {
        assert!(energy_to_angular_frequency(EnergyValue::joules(-1.0e-23)).is_err());
        assert!(energy_to_angular_frequency(EnergyValue::natural(1.0)).is_err());
        assert!(energy_to_angular_frequency(EnergyValue::joules(f64::NAN)).is_err());
    }
}
