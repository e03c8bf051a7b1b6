//! Conversions applied at the I/O boundary. Everything inside the crate is
//! strict SI with angular frequency in rad/s.
//!
//! `GHz` is read as 1e9 s⁻¹ of *angular* frequency. Bandwidths quoted in GHz
//! are therefore 1e9·τ⁻¹ directly, with no factor of 2π.

use crate::constants::{C, TWO_PI};
use crate::error::{Error, Result};

pub fn um(x: f64) -> f64 {
    x * 1e-6
}

pub fn mw(x: f64) -> f64 {
    x * 1e-3
}

pub fn ghz(x: f64) -> f64 {
    x * 1e9
}

/// Angular frequency of a vacuum wavelength.
pub fn omega_from_wavelength(lambda: f64) -> f64 {
    TWO_PI * C / lambda
}

pub fn wavelength_from_omega(omega: f64) -> f64 {
    TWO_PI * C / omega
}

/// Wavelength span `Δλ = λ²Δν/c` of a bandwidth read as cyclic frequency.
pub fn span_cyclic(lambda: f64, bandwidth: f64) -> f64 {
    lambda * lambda * bandwidth / C
}

/// Wavelength span of a bandwidth read as angular frequency (Δν = Δω/2π).
pub fn span_angular(lambda: f64, bandwidth: f64) -> f64 {
    span_cyclic(lambda, bandwidth / TWO_PI)
}

/// Parse a number with an optional unit suffix, e.g. `"100 mW"`, `"1.72um"`,
/// `"2.9e4 GHz"`, `"1e5"`. Returns the SI value.
pub fn parse_quantity(text: &str) -> Result<f64> {
    let s = text.trim();
    // A space always separates the unit; otherwise it starts at the first
    // letter that is not an exponent marker.
    let split = s.find(char::is_whitespace).or_else(|| {
        s.char_indices()
            .find(|&(i, ch)| {
                ch.is_alphabetic()
                    && !((ch == 'e' || ch == 'E')
                        && s[i + ch.len_utf8()..]
                            .chars()
                            .next()
                            .is_some_and(|n| n.is_ascii_digit() || n == '-' || n == '+'))
            })
            .map(|(i, _)| i)
    });
    let split = split.unwrap_or(s.len());
    let (num, unit) = s.split_at(split);
    let value: f64 = num
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("not a number: `{text}`")))?;
    let scale = match unit.trim() {
        "" => 1.0,
        "m" => 1.0,
        "cm" => 1e-2,
        "mm" => 1e-3,
        "um" | "μm" => 1e-6,
        "nm" => 1e-9,
        "W" => 1.0,
        "mW" => 1e-3,
        "uW" | "μW" => 1e-6,
        "nW" => 1e-9,
        "GHz" => 1e9,
        "MHz" => 1e6,
        "THz" => 1e12,
        "rad/s" | "1/s" => 1.0,
        "/W/m" | "1/(W m)" | "1/W/m" => 1.0,
        "s2/m" | "s^2/m" => 1.0,
        other => return Err(Error::Parse(format!("unknown unit `{other}` in `{text}`"))),
    };
    Ok(value * scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantities_with_suffixes() {
        assert_eq!(parse_quantity("100 mW").unwrap(), 0.1);
        assert!((parse_quantity("1.72um").unwrap() - 1.72e-6).abs() < 1e-20);
        assert_eq!(parse_quantity("2.9e4 GHz").unwrap(), 2.9e13);
        assert_eq!(parse_quantity("1e5").unwrap(), 1e5);
        assert_eq!(parse_quantity("2.9e13 1/s").unwrap(), 2.9e13);
        assert_eq!(parse_quantity("-3.2E-26 s2/m").unwrap(), -3.2e-26);
        assert!((parse_quantity("20 uW").unwrap() - 2e-5).abs() < 1e-20);
        assert!(parse_quantity("12 parsecs").is_err());
        assert!(parse_quantity("mW").is_err());
    }

    #[test]
    fn wavelength_round_trip() {
        let w = omega_from_wavelength(1.72e-6);
        assert!((wavelength_from_omega(w) - 1.72e-6).abs() < 1e-21);
    }

    #[test]
    fn span_conventions_differ_by_two_pi() {
        let a = span_angular(1.72e-6, 2.9e13);
        let c = span_cyclic(1.72e-6, 2.9e13);
        assert!((c / a - TWO_PI).abs() < 1e-12);
    }
}
