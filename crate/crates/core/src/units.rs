//! Unit conversions and physical constants.

use crate::scalar::Scalar;

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub fn wavelength<T: Scalar>(frequency_hz: T) -> T {
    T::lit(SPEED_OF_LIGHT) / frequency_hz
}

pub fn db_to_linear<T: Scalar>(db: T) -> T {
    T::lit(10.0).powf(db / T::lit(10.0))
}

pub fn linear_to_db<T: Scalar>(ratio: T) -> T {
    T::lit(10.0) * ratio.log10()
}

pub fn dbm_to_watts<T: Scalar>(dbm: T) -> T {
    db_to_linear(dbm) * T::lit(1e-3)
}

/// Returns `-inf` for zero power and `+inf` for unbounded power.
pub fn watts_to_dbm<T: Scalar>(watts: T) -> T {
    linear_to_db(watts / T::lit(1e-3))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reference_conversions() {
        assert_relative_eq!(dbm_to_watts(30.0_f64), 1.0, max_relative = 1e-12);
        assert_relative_eq!(dbm_to_watts(-4.0_f64), 3.981_071_705_534_972e-4, max_relative = 1e-12);
        assert_relative_eq!(watts_to_dbm(4.0_f64), 36.020_599_913_279_62, max_relative = 1e-12);
        assert_relative_eq!(db_to_linear(6.0_f64), 3.981_071_705_534_972, max_relative = 1e-12);
        assert_relative_eq!(wavelength(916.8e6_f64), 0.326_998_754_363, max_relative = 1e-11);
        assert_eq!(watts_to_dbm(0.0_f64), f64::NEG_INFINITY);
    }
}
