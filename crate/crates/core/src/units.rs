//! Unit conversions applied at the configuration boundary.

use core::f64::consts::PI;

/// Ground-state Zeeman shift of one magnetic sublevel, Hz per gauss.
pub const ZEEMAN_HZ_PER_GAUSS: f64 = 0.7e6;

pub const HBAR: f64 = 1.054_571_817e-34;
pub const EPSILON_0: f64 = 8.854_187_8128e-12;
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
pub const DEBYE: f64 = 3.335_640_95e-30;

/// Ordinary frequency in MHz to angular frequency in rad/s.
pub fn mhz_to_rad_s(f_mhz: f64) -> f64 {
    2.0 * PI * f_mhz * 1e6
}

pub fn rad_s_to_mhz(w: f64) -> f64 {
    w / (2.0 * PI * 1e6)
}

/// Splitting between the two ground sublevels coupled by the σ∓ fields
/// (Δm = 2), in rad/s, for a longitudinal field `b_gauss`. The sign follows
/// the field direction.
pub fn zeeman_splitting(b_gauss: f64) -> f64 {
    2.0 * PI * 2.0 * ZEEMAN_HZ_PER_GAUSS * b_gauss
}

/// Inverse of [`zeeman_splitting`].
pub fn field_for_splitting(omega_cb: f64) -> f64 {
    omega_cb / (2.0 * PI * 2.0 * ZEEMAN_HZ_PER_GAUSS)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_no_splitting() {
        assert_eq!(zeeman_splitting(0.0), 0.0);
    }

    #[test]
    fn splitting_is_1p4_mhz_per_gauss() {
        assert!((rad_s_to_mhz(zeeman_splitting(1.0)) - 1.4).abs() < 1e-12);
        assert!((rad_s_to_mhz(zeeman_splitting(0.2)) - 0.28).abs() < 1e-12);
        assert!((rad_s_to_mhz(zeeman_splitting(-0.5)) + 0.7).abs() < 1e-12);
    }

    #[test]
    fn splitting_round_trip() {
        for b in [-1.0, -0.05, 0.3, 2.5] {
            assert!((field_for_splitting(zeeman_splitting(b)) - b).abs() < 1e-14);
        }
    }
}
