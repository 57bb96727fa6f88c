//! Conversions between physical scene quantities and simulation bins for
//! the reference radar (1 GHz bandwidth, 140 GHz carrier).

/// Speed of light, m/s.
pub const C: f64 = 299_792_458.0;
pub const BANDWIDTH_HZ: f64 = 1e9;
pub const CARRIER_HZ: f64 = 140e9;
/// Range resolution `c / (2B)`, m.
pub const RANGE_RESOLUTION_M: f64 = 0.15;
/// Velocity resolution at `M = 1024`, mph.
pub const VELOCITY_RESOLUTION_MPH: f64 = 2.28;

/// Range bin covering distance `d`: `⌈d / Δr⌉`.
pub fn range_bin(distance_m: f64) -> usize {
    (distance_m / RANGE_RESOLUTION_M - 1e-9).ceil().max(0.0) as usize
}

/// Doppler bin of a target closing at `v`: `M/2 + ⌊v / Δv⌋`.
pub fn doppler_bin(speed_mph: f64, m: usize) -> usize {
    let offset = (speed_mph / VELOCITY_RESOLUTION_MPH).floor() as i64;
    (m as i64 / 2 + offset).rem_euclid(m as i64) as usize
}

/// Largest range covered by bins `0..=n_max`, m.
pub fn max_range_m(n_max: usize) -> f64 {
    n_max as f64 * RANGE_RESOLUTION_M
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reference_scene_bins() {
        assert_eq!(range_bin(2.0), 14);
        assert_eq!(range_bin(4.0), 27);
        assert_eq!(range_bin(4.3), 29);
        assert_eq!(doppler_bin(10.0, 1024), 516);
        assert_eq!(doppler_bin(15.0, 1024), 518);
        assert_eq!(range_bin(0.3), 2);
        assert!((C / (2.0 * BANDWIDTH_HZ) - RANGE_RESOLUTION_M).abs() < 1e-3);
        assert!((max_range_m(32) - 4.8).abs() < 1e-12);
    }
}
