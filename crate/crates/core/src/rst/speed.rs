//! Speed-dependent arc options for electric vehicles.

use thiserror::Error;

use crate::instance::ArcOption;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpeedError {
    #[error("link length must be positive, got {0}")]
    Length(f64),
    #[error("at least one speed is required")]
    NoSpeeds,
    #[error("speed must be positive, got {0}")]
    Speed(f64),
}

/// Energy consumption per unit time at speed `v` (km/h).
pub fn consumption_rate(v: f64) -> f64 {
    -0.064 + 0.0056 * v + 0.00026 * (v - 50.0).powi(2)
}

fn round_half_up(x: f64) -> f64 {
    (x + 0.5).floor()
}

/// One option per distinct travel time. Travel time is `length / speed`
/// rounded to the grid (at least one unit), cost equals travel time, and
/// the delta is the consumed energy times `scale`, rounded. When two speeds
/// round to the same travel time, the cheaper-to-run one is kept.
pub fn derive_arc_options(
    length: f64,
    speeds: &[f64],
    scale: f64,
) -> Result<Vec<ArcOption>, SpeedError> {
    if !(length > 0.0) {
        return Err(SpeedError::Length(length));
    }
    if speeds.is_empty() {
        return Err(SpeedError::NoSpeeds);
    }
    let mut out: Vec<ArcOption> = Vec::new();
    for &v in speeds {
        if !(v > 0.0) {
            return Err(SpeedError::Speed(v));
        }
        let tt = round_half_up(length / v).max(1.0) as u32;
        let used = round_half_up(consumption_rate(v) * f64::from(tt) * scale).max(0.0);
        let option = ArcOption::new(tt, f64::from(tt), -(used as i32));
        match out.iter_mut().find(|o| o.travel_time == tt) {
            Some(existing) if existing.resource_delta < option.resource_delta => *existing = option,
            Some(_) => {}
            None => out.push(option),
        }
    }
    out.sort_by_key(|o| o.travel_time);
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn consumption_checkpoints() {
        assert!((consumption_rate(50.0) - 0.216).abs() < 1e-12);
        assert!((consumption_rate(40.0) - 0.186).abs() < 1e-12);
        assert!((consumption_rate(80.0) - 0.618).abs() < 1e-12);
    }

    #[test]
    fn options_from_speeds() {
        let opts = derive_arc_options(100.0, &[50.0, 40.0], 10.0).unwrap();
        // 100/50 = 2 -> 0.216*2*10 = 4.32 -> 4; 100/40 = 2.5 -> 3 -> 5.58 -> 6
        assert_eq!(
            opts,
            vec![ArcOption::new(2, 2.0, -4), ArcOption::new(3, 3.0, -6)]
        );
    }

    #[test]
    fn same_time_keeps_lower_consumption() {
        // both round to 1 time unit
        let opts = derive_arc_options(10.0, &[80.0, 50.0], 10.0).unwrap();
        assert_eq!(opts, vec![ArcOption::new(1, 1.0, -2)]);
    }

    #[test]
    fn rejects_bad_input() {
        assert_eq!(
            derive_arc_options(0.0, &[50.0], 1.0),
            Err(SpeedError::Length(0.0))
        );
        assert_eq!(derive_arc_options(5.0, &[], 1.0), Err(SpeedError::NoSpeeds));
        assert_eq!(
            derive_arc_options(5.0, &[0.0], 1.0),
            Err(SpeedError::Speed(0.0))
        );
    }
}
