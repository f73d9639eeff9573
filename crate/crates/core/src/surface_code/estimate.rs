//! Monte-Carlo logical error rates and correction-bonus calibration.

use super::{
    build_layout, decode_mwpm, extract_syndrome, inject_errors, PauliPattern, SurfaceCodeError,
    SurfaceCodeLayout,
};

/// Outcome of a logical error-rate run. `rate` is failures over completed
/// trials; trials skipped for exceeding the exact-matching cap are excluded
/// from the denominator and reported separately.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRateEstimate {
    pub rate: f64,
    /// Half-width of the normal-approximation 95% confidence interval.
    pub ci95: f64,
    pub trials: u32,
    pub failures: u32,
    pub skipped: u32,
}

impl ErrorRateEstimate {
    pub fn completed(&self) -> u32 {
        self.trials - self.skipped
    }
}

/// True when the residual pattern flips a logical operator: odd X/Y weight
/// across the logical-Z support (data row 0) or odd Z/Y weight down the
/// logical-X support (data column 0).
pub fn logical_failure(layout: &SurfaceCodeLayout, residual: &PauliPattern) -> bool {
    let odd_on = |support: &[super::Coord], flips: fn(super::Pauli) -> bool| {
        support
            .iter()
            .filter(|&&q| flips(residual.get(layout, q)))
            .count()
            % 2
            == 1
    };
    odd_on(&layout.logical_z_support(), super::Pauli::flips_z_checks)
        || odd_on(&layout.logical_x_support(), super::Pauli::flips_x_checks)
}

/// Estimate the logical failure probability of one inject-measure-decode
/// cycle under depolarizing noise of strength `p`. Trial `t` uses seed
/// `seed + t`, so runs are reproducible and individual trials replayable.
pub fn logical_error_rate(
    distance: u32,
    p: f64,
    trials: u32,
    seed: u64,
) -> Result<ErrorRateEstimate, SurfaceCodeError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(SurfaceCodeError::BadProbability(p));
    }
    let layout = build_layout(distance)?;
    let mut failures = 0u32;
    let mut skipped = 0u32;
    for t in 0..trials {
        let errors = inject_errors(&layout, p, seed.wrapping_add(t as u64))?;
        let syndrome = extract_syndrome(&layout, &errors);
        let correction = match decode_mwpm(&layout, &syndrome) {
            Ok(c) => c,
            Err(SurfaceCodeError::Tractability { .. }) => {
                skipped += 1;
                continue;
            }
            Err(e) => return Err(e),
        };
        let residual = errors.compose(&correction);
        debug_assert!(extract_syndrome(&layout, &residual).is_empty());
        if logical_failure(&layout, &residual) {
            failures += 1;
        }
    }
    let completed = trials - skipped;
    let rate = if completed == 0 {
        0.0
    } else {
        failures as f64 / completed as f64
    };
    let ci95 = if completed == 0 {
        0.0
    } else {
        1.96 * (rate * (1.0 - rate) / completed as f64).sqrt()
    };
    Ok(ErrorRateEstimate {
        rate,
        ci95,
        trials,
        failures,
        skipped,
    })
}

/// Calibrate the correction bonus: treat incoming infidelity `1 - f_in` as
/// the physical error rate, measure the logical failure rate of one cycle,
/// and report how much surviving fidelity `1 - rate` exceeds `f_in`,
/// clamped at zero.
pub fn calibrate_omega(
    distance: u32,
    f_in: f64,
    trials: u32,
    seed: u64,
) -> Result<f64, SurfaceCodeError> {
    if !(f_in > 0.0 && f_in <= 1.0) {
        return Err(SurfaceCodeError::BadFidelity(f_in));
    }
    let est = logical_error_rate(distance, 1.0 - f_in, trials, seed)?;
    Ok(((1.0 - est.rate) - f_in).max(0.0))
}
