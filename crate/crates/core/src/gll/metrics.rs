//! Mapping of raw link measurements onto normalized `[0, 1]` metrics.

use super::types::{LinkMeasurement, LinkQualityReport, MacScheme, MappingConfig, ServiceClass};
use crate::mrrm::Flow;
use crate::scalar::Scalar;

/// Frame loss left after MAC retransmissions, treating each attempt as an
/// independent trial: `p^(r+1)`.
pub fn residual_error_rate<T: Scalar>(raw_frame_loss: T, max_retransmissions: u32) -> T {
    let p = raw_frame_loss.unit_clamp();
    p.powi(max_retransmissions as i32 + 1)
}

/// Residual error rate for a RAT under a MAC scheme.
pub fn residual_for_scheme<T: Scalar>(
    raw_frame_loss: T,
    rat: &super::Rat,
    scheme: &MacScheme,
) -> T {
    residual_error_rate(raw_frame_loss, scheme.max_retransmissions(rat))
}

/// Fraction of resources still free: `(total - used) / total`.
pub fn resource_ratio<T: Scalar>(total: u64, used: u64) -> T {
    if total == 0 {
        return T::zero();
    }
    let free = total.saturating_sub(used);
    (T::from_u64(free).unwrap_or_else(T::zero) / T::from_u64(total).unwrap_or_else(T::one))
        .unit_clamp()
}

/// Weighted mean of four sub-metrics, forced to zero when the access is not
/// covered or offers no rate.
pub fn map_link_quality<T: Scalar>(
    m: &LinkMeasurement<T>,
    cfg: &MappingConfig<T>,
    class: ServiceClass,
) -> LinkQualityReport<T> {
    let one = T::one();
    let q_error = (one - (m.residual_error_rate / cfg.fer_max).min(one)).unit_clamp();
    let q_rate = (m.achievable_rate / *cfg.reference_rate.get(class))
        .min(one)
        .unit_clamp();
    let q_delay = (one - m.delay / cfg.delay_max).max(T::zero()).unit_clamp();
    let q_load = (one - m.load).unit_clamp();
    let w = &cfg.weights;
    let blended = w.error * q_error + w.rate * q_rate + w.delay * q_delay + w.load * q_load;
    let quality = if !m.covered || m.achievable_rate <= T::zero() {
        T::zero()
    } else {
        blended.unit_clamp()
    };
    LinkQualityReport {
        candidate: m.candidate.clone(),
        q_error,
        q_rate,
        q_delay,
        q_load,
        quality,
        relative_resources: q_load,
        raw: m.clone(),
    }
}

/// Whether the access can carry the flow's QoS; every bound is inclusive.
pub fn qos_feasible<T: Scalar>(flow: &Flow<T>, m: &LinkMeasurement<T>) -> bool {
    m.covered
        && m.achievable_rate >= flow.min_rate
        && m.delay <= flow.max_delay
        && m.residual_error_rate <= flow.max_loss
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gll::{AccessCandidate, MappingWeights, Rat};
    use crate::simenv::SimTime;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn meas(residual: f64, rate: f64, delay: f64, load: f64, covered: bool) -> LinkMeasurement<f64> {
        LinkMeasurement {
            candidate: AccessCandidate::new("WLAN", "OpA", "wlan1", "ch6"),
            residual_error_rate: residual,
            achievable_rate: rate,
            delay,
            load,
            covered,
            taken_at: SimTime(0),
            free_resources: 10,
            security_level: 0,
            cost_per_mb: 0.0,
        }
    }

    #[test]
    fn residual_closed_form() {
        assert_eq!(residual_error_rate(0.0_f64, 2), 0.0);
        assert_eq!(residual_error_rate(0.1_f64, 0), 0.1);
        assert!((residual_error_rate(0.1_f64, 2) - 0.001).abs() < 1e-15);
    }

    #[test]
    fn residual_matches_monte_carlo() {
        // Independent retransmissions: a frame is lost only if all r+1 attempts fail.
        let (p, r, trials) = (0.1_f64, 2u32, 1_000_000u32);
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let lost = (0..trials)
            .filter(|_| (0..=r).all(|_| rng.gen::<f64>() < p))
            .count() as f64;
        let est = lost / trials as f64;
        let expect = residual_error_rate(p, r);
        let sigma = (expect * (1.0 - expect) / trials as f64).sqrt();
        assert!((est - expect).abs() <= 3.0 * sigma, "est {est} vs {expect}");
    }

    #[test]
    fn residual_for_scheme_uses_per_rat_override() {
        let mut scheme = MacScheme::uniform(0);
        scheme.per_rat.insert(Rat::from("WLAN"), 2);
        assert!((residual_for_scheme(0.1, &"WLAN".into(), &scheme) - 0.001_f64).abs() < 1e-15);
        assert_eq!(residual_for_scheme(0.1, &"UMTS".into(), &scheme), 0.1_f64);
    }

    #[test]
    fn perfect_link_scores_one() {
        let r = map_link_quality(&meas(0.0, 2e6, 0.0, 0.0, true), &MappingConfig::default(), ServiceClass::RealTime);
        assert_eq!(r.quality, 1.0);
        assert_eq!(r.relative_resources, 1.0);
    }

    #[test]
    fn uncovered_or_zero_rate_scores_zero() {
        let cfg = MappingConfig::default();
        assert_eq!(map_link_quality(&meas(0.0, 2e6, 0.0, 0.0, false), &cfg, ServiceClass::RealTime).quality, 0.0);
        assert_eq!(map_link_quality(&meas(0.0, 0.0, 0.0, 0.0, true), &cfg, ServiceClass::RealTime).quality, 0.0);
    }

    #[test]
    fn hand_evaluated_mapping() {
        // (0.9 + 0.5 + 0.75 + 0.6) / 4
        let r = map_link_quality(&meas(0.01, 1e6, 50.0, 0.4, true), &MappingConfig::default(), ServiceClass::Background);
        assert!((r.q_error - 0.9).abs() < 1e-12);
        assert!((r.q_rate - 0.5).abs() < 1e-12);
        assert!((r.q_delay - 0.75).abs() < 1e-12);
        assert!((r.q_load - 0.6).abs() < 1e-12);
        assert!((r.quality - 0.6875).abs() < 1e-12);
        assert!((r.relative_resources - 0.6).abs() < 1e-12);
    }

    #[test]
    fn mapping_works_in_single_precision() {
        let m = LinkMeasurement::<f32> {
            candidate: AccessCandidate::new("WLAN", "OpA", "wlan1", "ch6"),
            residual_error_rate: 0.01,
            achievable_rate: 1e6,
            delay: 50.0,
            load: 0.4,
            covered: true,
            taken_at: SimTime(0),
            free_resources: 1,
            security_level: 0,
            cost_per_mb: 0.0,
        };
        let r = map_link_quality(&m, &MappingConfig::<f32>::default(), ServiceClass::Background);
        assert!((r.quality - 0.6875).abs() < 1e-6);
    }

    #[test]
    fn non_uniform_weights() {
        let cfg = MappingConfig {
            weights: MappingWeights { error: 1.0, rate: 0.0, delay: 0.0, load: 0.0 },
            ..MappingConfig::default()
        };
        let r = map_link_quality(&meas(0.05, 1e6, 50.0, 0.4, true), &cfg, ServiceClass::Background);
        assert!((r.quality - 0.5).abs() < 1e-12);
    }

    #[test]
    fn resource_ratio_cases() {
        assert_eq!(resource_ratio::<f64>(100, 100), 0.0);
        assert_eq!(resource_ratio::<f64>(100, 0), 1.0);
        assert_eq!(resource_ratio::<f64>(100, 75), 0.25);
    }

    #[test]
    fn qos_feasibility() {
        let flow = Flow::<f64>::new("f1", ServiceClass::RealTime, 1e6, 100.0, 0.01, 1);
        assert!(qos_feasible(&flow, &meas(0.001, 2e6, 50.0, 0.0, true)));
        assert!(!qos_feasible(&flow, &meas(0.001, 2e6, 50.0, 0.0, false)));
        assert!(qos_feasible(&flow, &meas(0.001, 2e6, 100.0, 0.0, true)));
        assert!(qos_feasible(&flow, &meas(0.01, 1e6, 100.0, 0.0, true)));
        assert!(!qos_feasible(&flow, &meas(0.0100001, 1e6, 100.0, 0.0, true)));
        assert!(!qos_feasible(&flow, &meas(0.001, 0.99e6, 50.0, 0.0, true)));
    }
}
