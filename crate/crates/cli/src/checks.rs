use crate::config::{Check, Metric};
use crate::runner::{PointResults, RunResults};

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub metric: Metric,
    pub t: Option<f64>,
    pub value: f64,
    pub std_error: f64,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub se_slack: f64,
    pub pass: bool,
}

fn point_value(metric: Metric, p: &PointResults) -> Option<(f64, f64)> {
    let gamma = |k: usize| p.gammas.as_ref().map(|g| (g.gamma[k], g.std_error[k]));
    match metric {
        Metric::DK => p.distances.map(|d| (d.d_k, d.d_k_se)),
        Metric::DW => p.distances.map(|d| (d.d_w, d.d_w_se)),
        Metric::Variance => p.variance.map(|v| (v.variance, v.std_error_of_variance)),
        Metric::Gamma1 => gamma(0),
        Metric::Gamma2 => gamma(1),
        Metric::Gamma3 => gamma(2),
        Metric::Gamma4 => gamma(3),
        Metric::Gamma5 => gamma(4),
        Metric::Gamma6 => gamma(5),
        Metric::DwBound => p.bounds.as_ref().map(|b| (b.dw_bound, b.dw_bound_se)),
        Metric::DkBound => p.bounds.as_ref().map(|b| (b.dk_bound, b.dk_bound_se)),
        Metric::StabilizationDwBound => p.stabilization.as_ref().map(|s| (s.dw_bound, 0.0)),
        Metric::StabilizationDkBound => p.stabilization.as_ref().map(|s| (s.dk_bound, 0.0)),
        Metric::Slope => None,
    }
}

fn judge(c: &Check, t: Option<f64>, (value, se): (f64, f64)) -> CheckOutcome {
    let slack = c.se_slack * se;
    let pass = value.is_finite()
        && c.max.is_none_or(|m| value - slack <= m)
        && c.min.is_none_or(|m| value + slack >= m);
    CheckOutcome {
        metric: c.metric,
        t,
        value,
        std_error: se,
        min: c.min,
        max: c.max,
        se_slack: c.se_slack,
        pass,
    }
}

/// One outcome per check and matching grid point. A metric that was not
/// produced counts as a failure.
pub fn evaluate(checks: &[Check], results: &RunResults) -> Vec<CheckOutcome> {
    let mut out = Vec::new();
    for c in checks {
        if c.metric == Metric::Slope {
            let v = results.rate.as_ref().map_or((f64::NAN, 0.0), |f| (f.slope, f.slope_se));
            out.push(judge(c, None, v));
            continue;
        }
        for p in results.points.iter().filter(|p| c.t.is_none_or(|t| t == p.t)) {
            let v = point_value(c.metric, p).unwrap_or((f64::NAN, 0.0));
            out.push(judge(c, Some(p.t), v));
        }
    }
    out
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        let at = self.t.map(|t| format!(" t={t}")).unwrap_or_default();
        let range = match (self.min, self.max) {
            (Some(a), Some(b)) => format!("in [{a}, {b}]"),
            (Some(a), None) => format!(">= {a}"),
            (None, Some(b)) => format!("<= {b}"),
            (None, None) => String::new(),
        };
        format!(
            "{} {}{at}: {:.6} ± {:.2e} {range} (slack {} SE)",
            if self.pass { "PASS" } else { "FAIL" },
            self.metric.name(),
            self.value,
            self.std_error,
            self.se_slack
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use poisson_stein::clt::DistanceReport;

    fn results(d_w: f64, se: f64) -> RunResults {
        RunResults {
            functional: "first_chaos",
            seed: 1,
            points: vec![PointResults {
                t: 100.0,
                distances: Some(DistanceReport {
                    t: 100.0,
                    n: 1000,
                    d_k: 0.02,
                    d_w,
                    d_k_se: 0.01,
                    d_w_se: se,
                    dkw_band: 0.04,
                }),
                ..Default::default()
            }],
            rate: None,
        }
    }

    fn check(max: f64, k: f64) -> Check {
        Check {
            metric: Metric::DW,
            t: None,
            min: None,
            max: Some(max),
            se_slack: k,
        }
    }

    #[test]
    fn slack_widens_the_range() {
        let r = results(0.12, 0.01);
        assert!(!evaluate(&[check(0.1, 1.0)], &r)[0].pass);
        assert!(evaluate(&[check(0.1, 2.0)], &r)[0].pass);
    }

    #[test]
    fn missing_metric_fails() {
        let c = Check {
            metric: Metric::Gamma3,
            ..check(1.0, 0.0)
        };
        let out = evaluate(&[c], &results(0.0, 0.0));
        assert_eq!(out.len(), 1);
        assert!(!out[0].pass);
    }

    #[test]
    fn check_at_unknown_t_matches_nothing() {
        let c = Check {
            t: Some(50.0),
            ..check(1.0, 0.0)
        };
        assert!(evaluate(&[c], &results(0.0, 0.0)).is_empty());
    }
}
