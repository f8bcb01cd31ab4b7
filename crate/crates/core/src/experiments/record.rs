use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::greedy::ApproximantTrace;
use crate::norms::NormEstimate;

/// One row of `results.csv`. Sampled values carry their 95% interval; exact
/// values leave the interval empty.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRecord {
    pub experiment: String,
    pub plan: String,
    pub p: f64,
    pub size_or_m: u128,
    pub trial: u64,
    pub value: f64,
    pub ci_low: Option<f64>,
    pub ci_high: Option<f64>,
    pub exact: bool,
    pub seed: u64,
}

impl ResultRecord {
    pub fn exact(experiment: &str, plan: &str, p: f64, size_or_m: u128, trial: u64, value: f64, seed: u64) -> Self {
        Self {
            experiment: experiment.to_string(),
            plan: plan.to_string(),
            p,
            size_or_m,
            trial,
            value,
            ci_low: None,
            ci_high: None,
            exact: true,
            seed,
        }
    }

    /// `num / den` where either side may be sampled. The interval divides the
    /// numerator's interval by the denominator's point value.
    pub fn ratio(
        experiment: &str,
        plan: &str,
        size_or_m: u128,
        trial: u64,
        num: &NormEstimate,
        den: &NormEstimate,
        seed: u64,
    ) -> Self {
        let exact = num.is_exact() && den.is_exact();
        let value = ratio(num.value, den.value);
        let (ci_low, ci_high) = if exact {
            (None, None)
        } else {
            let (lo, hi) = num.interval();
            let (dlo, dhi) = den.interval();
            (Some(ratio(lo, dhi)), Some(ratio(hi, dlo)))
        };
        Self {
            experiment: experiment.to_string(),
            plan: plan.to_string(),
            p: num.p,
            size_or_m,
            trial,
            value,
            ci_low,
            ci_high,
            exact,
            seed,
        }
    }

    pub fn from_estimate(
        experiment: &str,
        plan: &str,
        size_or_m: u128,
        trial: u64,
        e: &NormEstimate,
        seed: u64,
    ) -> Self {
        Self {
            experiment: experiment.to_string(),
            plan: plan.to_string(),
            p: e.p,
            size_or_m,
            trial,
            value: e.value,
            ci_low: e.ci_low,
            ci_high: e.ci_high,
            exact: e.is_exact(),
            seed,
        }
    }
}

/// `a / b`, with `0 / 0 = 1`.
pub(crate) fn ratio(a: f64, b: f64) -> f64 {
    if a == 0.0 && b == 0.0 {
        1.0
    } else {
        a / b
    }
}

pub fn write_records<W: Write>(out: W, records: &[ResultRecord]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for r in records {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_records<R: std::io::Read>(input: R) -> Result<Vec<ResultRecord>> {
    let mut r = csv::Reader::from_reader(input);
    r.deserialize().map(|row| row.map_err(Into::into)).collect()
}

#[derive(Serialize)]
struct TraceRow {
    m: usize,
    selected: Option<u128>,
    coefficient: Option<f64>,
    p: f64,
    residual: f64,
    ci_low: Option<f64>,
    ci_high: Option<f64>,
    exact: bool,
}

/// One row per step and `p`: `m, selected, coefficient, p, residual, ci_low, ci_high, exact`.
pub fn write_trace<W: Write>(out: W, trace: &ApproximantTrace) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    for step in &trace.steps {
        for e in &step.residuals {
            w.serialize(TraceRow {
                m: step.m,
                selected: step.selected,
                coefficient: step.coefficient,
                p: e.p,
                residual: e.value,
                ci_low: e.ci_low,
                ci_high: e.ci_high,
                exact: e.is_exact(),
            })?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_header_and_roundtrip() {
        let rows = vec![
            ResultRecord::exact("democracy", "g=2-4-8", 4.0, 3, 0, 1.25, 99),
            ResultRecord {
                ci_low: Some(0.9),
                ci_high: Some(1.1),
                exact: false,
                ..ResultRecord::exact("quasigreedy", "g=2", 3.0, 1, 2, 1.0, 7)
            },
        ];
        let mut buf = Vec::new();
        write_records(&mut buf, &rows).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(
            text.lines().next().unwrap(),
            "experiment,plan,p,size_or_m,trial,value,ci_low,ci_high,exact,seed"
        );
        assert!(text.lines().nth(1).unwrap().ends_with("1.25,,,true,99"));
        assert_eq!(read_records(&buf[..]).unwrap(), rows);
    }

    #[test]
    fn ratio_of_zero_norms() {
        assert_eq!(ratio(0.0, 0.0), 1.0);
        let z = NormEstimate::exact(4.0, 0.0);
        let r = ResultRecord::ratio("x", "y", 0, 0, &z, &z, 0);
        assert_eq!(r.value, 1.0);
        assert!(r.exact);
    }
}
