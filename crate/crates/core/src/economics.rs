//! Discounted cash-flow metrics over quarterly billing periods.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EconomicAssumptions {
    pub discount_rate_annual: f64,
    pub inflation_rate_annual: f64,
    pub lifespan_years: u32,
}

impl Default for EconomicAssumptions {
    fn default() -> Self {
        EconomicAssumptions {
            discount_rate_annual: 0.06,
            inflation_rate_annual: 0.02,
            lifespan_years: 15,
        }
    }
}

impl EconomicAssumptions {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("discount rate", self.discount_rate_annual),
            ("inflation rate", self.inflation_rate_annual),
        ] {
            if !(0.0..1.0).contains(&r) {
                return Err(Error::input(format!("{name} {r} outside [0, 1)")));
            }
        }
        if self.lifespan_years == 0 {
            return Err(Error::input("lifespan must be at least one year"));
        }
        Ok(())
    }

    /// Number of quarterly billing periods over the lifespan.
    pub fn periods(&self) -> usize {
        4 * self.lifespan_years as usize
    }

    pub fn discount_quarterly(&self) -> f64 {
        quarterly(self.discount_rate_annual)
    }

    pub fn inflation_quarterly(&self) -> f64 {
        quarterly(self.inflation_rate_annual)
    }
}

fn quarterly(annual: f64) -> f64 {
    (1.0 + annual).powf(0.25) - 1.0
}

/// Quarterly rate compounding to the given annual rate.
pub fn effective_quarterly_rate(annual: f64) -> Result<f64> {
    if !(annual > -1.0) {
        return Err(Error::input(format!("annual rate {annual} must exceed -1")));
    }
    Ok(quarterly(annual))
}

/// Annual rate equivalent to a quarterly rate.
pub fn annualize_quarterly(rate: f64) -> f64 {
    (1.0 + rate).powi(4) - 1.0
}

fn check_periods(savings: &[f64], assumptions: &EconomicAssumptions) -> Result<()> {
    let q = assumptions.periods();
    if savings.len() == q {
        Ok(())
    } else {
        Err(Error::LengthMismatch {
            expected: q,
            actual: savings.len(),
        })
    }
}

/// Net present value of quarterly savings (quarter 1 first) escalated by
/// inflation and discounted, less the up-front system cost.
pub fn npv(quarterly_savings: &[f64], assumptions: &EconomicAssumptions, system_cost: f64) -> Result<f64> {
    check_periods(quarterly_savings, assumptions)?;
    let growth = (1.0 + assumptions.inflation_quarterly()) / (1.0 + assumptions.discount_quarterly());
    let mut factor = 1.0;
    let mut total = 0.0;
    for s in quarterly_savings {
        factor *= growth;
        total += s * factor;
    }
    Ok(total - system_cost)
}

/// Cash flows `[-S, s_1 (1+r_i), s_2 (1+r_i)^2, ...]`.
pub fn escalated_cash_flows(quarterly_savings: &[f64], inflation_quarterly: f64, system_cost: f64) -> Vec<f64> {
    std::iter::once(-system_cost)
        .chain(
            quarterly_savings
                .iter()
                .enumerate()
                .map(|(i, s)| s * (1.0 + inflation_quarterly).powi(i as i32 + 1)),
        )
        .collect()
}

/// Modified internal rate of return per period.
///
/// Negative flows are discounted to period 0 at `finance_rate`, positive flows
/// compounded to the last period at `reinvest_rate`.
pub fn mirr(cash_flows: &[f64], finance_rate: f64, reinvest_rate: f64) -> Result<f64> {
    let n = cash_flows.len().saturating_sub(1);
    if n == 0 {
        return Err(Error::MirrUndefined("need at least two periods"));
    }
    let mut fv_positive = 0.0;
    let mut pv_negative = 0.0;
    for (i, &c) in cash_flows.iter().enumerate() {
        if c > 0.0 {
            fv_positive += c * (1.0 + reinvest_rate).powi((n - i) as i32);
        } else if c < 0.0 {
            pv_negative += c / (1.0 + finance_rate).powi(i as i32);
        }
    }
    if pv_negative == 0.0 {
        return Err(Error::MirrUndefined("no negative cash flow"));
    }
    if fv_positive == 0.0 {
        return Err(Error::MirrUndefined("no positive cash flow"));
    }
    Ok((fv_positive / -pv_negative).powf(1.0 / n as f64) - 1.0)
}

/// Simple payback on inflation-escalated savings, in years, interpolated
/// within the quarter where cumulative savings first reach the system cost.
///
/// None when no quarter saves anything; zero when there is nothing to repay.
pub fn payback_period(quarterly_savings: &[f64], system_cost: f64, inflation_quarterly: f64) -> Option<f64> {
    if quarterly_savings.iter().all(|&s| s <= 0.0) {
        return None;
    }
    if system_cost <= 0.0 {
        return Some(0.0);
    }
    let mut cumulative = 0.0;
    let mut escalation = 1.0;
    for (i, s) in quarterly_savings.iter().enumerate() {
        escalation *= 1.0 + inflation_quarterly;
        let flow = s * escalation;
        if flow > 0.0 && cumulative + flow >= system_cost {
            let fraction = (system_cost - cumulative) / flow;
            return Some((i as f64 + fraction) / 4.0);
        }
        cumulative += flow;
    }
    None
}

/// NPV gained over the best investment available on the do-nothing plan.
pub fn plan_saving(candidate_npv: f64, baseline_npv: f64) -> f64 {
    candidate_npv - baseline_npv
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CashFlowResult {
    pub npv: f64,
    /// None when the flows have no sign change (e.g. zero system cost).
    pub mirr_annual: Option<f64>,
    pub payback_years: Option<f64>,
    pub plan_saving: f64,
    pub quarterly_savings: Vec<f64>,
    pub system_cost: f64,
}

impl CashFlowResult {
    pub fn compute(
        quarterly_savings: Vec<f64>,
        assumptions: &EconomicAssumptions,
        system_cost: f64,
        baseline_npv: f64,
    ) -> Result<Self> {
        let value = npv(&quarterly_savings, assumptions, system_cost)?;
        let ri = assumptions.inflation_quarterly();
        let rd = assumptions.discount_quarterly();
        let flows = escalated_cash_flows(&quarterly_savings, ri, system_cost);
        let mirr_annual = mirr(&flows, rd, rd).ok().map(annualize_quarterly);
        Ok(CashFlowResult {
            npv: value,
            mirr_annual,
            payback_years: payback_period(&quarterly_savings, system_cost, ri),
            plan_saving: plan_saving(value, baseline_npv),
            quarterly_savings,
            system_cost,
        })
    }
}
