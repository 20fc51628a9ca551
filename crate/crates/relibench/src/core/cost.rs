//! Token cost accounting.

use std::collections::BTreeMap;

use crate::core::config::PriceRate;

#[derive(Debug, thiserror::Error)]
pub enum CostError {
    #[error("unknown model id: {0}")]
    UnknownModel(String),
}

/// cost = tokens_in/1e6 * in_rate + tokens_out/1e6 * out_rate
pub fn compute_cost(
    tokens_in: u64,
    tokens_out: u64,
    model_id: &str,
    price_table: &BTreeMap<String, PriceRate>,
) -> Result<f64, CostError> {
    let rate = price_table
        .get(model_id)
        .ok_or_else(|| CostError::UnknownModel(model_id.to_string()))?;
    Ok(tokens_in as f64 / 1e6 * rate.usd_per_1m_input + tokens_out as f64 / 1e6 * rate.usd_per_1m_output)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::core::config::default_price_table;

    #[test]
    fn gemini_input_rate() {
        let t = default_price_table();
        let c = compute_cost(1_000_000, 0, "gemini-2.0-flash", &t).unwrap();
        assert!((c - 0.075).abs() < 1e-12);
    }

    #[test]
    fn zero_tokens_zero_cost() {
        let t = default_price_table();
        assert_eq!(compute_cost(0, 0, "gpt-4o", &t).unwrap(), 0.0);
    }

    #[test]
    fn gpt4o_blended() {
        let t = default_price_table();
        let c = compute_cost(1_000_000, 1_000_000, "gpt-4o", &t).unwrap();
        assert!((c - 12.50).abs() < 1e-12);
    }

    #[test]
    fn unknown_model_errors() {
        let t = default_price_table();
        assert!(compute_cost(1, 1, "nope", &t).is_err());
    }
}
