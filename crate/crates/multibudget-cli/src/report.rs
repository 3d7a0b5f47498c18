//! The per-run report printed by `solve`.

use std::collections::BTreeSet;

use multibudget::{BudgetedInstance, Error, Rat};
use serde::Serialize;
use sha2::{Digest, Sha256};

pub fn digest_of(text: &str) -> String {
    let mut hasher = Sha256::new();
    hasher.update(text.as_bytes());
    let bytes = hasher.finalize();
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Serialize)]
pub struct RunReport {
    pub instance_digest: String,
    pub algorithm: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eps: Option<String>,
    /// `null` when no feasible solution exists at all.
    pub output: Option<Vec<usize>>,
    pub weight: String,
    pub lengths: Vec<String>,
    pub budgets: Vec<String>,
    pub feasible: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle_value: Option<String>,
    /// `weight / oracle_value`, omitted when the oracle value is zero.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ratio: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub wall_time_ms: Option<u128>,
}

impl RunReport {
    pub fn build(
        inst: &BudgetedInstance,
        algorithm: &str,
        eps: Option<&Rat>,
        output: Option<&BTreeSet<usize>>,
        oracle_value: Option<&Rat>,
        wall_time_ms: Option<u128>,
    ) -> Result<Self, Error> {
        let chosen = output.cloned().unwrap_or_default();
        let weight = inst.weight_of(&chosen)?;
        let lengths = inst.lengths_of(&chosen)?;
        let feasible = output.is_some() && inst.feasible(&chosen)?;
        let ratio = oracle_value.and_then(|v| weight.checked_div(v).ok());
        Ok(RunReport {
            instance_digest: digest_of(&inst.to_json()),
            algorithm: algorithm.to_string(),
            eps: eps.map(Rat::to_string),
            output: output.map(|s| s.iter().copied().collect()),
            weight: weight.to_string(),
            lengths: lengths.iter().map(Rat::to_string).collect(),
            budgets: inst.budgets().iter().map(Rat::to_string).collect(),
            feasible,
            oracle_value: oracle_value.map(Rat::to_string),
            ratio: ratio.map(|r| r.to_string()),
            wall_time_ms,
        })
    }

    pub fn pretty(&self) -> String {
        let mut lines = vec![
            format!("instance  {}", self.instance_digest),
            format!(
                "algorithm {}{}",
                self.algorithm,
                self.eps
                    .as_deref()
                    .map(|e| format!(" (eps {e})"))
                    .unwrap_or_default()
            ),
            match &self.output {
                Some(ids) => format!("output    {ids:?}"),
                None => "output    none (no feasible solution)".to_string(),
            },
            format!("weight    {}", self.weight),
            format!(
                "lengths   [{}]  within budgets [{}]: {}",
                self.lengths.join(", "),
                self.budgets.join(", "),
                if self.feasible { "yes" } else { "no" }
            ),
        ];
        if let Some(v) = &self.oracle_value {
            lines.push(format!(
                "oracle    {v}{}",
                self.ratio
                    .as_deref()
                    .map(|r| format!(" (ratio {r})"))
                    .unwrap_or_default()
            ));
        }
        if let Some(ms) = self.wall_time_ms {
            lines.push(format!("time      {ms} ms"));
        }
        lines.join("\n")
    }
}
