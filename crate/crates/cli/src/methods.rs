use std::fmt;

use anyhow::{bail, Result};
use splir_core::{ExplicitKind, ImplicitRegularizer, Regularizer};

/// A method column: a reference solver or a self-paced variant.
#[derive(Clone, Debug, PartialEq)]
pub enum Method {
    /// All-ones weights (`baseline`, `lr`, `concat-kmeans`).
    Reference(&'static str),
    /// `spl-ir-<implicit kind>` or `spl-<explicit kind>`.
    SelfPaced { name: String, reg: Regularizer },
}

impl Method {
    pub fn parse(name: &str, references: &[&'static str], mixture_gamma: f64) -> Result<Self> {
        let name = name.trim();
        if let Some(r) = references.iter().find(|r| **r == name) {
            return Ok(Method::Reference(r));
        }
        let reg = if let Some(kind) = name.strip_prefix("spl-ir-") {
            Regularizer::from(kind.parse::<ImplicitRegularizer>()?)
        } else if let Some(kind) = name.strip_prefix("spl-") {
            let kind: ExplicitKind = kind.parse()?;
            let gamma = (kind == ExplicitKind::Mixture).then_some(mixture_gamma);
            Regularizer::parse(kind.name(), gamma)?
        } else {
            bail!("unknown method {name:?}; expected one of {references:?}, spl-ir-<kind> or spl-<kind>");
        };
        Ok(Method::SelfPaced {
            name: name.to_string(),
            reg,
        })
    }

    pub fn parse_all(names: &[String], references: &[&'static str], mixture_gamma: f64) -> Result<Vec<Self>> {
        if names.is_empty() {
            bail!("method list is empty");
        }
        names.iter().map(|n| Self::parse(n, references, mixture_gamma)).collect()
    }

    pub fn name(&self) -> &str {
        match self {
            Method::Reference(n) => n,
            Method::SelfPaced { name, .. } => name,
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}
