use std::collections::BTreeMap;
use std::sync::Arc;

use super::functions::{ConfidenceFn, NegativeEntropy, RawScore, SoftmaxResponse};
use crate::error::{Error, Result};

/// Confidence functions addressable by name.
#[derive(Clone)]
pub struct KappaRegistry {
    functions: BTreeMap<&'static str, Arc<dyn ConfidenceFn>>,
}

impl KappaRegistry {
    pub fn empty() -> Self {
        Self {
            functions: BTreeMap::new(),
        }
    }

    /// Softmax response, negative entropy and raw score.
    pub fn with_builtins() -> Self {
        let mut registry = Self::empty();
        registry.register(Arc::new(SoftmaxResponse));
        registry.register(Arc::new(NegativeEntropy));
        registry.register(Arc::new(RawScore));
        registry
    }

    pub fn register(&mut self, function: Arc<dyn ConfidenceFn>) {
        self.functions.insert(function.name(), function);
    }

    pub fn get(&self, name: &str) -> Result<Arc<dyn ConfidenceFn>> {
        self.functions
            .get(name)
            .cloned()
            .ok_or_else(|| Error::UnknownKappa(name.to_string()))
    }

    pub fn names(&self) -> Vec<&'static str> {
        self.functions.keys().copied().collect()
    }
}

impl Default for KappaRegistry {
    fn default() -> Self {
        Self::with_builtins()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kappa::ScoreInput;

    struct Margin;

    impl ConfidenceFn for Margin {
        fn name(&self) -> &'static str {
            "margin"
        }
        fn input(&self) -> ScoreInput {
            ScoreInput::Probabilities
        }
        fn unit_interval(&self) -> bool {
            true
        }
        fn score(&self, p: &[f64]) -> f64 {
            let mut v = p.to_vec();
            v.sort_by(|a, b| b.total_cmp(a));
            v[0] - v.get(1).copied().unwrap_or(0.0)
        }
    }

    #[test]
    fn builtins_resolve() {
        let r = KappaRegistry::with_builtins();
        assert_eq!(r.names(), vec!["negative-entropy", "raw-score", "softmax-response"]);
        assert_eq!(r.get("softmax-response").unwrap().score(&[0.1, 0.9]), 0.9);
        assert!(matches!(r.get("odin"), Err(Error::UnknownKappa(_))));
    }

    #[test]
    fn custom_functions_register_by_name() {
        let mut r = KappaRegistry::with_builtins();
        r.register(Arc::new(Margin));
        let f = r.get("margin").unwrap();
        assert!((f.score(&[0.6, 0.3, 0.1]) - 0.3).abs() < 1e-15);
    }
}
