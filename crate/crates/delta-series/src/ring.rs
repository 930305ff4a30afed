use std::sync::Arc;

use padic_core::PadicConfig;
use smallvec::SmallVec;

use crate::SeriesError;

/// Exponent vector, indexed by `level * families + family`.
pub type Mono = SmallVec<[i32; 16]>;

/// Variable layout: every family carries derivative levels `0..=order`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VarSpec {
    families: Vec<String>,
    order: usize,
    weights: Vec<i64>,
}

impl VarSpec {
    /// weight(q_f^(i)) = p^i.
    pub fn new(families: &[&str], order: usize, p: u64) -> Result<Self, SeriesError> {
        let ones = vec![1; families.len()];
        Self::with_family_weights(families, order, p, &ones)
    }

    /// weight(q_f^(i)) = w_f * p^i.
    pub fn with_family_weights(
        families: &[&str],
        order: usize,
        p: u64,
        family_weights: &[i64],
    ) -> Result<Self, SeriesError> {
        let nf = families.len();
        if family_weights.len() != nf {
            return Err(SeriesError::InvalidArgument("one weight per family".into()));
        }
        let mut weights = Vec::with_capacity(nf * (order + 1));
        let mut pi = 1i64;
        for _ in 0..=order {
            for w in family_weights {
                weights.push(w * pi);
            }
            pi *= p as i64;
        }
        Self::from_weights(families, order, weights)
    }

    /// Every variable has weight 1, so the weight is the total degree.
    pub fn degree_graded(families: &[&str], order: usize) -> Result<Self, SeriesError> {
        Self::from_weights(families, order, vec![1; families.len() * (order + 1)])
    }

    pub fn from_weights(families: &[&str], order: usize, weights: Vec<i64>) -> Result<Self, SeriesError> {
        if families.is_empty() {
            return Err(SeriesError::InvalidArgument("at least one family".into()));
        }
        for (i, a) in families.iter().enumerate() {
            if families[..i].contains(a) {
                return Err(SeriesError::InvalidArgument(format!("duplicate family {a}")));
            }
        }
        if weights.len() != families.len() * (order + 1) {
            return Err(SeriesError::InvalidArgument("one weight per variable".into()));
        }
        Ok(VarSpec { families: families.iter().map(|s| s.to_string()).collect(), order, weights })
    }

    pub fn families(&self) -> &[String] {
        &self.families
    }
    pub fn num_families(&self) -> usize {
        self.families.len()
    }
    pub fn order(&self) -> usize {
        self.order
    }
    pub fn num_vars(&self) -> usize {
        self.weights.len()
    }
    pub fn weights(&self) -> &[i64] {
        &self.weights
    }
    pub fn var(&self, family: usize, level: usize) -> usize {
        assert!(family < self.families.len() && level <= self.order);
        level * self.families.len() + family
    }
    pub fn level_of(&self, v: usize) -> usize {
        v / self.families.len()
    }
    pub fn family_of(&self, v: usize) -> usize {
        v % self.families.len()
    }

    pub fn weight(&self, m: &[i32]) -> i64 {
        m.iter().zip(&self.weights).map(|(&e, &w)| e as i64 * w).sum()
    }

    /// Total degree in the derivative variables.
    pub fn delta_degree(&self, m: &[i32]) -> i64 {
        m[self.families.len()..].iter().map(|&e| e as i64).sum()
    }

    pub fn var_name(&self, v: usize) -> String {
        let name = &self.families[self.family_of(v)];
        match self.level_of(v) {
            0 => name.clone(),
            1 => format!("{name}'"),
            2 => format!("{name}''"),
            l => format!("{name}^({l})"),
        }
    }
}

/// Monomial admission: weight cap, Laurent floor on base variables, and a
/// cap on derivative degree.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TruncationPolicy {
    pub weight_cap: Option<i64>,
    pub laurent_floor: u32,
    pub delta_deg_cap: Option<u32>,
}

impl TruncationPolicy {
    pub fn weight(cap: i64) -> Self {
        TruncationPolicy { weight_cap: Some(cap), laurent_floor: 0, delta_deg_cap: None }
    }
    pub fn unbounded() -> Self {
        TruncationPolicy { weight_cap: None, laurent_floor: 0, delta_deg_cap: None }
    }
    pub fn with_floor(mut self, v: u32) -> Self {
        self.laurent_floor = v;
        self
    }
    pub fn with_delta_cap(mut self, b: u32) -> Self {
        self.delta_deg_cap = Some(b);
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum Admit {
    Keep,
    Drop,
    Floor,
    NegativeDerivative,
}

/// A variable layout, a truncation policy and a scalar configuration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeriesRing {
    pub vars: VarSpec,
    pub policy: TruncationPolicy,
    pub cfg: PadicConfig,
}

impl SeriesRing {
    pub fn new(vars: VarSpec, policy: TruncationPolicy, cfg: PadicConfig) -> Arc<Self> {
        Arc::new(SeriesRing { vars, policy, cfg })
    }

    pub(crate) fn admit(&self, m: &[i32]) -> Admit {
        let nf = self.vars.num_families();
        if let Some(cap) = self.policy.weight_cap {
            if self.vars.weight(m) > cap {
                return Admit::Drop;
            }
        }
        let mut dd = 0i64;
        for &e in &m[nf..] {
            if e < 0 {
                return Admit::NegativeDerivative;
            }
            dd += e as i64;
        }
        if let Some(b) = self.policy.delta_deg_cap {
            if dd > b as i64 {
                return Admit::Drop;
            }
        }
        let floor = -(self.policy.laurent_floor as i32);
        if m[..nf].iter().any(|&e| e < floor) {
            return Admit::Floor;
        }
        Admit::Keep
    }

    pub fn admits(&self, m: &[i32]) -> bool {
        self.admit(m) == Admit::Keep
    }

    pub fn zero_mono(&self) -> Mono {
        SmallVec::from_elem(0, self.vars.num_vars())
    }

    /// Same variables and policy, different scalars.
    pub fn with_cfg(&self, cfg: PadicConfig) -> Arc<Self> {
        Arc::new(SeriesRing { vars: self.vars.clone(), policy: self.policy, cfg })
    }

    /// Trades `k` guard digits for precision, keeping the mantissa width, so
    /// values move between the two rings unchanged. Used by computations that
    /// end in a division by p^k.
    pub fn with_extra_digits(&self, k: u32) -> Result<Arc<Self>, SeriesError> {
        let cfg = &self.cfg;
        if cfg.guard() < k {
            return Err(SeriesError::InvalidArgument(format!(
                "need {k} guard digits to widen precision, have {}",
                cfg.guard()
            )));
        }
        Ok(self.with_cfg(cfg.with_prec_guard(cfg.prec() + k, cfg.guard() - k)?))
    }

    pub fn with_policy(&self, policy: TruncationPolicy) -> Arc<Self> {
        Arc::new(SeriesRing { vars: self.vars.clone(), policy, cfg: self.cfg.clone() })
    }
}

pub(crate) fn same_ring(a: &Arc<SeriesRing>, b: &Arc<SeriesRing>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}
