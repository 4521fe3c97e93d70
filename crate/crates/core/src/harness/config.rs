use std::collections::BTreeMap;
use std::str::FromStr;

use crate::clustering::{DEFAULT_ABILITY_WEIGHT, DEFAULT_TASK_EPS_M, DEFAULT_TASK_MIN_PTS};
use crate::evaluation::{Aggregate, EvalBasis, EvalWeights};
use crate::matching::{Cap, RankConvention, TraversalOrder};
use crate::metrics::PayoffModel;

use super::geo::BoundingBox;
use super::synth::TruncatedNormal;
use super::{seed_for, HarnessError};

pub const DEFAULT_TRAJECTORY_EPS_M: f64 = 100.0;
pub const DEFAULT_TRAJECTORY_MIN_PTS: usize = 3;
pub const DEFAULT_CAP: u32 = 15;

/// Which traversal scheme a run uses. `Random` draws its seed from the root
/// seed, so the name alone is enough in a config file.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OrderKind {
    NonLMT,
    Random,
    Xcoord,
    Avg,
    Sum,
}

impl OrderKind {
    pub const ALL: [OrderKind; 5] = [
        OrderKind::NonLMT,
        OrderKind::Random,
        OrderKind::Xcoord,
        OrderKind::Avg,
        OrderKind::Sum,
    ];

    pub fn name(self) -> &'static str {
        match self {
            OrderKind::NonLMT => "NonLMT",
            OrderKind::Random => "Random",
            OrderKind::Xcoord => "Xcoord",
            OrderKind::Avg => "AVG",
            OrderKind::Sum => "SUM",
        }
    }

    pub fn with_seed(self, root_seed: u64) -> TraversalOrder {
        match self {
            OrderKind::NonLMT => TraversalOrder::NonLMT,
            OrderKind::Random => TraversalOrder::Random(seed_for(root_seed, "traversal")),
            OrderKind::Xcoord => TraversalOrder::Xcoord,
            OrderKind::Avg => TraversalOrder::Avg,
            OrderKind::Sum => TraversalOrder::Sum,
        }
    }
}

impl FromStr for OrderKind {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        OrderKind::ALL
            .into_iter()
            .find(|o| o.name().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| HarnessError::InvalidConfig(format!("unknown traversal order {s:?}")))
    }
}

/// Everything a single allocation run depends on besides the data.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub bbox: BoundingBox,
    pub task_eps_m: f64,
    pub task_min_pts: usize,
    pub trajectory_eps_m: f64,
    pub trajectory_min_pts: usize,
    /// `None` means `⌈√n⌉`.
    pub worker_k: Option<usize>,
    pub ability_weight: f64,
    pub layers: usize,
    pub weights: EvalWeights,
    pub basis: EvalBasis,
    pub order: OrderKind,
    pub w: f64,
    pub cap: Cap,
    /// Traversal passes; unmatched worker clusters retry with fresh counts.
    pub passes: u32,
    pub convention: RankConvention,
    pub payoff: PayoffModel,
    pub seed: u64,
    /// Drawn for tasks whose input row has no reward.
    pub reward: TruncatedNormal,
    /// Drawn for workers whose input has no ability.
    pub ability: TruncatedNormal,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            bbox: BoundingBox::default(),
            task_eps_m: DEFAULT_TASK_EPS_M,
            task_min_pts: DEFAULT_TASK_MIN_PTS,
            trajectory_eps_m: DEFAULT_TRAJECTORY_EPS_M,
            trajectory_min_pts: DEFAULT_TRAJECTORY_MIN_PTS,
            worker_k: None,
            ability_weight: DEFAULT_ABILITY_WEIGHT,
            layers: 2,
            weights: EvalWeights::default(),
            basis: EvalBasis::new(Aggregate::Avg, Aggregate::Sum),
            order: OrderKind::Avg,
            w: 0.5,
            cap: Cap::Limited(DEFAULT_CAP),
            passes: 1,
            convention: RankConvention::default(),
            payoff: PayoffModel::default(),
            seed: 7,
            reward: TruncatedNormal::new(10.0, 2.0).expect("valid default"),
            ability: TruncatedNormal::new(5.0, 1.0).expect("valid default"),
        }
    }
}

impl RunConfig {
    pub fn traversal(&self) -> TraversalOrder {
        self.order.with_seed(self.seed)
    }

    /// The cap this run actually applies: NonLMT is always uncapped.
    pub fn effective_cap(&self) -> Cap {
        match self.order {
            OrderKind::NonLMT => Cap::Unlimited,
            _ => self.cap,
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::InvalidConfig(m));
        if !(self.task_eps_m > 0.0 && self.task_eps_m.is_finite()) {
            return bad(format!("task_eps_m = {}", self.task_eps_m));
        }
        if !(self.trajectory_eps_m > 0.0 && self.trajectory_eps_m.is_finite()) {
            return bad(format!("trajectory_eps_m = {}", self.trajectory_eps_m));
        }
        if self.task_min_pts == 0 || self.trajectory_min_pts == 0 {
            return bad("min_pts must be at least 1".into());
        }
        if self.worker_k == Some(0) {
            return bad("worker_k must be positive".into());
        }
        if !(self.ability_weight >= 0.0 && self.ability_weight.is_finite()) {
            return bad(format!("ability_weight = {}", self.ability_weight));
        }
        if self.layers == 0 {
            return bad("layers must be at least 1".into());
        }
        if self.passes == 0 {
            return bad("passes must be at least 1".into());
        }
        if !(0.0..=1.0).contains(&self.w) {
            return bad(format!("w = {} is outside [0, 1]", self.w));
        }
        EvalWeights::new(self.weights.alpha, self.weights.beta, self.weights.gamma)
            .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
        BoundingBox::new(self.bbox.min_lat, self.bbox.min_lon, self.bbox.max_lat, self.bbox.max_lon)?;
        Ok(())
    }

    /// Every key with its current value, sorted by key.
    pub fn to_map(&self) -> BTreeMap<&'static str, String> {
        let mut m = BTreeMap::new();
        m.insert("box", self.bbox.to_string());
        m.insert("task_eps_m", self.task_eps_m.to_string());
        m.insert("task_min_pts", self.task_min_pts.to_string());
        m.insert("trajectory_eps_m", self.trajectory_eps_m.to_string());
        m.insert("trajectory_min_pts", self.trajectory_min_pts.to_string());
        m.insert(
            "worker_k",
            self.worker_k.map_or_else(|| "auto".to_string(), |k| k.to_string()),
        );
        m.insert("ability_weight", self.ability_weight.to_string());
        m.insert("layers", self.layers.to_string());
        m.insert("alpha", self.weights.alpha.to_string());
        m.insert("beta", self.weights.beta.to_string());
        m.insert("gamma", self.weights.gamma.to_string());
        m.insert("basis", self.basis.to_string());
        m.insert("order", self.order.name().to_string());
        m.insert("w", self.w.to_string());
        m.insert("cap", self.cap.to_string());
        m.insert("passes", self.passes.to_string());
        m.insert("rank_convention", self.convention.to_string());
        m.insert("payoff_model", self.payoff.to_string());
        m.insert("seed", self.seed.to_string());
        m.insert("reward_mean", self.reward.mean.to_string());
        m.insert("reward_std", self.reward.std.to_string());
        m.insert("ability_mean", self.ability.mean.to_string());
        m.insert("ability_std", self.ability.std.to_string());
        m
    }

    /// Flat `key = value` text that [`RunConfig::from_str`] reads back.
    pub fn to_kv(&self) -> String {
        self.to_map()
            .into_iter()
            .map(|(k, v)| format!("{k} = {v}\n"))
            .collect()
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), HarnessError> {
        let bad = || HarnessError::InvalidConfig(format!("bad value {value:?} for {key}"));
        let f = || value.parse::<f64>().map_err(|_| bad());
        let u = || value.parse::<usize>().map_err(|_| bad());
        match key {
            "box" => self.bbox = value.parse()?,
            "task_eps_m" => self.task_eps_m = f()?,
            "task_min_pts" => self.task_min_pts = u()?,
            "trajectory_eps_m" => self.trajectory_eps_m = f()?,
            "trajectory_min_pts" => self.trajectory_min_pts = u()?,
            "worker_k" => {
                self.worker_k = if value.eq_ignore_ascii_case("auto") {
                    None
                } else {
                    Some(u()?)
                }
            }
            "ability_weight" => self.ability_weight = f()?,
            "layers" => self.layers = u()?,
            "alpha" => self.weights.alpha = f()?,
            "beta" => self.weights.beta = f()?,
            "gamma" => self.weights.gamma = f()?,
            "basis" => self.basis = value.parse().map_err(|_| bad())?,
            "order" => self.order = value.parse()?,
            "w" => self.w = f()?,
            "cap" => self.cap = value.parse().map_err(|_| bad())?,
            "passes" => self.passes = value.parse().map_err(|_| bad())?,
            "rank_convention" => self.convention = value.parse().map_err(|_| bad())?,
            "payoff_model" => self.payoff = value.parse().map_err(|_| bad())?,
            "seed" => self.seed = value.parse().map_err(|_| bad())?,
            "reward_mean" => self.reward.mean = f()?,
            "reward_std" => self.reward.std = f()?,
            "ability_mean" => self.ability.mean = f()?,
            "ability_std" => self.ability.std = f()?,
            _ => return Err(HarnessError::InvalidConfig(format!("unknown key {key:?}"))),
        }
        Ok(())
    }
}

/// Splits `key = value` lines, skipping blanks and `#` comments.
pub fn parse_kv(text: &str) -> Result<Vec<(usize, String, String)>, HarnessError> {
    let mut out = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| HarnessError::Parse {
            line: i + 1,
            message: "expected key = value".into(),
        })?;
        out.push((i + 1, k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

impl FromStr for RunConfig {
    type Err = HarnessError;

    /// Starts from the defaults and applies each line.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut cfg = RunConfig::default();
        for (line, k, v) in parse_kv(text)? {
            cfg.set(&k, &v).map_err(|e| HarnessError::Parse {
                line,
                message: e.to_string(),
            })?;
        }
        cfg.reward = TruncatedNormal::new(cfg.reward.mean, cfg.reward.std)?;
        cfg.ability = TruncatedNormal::new(cfg.ability.mean, cfg.ability.std)?;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn echo_round_trips() {
        let mut cfg = RunConfig::default();
        cfg.w = 0.3;
        cfg.cap = Cap::Unlimited;
        cfg.order = OrderKind::Xcoord;
        cfg.worker_k = Some(12);
        cfg.weights.gamma = 0.25;
        let back: RunConfig = cfg.to_kv().parse().unwrap();
        assert_eq!(back, cfg);
        assert_eq!("".parse::<RunConfig>().unwrap(), RunConfig::default());
    }

    #[test]
    fn rejects_bad_lines() {
        assert!(matches!(
            "layers = 2\nbogus = 1".parse::<RunConfig>(),
            Err(HarnessError::Parse { line: 2, .. })
        ));
        assert!("w = 1.5".parse::<RunConfig>().is_err());
        assert!("layers = 0".parse::<RunConfig>().is_err());
        assert!("passes = 0".parse::<RunConfig>().is_err());
        assert_eq!("passes = 3".parse::<RunConfig>().unwrap().passes, 3);
        assert!("no equals sign".parse::<RunConfig>().is_err());
        let cfg: RunConfig = "# comment\n order = random  # trailing\n".parse().unwrap();
        assert_eq!(cfg.order, OrderKind::Random);
    }

    #[test]
    fn nonlmt_is_uncapped() {
        let cfg = RunConfig {
            order: OrderKind::NonLMT,
            ..RunConfig::default()
        };
        assert_eq!(cfg.effective_cap(), Cap::Unlimited);
        assert_eq!(RunConfig::default().effective_cap(), Cap::Limited(15));
    }
}
