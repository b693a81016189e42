use std::fmt;
use std::str::FromStr;

use crate::error::{contract, Error, Result};
use crate::nn::Mlp;
use crate::slideio::seeded_rng;
use crate::tensor::{softmax_cross_entropy, Checkpoint, ParamSet, Tape, Tensor, Var};
use crate::wsigraph::WsiGraph;

use super::layers::{basic_gnn_layer, gcn_layer};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LayerKind {
    /// `relu(Â H W)` over the normalised adjacency.
    Gcn,
    /// `relu(A H W_neigh + H W_self + b)` over the raw adjacency.
    Basic,
}

impl LayerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            LayerKind::Gcn => "gcn",
            LayerKind::Basic => "basic",
        }
    }
}

impl fmt::Display for LayerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for LayerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "gcn" => Ok(LayerKind::Gcn),
            "basic" => Ok(LayerKind::Basic),
            other => Err(contract(format!("unknown layer kind {other:?} (expected gcn or basic)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GcnConfig {
    pub input_dim: usize,
    pub widths: Vec<usize>,
    /// One entry per width.
    pub kinds: Vec<LayerKind>,
    pub head: Vec<usize>,
    pub classes: usize,
    /// Add self-loops to the normalised adjacency of `gcn` layers.
    pub self_loops: bool,
}

impl GcnConfig {
    /// Two 128-wide GCN layers and a 64-wide head.
    pub fn new(input_dim: usize, classes: usize) -> Self {
        Self {
            input_dim,
            widths: vec![128, 128],
            kinds: vec![LayerKind::Gcn; 2],
            head: vec![64],
            classes,
            self_loops: true,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.widths.contains(&0) || self.head.contains(&0) {
            return Err(contract(format!("GCN widths must be positive: {self:?}")));
        }
        if self.kinds.len() != self.widths.len() {
            return Err(contract(format!(
                "{} layer kinds for {} layers",
                self.kinds.len(),
                self.widths.len()
            )));
        }
        if self.classes < 2 {
            return Err(contract(format!("need at least 2 classes, got {}", self.classes)));
        }
        Ok(())
    }

    fn pooled_dim(&self) -> usize {
        *self.widths.last().unwrap_or(&self.input_dim)
    }

    fn head_mlp(&self) -> Mlp {
        let mut dims = vec![self.pooled_dim()];
        dims.extend(&self.head);
        dims.push(self.classes);
        Mlp::new(dims)
    }

    fn meta(&self) -> Vec<(String, String)> {
        let join = |v: Vec<String>| v.join(",");
        vec![
            ("gcn.input_dim".into(), self.input_dim.to_string()),
            ("gcn.widths".into(), join(self.widths.iter().map(ToString::to_string).collect())),
            ("gcn.kinds".into(), join(self.kinds.iter().map(ToString::to_string).collect())),
            ("gcn.head".into(), join(self.head.iter().map(ToString::to_string).collect())),
            ("gcn.classes".into(), self.classes.to_string()),
            ("gcn.self_loops".into(), self.self_loops.to_string()),
        ]
    }

    fn from_meta(ck: &Checkpoint) -> Result<Self> {
        fn parse<T: FromStr>(ck: &Checkpoint, key: &str) -> Result<T> {
            ck.require_meta(key)?.parse().map_err(|_| Error::Format {
                what: "checkpoint",
                detail: format!("bad value for {key}"),
            })
        }
        fn list<T: FromStr>(ck: &Checkpoint, key: &str) -> Result<Vec<T>> {
            let raw = ck.require_meta(key)?;
            if raw.is_empty() {
                return Ok(Vec::new());
            }
            raw.split(',')
                .map(|s| {
                    s.parse().map_err(|_| Error::Format {
                        what: "checkpoint",
                        detail: format!("bad list entry {s:?} in {key}"),
                    })
                })
                .collect()
        }
        Ok(Self {
            input_dim: parse(ck, "gcn.input_dim")?,
            widths: list(ck, "gcn.widths")?,
            kinds: list(ck, "gcn.kinds")?,
            head: list(ck, "gcn.head")?,
            classes: parse(ck, "gcn.classes")?,
            self_loops: parse(ck, "gcn.self_loops")?,
        })
    }
}

/// GCN parameters in a fixed order: per layer `layer{i}.weight` (gcn) or
/// `layer{i}.self`, `layer{i}.neigh`, `layer{i}.bias` (basic), then the head.
#[derive(Clone, Debug, PartialEq)]
pub struct GcnModel {
    pub config: GcnConfig,
    pub params: ParamSet,
}

impl GcnModel {
    pub fn new(config: GcnConfig, seed: u64) -> Result<Self> {
        config.validate()?;
        let mut rng = seeded_rng(seed);
        let mut params = ParamSet::new();
        let mut input = config.input_dim;
        for (i, (&width, kind)) in config.widths.iter().zip(&config.kinds).enumerate() {
            let std = (2.0 / input as f64).sqrt();
            match kind {
                LayerKind::Gcn => params.push(format!("layer{i}.weight"), Tensor::randn(&[input, width], std, &mut rng)),
                LayerKind::Basic => {
                    params.push(format!("layer{i}.self"), Tensor::randn(&[input, width], std, &mut rng));
                    params.push(format!("layer{i}.neigh"), Tensor::randn(&[input, width], std, &mut rng));
                    params.push(format!("layer{i}.bias"), Tensor::zeros(&[1, width]));
                }
            }
            input = width;
        }
        config.head_mlp().init(&mut params, "head", &mut rng);
        Ok(Self { config, params })
    }

    fn check_graph(&self, graph: &WsiGraph) -> Result<()> {
        if graph.feature_dim() != self.config.input_dim {
            return Err(contract(format!(
                "graph {} has {}-dim features, model expects {}",
                graph.slide_id,
                graph.feature_dim(),
                self.config.input_dim
            )));
        }
        Ok(())
    }

    /// Class logits `[1, C]` on the tape; `vars` are the parameters
    /// registered in [`ParamSet`] order.
    pub fn forward(&self, tape: &mut Tape, vars: &[Var], graph: &WsiGraph) -> Result<Var> {
        self.check_graph(graph)?;
        let uses = |k| self.config.kinds.contains(&k);
        let norm = if uses(LayerKind::Gcn) {
            Some(graph.normalized_adjacency(self.config.self_loops)?)
        } else {
            None
        };
        let raw = if uses(LayerKind::Basic) {
            Some(graph.raw_adjacency()?)
        } else {
            None
        };
        let mut h = tape.constant(graph.features.clone());
        let mut p = 0;
        for kind in &self.config.kinds {
            h = match kind {
                LayerKind::Gcn => {
                    p += 1;
                    gcn_layer(tape, h, norm.as_ref().expect("built above"), vars[p - 1])?
                }
                LayerKind::Basic => {
                    p += 3;
                    let adj = raw.as_ref().expect("built above");
                    basic_gnn_layer(tape, h, adj, vars[p - 3], vars[p - 2], vars[p - 1])?
                }
            };
        }
        let pooled = tape.mean(h, Some(0))?;
        self.config.head_mlp().forward(tape, &vars[p..], pooled, false)
    }

    /// Softmax class probabilities for one graph.
    pub fn predict(&self, graph: &WsiGraph) -> Result<Vec<f64>> {
        let mut tape = Tape::new();
        let vars = self.params.register_frozen(&mut tape);
        let logits = self.forward(&mut tape, &vars, graph)?;
        Ok(softmax_probs(tape.value(logits).data()))
    }

    /// Cross-entropy of one graph against `label`.
    pub fn loss(&self, graph: &WsiGraph, label: usize) -> Result<f64> {
        let mut tape = Tape::new();
        let vars = self.params.register_frozen(&mut tape);
        let logits = self.forward(&mut tape, &vars, graph)?;
        Ok(softmax_cross_entropy(tape.value(logits), label)?.0)
    }

    pub fn to_checkpoint(&self) -> Checkpoint {
        let mut ck = Checkpoint::new(self.params.clone()).with_meta("kind", "gcn");
        ck.meta.extend(self.config.meta());
        ck
    }

    pub fn from_checkpoint(ck: &Checkpoint) -> Result<Self> {
        if ck.meta("kind") != Some("gcn") {
            return Err(Error::Format {
                what: "checkpoint",
                detail: format!("expected a gcn checkpoint, found kind {:?}", ck.meta("kind")),
            });
        }
        let config = GcnConfig::from_meta(ck)?;
        GcnModel::new(config.clone(), 0)?.params.check_compatible(&ck.params)?;
        Ok(Self {
            config,
            params: ck.params.clone(),
        })
    }
}

/// Numerically stable softmax.
pub fn softmax_probs(logits: &[f64]) -> Vec<f64> {
    let max = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|l| (l - max).exp()).collect();
    let z: f64 = exps.iter().sum();
    exps.into_iter().map(|e| e / z).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ssl::Tap;

    fn graph(n: usize, d: usize) -> WsiGraph {
        let c = (0..n).map(|i| ((i % 5) as f64 * 32.0, (i / 5) as f64 * 32.0)).collect();
        let f = Tensor::randn(&[n, d], 1.0, &mut seeded_rng(n as u64));
        WsiGraph::from_parts(f, c, 3, 0, "g", Tap::Small).unwrap()
    }

    #[test]
    fn probabilities_are_a_distribution() {
        let mut cfg = GcnConfig::new(6, 3);
        cfg.kinds = vec![LayerKind::Gcn, LayerKind::Basic];
        let m = GcnModel::new(cfg, 1).unwrap();
        for n in [1, 2, 9] {
            let p = m.predict(&graph(n, 6)).unwrap();
            assert_eq!(p.len(), 3);
            assert!((p.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(p.iter().all(|&x| x > 0.0 && x < 1.0));
        }
    }

    #[test]
    fn dim_mismatch_and_bad_config() {
        let m = GcnModel::new(GcnConfig::new(6, 3), 1).unwrap();
        assert!(matches!(m.predict(&graph(4, 5)), Err(Error::Contract(_))));
        assert!(GcnModel::new(GcnConfig::new(6, 1), 1).is_err());
        let mut cfg = GcnConfig::new(6, 3);
        cfg.kinds.pop();
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn checkpoint_round_trip() {
        let mut cfg = GcnConfig::new(6, 4);
        cfg.kinds = vec![LayerKind::Basic, LayerKind::Gcn];
        cfg.self_loops = false;
        let m = GcnModel::new(cfg, 2).unwrap();
        let back = GcnModel::from_checkpoint(&m.to_checkpoint()).unwrap();
        assert_eq!(back, m);
    }
}
