use super::GcnModel;
use crate::error::{contract, Result};
use crate::wsigraph::WsiGraph;

/// Mean of the members' class probabilities; `graphs[i]` is the variant of
/// the slide that `models[i]` consumes.
pub fn ensemble_predict(models: &[&GcnModel], graphs: &[&WsiGraph]) -> Result<Vec<f64>> {
    if models.is_empty() {
        return Err(contract("empty ensemble"));
    }
    if models.len() != graphs.len() {
        return Err(contract(format!("{} models but {} graphs", models.len(), graphs.len())));
    }
    let classes = models[0].config.classes;
    if let Some(m) = models.iter().find(|m| m.config.classes != classes) {
        return Err(contract(format!(
            "ensemble members disagree on class count: {classes} vs {}",
            m.config.classes
        )));
    }
    let mut mean = vec![0.0; classes];
    for (m, g) in models.iter().zip(graphs) {
        for (acc, p) in mean.iter_mut().zip(m.predict(g)?) {
            *acc += p;
        }
    }
    let k = models.len() as f64;
    Ok(mean.into_iter().map(|p| p / k).collect())
}

/// Index of the largest probability; ties go to the lower class.
pub fn argmax(p: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in p.iter().enumerate() {
        if v > p[best] {
            best = i;
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gcn::GcnConfig;
    use crate::ssl::Tap;
    use crate::tensor::Tensor;

    fn one_node() -> WsiGraph {
        WsiGraph::from_parts(Tensor::row(vec![1.0, 2.0]).unwrap(), vec![(0.0, 0.0)], 8, 0, "x", Tap::Small).unwrap()
    }

    #[test]
    fn identical_members_match_single_model() {
        let m = GcnModel::new(GcnConfig::new(2, 3), 4).unwrap();
        let g = one_node();
        let single = m.predict(&g).unwrap();
        let ens = ensemble_predict(&[&m, &m], &[&g, &g]).unwrap();
        for (a, b) in single.iter().zip(&ens) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn mismatches_are_errors() {
        let a = GcnModel::new(GcnConfig::new(2, 3), 4).unwrap();
        let b = GcnModel::new(GcnConfig::new(2, 4), 4).unwrap();
        let g = one_node();
        assert!(ensemble_predict(&[&a, &b], &[&g, &g]).is_err());
        assert!(ensemble_predict(&[&a], &[&g, &g]).is_err());
    }

    #[test]
    fn argmax_prefers_lower_index_on_ties() {
        assert_eq!(argmax(&[0.5, 0.5]), 0);
        assert_eq!(argmax(&[0.1, 0.6, 0.3]), 1);
    }
}
