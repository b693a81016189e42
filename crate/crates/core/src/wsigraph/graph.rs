use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use super::{knn_graph, normalize_adjacency, raw_adjacency, Adjacency};
use crate::binio;
use crate::error::{contract, Error, Result};
use crate::ssl::{FeatureStore, Tap};
use crate::tensor::Tensor;

pub const GRAPH_VERSION: u32 = 1;
const MAGIC: &[u8; 8] = b"SGGRAPH\0";

/// One slide as a graph over its patches.
///
/// File layout, little-endian: magic `SGGRAPH\0`, `u32` version, strings
/// (u32 length + UTF-8) `config_hash`, `slide_id`, `tap`, then `u64` n,
/// `u32` d, `u32` k, `u32` label, `2n × f64` centroids `(x, y)`, `n·d × f64`
/// features row-major, `u64` edge count, and `(u32 u, u32 v)` pairs with
/// `u < v` in ascending order.
#[derive(Clone, Debug, PartialEq)]
pub struct WsiGraph {
    pub centroids: Vec<(f64, f64)>,
    /// `[n, d]`.
    pub features: Tensor,
    pub edges: Vec<(usize, usize)>,
    pub label: usize,
    pub slide_id: String,
    pub tap: Tap,
    pub k: usize,
    pub config_hash: String,
}

impl WsiGraph {
    /// Builds the k-NN graph over `centroids`; feature row `i` belongs to
    /// centroid `i`.
    pub fn from_parts(
        features: Tensor,
        centroids: Vec<(f64, f64)>,
        k: usize,
        label: usize,
        slide_id: &str,
        tap: Tap,
    ) -> Result<Self> {
        if centroids.is_empty() {
            return Err(Error::EmptySlide(slide_id.to_string()));
        }
        let (rows, _) = features.as_matrix_dims()?;
        if features.rank() != 2 || rows != centroids.len() {
            return Err(contract(format!(
                "{} patches but {rows} feature rows for slide {slide_id}",
                centroids.len()
            )));
        }
        let edges = knn_graph(&centroids, k)?;
        Ok(Self {
            centroids,
            features,
            edges,
            label,
            slide_id: slide_id.to_string(),
            tap,
            k,
            config_hash: String::new(),
        })
    }

    pub fn with_config_hash(mut self, hash: &str) -> Self {
        self.config_hash = hash.to_string();
        self
    }

    pub fn node_count(&self) -> usize {
        self.centroids.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    pub fn degrees(&self) -> Vec<usize> {
        let mut deg = vec![0; self.node_count()];
        for &(u, v) in &self.edges {
            deg[u] += 1;
            deg[v] += 1;
        }
        deg
    }

    pub fn normalized_adjacency(&self, self_loops: bool) -> Result<Adjacency> {
        normalize_adjacency(&self.edges, self.node_count(), self_loops)
    }

    pub fn raw_adjacency(&self) -> Result<Adjacency> {
        raw_adjacency(&self.edges, self.node_count())
    }

    /// Relabels nodes so that old node `i` becomes node `perm[i]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.node_count();
        let mut seen = vec![false; n];
        if perm.len() != n || perm.iter().any(|&p| p >= n || std::mem::replace(&mut seen[p], true)) {
            return Err(contract(format!("not a permutation of {n} nodes")));
        }
        let d = self.feature_dim();
        let mut centroids = vec![(0.0, 0.0); n];
        let mut data = vec![0.0; n * d];
        for (old, &new) in perm.iter().enumerate() {
            centroids[new] = self.centroids[old];
            data[new * d..(new + 1) * d].copy_from_slice(self.features.row_slice(old));
        }
        let mut edges: Vec<(usize, usize)> = self
            .edges
            .iter()
            .map(|&(u, v)| (perm[u].min(perm[v]), perm[u].max(perm[v])))
            .collect();
        edges.sort_unstable();
        Ok(Self {
            centroids,
            features: Tensor::new(vec![n, d], data)?,
            edges,
            ..self.clone()
        })
    }

    fn check(&self) -> Result<()> {
        let n = self.node_count();
        if n == 0 {
            return Err(Error::EmptySlide(self.slide_id.clone()));
        }
        if self.features.rank() != 2 || self.features.rows() != n {
            return Err(contract(format!("{n} centroids but features {:?}", self.features.shape())));
        }
        for w in self.edges.windows(2) {
            if w[0] >= w[1] {
                return Err(contract("edges must be strictly ascending"));
            }
        }
        if let Some(&(u, v)) = self.edges.iter().find(|&&(u, v)| u >= v || v >= n) {
            return Err(contract(format!("invalid edge ({u}, {v}) for {n} nodes")));
        }
        Ok(())
    }

    pub fn write_to<W: Write>(&self, w: &mut W) -> Result<()> {
        self.check()?;
        binio::write_header(w, MAGIC, GRAPH_VERSION)?;
        binio::write_str(w, &self.config_hash)?;
        binio::write_str(w, &self.slide_id)?;
        binio::write_str(w, self.tap.as_str())?;
        binio::write_u64(w, self.node_count() as u64)?;
        binio::write_u32(w, self.feature_dim() as u32)?;
        binio::write_u32(w, self.k as u32)?;
        binio::write_u32(w, self.label as u32)?;
        for &(x, y) in &self.centroids {
            binio::write_f64(w, x)?;
            binio::write_f64(w, y)?;
        }
        binio::write_f64s(w, self.features.data())?;
        binio::write_u64(w, self.edges.len() as u64)?;
        for &(u, v) in &self.edges {
            binio::write_u32(w, u as u32)?;
            binio::write_u32(w, v as u32)?;
        }
        Ok(())
    }

    pub fn read_from<R: Read>(r: &mut R) -> Result<Self> {
        let bad = |detail: String| Error::Format { what: "graph", detail };
        binio::read_header(r, MAGIC, GRAPH_VERSION, "graph")?;
        let config_hash = binio::read_str(r, "graph")?;
        let slide_id = binio::read_str(r, "graph")?;
        let tap: Tap = binio::read_str(r, "graph")?
            .parse()
            .map_err(|e: Error| bad(e.to_string()))?;
        let n = binio::read_u64(r)? as usize;
        let d = binio::read_u32(r)? as usize;
        let k = binio::read_u32(r)? as usize;
        let label = binio::read_u32(r)? as usize;
        if n == 0 || d == 0 {
            return Err(bad(format!("empty graph (n = {n}, d = {d})")));
        }
        let flat = binio::read_f64s(r, 2 * n)?;
        let centroids = flat.chunks(2).map(|c| (c[0], c[1])).collect();
        let features = Tensor::new(vec![n, d], binio::read_f64s(r, n * d)?)?;
        let m = binio::read_u64(r)? as usize;
        let mut edges = Vec::with_capacity(m.min(1 << 20));
        for _ in 0..m {
            let u = binio::read_u32(r)? as usize;
            let v = binio::read_u32(r)? as usize;
            edges.push((u, v));
        }
        binio::expect_eof(r, "graph")?;
        let g = Self {
            centroids,
            features,
            edges,
            label,
            slide_id,
            tap,
            k,
            config_hash,
        };
        g.check().map_err(|e| bad(e.to_string()))?;
        Ok(g)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        self.write_to(&mut w)?;
        w.flush()?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::read_from(&mut BufReader::new(File::open(path)?))
    }
}

/// Graph for one slide from its feature store. The store's config hash is
/// carried over.
pub fn build_slide_graph(store: &FeatureStore, k: usize, label: usize) -> Result<WsiGraph> {
    if store.is_empty() {
        return Err(Error::EmptySlide(store.slide_id.clone()));
    }
    Ok(
        WsiGraph::from_parts(store.matrix()?, store.centroids(), k, label, &store.slide_id, store.tap)?
            .with_config_hash(&store.config_hash),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid2x2() -> WsiGraph {
        let c = vec![(16.0, 16.0), (48.0, 16.0), (16.0, 48.0), (48.0, 48.0)];
        let f = Tensor::matrix(4, 2, (0..8).map(f64::from).collect()).unwrap();
        WsiGraph::from_parts(f, c, 2, 1, "s", Tap::Small).unwrap()
    }

    #[test]
    fn grid_nodes_have_two_edges() {
        assert!(grid2x2().degrees().iter().all(|&d| d >= 2));
    }

    #[test]
    fn count_mismatch_and_empty() {
        let c = vec![(0.0, 0.0); 4];
        let f = Tensor::zeros(&[3, 2]);
        assert!(matches!(
            WsiGraph::from_parts(f, c, 2, 0, "s", Tap::Small),
            Err(Error::Contract(_))
        ));
        let store = FeatureStore {
            config_hash: String::new(),
            slide_id: "blank".into(),
            tap: Tap::Large,
            dim: 4,
            records: vec![],
        };
        assert!(matches!(build_slide_graph(&store, 8, 0), Err(Error::EmptySlide(_))));
    }

    #[test]
    fn file_round_trip_is_bit_exact() {
        let g = grid2x2().with_config_hash("deadbeef");
        let mut buf = Vec::new();
        g.write_to(&mut buf).unwrap();
        let back = WsiGraph::read_from(&mut buf.as_slice()).unwrap();
        assert_eq!(back, g);
        let mut again = Vec::new();
        back.write_to(&mut again).unwrap();
        assert_eq!(again, buf);
        buf.pop();
        assert!(WsiGraph::read_from(&mut buf.as_slice()).is_err());
    }

    #[test]
    fn permutation_round_trip() {
        let g = grid2x2();
        let p = g.permuted(&[2, 0, 3, 1]).unwrap();
        let inv = p.permuted(&[1, 3, 0, 2]).unwrap();
        assert_eq!(inv, g);
        assert!(g.permuted(&[0, 0, 1, 2]).is_err());
    }
}
