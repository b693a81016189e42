use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;

use super::plots::{bar_chart_svg, line_chart_svg, Series};
use super::{
    gcn_name, hash_from_comments, require, streams, Layout, Pipeline, BASELINE, ENSEMBLE, HASH_PREFIX, PRETRAIN,
};
use crate::error::{contract, Error, Result};
use crate::gcn::{argmax, ensemble_predict, train, GcnModel};
use crate::metrics::{EpochRecord, MetricsLog, MetricsReport, ReportRow};
use crate::mil::{select_tiles, train_baseline, BaselineModel, TileBag};
use crate::slideio::pnm::{decode_mask, encode_mask, read_ppm, write_ppm};
use crate::slideio::{
    derive_seed, extract_patches, generate_synthetic_slide, seeded_rng, segment_tissue, Manifest, ManifestEntry,
    PatchSet, RasterImage, Split, SyntheticSlideSpec,
};
use crate::ssl::{pretrain, Encoder, FeatureStore, Tap};
use crate::tensor::Checkpoint;
use crate::wsigraph::{build_slide_graph, WsiGraph};

const HASH_META: &str = "config_hash";

fn create_parent(path: &Path) -> Result<()> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir)?;
    }
    Ok(())
}

fn checkpoint_hash(path: &Path) -> Result<String> {
    Ok(Checkpoint::load(path)?.require_meta(HASH_META)?.to_string())
}

fn ppm_hash(path: &Path) -> Result<String> {
    let (_, comments) = read_ppm(path)?;
    Ok(hash_from_comments(&comments).unwrap_or_default())
}

fn uniform(classes: usize) -> Vec<f64> {
    vec![1.0 / classes as f64; classes]
}

impl Pipeline {
    fn seed(&self, stream: u64) -> u64 {
        derive_seed(self.config.seed, stream)
    }

    fn hash_comments(&self) -> Vec<String> {
        vec![format!("{HASH_PREFIX}{}", self.hash)]
    }

    fn load_manifest(&self, strict: bool) -> Result<Manifest> {
        let path = self.layout.manifest();
        require(&path)?;
        let m = Manifest::load(&path)?;
        self.check_hash(&path, &hash_from_comments(&m.comments).unwrap_or_default(), strict)?;
        if let Some(e) = m.entries.iter().find(|e| e.label >= self.config.data.classes) {
            return Err(Error::Config(format!(
                "slide {} has label {} but the config declares {} classes",
                e.slide_id(),
                e.label,
                self.config.data.classes
            )));
        }
        Ok(m)
    }

    fn slide_path(&self, e: &ManifestEntry) -> PathBuf {
        self.layout.root().join(&e.path)
    }

    fn load_patches(&self, id: &str, strict: bool) -> Result<PatchSet> {
        let path = self.layout.patches(id);
        require(&path)?;
        let set = PatchSet::load(&path)?;
        self.check_hash(&path, &set.config_hash, strict)?;
        Ok(set)
    }

    fn load_checkpoint(&self, path: &Path, strict: bool) -> Result<Checkpoint> {
        require(path)?;
        let ck = Checkpoint::load(path)?;
        self.check_hash(path, ck.meta(HASH_META).unwrap_or_default(), strict)?;
        Ok(ck)
    }

    fn load_graph(&self, tap: Tap, id: &str, strict: bool) -> Result<WsiGraph> {
        let path = self.layout.graph(tap, id);
        require(&path)?;
        let g = WsiGraph::load(&path)?;
        self.check_hash(&path, &g.config_hash, strict)?;
        Ok(g)
    }

    fn save_log(&self, name: &str, history: &[EpochRecord]) -> Result<()> {
        let path = self.layout.log(name);
        create_parent(&path)?;
        MetricsLog {
            config_hash: self.hash.clone(),
            records: history.to_vec(),
        }
        .save(&path)
    }

    fn save_checkpoint(&self, ck: Checkpoint, path: &Path) -> Result<()> {
        create_parent(path)?;
        ck.with_meta(HASH_META, self.hash.clone()).save(path)
    }

    /// Labels cycle through the classes; each class is split into test and
    /// train by a seeded shuffle.
    pub(super) fn synth(&self) -> Result<()> {
        let data = &self.config.data;
        let mut split = vec![Split::Train; data.slides];
        let mut rng = seeded_rng(self.seed(streams::SPLIT));
        for class in 0..data.classes {
            let mut members: Vec<usize> = (class..data.slides).step_by(data.classes).collect();
            members.shuffle(&mut rng);
            let n_test = (data.test_fraction * members.len() as f64).round() as usize;
            for &i in &members[..n_test] {
                split[i] = Split::Test;
            }
        }
        let synth_seed = self.seed(streams::SYNTH);
        let mut manifest = Manifest {
            comments: self.hash_comments(),
            entries: Vec::with_capacity(data.slides),
        };
        std::fs::create_dir_all(self.layout.root().join("slides"))?;
        for (i, &s) in split.iter().enumerate() {
            let label = i % data.classes;
            let rel = Layout::slide_rel(i);
            let path = self.layout.root().join(&rel);
            if !self.up_to_date(&path, ppm_hash) {
                let spec = SyntheticSlideSpec::new(label, derive_seed(synth_seed, i as u64))
                    .with_size(data.slide_size, data.slide_size);
                let (image, _) = generate_synthetic_slide(&spec)?;
                let mut comments = self.hash_comments();
                comments.push(format!("label: {label}"));
                write_ppm(&path, &image, &comments)?;
            }
            manifest.entries.push(ManifestEntry {
                path: rel,
                label,
                split: Some(s),
            });
        }
        manifest.save(&self.layout.manifest())?;
        log::info!("synthesised {} slides", data.slides);
        Ok(())
    }

    pub(super) fn segment(&self) -> Result<()> {
        let manifest = self.load_manifest(false)?;
        let params = self.config.segment_params();
        for e in &manifest.entries {
            let id = e.slide_id();
            let out = self.layout.mask(&id);
            let mask_hash = |p: &Path| -> Result<String> {
                let (_, c) = decode_mask(&std::fs::read(p)?)?;
                Ok(hash_from_comments(&c).unwrap_or_default())
            };
            if self.up_to_date(&out, mask_hash) {
                continue;
            }
            let slide = self.slide_path(e);
            require(&slide)?;
            let (image, comments) = read_ppm(&slide)?;
            self.check_hash(&slide, &hash_from_comments(&comments).unwrap_or_default(), false)?;
            let mask = segment_tissue(&image, &params);
            create_parent(&out)?;
            std::fs::write(&out, encode_mask(&mask, &self.hash_comments()))?;
        }
        Ok(())
    }

    pub(super) fn patch(&self) -> Result<()> {
        let manifest = self.load_manifest(false)?;
        let p = &self.config.patch;
        for e in &manifest.entries {
            let id = e.slide_id();
            let out = self.layout.patches(&id);
            if self.up_to_date(&out, |path| Ok(PatchSet::load(path)?.config_hash)) {
                continue;
            }
            let slide = self.slide_path(e);
            require(&slide)?;
            let (image, _) = read_ppm(&slide)?;
            let mask_path = self.layout.mask(&id);
            require(&mask_path)?;
            let (mask, comments) = decode_mask(&std::fs::read(&mask_path)?)?;
            self.check_hash(&mask_path, &hash_from_comments(&comments).unwrap_or_default(), false)?;
            let patches = extract_patches(&image, &mask, p.size, p.min_tissue_fraction)?;
            if patches.is_empty() {
                log::warn!("slide {id} has no tissue patches");
            }
            create_parent(&out)?;
            PatchSet {
                config_hash: self.hash.clone(),
                slide_id: id,
                patch_size: p.size,
                patches,
            }
            .save(&out)?;
        }
        Ok(())
    }

    /// Pretrains on training-split patches only.
    pub(super) fn pretrain(&self) -> Result<()> {
        let out = self.layout.encoder();
        if self.up_to_date(&out, checkpoint_hash) {
            return Ok(());
        }
        let manifest = self.load_manifest(false)?;
        let sets = manifest
            .split(Split::Train)
            .map(|e| self.load_patches(&e.slide_id(), false))
            .collect::<Result<Vec<_>>>()?;
        let images: Vec<&RasterImage> = sets.iter().flat_map(|s| s.patches.iter().map(|p| &p.pixels)).collect();
        if images.is_empty() {
            return Err(contract("no training patches to pretrain on"));
        }
        let outcome = pretrain(
            &images,
            self.config.encoder_config(),
            self.config.augmentation(),
            self.config.pretrain_config(),
            self.seed(streams::PRETRAIN),
        )?;
        log::info!(
            "pretrained on {} of {} patches in {} steps",
            outcome.patches_used,
            images.len(),
            outcome.steps
        );
        self.save_checkpoint(outcome.encoder.to_checkpoint(), &out)?;
        self.save_log(PRETRAIN, &outcome.history)
    }

    pub(super) fn featurize(&self) -> Result<()> {
        let manifest = self.load_manifest(false)?;
        let encoder = Encoder::from_checkpoint(&self.load_checkpoint(&self.layout.encoder(), false)?)?;
        for e in &manifest.entries {
            let id = e.slide_id();
            let outs = Tap::ALL.map(|tap| self.layout.features(tap, &id));
            if outs
                .iter()
                .all(|o| self.up_to_date(o, |p| Ok(FeatureStore::load(p)?.config_hash)))
            {
                continue;
            }
            let set = self.load_patches(&id, false)?;
            for (tap, out) in Tap::ALL.into_iter().zip(&outs) {
                let store = FeatureStore::from_patches(&encoder, &set.patches, tap, &id, &self.hash)?;
                create_parent(out)?;
                store.save(out)?;
            }
        }
        Ok(())
    }

    pub(super) fn graph(&self) -> Result<()> {
        let manifest = self.load_manifest(false)?;
        for e in &manifest.entries {
            let id = e.slide_id();
            for tap in Tap::ALL {
                let out = self.layout.graph(tap, &id);
                if self.up_to_date(&out, |p| Ok(WsiGraph::load(p)?.config_hash)) {
                    continue;
                }
                let path = self.layout.features(tap, &id);
                require(&path)?;
                let store = FeatureStore::load(&path)?;
                self.check_hash(&path, &store.config_hash, false)?;
                if store.is_empty() {
                    log::warn!("slide {id} has no patches; no {tap} graph written");
                    continue;
                }
                let graph = build_slide_graph(&store, self.config.graph.k, e.label)?.with_config_hash(&self.hash);
                create_parent(&out)?;
                graph.save(&out)?;
            }
        }
        Ok(())
    }

    /// Training graphs for `tap`; slides without patches have none.
    fn train_graphs(&self, manifest: &Manifest, tap: Tap) -> Result<Vec<WsiGraph>> {
        let mut graphs = Vec::new();
        for e in manifest.split(Split::Train) {
            let id = e.slide_id();
            // A missing graph is only legitimate for a slide without patches.
            if self.layout.graph(tap, &id).exists() || !self.load_patches(&id, false)?.patches.is_empty() {
                graphs.push(self.load_graph(tap, &id, false)?);
            }
        }
        Ok(graphs)
    }

    pub(super) fn train_gcn(&self) -> Result<()> {
        let manifest = self.load_manifest(false)?;
        for (tap, stream) in [(Tap::Small, streams::GCN_SMALL), (Tap::Large, streams::GCN_LARGE)] {
            let name = gcn_name(tap);
            let out = self.layout.model(&name);
            if self.up_to_date(&out, checkpoint_hash) {
                continue;
            }
            let graphs = self.train_graphs(&manifest, tap)?;
            let first = graphs.first().ok_or_else(|| contract("no training graphs"))?;
            let refs: Vec<&WsiGraph> = graphs.iter().collect();
            let outcome = train(
                &refs,
                self.config.gcn_config(first.feature_dim()),
                &self.config.gcn_train(self.seed(stream)),
            )?;
            if let Some(last) = outcome.history.last() {
                log::info!("{name}: final epoch loss {:.4}", last.mean_loss);
            }
            self.save_checkpoint(outcome.model.to_checkpoint(), &out)?;
            self.save_log(&name, &outcome.history)?;
        }
        Ok(())
    }

    fn bag(&self, e: &ManifestEntry, strict: bool) -> Result<TileBag> {
        let id = e.slide_id();
        let set = self.load_patches(&id, strict)?;
        select_tiles(&set.patches, self.config.baseline.bag_size, set.patch_size, &id, e.label)
    }

    pub(super) fn train_baseline(&self) -> Result<()> {
        let out = self.layout.model(BASELINE);
        if self.up_to_date(&out, checkpoint_hash) {
            return Ok(());
        }
        let manifest = self.load_manifest(false)?;
        let bags = manifest
            .split(Split::Train)
            .map(|e| self.bag(e, false))
            .collect::<Result<Vec<_>>>()?;
        let refs: Vec<&TileBag> = bags.iter().collect();
        let outcome = train_baseline(
            &refs,
            self.config.baseline_config(),
            &self.config.baseline_train(self.seed(streams::BASELINE)),
        )?;
        self.save_checkpoint(outcome.model.to_checkpoint(), &out)?;
        self.save_log(BASELINE, &outcome.history)
    }

    fn check_classes(&self, name: &str, classes: usize) -> Result<()> {
        let declared = self.config.data.classes;
        if classes != declared {
            return Err(Error::Config(format!(
                "model {name} has {classes} classes but the config declares {declared}"
            )));
        }
        Ok(())
    }

    /// Scores every test slide with both GCNs, their ensemble and the
    /// baseline. Inputs stamped with another config hash are refused unless
    /// forced.
    pub(super) fn evaluate(&self) -> Result<()> {
        // Class counts are checked before hashes: a changed class count also
        // changes the hash, and the count is the more useful diagnostic.
        let classes = self.config.data.classes;
        let mut checkpoints = Vec::new();
        let mut gcns = Vec::new();
        for tap in Tap::ALL {
            let name = gcn_name(tap);
            let path = self.layout.model(&name);
            require(&path)?;
            let ck = Checkpoint::load(&path)?;
            let model = GcnModel::from_checkpoint(&ck)?;
            self.check_classes(&name, model.config.classes)?;
            checkpoints.push((path, ck));
            gcns.push(model);
        }
        let path = self.layout.model(BASELINE);
        require(&path)?;
        let ck = Checkpoint::load(&path)?;
        let baseline = BaselineModel::from_checkpoint(&ck)?;
        self.check_classes(BASELINE, baseline.config.classes)?;
        checkpoints.push((path, ck));
        for (path, ck) in &checkpoints {
            self.check_hash(path, ck.meta(HASH_META).unwrap_or_default(), true)?;
        }
        let manifest = self.load_manifest(true)?;

        let names = [gcn_name(Tap::Small), gcn_name(Tap::Large), ENSEMBLE.to_string(), BASELINE.to_string()];
        let mut rows: [Vec<ReportRow>; 4] = Default::default();
        let tests: Vec<&ManifestEntry> = manifest.split(Split::Test).collect();
        if tests.is_empty() {
            return Err(contract("the manifest has no test slides"));
        }
        for e in tests {
            let id = e.slide_id();
            let bag = self.bag(e, true)?;
            let probs = if bag.real_tiles == 0 {
                log::warn!("slide {id} has no patches; its graph predictions are uniform");
                [uniform(classes), uniform(classes), uniform(classes)]
            } else {
                let graphs = Tap::ALL
                    .into_iter()
                    .map(|tap| self.load_graph(tap, &id, true))
                    .collect::<Result<Vec<_>>>()?;
                [
                    gcns[0].predict(&graphs[0])?,
                    gcns[1].predict(&graphs[1])?,
                    ensemble_predict(&[&gcns[0], &gcns[1]], &[&graphs[0], &graphs[1]])?,
                ]
            };
            let [small, large, ens] = probs;
            for (slot, p) in rows.iter_mut().zip([small, large, ens, baseline.predict(&bag)?]) {
                slot.push(ReportRow {
                    slide_id: id.clone(),
                    actual: e.label,
                    predicted: argmax(&p),
                    probabilities: p,
                });
            }
        }
        for (name, rows) in names.iter().zip(rows) {
            let report = MetricsReport::new(&self.hash, name, classes, rows)?;
            log::info!("{name}: kappa {:.4}, accuracy {:.4}", report.kappa()?, report.accuracy()?);
            let path = self.layout.metrics(name);
            create_parent(&path)?;
            report.save(&path)?;
        }
        Ok(())
    }

    /// Loss curves and the kappa table as CSV and SVG.
    pub(super) fn report(&self) -> Result<()> {
        let logs = [PRETRAIN.to_string(), gcn_name(Tap::Small), gcn_name(Tap::Large), BASELINE.to_string()];
        let mut csv = format!("# {HASH_PREFIX}{}\nmodel,epoch,loss,lr\n", self.hash);
        let mut series = Vec::new();
        for name in &logs {
            let path = self.layout.log(name);
            require(&path)?;
            let log = MetricsLog::load(&path)?;
            self.check_hash(&path, &log.config_hash, false)?;
            for r in &log.records {
                let _ = writeln!(csv, "{name},{},{:?},{:?}", r.epoch, r.mean_loss, r.lr);
            }
            series.push(Series {
                name: name.clone(),
                points: log.records.iter().map(|r| (r.epoch as f64, r.mean_loss)).collect(),
            });
        }
        let csv_path = self.layout.report("loss_curves.csv");
        create_parent(&csv_path)?;
        std::fs::write(&csv_path, csv)?;
        std::fs::write(
            self.layout.report("loss_curves.svg"),
            line_chart_svg("training loss", "epoch", "mean loss", &series, &self.hash),
        )?;

        let models = [gcn_name(Tap::Small), gcn_name(Tap::Large), ENSEMBLE.to_string(), BASELINE.to_string()];
        let mut table = format!("# {HASH_PREFIX}{}\nmodel,kappa,accuracy,slides\n", self.hash);
        let mut bars = Vec::new();
        for name in &models {
            let path = self.layout.metrics(name);
            require(&path)?;
            let report = MetricsReport::load(&path)?;
            self.check_hash(&path, &report.config_hash, false)?;
            let kappa = report.kappa()?;
            let _ = writeln!(table, "{name},{kappa:.6},{:.6},{}", report.accuracy()?, report.rows.len());
            bars.push((name.clone(), kappa));
        }
        std::fs::write(self.layout.report("kappa.csv"), table)?;
        std::fs::write(
            self.layout.report("kappa.svg"),
            bar_chart_svg("held-out quadratic weighted kappa", &bars, &self.hash),
        )?;
        Ok(())
    }
}
