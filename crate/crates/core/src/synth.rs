//! Synthetic multi-annotator datasets in which minority annotations carry a
//! group-correlated signal.
//!
//! Generative story, per instance:
//!
//! 1. True group memberships are drawn independently (`group_rate`); a
//!    fraction `unknown_rate` of them is then recorded as unknown.
//! 2. The instance gets one primary class (never the rare class) and each
//!    other common class as a true secondary label with `secondary_rate`.
//! 3. The rare class is a true secondary label with probability
//!    `rho + (1 - rho) * rare_base_rate` for members of the correlated group
//!    and `rare_base_rate` otherwise, so `rho = 0` makes it independent of
//!    membership.
//! 4. Annotators are drawn without replacement from a fixed pool, either
//!    uniformly or, with `panel_specialists = Some(s)`, as exactly `s`
//!    specialists of the rare class plus non-specialists. Everyone
//!    selects the primary class; a true secondary label is selected only by
//!    annotators specialised in that class. Specialisation is per annotator
//!    and per class with frequency `specialisation[k]`, so a rarely held
//!    specialisation turns the rare class into a minority annotation.
//!    Annotators who do not recognise a true rare label select
//!    `fallback_class` in its place. With probability `label_noise` an
//!    annotator also adds a random common class.
//! 5. Text mixes tokens from the vocabularies of the true labels with
//!    background tokens; each secondary label contributes
//!    `secondary_tokens` tokens.
//!
//! Splits are assigned 8:1:1 after a seeded shuffle.

use std::fs::File;
use std::io::Write;
use std::path::Path;

use rand::seq::{index, IndexedRandom, SliceRandom};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::annotations::{
    write_jsonl, AnnotationRecord, Dataset, Instance, Membership, Split, TaskKind, TaskSchema,
};
use crate::seed::{derive_seed, rng_from_seed};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub n_instances: usize,
    pub n_classes: usize,
    pub n_groups: usize,
    pub annotators_per_instance: usize,
    pub pool_size: usize,
    /// Fixed number of rare-class specialists on every annotator panel.
    pub panel_specialists: Option<usize>,
    pub vocab_size: usize,
    pub text_length: usize,
    /// Per class, the fraction of pool annotators specialised in it.
    pub specialisation: Vec<f64>,
    pub secondary_tokens: usize,
    pub rare_class: usize,
    /// Common class chosen by non-specialists when the rare class is present.
    pub fallback_class: usize,
    pub correlated_group: usize,
    /// Coupling strength `rho` between the correlated group and the rare class.
    pub group_correlation: f64,
    pub rare_base_rate: f64,
    pub secondary_rate: f64,
    pub group_rate: f64,
    pub unknown_rate: f64,
    pub label_noise: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        let n_classes = 8;
        let mut specialisation = vec![1.0; n_classes];
        specialisation[n_classes - 1] = 0.3;
        SynthConfig {
            n_instances: 2000,
            n_classes,
            n_groups: 4,
            annotators_per_instance: 5,
            pool_size: 40,
            panel_specialists: Some(2),
            vocab_size: 800,
            text_length: 16,
            secondary_tokens: 8,
            specialisation,
            rare_class: n_classes - 1,
            fallback_class: 0,
            correlated_group: 0,
            group_correlation: 0.8,
            rare_base_rate: 0.2,
            secondary_rate: 0.2,
            group_rate: 0.3,
            unknown_rate: 0.02,
            label_noise: 0.05,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidArgument(format!("synth config: {msg}")));
        if self.n_instances < 10 {
            return fail(format!("n_instances = {} (need >= 10)", self.n_instances));
        }
        if self.n_classes < 2 || self.n_groups < 1 {
            return fail("need at least two classes and one group".into());
        }
        if self.rare_class >= self.n_classes {
            return fail(format!("rare_class {} out of range", self.rare_class));
        }
        if self.fallback_class >= self.n_classes || self.fallback_class == self.rare_class {
            return fail(format!(
                "fallback_class {} must be a common class",
                self.fallback_class
            ));
        }
        if self.correlated_group >= self.n_groups {
            return fail(format!(
                "correlated_group {} out of range",
                self.correlated_group
            ));
        }
        if self.specialisation.len() != self.n_classes {
            return fail(format!(
                "{} specialisation frequencies for {} classes",
                self.specialisation.len(),
                self.n_classes
            ));
        }
        if self.specialisation.iter().any(|f| !(*f > 0.0 && *f <= 1.0)) {
            return fail("specialisation frequencies must lie in (0, 1]".into());
        }
        if self.annotators_per_instance == 0 || self.annotators_per_instance > self.pool_size {
            return fail("annotators_per_instance must lie in 1..=pool_size".into());
        }
        if let Some(s) = self.panel_specialists {
            if s > self.annotators_per_instance
                || self.annotators_per_instance - s > self.pool_size - s.max(1)
            {
                return fail(format!(
                    "panel_specialists = {s} does not fit the panel or pool"
                ));
            }
        }
        if self.vocab_size < 2 * self.n_classes + 1 || self.text_length == 0 {
            return fail("vocabulary too small or empty texts".into());
        }
        for (name, v) in [
            ("group_correlation", self.group_correlation),
            ("rare_base_rate", self.rare_base_rate),
            ("secondary_rate", self.secondary_rate),
            ("group_rate", self.group_rate),
            ("unknown_rate", self.unknown_rate),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return fail(format!("{name} = {v} outside [0, 1]"));
            }
        }
        if !(0.0..1.0).contains(&self.label_noise) {
            return fail(format!("label_noise = {} outside [0, 1)", self.label_noise));
        }
        Ok(())
    }

    pub fn schema(&self) -> TaskSchema {
        TaskSchema::new(
            TaskKind::MultiLabel,
            (0..self.n_classes).map(|k| format!("area_{k}")).collect(),
            (0..self.n_groups).map(|g| format!("cohort_{g}")).collect(),
        )
        .expect("generated identifiers are unique")
    }

    fn tokens_per_class(&self) -> usize {
        (self.vocab_size / (2 * self.n_classes)).max(1)
    }
}

/// Which pool annotators hold each specialisation.
struct Pool {
    specialised: Vec<Vec<bool>>,
}

fn build_pool(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Pool {
    let mut specialised: Vec<Vec<bool>> = (0..cfg.pool_size)
        .map(|_| {
            cfg.specialisation
                .iter()
                .map(|&f| rng.random_bool(f))
                .collect()
        })
        .collect();
    // Every class keeps at least one specialist.
    for k in 0..cfg.n_classes {
        if !specialised.iter().any(|s| s[k]) {
            let j = rng.random_range(0..cfg.pool_size);
            specialised[j][k] = true;
        }
    }
    let r = cfg.rare_class;
    if let Some(s) = cfg.panel_specialists {
        let need_out = cfg.annotators_per_instance - s;
        while specialised.iter().filter(|a| a[r]).count() < s {
            let j = rng.random_range(0..cfg.pool_size);
            specialised[j][r] = true;
        }
        while specialised.iter().filter(|a| !a[r]).count() < need_out {
            let j = rng.random_range(0..cfg.pool_size);
            if specialised.iter().filter(|a| a[r]).count() > s.max(1) {
                specialised[j][r] = false;
            }
        }
    }
    Pool { specialised }
}

impl Pool {
    fn panel(&self, cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Vec<usize> {
        let Some(s) = cfg.panel_specialists else {
            return index::sample(rng, cfg.pool_size, cfg.annotators_per_instance).into_vec();
        };
        let (spec, rest): (Vec<usize>, Vec<usize>) =
            (0..cfg.pool_size).partition(|&a| self.specialised[a][cfg.rare_class]);
        let mut panel: Vec<usize> = spec.choose_multiple(rng, s).copied().collect();
        panel.extend(
            rest.choose_multiple(rng, cfg.annotators_per_instance - s)
                .copied(),
        );
        panel.shuffle(rng);
        panel
    }
}

pub fn generate(cfg: &SynthConfig) -> Result<Dataset> {
    cfg.validate()?;
    let mut pool_rng = rng_from_seed(derive_seed(cfg.seed, "synth-pool", 0));
    let pool = build_pool(cfg, &mut pool_rng);
    let mut rng = rng_from_seed(derive_seed(cfg.seed, "synth-instances", 0));

    let common: Vec<usize> = (0..cfg.n_classes)
        .filter(|&k| k != cfg.rare_class)
        .collect();
    let m = cfg.tokens_per_class();
    let class_vocab = cfg.n_classes * m;
    let background = cfg.vocab_size - class_vocab;

    let mut instances = Vec::with_capacity(cfg.n_instances);
    for i in 0..cfg.n_instances {
        let true_in: Vec<bool> = (0..cfg.n_groups)
            .map(|_| rng.random_bool(cfg.group_rate))
            .collect();
        let membership = true_in
            .iter()
            .map(|&member| {
                if rng.random_bool(cfg.unknown_rate) {
                    Membership::Unknown
                } else if member {
                    Membership::InGroup
                } else {
                    Membership::OutGroup
                }
            })
            .collect();

        let primary = *common.choose(&mut rng).expect("at least one common class");
        let mut secondary: Vec<usize> = common
            .iter()
            .copied()
            .filter(|&k| k != primary && rng.random_bool(cfg.secondary_rate))
            .collect();
        let rho = cfg.group_correlation;
        let rare_p = if true_in[cfg.correlated_group] {
            rho + (1.0 - rho) * cfg.rare_base_rate
        } else {
            cfg.rare_base_rate
        };
        if rng.random_bool(rare_p) {
            secondary.push(cfg.rare_class);
        }

        let chosen = pool.panel(cfg, &mut rng);
        let mut annotations = Vec::with_capacity(chosen.len());
        for a in chosen {
            let mut labels = vec![primary];
            for &k in &secondary {
                if pool.specialised[a][k] {
                    labels.push(k);
                } else if k == cfg.rare_class {
                    labels.push(cfg.fallback_class);
                }
            }
            if rng.random_bool(cfg.label_noise) {
                labels.push(*common.choose(&mut rng).expect("common class"));
            }
            annotations.push(AnnotationRecord::new(Some(format!("a{a:02}")), labels)?);
        }

        let mut words =
            Vec::with_capacity(cfg.text_length + cfg.secondary_tokens * secondary.len());
        let class_token = |k: usize, rng: &mut ChaCha8Rng| k * m + rng.random_range(0..m);
        for t in 0..cfg.text_length {
            let w = if t % 2 == 0 || background == 0 {
                class_token(primary, &mut rng)
            } else {
                class_vocab + rng.random_range(0..background)
            };
            words.push(w);
        }
        for &k in &secondary {
            for _ in 0..cfg.secondary_tokens {
                words.push(class_token(k, &mut rng));
            }
        }
        words.shuffle(&mut rng);
        let text = words
            .iter()
            .map(|w| format!("w{w}"))
            .collect::<Vec<_>>()
            .join(" ");

        instances.push(Instance {
            id: format!("s{i:05}"),
            text,
            annotations,
            membership,
            split: Split::Train,
        });
    }

    let mut order: Vec<usize> = (0..cfg.n_instances).collect();
    order.shuffle(&mut rng_from_seed(derive_seed(cfg.seed, "synth-splits", 0)));
    let n_train = (cfg.n_instances as f64 * 0.8).round() as usize;
    let n_dev = (cfg.n_instances as f64 * 0.1).round() as usize;
    for (rank, &i) in order.iter().enumerate() {
        instances[i].split = if rank < n_train {
            Split::Train
        } else if rank < n_train + n_dev {
            Split::Dev
        } else {
            Split::Test
        };
    }

    Dataset::new(cfg.schema(), instances)
}

/// Writes `dataset.jsonl`, `schema.json` and the `synth.json` provenance
/// sidecar into `dir`.
pub fn write_synth(cfg: &SynthConfig, dataset: &Dataset, dir: impl AsRef<Path>) -> Result<()> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut jsonl = Vec::new();
    write_jsonl(dataset, &mut jsonl)?;
    let files = [
        ("dataset.jsonl", jsonl),
        ("schema.json", serde_json::to_vec_pretty(dataset.schema())?),
        ("synth.json", serde_json::to_vec_pretty(cfg)?),
    ];
    for (name, bytes) in files {
        let path = dir.join(name);
        let mut f = File::create(&path).map_err(|e| Error::io(&path, e))?;
        f.write_all(&bytes).map_err(|e| Error::io(&path, e))?;
    }
    Ok(())
}
