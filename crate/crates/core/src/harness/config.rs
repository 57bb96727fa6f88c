//! Experiment configuration. Every key has a default taken from the
//! near-far reference scene, so an empty file is a valid config.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::coding::{CodeConfig, CodeKind, CodeRate};
use crate::error::{Error, Result};
use crate::modulation::ConstellationKind;

fn config_err(msg: impl Into<String>) -> Error {
    Error::Config(msg.into())
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    #[default]
    PslrSweep,
    SuppressionSweep,
    InterleaverStudy,
    TailBoundCheck,
    NearFar,
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::PslrSweep => "pslr_sweep",
            Self::SuppressionSweep => "suppression_sweep",
            Self::InterleaverStudy => "interleaver_study",
            Self::TailBoundCheck => "tail_bound_check",
            Self::NearFar => "near_far",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CodeFamily {
    Uncoded,
    Repetition,
    Polar,
    Ldpc,
}

impl fmt::Display for CodeFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Self::Uncoded => "uncoded",
            Self::Repetition => "repetition",
            Self::Polar => "polar",
            Self::Ldpc => "ldpc",
        })
    }
}

/// A code and modulation choice independent of block length.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CodeSpec {
    pub family: CodeFamily,
    #[serde(default = "CodeRate::one")]
    pub rate: CodeRate,
    #[serde(default = "default_constellation")]
    pub constellation: ConstellationKind,
    #[serde(default = "yes")]
    pub interleave: bool,
    #[serde(default = "default_ldpc_seed")]
    pub ldpc_seed: u64,
}

fn default_constellation() -> ConstellationKind {
    ConstellationKind::Qpsk
}

fn yes() -> bool {
    true
}

fn default_ldpc_seed() -> u64 {
    0x1d9c
}

impl CodeSpec {
    pub fn uncoded(constellation: ConstellationKind) -> Self {
        Self {
            family: CodeFamily::Uncoded,
            rate: CodeRate::one(),
            constellation,
            interleave: false,
            ldpc_seed: default_ldpc_seed(),
        }
    }

    pub fn coded(family: CodeFamily, rate: &str, constellation: ConstellationKind, interleave: bool) -> Result<Self> {
        Ok(Self {
            family,
            rate: rate.parse()?,
            constellation,
            interleave,
            ldpc_seed: default_ldpc_seed(),
        })
    }

    pub fn label(&self) -> String {
        let il = if self.interleave { "il" } else { "noil" };
        format!("{}-{}-{}-{il}", self.family, self.rate, self.constellation)
    }

    /// Bit-level code configuration for blocks of `n_symbols`.
    pub fn code_config(&self, n_symbols: usize, interleaver_seed: u64) -> Result<CodeConfig> {
        let n_code_bits = n_symbols * self.constellation.bits_per_symbol();
        let n_msg_bits = self.rate.message_bits(n_code_bits)?;
        let kind = match self.family {
            CodeFamily::Uncoded => CodeKind::Uncoded,
            CodeFamily::Polar => CodeKind::Polar,
            CodeFamily::Ldpc => CodeKind::Ldpc { seed: self.ldpc_seed },
            CodeFamily::Repetition => {
                let gamma = (1.0 / self.rate.value()).round() as usize;
                if gamma * n_msg_bits != n_code_bits {
                    return Err(config_err(format!("repetition needs rate 1/γ, got {}", self.rate)));
                }
                CodeKind::Repetition { gamma }
            }
        };
        let cfg = CodeConfig {
            kind,
            n_code_bits,
            n_msg_bits,
            interleave: self.interleave,
            interleaver_seed,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A target or interference path given in bins and a linear amplitude.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PathConfig {
    pub range_bin: usize,
    pub doppler_bin: usize,
    pub amplitude: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SceneConfig {
    pub n: usize,
    pub m: usize,
    pub n_max: usize,
    /// SNR with respect to the near target, dB.
    pub snr_db: f64,
    pub near: PathConfig,
    pub far: PathConfig,
    /// Direct path from the interfering radar.
    pub interferer: PathConfig,
    pub code: CodeSpec,
    pub threshold_points: usize,
}

impl Default for SceneConfig {
    fn default() -> Self {
        Self {
            n: 1024,
            m: 1024,
            n_max: 32,
            snr_db: 0.0,
            near: PathConfig {
                range_bin: 14,
                doppler_bin: 516,
                amplitude: 1.0,
            },
            far: PathConfig {
                range_bin: 27,
                doppler_bin: 518,
                amplitude: 10f64.powf(-12.0 / 10.0),
            },
            interferer: PathConfig {
                range_bin: 29,
                doppler_bin: 518,
                amplitude: 10f64.powf(11.0 / 10.0).sqrt(),
            },
            code: CodeSpec {
                family: CodeFamily::Polar,
                rate: CodeRate::new(120.0, 1024.0).expect("valid rate"),
                constellation: ConstellationKind::Qpsk,
                interleave: true,
                ldpc_seed: default_ldpc_seed(),
            },
            threshold_points: 200,
        }
    }
}

impl SceneConfig {
    /// `|α_near|² / |α_direct|²` in dB.
    pub fn sir_db(&self) -> f64 {
        20.0 * (self.near.amplitude / self.interferer.amplitude).log10()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoundsConfig {
    pub block_lengths: Vec<usize>,
    pub u_points: usize,
    /// The grid ends where the upper bound drops to this probability.
    pub u_floor_prob: f64,
    /// Width of the Wilson band used for domination flags.
    pub z: f64,
}

impl Default for BoundsConfig {
    fn default() -> Self {
        Self {
            block_lengths: vec![256, 1024],
            u_points: 20,
            u_floor_prob: 1e-3,
            z: 3.0,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub seed: u64,
    pub trials: usize,
    pub out_dir: PathBuf,
    pub block_lengths: Vec<usize>,
    pub codes: Vec<CodeSpec>,
    pub scene: SceneConfig,
    pub bounds: BoundsConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::for_kind(ExperimentKind::PslrSweep)
    }
}

impl ExperimentConfig {
    /// Defaults for one experiment kind.
    pub fn for_kind(kind: ExperimentKind) -> Self {
        let qpsk = ConstellationKind::Qpsk;
        let q256 = ConstellationKind::Qam256;
        let coded = |f, r, c, il| CodeSpec::coded(f, r, c, il).expect("valid default code");
        let codes = match kind {
            ExperimentKind::PslrSweep | ExperimentKind::SuppressionSweep => vec![
                CodeSpec::uncoded(qpsk),
                coded(CodeFamily::Polar, "120/1024", qpsk, true),
                coded(CodeFamily::Ldpc, "120/1024", qpsk, true),
                coded(CodeFamily::Polar, "682.5/1024", q256, true),
                coded(CodeFamily::Ldpc, "682.5/1024", q256, true),
            ],
            ExperimentKind::InterleaverStudy => vec![
                CodeSpec::uncoded(qpsk),
                coded(CodeFamily::Polar, "120/1024", qpsk, true),
                coded(CodeFamily::Polar, "120/1024", qpsk, false),
                coded(CodeFamily::Polar, "682.5/1024", q256, true),
                coded(CodeFamily::Polar, "682.5/1024", q256, false),
            ],
            ExperimentKind::TailBoundCheck => vec![
                CodeSpec::uncoded(qpsk),
                coded(CodeFamily::Polar, "120/1024", qpsk, true),
            ],
            ExperimentKind::NearFar => Vec::new(),
        };
        let trials = match kind {
            ExperimentKind::TailBoundCheck => 10_000,
            ExperimentKind::NearFar => 100,
            _ => 1000,
        };
        Self {
            experiment: kind,
            seed: 1,
            trials,
            out_dir: PathBuf::from("out"),
            block_lengths: vec![256, 512, 1024, 2048, 4096],
            codes,
            scene: SceneConfig::default(),
            bounds: BoundsConfig::default(),
        }
    }

    /// Parses TOML; keys absent from the file take the defaults of the
    /// experiment named in it.
    pub fn from_toml(text: &str) -> Result<Self> {
        let table: toml::Table = text.parse().map_err(|e: toml::de::Error| config_err(e.to_string()))?;
        let kind = match table.get("experiment") {
            Some(v) => ExperimentKind::deserialize(v.clone()).map_err(|e| config_err(e.to_string()))?,
            None => ExperimentKind::default(),
        };
        let mut merged = toml::Table::try_from(Self::for_kind(kind)).map_err(|e| config_err(e.to_string()))?;
        for (k, v) in table {
            match (merged.get_mut(&k), v) {
                (Some(toml::Value::Table(base)), toml::Value::Table(over)) => base.extend(over),
                (_, v) => {
                    merged.insert(k, v);
                }
            }
        }
        let cfg = Self::deserialize(merged).map_err(|e| config_err(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    /// Parses TOML for a known experiment; a file naming a different
    /// experiment is rejected.
    pub fn from_toml_for(text: &str, kind: ExperimentKind) -> Result<Self> {
        let mut table: toml::Table = text.parse().map_err(|e: toml::de::Error| config_err(e.to_string()))?;
        let name = toml::Value::String(kind.to_string());
        match table.get("experiment") {
            Some(v) if *v != name => {
                return Err(config_err(format!("config is for {v}, not {kind}")));
            }
            Some(_) => {}
            None => {
                table.insert("experiment".into(), name);
            }
        }
        Self::from_toml(&toml::to_string(&table).map_err(|e| config_err(e.to_string()))?)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| config_err(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(config_err("trials must be positive"));
        }
        let lengths = match self.experiment {
            ExperimentKind::TailBoundCheck => &self.bounds.block_lengths,
            ExperimentKind::NearFar => &Vec::new(),
            _ => &self.block_lengths,
        };
        if self.experiment != ExperimentKind::NearFar && lengths.is_empty() {
            return Err(config_err("no block lengths"));
        }
        if let Some(n) = lengths.iter().find(|n| !n.is_power_of_two() || **n < 4) {
            return Err(config_err(format!("block length {n} is not a power of two ≥ 4")));
        }
        if self.experiment != ExperimentKind::NearFar && self.codes.is_empty() {
            return Err(config_err("no codes"));
        }
        for code in &self.codes {
            for &n in lengths {
                code.code_config(n, 0)
                    .map_err(|e| config_err(format!("{} at N={n}: {e}", code.label())))?;
            }
        }
        {
            let b = &self.bounds;
            if b.u_points < 2 || !(b.u_floor_prob > 0.0 && b.u_floor_prob < 1.0) || b.z.is_nan() || b.z <= 0.0 {
                return Err(config_err("bounds needs u_points ≥ 2, 0 < u_floor_prob < 1, z > 0"));
            }
        }
        {
            let s = &self.scene;
            if s.n < 2 || s.m < 1 || s.n_max >= s.n {
                return Err(config_err(format!("scene needs N ≥ 2, M ≥ 1, n_max < N (got {}, {}, {})", s.n, s.m, s.n_max)));
            }
            for (name, p) in [("near", s.near), ("far", s.far), ("interferer", s.interferer)] {
                if p.range_bin >= s.n || p.doppler_bin == 0 || p.doppler_bin > s.m {
                    return Err(config_err(format!("{name} path bins out of range")));
                }
                if !(p.amplitude >= 0.0 && p.amplitude.is_finite()) {
                    return Err(config_err(format!("{name} amplitude must be finite and non-negative")));
                }
            }
            for (name, p) in [("near", s.near), ("far", s.far)] {
                if p.range_bin == 0 || p.range_bin > s.n_max {
                    return Err(config_err(format!("{name} target range bin must lie in 1..=n_max")));
                }
            }
            if (s.near.range_bin, s.near.doppler_bin) == (s.far.range_bin, s.far.doppler_bin) {
                return Err(config_err("near and far targets share a bin"));
            }
            if s.threshold_points < 2 {
                return Err(config_err("threshold_points must be at least 2"));
            }
            if !s.snr_db.is_finite() {
                return Err(config_err("snr_db must be finite"));
            }
            s.code
                .code_config(s.n, 0)
                .map_err(|e| config_err(format!("scene code: {e}")))?;
        }
        Ok(())
    }

    /// First 16 hex digits of the SHA-256 of the canonical TOML form.
    pub fn hash(&self) -> String {
        let canonical = self.to_toml().unwrap_or_default();
        let digest = Sha256::digest(canonical.as_bytes());
        hex::encode(&digest[..8])
    }
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::from_toml(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_file_gives_defaults() {
        let cfg = ExperimentConfig::from_toml("").unwrap();
        assert_eq!(cfg, ExperimentConfig::default());
        assert_eq!(cfg.trials, 1000);
    }

    #[test]
    fn reference_scene_defaults() {
        let s = SceneConfig::default();
        assert_eq!((s.near.range_bin, s.near.doppler_bin), (14, 516));
        assert_eq!((s.far.range_bin, s.far.doppler_bin), (27, 518));
        assert_eq!((s.interferer.range_bin, s.interferer.doppler_bin), (29, 518));
        assert!((s.sir_db() + 11.0).abs() < 1e-12);
        assert!((s.far.amplitude - 0.063_095_734_448_019_33).abs() < 1e-15);
    }

    #[test]
    fn partial_sections_merge_with_defaults() {
        let cfg = ExperimentConfig::from_toml(
            "experiment = \"near_far\"\nseed = 7\n[scene]\nsnr_db = 3.0\n",
        )
        .unwrap();
        assert_eq!(cfg.trials, 100);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.scene.snr_db, 3.0);
        assert_eq!(cfg.scene.n_max, 32);
    }

    #[test]
    fn code_list_parses() {
        let cfg = ExperimentConfig::from_toml(
            r#"
            block_lengths = [64, 128]
            [[codes]]
            family = "polar"
            rate = "1/2"
            constellation = "16qam"
            interleave = false
            "#,
        )
        .unwrap();
        assert_eq!(cfg.codes.len(), 1);
        let c = cfg.codes[0].code_config(64, 0).unwrap();
        assert_eq!((c.n_code_bits, c.n_msg_bits, c.interleave), (256, 128, false));
    }

    #[test]
    fn invalid_configs_rejected() {
        for text in [
            "trials = 0",
            "block_lengths = [100]",
            "bogus = 1",
            "experiment = \"nope\"",
            "[[codes]]\nfamily = \"polar\"\nrate = \"682.5/1024\"\n",
            "experiment = \"near_far\"\n[scene]\nn_max = 2000\n",
            "experiment = \"near_far\"\n[scene.far]\nrange_bin = 40\ndoppler_bin = 518\namplitude = 0.1\n",
            "seed = \"x\"",
        ] {
            assert!(
                matches!(ExperimentConfig::from_toml(text), Err(Error::Config(_))),
                "accepted {text:?}"
            );
        }
    }

    #[test]
    fn repetition_spec_maps_to_gamma() {
        let spec = CodeSpec::coded(CodeFamily::Repetition, "1/2", ConstellationKind::Bpsk, false).unwrap();
        let c = spec.code_config(8, 0).unwrap();
        assert_eq!(c.kind, CodeKind::Repetition { gamma: 2 });
        assert_eq!(c.n_msg_bits, 4);
        let bad = CodeSpec::coded(CodeFamily::Repetition, "2/3", ConstellationKind::Bpsk, false).unwrap();
        assert!(bad.code_config(6, 0).is_err());
    }

    #[test]
    fn every_section_is_validated() {
        assert!(ExperimentConfig::from_toml("experiment = \"pslr_sweep\"\n[scene]\nsnr_db = nan").is_err());
        assert!(ExperimentConfig::from_toml("experiment = \"near_far\"\n[bounds]\nz = -1.0").is_err());
    }

    #[test]
    fn experiment_kind_is_pinned() {
        let cfg = ExperimentConfig::from_toml_for("seed = 3", ExperimentKind::NearFar).unwrap();
        assert_eq!(cfg.experiment, ExperimentKind::NearFar);
        assert_eq!(cfg.trials, 100);
        assert!(ExperimentConfig::from_toml_for("experiment = \"pslr_sweep\"", ExperimentKind::NearFar).is_err());
    }

    #[test]
    fn hash_is_stable_and_sensitive() {
        let a = ExperimentConfig::default();
        let mut b = a.clone();
        assert_eq!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
        b.seed += 1;
        assert_ne!(a.hash(), b.hash());
    }

    #[test]
    fn toml_round_trip() {
        let a = ExperimentConfig::for_kind(ExperimentKind::InterleaverStudy);
        let back = ExperimentConfig::from_toml(&a.to_toml().unwrap()).unwrap();
        assert_eq!(a, back);
    }
}
