//! Experiment drivers. Trials run in parallel and are collected in trial
//! order, so every result is a pure function of the config.

use std::time::Instant;

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{CodeSpec, ExperimentConfig, ExperimentKind, SceneConfig};
use super::rng::{trial_rng, trial_seed, Stream};
use super::table::{Cell, ResultTable};
use crate::bounds::{
    self, autocorr_tail_lb, autocorr_tail_ub, crosscorr_tail_lb, crosscorr_tail_ub, ofdm_tail_lb, ofdm_tail_ub,
    TailBoundSpec, TailCounts, TailProbability,
};
use crate::coding::{generate_message, CodeConfig, CodeKind};
use crate::correlation::{self, autocorr_at, crosscorr_at, idft_ratio_at, Method};
use crate::detection::{eta_grid, threshold_sweep, Bin, MapSummary, RocCurves, TargetBins};
use crate::error::{Error, Result};
use crate::modulation::{product_bound_b, ratio_bound_b, CcsGenerator, Constellation, ConstellationKind};
use crate::receiver::{fmcw_range_doppler, mf_bank, ofdm_range_doppler, sc_range_doppler, RangeDopplerMap};
use crate::scene::{
    apply_channel_ofdm, apply_channel_sc, synth_fmcw_frame, synth_frame, FmcwParams, Grid, PathGain, TargetScene,
    Waveform,
};

/// Middle order statistic (mean of the two middle values for even counts).
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::Empty);
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let mid = v.len() / 2;
    Ok(if v.len() % 2 == 1 { v[mid] } else { 0.5 * (v[mid - 1] + v[mid]) })
}

/// Least-squares slope of `db` against `log2 N`: the gain per doubling.
pub fn slope_per_doubling(ns: &[usize], db: &[f64]) -> Result<f64> {
    if ns.len() != db.len() || ns.len() < 2 {
        return Err(Error::DimensionMismatch("need at least two matching points".into()));
    }
    let x: Vec<f64> = ns.iter().map(|&n| (n as f64).log2()).collect();
    let k = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / k, db.iter().sum::<f64>() / k);
    let sxy: f64 = x.iter().zip(db).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    Ok(sxy / sxx)
}

fn generator(code: &CodeSpec, n: usize) -> Result<CcsGenerator> {
    let cfg = code.code_config(n, 0)?;
    CcsGenerator::new(n, cfg.build()?, Constellation::new(code.constellation))
}

fn draw_block(gen: &CcsGenerator, seed: u64, trial: u64, radar: u16) -> Result<Vec<Complex64>> {
    let perm = gen.interleaver(trial_seed(seed, trial, Stream::Interleaver { radar }))?;
    gen.generate(&mut trial_rng(seed, trial, Stream::Message { radar }), &perm)
}

fn per_trial<T: Send>(trials: usize, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..trials as u64).into_par_iter().map(f).collect()
}

/// Message length in symbols.
fn message_symbols(cfg: &CodeConfig, kind: ConstellationKind) -> f64 {
    cfg.n_msg_bits as f64 / kind.bits_per_symbol() as f64
}

fn code_cells(code: &CodeSpec) -> Vec<Cell> {
    vec![
        code.label().into(),
        code.family.to_string().into(),
        code.rate.to_string().into(),
        code.constellation.to_string().into(),
        code.interleave.into(),
    ]
}

const CODE_COLUMNS: [&str; 5] = ["code", "family", "rate", "constellation", "interleaved"];

fn columns(extra: &[&'static str]) -> Vec<&'static str> {
    CODE_COLUMNS.iter().chain(extra).copied().collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PslrPoint {
    pub code: CodeSpec,
    pub n: usize,
    pub trials: usize,
    pub median_db: f64,
    /// Bound-implied median from the lag-1 tail bound.
    pub bound_db: f64,
}

/// Median PSLR per (code, N).
pub fn pslr_medians(cfg: &ExperimentConfig) -> Result<Vec<PslrPoint>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for code in &cfg.codes {
        for &n in &cfg.block_lengths {
            let gen = generator(code, n)?;
            let values = per_trial(cfg.trials, |t| {
                let s = draw_block(&gen, cfg.seed, t, 0)?;
                Ok(correlation::pslr(&correlation::autocorr(&s, Method::Fft)?)?.value())
            })?;
            let c = gen.constellation();
            let spec = TailBoundSpec::auto(
                n,
                message_symbols(gen.code(), code.constellation),
                1,
                product_bound_b(c),
                c.bits_per_symbol() as u32,
            )?;
            out.push(PslrPoint {
                code: *code,
                n,
                trials: cfg.trials,
                median_db: median(&values)?,
                bound_db: bounds::median_pslr_from_bound(&spec)?.value(),
            });
        }
    }
    Ok(out)
}

fn pslr_table(cfg: &ExperimentConfig, points: &[PslrPoint]) -> Result<ResultTable> {
    let mut table = ResultTable::new(
        &columns(&["n", "trials", "median_pslr_db", "bound_median_db"]),
        &cfg.experiment.to_string(),
        &cfg.hash(),
    );
    for p in points {
        let mut row = code_cells(&p.code);
        row.extend([p.n.into(), p.trials.into(), p.median_db.into(), p.bound_db.into()]);
        table.push(row)?;
    }
    Ok(table)
}

pub fn run_pslr_sweep(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let start = Instant::now();
    let mut table = pslr_table(cfg, &pslr_medians(cfg)?)?;
    table.meta.wall_time_s = start.elapsed().as_secs_f64();
    Ok(table)
}

/// Median PSLR per (code, N, interleaved); each coded spec is run both
/// with and without interleaving.
pub fn run_interleaver_study(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let start = Instant::now();
    let mut expanded = cfg.clone();
    expanded.codes = Vec::new();
    for code in &cfg.codes {
        let variants: &[bool] = if code.family == super::config::CodeFamily::Uncoded {
            &[false]
        } else {
            &[true, false]
        };
        for &il in variants {
            let c = CodeSpec { interleave: il, ..*code };
            if !expanded.codes.contains(&c) {
                expanded.codes.push(c);
            }
        }
    }
    let mut table = pslr_table(cfg, &pslr_medians(&expanded)?)?;
    table.meta.wall_time_s = start.elapsed().as_secs_f64();
    Ok(table)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SuppressionPoint {
    pub code: CodeSpec,
    pub n: usize,
    pub trials: usize,
    /// Median single-carrier suppression from the cross-correlation.
    pub median_cross_db: f64,
    /// Median OFDM suppression from the IDFT ratio.
    pub median_ofdm_db: f64,
    pub bound_cross_db: f64,
    pub bound_ofdm_db: f64,
}

/// Median interference suppression per (code, N) over independent pairs.
pub fn suppression_medians(cfg: &ExperimentConfig) -> Result<Vec<SuppressionPoint>> {
    cfg.validate()?;
    let mut out = Vec::new();
    for code in &cfg.codes {
        for &n in &cfg.block_lengths {
            let gen = generator(code, n)?;
            let values = per_trial(cfg.trials, |t| {
                let si = draw_block(&gen, cfg.seed, t, 0)?;
                let sq = draw_block(&gen, cfg.seed, t, 1)?;
                let cross = correlation::suppression_metric(&correlation::crosscorr(&si, &sq, Method::Fft)?)?;
                let ofdm = correlation::suppression_metric(&correlation::idft_ratio(&si, &sq, Method::Fft)?)?;
                Ok((cross.value(), ofdm.value()))
            })?;
            let (cross, ofdm): (Vec<f64>, Vec<f64>) = values.into_iter().unzip();
            let c = gen.constellation();
            let k = message_symbols(gen.code(), code.constellation);
            let m_s = c.bits_per_symbol() as u32;
            let spec_x = TailBoundSpec::cross(n, k, k, 0, product_bound_b(c), m_s, m_s)?;
            let spec_v = TailBoundSpec::cross(n, k, k, 0, ratio_bound_b(c, c)?, m_s, m_s)?;
            out.push(SuppressionPoint {
                code: *code,
                n,
                trials: cfg.trials,
                median_cross_db: median(&cross)?,
                median_ofdm_db: median(&ofdm)?,
                bound_cross_db: bounds::median_crosscorr_from_bound(&spec_x).value(),
                bound_ofdm_db: bounds::median_ofdm_from_bound(&spec_v).value(),
            });
        }
    }
    Ok(out)
}

pub fn run_suppression_sweep(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let start = Instant::now();
    let points = suppression_medians(cfg)?;
    let mut table = ResultTable::new(
        &columns(&[
            "n",
            "trials",
            "median_cross_db",
            "median_ofdm_db",
            "bound_cross_db",
            "bound_ofdm_db",
        ]),
        &cfg.experiment.to_string(),
        &cfg.hash(),
    );
    for p in &points {
        let mut row = code_cells(&p.code);
        row.extend([
            p.n.into(),
            p.trials.into(),
            p.median_cross_db.into(),
            p.median_ofdm_db.into(),
            p.bound_cross_db.into(),
            p.bound_ofdm_db.into(),
        ]);
        table.push(row)?;
    }
    table.meta.wall_time_s = start.elapsed().as_secs_f64();
    Ok(table)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    Re,
    Im,
}

impl Part {
    fn of(self, v: Complex64) -> f64 {
        match self {
            Self::Re => v.re,
            Self::Im => v.im,
        }
    }

    fn name(self) -> &'static str {
        match self {
            Self::Re => "re",
            Self::Im => "im",
        }
    }
}

/// One empirical-versus-analytic comparison.
#[derive(Clone, Debug, PartialEq)]
pub struct TailCheckRow {
    pub code: String,
    pub n: usize,
    /// `chi(l)`, `rho(l)` or `V[l]`.
    pub statistic: String,
    pub part: Part,
    /// `true` for an upper bound, `false` for a lower bound.
    pub upper: bool,
    pub u: f64,
    pub empirical: f64,
    pub ci_lo: f64,
    pub ci_hi: f64,
    pub bound: TailProbability,
    /// Upper: `ci_lo <= bound`. Lower: `ci_hi >= bound`.
    pub pass: bool,
}

/// Sample statistics collected per trial, in a fixed order.
const STATS: [(&str, usize); 6] = [("chi(1)", 0), ("chi(2)", 1), ("rho(0)", 2), ("V[1]", 3), ("V[0]", 4), ("rho(1)", 5)];

fn trial_statistics(si: &[Complex64], sq: &[Complex64]) -> Result<[Complex64; 6]> {
    Ok([
        autocorr_at(si, 1)?,
        autocorr_at(si, 2)?,
        crosscorr_at(si, sq, 0)?,
        idft_ratio_at(si, sq, 1)?,
        idft_ratio_at(si, sq, 0)?,
        crosscorr_at(si, sq, 1)?,
    ])
}

/// Threshold grid ending where the bound falls to `floor_prob`.
fn u_grid(c: f64, points: usize, floor_prob: f64) -> Vec<f64> {
    let u_max = ((2.0 / floor_prob).ln() / c).sqrt();
    (1..=points).map(|i| u_max * i as f64 / points as f64).collect()
}

/// Small-threshold level at which lower bounds are compared.
pub const LOWER_BOUND_U: f64 = 0.01;

pub fn tail_bound_rows(cfg: &ExperimentConfig) -> Result<Vec<TailCheckRow>> {
    cfg.validate()?;
    let b = &cfg.bounds;
    let mut rows = Vec::new();
    for code in &cfg.codes {
        for &n in &b.block_lengths {
            let gen = generator(code, n)?;
            let c = gen.constellation();
            let k = message_symbols(gen.code(), code.constellation);
            let m_s = c.bits_per_symbol() as u32;
            let b_prod = product_bound_b(c);
            let b_ratio = ratio_bound_b(c, c)?;
            let samples = per_trial(cfg.trials, |t| {
                let si = draw_block(&gen, cfg.seed, t, 0)?;
                let sq = draw_block(&gen, cfg.seed, t, 1)?;
                trial_statistics(&si, &sq)
            })?;

            let auto1 = TailBoundSpec::auto(n, k, 1, b_prod, m_s)?;
            let auto2 = TailBoundSpec::auto(n, k, 2, b_prod, m_s)?;
            let cross0 = TailBoundSpec::cross(n, k, k, 0, b_prod, m_s, m_s)?;
            let cross1 = TailBoundSpec::cross(n, k, k, 1, b_prod, m_s, m_s)?;
            let ofdm = TailBoundSpec::cross(n, k, k, 1, b_ratio, m_s, m_s)?;

            type Ub = fn(&TailBoundSpec, f64) -> Result<TailProbability>;
            let uppers: [(usize, &TailBoundSpec, f64, Ub); 4] = [
                (0, &auto1, auto1.autocorr_constant()?, autocorr_tail_ub),
                (2, &cross0, cross0.crosscorr_constant(), crosscorr_tail_ub),
                (5, &cross1, cross1.crosscorr_constant(), crosscorr_tail_ub),
                (3, &ofdm, ofdm.ofdm_constant(), ofdm_tail_ub),
            ];
            let lowers = [
                (0, autocorr_tail_lb(&auto1)),
                (1, autocorr_tail_lb(&auto2)),
                (2, crosscorr_tail_lb(&cross0)),
                (4, ofdm_tail_lb(&ofdm)),
            ];
            for part in [Part::Re, Part::Im] {
                for &(idx, spec, cst, ub) in &uppers {
                    let grid = u_grid(cst, b.u_points, b.u_floor_prob);
                    let mut counts = TailCounts::new(&grid);
                    samples.iter().for_each(|s| counts.add(part.of(s[idx])));
                    for est in counts.estimates(b.z)? {
                        let bound = ub(spec, est.u)?;
                        rows.push(TailCheckRow {
                            code: code.label(),
                            n,
                            statistic: STATS[idx].0.to_owned(),
                            part,
                            upper: true,
                            u: est.u,
                            empirical: est.prob,
                            ci_lo: est.ci_lo,
                            ci_hi: est.ci_hi,
                            bound,
                            pass: est.ci_lo <= bound.prob,
                        });
                    }
                }
                for &(idx, bound) in &lowers {
                    let mut counts = TailCounts::new(&[LOWER_BOUND_U]);
                    samples.iter().for_each(|s| counts.add(part.of(s[idx])));
                    let est = counts.estimates(b.z)?[0];
                    rows.push(TailCheckRow {
                        code: code.label(),
                        n,
                        statistic: STATS[idx].0.to_owned(),
                        part,
                        upper: false,
                        u: est.u,
                        empirical: est.prob,
                        ci_lo: est.ci_lo,
                        ci_hi: est.ci_hi,
                        bound,
                        pass: est.ci_hi >= bound.prob,
                    });
                }
            }
        }
    }
    Ok(rows)
}

/// Exhaustive lower-bound witness: all `2^K` BPSK messages through a rate
/// 1/2 repetition code without interleaving.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LowerBoundWitness {
    pub k: usize,
    pub lag: usize,
    pub u: f64,
    pub exceed: usize,
    pub total: usize,
    pub bound: TailProbability,
}

impl LowerBoundWitness {
    pub fn probability(&self) -> f64 {
        self.exceed as f64 / self.total as f64
    }

    pub fn holds(&self) -> bool {
        self.probability() >= self.bound.prob
    }
}

pub fn lower_bound_witness(k: usize, lag: usize, u: f64) -> Result<LowerBoundWitness> {
    if k == 0 || k > 16 {
        return Err(crate::error::invalid("witness enumerates at most 2^16 messages"));
    }
    let n = 2 * k;
    let cfg = CodeConfig {
        kind: CodeKind::Repetition { gamma: 2 },
        n_code_bits: n,
        n_msg_bits: k,
        interleave: false,
        interleaver_seed: 0,
    };
    let enc = cfg.build()?;
    let bpsk = Constellation::new(ConstellationKind::Bpsk);
    let mut exceed = 0;
    for word in 0u32..(1 << k) {
        let bits: Vec<u8> = (0..k).map(|i| ((word >> i) & 1) as u8).collect();
        let msg = crate::coding::BitBlock::new(bits, crate::coding::BitRole::Message)?;
        let s = bpsk.map_bits(enc.encode_systematic(&msg)?.bits())?;
        if autocorr_at(&s, lag as isize)?.re.abs() > u {
            exceed += 1;
        }
    }
    let spec = TailBoundSpec::auto(n, k as f64, lag, product_bound_b(&bpsk), 1)?;
    Ok(LowerBoundWitness {
        k,
        lag,
        u,
        exceed,
        total: 1 << k,
        bound: autocorr_tail_lb(&spec),
    })
}

pub fn run_tail_bound_check(cfg: &ExperimentConfig) -> Result<ResultTable> {
    let start = Instant::now();
    let rows = tail_bound_rows(cfg)?;
    let mut table = ResultTable::new(
        &[
            "code",
            "n",
            "statistic",
            "part",
            "bound_kind",
            "u",
            "empirical",
            "ci_lo",
            "ci_hi",
            "bound",
            "bound_log2",
            "pass",
        ],
        &cfg.experiment.to_string(),
        &cfg.hash(),
    );
    for r in &rows {
        table.push(vec![
            r.code.clone().into(),
            r.n.into(),
            r.statistic.clone().into(),
            r.part.name().into(),
            (if r.upper { "upper" } else { "lower" }).into(),
            r.u.into(),
            r.empirical.into(),
            r.ci_lo.into(),
            r.ci_hi.into(),
            r.bound.prob.into(),
            r.bound.log2.into(),
            r.pass.into(),
        ])?;
    }
    let w = lower_bound_witness(4, 1, LOWER_BOUND_U)?;
    table.push(vec![
        "repetition-1/2-bpsk-noil-exhaustive".into(),
        (2 * w.k).into(),
        format!("chi({})", w.lag).into(),
        "re".into(),
        "lower".into(),
        w.u.into(),
        w.probability().into(),
        w.probability().into(),
        w.probability().into(),
        w.bound.prob.into(),
        w.bound.log2.into(),
        w.holds().into(),
    ])?;
    table.meta.wall_time_s = start.elapsed().as_secs_f64();
    Ok(table)
}

pub const SC_INTF: &str = "ccs_sc_intf";
pub const SC_CLEAN: &str = "ccs_sc";
pub const OFDM_INTF: &str = "ccs_ofdm_intf";
pub const OFDM_CLEAN: &str = "ccs_ofdm";
pub const FMCW: &str = "fmcw";
pub const MAP_LABELS: [&str; 5] = [SC_INTF, SC_CLEAN, OFDM_INTF, OFDM_CLEAN, FMCW];

/// Scenes for each receive chain with noise set from the SNR.
struct NearFarScenes {
    targets: TargetBins,
    sc: TargetScene,
    ofdm: TargetScene,
    fmcw: TargetScene,
}

impl NearFarScenes {
    fn new(s: &SceneConfig) -> Self {
        let path = |p: &super::config::PathConfig| PathGain::new(p.range_bin, p.doppler_bin, p.amplitude);
        let snr = 10f64.powf(s.snr_db / 10.0);
        let signal = s.near.amplitude.powi(2) / snr;
        let base = TargetScene {
            targets: vec![path(&s.near), path(&s.far)],
            interference: vec![vec![path(&s.interferer)]],
            noise_variance: signal,
            n_max: s.n_max,
        };
        Self {
            targets: TargetBins {
                near: Bin::new(s.near.range_bin, s.near.doppler_bin),
                far: Bin::new(s.far.range_bin, s.far.doppler_bin),
            },
            // OFDM samples carry E|x|² = 1/N
            ofdm: TargetScene {
                noise_variance: signal / s.n as f64,
                ..base.clone()
            },
            fmcw: base.without_interference(),
            sc: base,
        }
    }
}

fn near_far_trial(
    cfg: &ExperimentConfig,
    gen: &CcsGenerator,
    scenes: &NearFarScenes,
    fmcw: &(FmcwParams, crate::scene::Frame),
    trial: u64,
) -> Result<Vec<RangeDopplerMap>> {
    let s = &cfg.scene;
    let frame_blocks = |radar: u16| -> Result<Vec<Vec<Complex64>>> {
        let perm = gen.interleaver(trial_seed(cfg.seed, trial, Stream::Interleaver { radar }))?;
        let mut rng = trial_rng(cfg.seed, trial, Stream::Message { radar });
        (0..s.m).map(|_| gen.generate(&mut rng, &perm)).collect()
    };
    let own = synth_frame(&frame_blocks(0)?, Waveform::SingleCarrier)?;
    let other = synth_frame(&frame_blocks(1)?, Waveform::SingleCarrier)?;
    let noise = |chain: u16| trial_rng(cfg.seed, trial, Stream::Noise { chain });

    let sc_map = |scene: &TargetScene, interferers: &[&crate::scene::Frame], chain| -> Result<RangeDopplerMap> {
        let y = apply_channel_sc(&own, interferers, scene, &mut noise(chain))?;
        sc_range_doppler(&mf_bank(&y, &own.samples, s.n_max)?, s.n)
    };
    let own_s: &Grid = own.symbols.as_ref().expect("c.c.s frame has symbols");
    let other_s: &Grid = other.symbols.as_ref().expect("c.c.s frame has symbols");
    let ofdm_map = |scene: &TargetScene, interferers: &[&Grid], chain| -> Result<RangeDopplerMap> {
        let y = apply_channel_ofdm(own_s, interferers, scene, &mut noise(chain))?;
        ofdm_range_doppler(&y, own_s, s.n_max)
    };
    let clean_sc = scenes.sc.without_interference();
    let clean_ofdm = scenes.ofdm.without_interference();
    let (params, fmcw_frame) = fmcw;
    let y_fmcw = apply_channel_sc(fmcw_frame, &[], &scenes.fmcw, &mut noise(4))?;
    Ok(vec![
        sc_map(&scenes.sc, &[&other], 0)?,
        sc_map(&clean_sc, &[], 1)?,
        ofdm_map(&scenes.ofdm, &[other_s], 2)?,
        ofdm_map(&clean_ofdm, &[], 3)?,
        fmcw_range_doppler(&y_fmcw, params, s.n_max)?,
    ])
}

/// Target and spurious levels of one map.
#[derive(Clone, Debug, PartialEq)]
pub struct PeakRow {
    pub label: String,
    pub near: f64,
    pub far: f64,
    pub max_spurious: f64,
    pub median_floor: f64,
}

#[derive(Clone, Debug)]
pub struct NearFarReport {
    /// Maps of trial 0, in [`MAP_LABELS`] order.
    pub maps: Vec<(String, RangeDopplerMap)>,
    pub peaks: Vec<PeakRow>,
    pub summaries: Vec<(String, Vec<MapSummary>)>,
    pub roc: RocCurves,
    pub targets: TargetBins,
}

fn median_floor(map: &RangeDopplerMap, targets: &TargetBins) -> Result<f64> {
    let v: Vec<f64> = map
        .bins()
        .filter(|&(l, nu, _)| {
            l >= 1
                && (l, nu) != (targets.near.range, targets.near.doppler)
                && (l, nu) != (targets.far.range, targets.far.doppler)
        })
        .map(|(_, _, v)| v.norm())
        .collect();
    median(&v)
}

pub fn near_far(cfg: &ExperimentConfig) -> Result<NearFarReport> {
    let mut cfg = cfg.clone();
    cfg.experiment = ExperimentKind::NearFar;
    cfg.validate()?;
    let s = &cfg.scene;
    let gen = generator(&s.code, s.n)?;
    let scenes = NearFarScenes::new(s);
    let params = FmcwParams::new(s.n, s.m);
    let fmcw = (params, synth_fmcw_frame(&params)?);

    let first = near_far_trial(&cfg, &gen, &scenes, &fmcw, 0)?;
    let first_summaries: Vec<MapSummary> =
        first.iter().map(|m| MapSummary::of(m, &scenes.targets)).collect::<Result<_>>()?;
    let rest = per_trial(cfg.trials - 1, |t| {
        near_far_trial(&cfg, &gen, &scenes, &fmcw, t + 1)?
            .iter()
            .map(|m| MapSummary::of(m, &scenes.targets))
            .collect::<Result<Vec<_>>>()
    })?;
    let summaries: Vec<(String, Vec<MapSummary>)> = MAP_LABELS
        .iter()
        .enumerate()
        .map(|(i, label)| {
            let per: Vec<MapSummary> = std::iter::once(first_summaries[i])
                .chain(rest.iter().map(|r| r[i]))
                .collect();
            (label.to_string(), per)
        })
        .collect();

    let peaks: Vec<PeakRow> = first
        .iter()
        .zip(&first_summaries)
        .zip(MAP_LABELS)
        .map(|((map, sum), label)| {
            Ok(PeakRow {
                label: label.to_owned(),
                near: sum.near,
                far: sum.far,
                max_spurious: sum.max_spurious,
                median_floor: median_floor(map, &scenes.targets)?,
            })
        })
        .collect::<Result<_>>()?;
    let floor = peaks.iter().map(|p| p.median_floor).fold(f64::INFINITY, f64::min);
    let peak = summaries
        .iter()
        .flat_map(|(_, v)| v.iter().map(|m| m.near.max(m.far)))
        .fold(0.0, f64::max);
    let eta = eta_grid(floor, peak, s.threshold_points)?;
    let roc = threshold_sweep(&summaries, &eta)?;
    Ok(NearFarReport {
        maps: MAP_LABELS.iter().map(|l| l.to_string()).zip(first).collect(),
        peaks,
        summaries,
        roc,
        targets: scenes.targets,
    })
}

/// Inclusive threshold range of a sweet spot, if any.
pub fn sweet_spot_band(roc: &RocCurves, label: &str) -> Option<(f64, f64)> {
    let idx = roc.get(label)?.sweet_spot();
    Some((roc.eta[*idx.first()?], roc.eta[*idx.last()?]))
}

pub fn run_near_far(cfg: &ExperimentConfig) -> Result<(ResultTable, NearFarReport)> {
    let start = Instant::now();
    let report = near_far(cfg)?;
    let mut table = ResultTable::new(
        &[
            "waveform",
            "near_peak",
            "far_peak",
            "far_peak_db",
            "max_spurious",
            "median_floor",
            "sweet_spot_lo",
            "sweet_spot_hi",
        ],
        "near_far",
        &cfg.hash(),
    );
    for p in &report.peaks {
        let (lo, hi) = sweet_spot_band(&report.roc, &p.label).unwrap_or((f64::NAN, f64::NAN));
        table.push(vec![
            p.label.clone().into(),
            p.near.into(),
            p.far.into(),
            (20.0 * p.far.log10()).into(),
            p.max_spurious.into(),
            p.median_floor.into(),
            lo.into(),
            hi.into(),
        ])?;
    }
    table.meta.wall_time_s = start.elapsed().as_secs_f64();
    Ok((table, report))
}

/// Bit-level correlation coefficient between codeword bits `i` and `j`
/// of an interleaved repetition code, estimated over `draws` independent
/// messages and interleavers. Returns `(estimate, standard error)`.
pub fn repetition_bit_correlation_mc(
    k: usize,
    gamma: usize,
    i: usize,
    j: usize,
    draws: usize,
    seed: u64,
) -> Result<(f64, f64)> {
    let n = gamma * k;
    let cfg = CodeConfig {
        kind: CodeKind::Repetition { gamma },
        n_code_bits: n,
        n_msg_bits: k,
        interleave: true,
        interleaver_seed: 0,
    };
    let enc = cfg.build()?;
    let pairs = per_trial(draws, |t| {
        let msg = generate_message(k, &mut trial_rng(seed, t, Stream::Message { radar: 0 }))?;
        let perm = crate::coding::make_interleaver(n, k, trial_seed(seed, t, Stream::Interleaver { radar: 0 }))?;
        let c = perm.apply(&enc.encode_systematic(&msg)?)?;
        // ±1 mapping gives zero-mean unit-variance bits
        let pm = |b: u8| 1.0 - 2.0 * f64::from(b);
        Ok(pm(c.bits()[i]) * pm(c.bits()[j]))
    })?;
    let d = pairs.len() as f64;
    let mean = pairs.iter().sum::<f64>() / d;
    let var = pairs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (d - 1.0);
    Ok((mean, (var / d).sqrt()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn median_and_slope() {
        assert_eq!(median(&[3.0, 1.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(&[4.0, 1.0, 2.0, 3.0]).unwrap(), 2.5);
        assert!(median(&[]).is_err());
        let s = slope_per_doubling(&[256, 512, 1024], &[10.0, 13.0, 16.0]).unwrap();
        assert!((s - 3.0).abs() < 1e-12);
    }

    #[test]
    fn witness_small_code() {
        let w = lower_bound_witness(4, 1, LOWER_BOUND_U).unwrap();
        assert_eq!(w.total, 16);
        assert_eq!(w.bound.prob, 1.0 / 16.0);
        assert!(w.holds());
    }

    #[test]
    fn pslr_sweep_is_deterministic() {
        let mut cfg = ExperimentConfig::for_kind(ExperimentKind::PslrSweep);
        cfg.block_lengths = vec![64, 128];
        cfg.trials = 20;
        cfg.codes.truncate(2);
        let a = run_pslr_sweep(&cfg).unwrap();
        let b = run_pslr_sweep(&cfg).unwrap();
        assert_eq!(a.to_csv().unwrap(), b.to_csv().unwrap());
        assert_eq!(a.len(), 4);
    }

    #[test]
    fn small_near_far_runs() {
        let mut cfg = ExperimentConfig::for_kind(ExperimentKind::NearFar);
        cfg.trials = 3;
        cfg.scene.n = 128;
        cfg.scene.m = 32;
        cfg.scene.n_max = 16;
        cfg.scene.near.range_bin = 3;
        cfg.scene.near.doppler_bin = 17;
        cfg.scene.far.range_bin = 9;
        cfg.scene.far.doppler_bin = 18;
        cfg.scene.interferer.range_bin = 11;
        cfg.scene.interferer.doppler_bin = 18;
        let (table, report) = run_near_far(&cfg).unwrap();
        assert_eq!(table.len(), 5);
        assert_eq!(report.roc.curves.len(), 5);
        assert_eq!(report.roc.trials, 3);
        let ofdm = &report.peaks[3];
        assert!((ofdm.near - 1.0).abs() < 0.2);
    }
}
