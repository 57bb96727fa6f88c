//! Threshold detection on range-Doppler maps and Monte Carlo estimates of
//! detection and false-alarm probabilities.

use std::io::Write;

use serde::Serialize;

use crate::bounds::{wilson_fraction, Z95};
use crate::error::{invalid, Error, Result};
use crate::receiver::RangeDopplerMap;

/// Range and Doppler bin of a target.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize)]
pub struct Bin {
    pub range: usize,
    pub doppler: usize,
}

impl Bin {
    pub fn new(range: usize, doppler: usize) -> Self {
        Self { range, doppler }
    }
}

/// The near and far target bins.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct TargetBins {
    pub near: Bin,
    pub far: Bin,
}

impl TargetBins {
    fn contains(&self, l: usize, nu: usize) -> bool {
        [self.near, self.far].iter().any(|b| b.range == l && b.doppler == nu)
    }

    fn check(&self, map: &RangeDopplerMap) -> Result<()> {
        for b in [self.near, self.far] {
            if b.range > map.n_max() || b.doppler == 0 || b.doppler > map.doppler_bins() {
                return Err(invalid(format!("target bin ({}, {}) outside map", b.range, b.doppler)));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DetectionOutcome {
    pub near: bool,
    pub far: bool,
    pub false_alarm: bool,
    /// Non-target bins above the threshold in the false-alarm search region.
    pub spurious: Vec<Bin>,
}

/// `|R[l, ν]| > η` at each target bin; a false alarm is any exceedance at
/// `l ∈ 1..=n_max`, `ν ∈ 1..=M` outside the target bins.
pub fn detect(map: &RangeDopplerMap, eta: f64, targets: &TargetBins) -> Result<DetectionOutcome> {
    targets.check(map)?;
    let spurious: Vec<Bin> = map
        .bins()
        .filter(|&(l, nu, v)| l >= 1 && !targets.contains(l, nu) && v.norm() > eta)
        .map(|(l, nu, _)| Bin::new(l, nu))
        .collect();
    Ok(DetectionOutcome {
        near: map.magnitude(targets.near.range, targets.near.doppler) > eta,
        far: map.magnitude(targets.far.range, targets.far.doppler) > eta,
        false_alarm: !spurious.is_empty(),
        spurious,
    })
}

/// The three magnitudes a threshold test needs; evaluating a whole
/// threshold grid against a summary is equivalent to calling [`detect`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MapSummary {
    pub near: f64,
    pub far: f64,
    pub max_spurious: f64,
}

impl MapSummary {
    pub fn of(map: &RangeDopplerMap, targets: &TargetBins) -> Result<Self> {
        targets.check(map)?;
        let max_spurious = map
            .bins()
            .filter(|&(l, nu, _)| l >= 1 && !targets.contains(l, nu))
            .map(|(_, _, v)| v.norm())
            .fold(0.0, f64::max);
        Ok(Self {
            near: map.magnitude(targets.near.range, targets.near.doppler),
            far: map.magnitude(targets.far.range, targets.far.doppler),
            max_spurious,
        })
    }

    pub fn outcome(&self, eta: f64) -> (bool, bool, bool) {
        (self.near > eta, self.far > eta, self.max_spurious > eta)
    }
}

/// Counts of detection events over trials; merging is plain addition.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize)]
pub struct DetectionTally {
    pub both: u64,
    pub near_only: u64,
    pub far_only: u64,
    pub neither: u64,
    pub false_alarms: u64,
}

impl DetectionTally {
    pub fn record(&mut self, near: bool, far: bool, false_alarm: bool) {
        match (near, far) {
            (true, true) => self.both += 1,
            (true, false) => self.near_only += 1,
            (false, true) => self.far_only += 1,
            (false, false) => self.neither += 1,
        }
        self.false_alarms += u64::from(false_alarm);
    }

    pub fn add(&mut self, outcome: &DetectionOutcome) {
        self.record(outcome.near, outcome.far, outcome.false_alarm);
    }

    pub fn merge(self, other: Self) -> Self {
        Self {
            both: self.both + other.both,
            near_only: self.near_only + other.near_only,
            far_only: self.far_only + other.far_only,
            neither: self.neither + other.neither,
            false_alarms: self.false_alarms + other.false_alarms,
        }
    }

    pub fn trials(&self) -> u64 {
        self.both + self.near_only + self.far_only + self.neither
    }
}

/// `P(both) + ½ P(near only) + ½ P(far only)`.
pub fn estimate_pd(tally: &DetectionTally) -> Result<f64> {
    let n = tally.trials();
    if n == 0 {
        return Err(Error::Empty);
    }
    Ok((tally.both as f64 + 0.5 * (tally.near_only + tally.far_only) as f64) / n as f64)
}

/// Fraction of trials with any false alarm.
pub fn estimate_pf(tally: &DetectionTally) -> Result<f64> {
    let n = tally.trials();
    if n == 0 {
        return Err(Error::Empty);
    }
    Ok(tally.false_alarms as f64 / n as f64)
}

/// `points` log-spaced thresholds over `[floor / 10, 2 · peak]`.
pub fn eta_grid(floor: f64, peak: f64, points: usize) -> Result<Vec<f64>> {
    let (lo, hi) = (floor * 0.1, 2.0 * peak);
    if !(lo > 0.0 && hi > lo && hi.is_finite()) || points < 2 {
        return Err(invalid(format!("bad threshold range [{lo}, {hi}] with {points} points")));
    }
    let (a, b) = (lo.ln(), hi.ln());
    Ok((0..points)
        .map(|i| (a + (b - a) * i as f64 / (points - 1) as f64).exp())
        .collect())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RocCurve {
    pub label: String,
    pub pd: Vec<f64>,
    pub pf: Vec<f64>,
    pub pd_ci: Vec<(f64, f64)>,
    pub pf_ci: Vec<(f64, f64)>,
}

impl RocCurve {
    /// Indices of grid points with `P_d = 1` and `P_f = 0`.
    pub fn sweet_spot(&self) -> Vec<usize> {
        (0..self.pd.len())
            .filter(|&i| self.pd[i] == 1.0 && self.pf[i] == 0.0)
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RocCurves {
    pub eta: Vec<f64>,
    pub trials: u64,
    pub curves: Vec<RocCurve>,
}

impl RocCurves {
    pub fn get(&self, label: &str) -> Option<&RocCurve> {
        self.curves.iter().find(|c| c.label == label)
    }

    /// CSV with columns `eta,pd,pf,ci_lo,ci_hi,waveform`; the interval bounds `P_d`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["eta", "pd", "pf", "ci_lo", "ci_hi", "waveform"])?;
        for c in &self.curves {
            for (i, eta) in self.eta.iter().enumerate() {
                w.serialize((eta, c.pd[i], c.pf[i], c.pd_ci[i].0, c.pd_ci[i].1, &c.label))?;
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Evaluates every labelled set of per-trial summaries on a common grid.
pub fn threshold_sweep(sets: &[(String, Vec<MapSummary>)], eta: &[f64]) -> Result<RocCurves> {
    let trials = sets.first().map_or(0, |(_, s)| s.len());
    if trials == 0 {
        return Err(Error::Empty);
    }
    if sets.iter().any(|(_, s)| s.len() != trials) {
        return Err(Error::DimensionMismatch("waveforms have different trial counts".into()));
    }
    let n = trials as u64;
    let curves = sets
        .iter()
        .map(|(label, summaries)| {
            let tallies: Vec<DetectionTally> = eta
                .iter()
                .map(|&e| {
                    summaries.iter().fold(DetectionTally::default(), |mut t, s| {
                        let (a, b, f) = s.outcome(e);
                        t.record(a, b, f);
                        t
                    })
                })
                .collect();
            let pd: Vec<f64> = tallies.iter().map(estimate_pd).collect::<Result<_>>()?;
            let pf: Vec<f64> = tallies.iter().map(estimate_pf).collect::<Result<_>>()?;
            Ok(RocCurve {
                label: label.clone(),
                pd_ci: pd.iter().map(|&p| wilson_fraction(p, n, Z95)).collect(),
                pf_ci: pf.iter().map(|&p| wilson_fraction(p, n, Z95)).collect(),
                pd,
                pf,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RocCurves {
        eta: eta.to_vec(),
        trials: n,
        curves,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::receiver::sc_range_doppler;
    use crate::scene::Grid;
    use num_complex::Complex64;

    /// Map with value 1 at (2, 3), 0.3 at (4, 1), 0.01 floor elsewhere; M = 4.
    fn hand_map() -> RangeDopplerMap {
        // build through the slow-time DFT of a tone so the receiver does the placement
        let (rows, m) = (6, 4);
        let mut r = Grid::zeros(rows, m);
        let tone = |nu: usize, mi: usize, a: f64| {
            Complex64::from_polar(a, 2.0 * std::f64::consts::PI * (nu * mi) as f64 / m as f64)
        };
        for mi in 0..m {
            let col = r.column_mut(mi);
            for (l, v) in col.iter_mut().enumerate() {
                *v = tone(2, mi, 0.01) * (l as f64 + 1.0) / 6.0;
            }
            col[2] = tone(3, mi, 1.0);
            col[4] = tone(1, mi, 0.3);
        }
        sc_range_doppler(&r, 16).unwrap()
    }

    fn targets() -> TargetBins {
        TargetBins {
            near: Bin::new(2, 3),
            far: Bin::new(4, 1),
        }
    }

    #[test]
    fn detect_hand_map() {
        let map = hand_map();
        let out = detect(&map, 0.5, &targets()).unwrap();
        assert!(out.near && !out.far && !out.false_alarm);
        let out = detect(&map, 0.1, &targets()).unwrap();
        assert!(out.near && out.far && !out.false_alarm);
        let out = detect(&map, 0.005, &targets()).unwrap();
        assert!(out.false_alarm);
        assert!(out.spurious.iter().all(|b| b.range >= 1));
        let out = detect(&map, 0.0, &targets()).unwrap();
        assert!(out.near && out.far && out.false_alarm);
        let out = detect(&map, 2.0 * map.max_abs(), &targets()).unwrap();
        assert!(!out.near && !out.far && !out.false_alarm);
    }

    #[test]
    fn summary_agrees_with_detect() {
        let map = hand_map();
        let s = MapSummary::of(&map, &targets()).unwrap();
        for eta in [0.0, 0.004, 0.006, 0.009, 0.2, 0.5, 1.5] {
            let d = detect(&map, eta, &targets()).unwrap();
            assert_eq!(s.outcome(eta), (d.near, d.far, d.false_alarm));
        }
    }

    #[test]
    fn out_of_map_targets_rejected() {
        let bad = TargetBins {
            near: Bin::new(9, 1),
            far: Bin::new(1, 1),
        };
        assert!(detect(&hand_map(), 0.1, &bad).is_err());
        let bad = TargetBins {
            near: Bin::new(1, 0),
            far: Bin::new(1, 1),
        };
        assert!(MapSummary::of(&hand_map(), &bad).is_err());
    }

    #[test]
    fn pd_weights() {
        let mut t = DetectionTally::default();
        (0..3).for_each(|_| t.record(true, true, false));
        assert_eq!(estimate_pd(&t).unwrap(), 1.0);
        let mut t = DetectionTally::default();
        (0..3).for_each(|_| t.record(true, false, false));
        assert_eq!(estimate_pd(&t).unwrap(), 0.5);
        let t = DetectionTally {
            both: 2,
            near_only: 1,
            far_only: 0,
            neither: 1,
            false_alarms: 3,
        };
        assert_eq!(estimate_pd(&t).unwrap(), 0.625);
        assert_eq!(estimate_pf(&t).unwrap(), 0.75);
        assert!(estimate_pd(&DetectionTally::default()).is_err());
        assert!(estimate_pf(&DetectionTally::default()).is_err());
        assert_eq!(t.merge(t).trials(), 8);
    }

    #[test]
    fn eta_grid_spacing() {
        let g = eta_grid(0.01, 1.0, 200).unwrap();
        assert_eq!(g.len(), 200);
        assert!((g[0] - 0.001).abs() < 1e-15);
        assert!((g[199] - 2.0).abs() < 1e-12);
        let r = g[1] / g[0];
        assert!(g.windows(2).all(|w| (w[1] / w[0] - r).abs() < 1e-9));
        assert!(eta_grid(0.0, 1.0, 10).is_err());
    }

    #[test]
    fn sweep_single_trial_is_indicator_step() {
        let s = MapSummary {
            near: 1.0,
            far: 0.3,
            max_spurious: 0.05,
        };
        let eta = [0.01, 0.1, 0.5, 2.0];
        let roc = threshold_sweep(&[("x".into(), vec![s])], &eta).unwrap();
        let c = roc.get("x").unwrap();
        assert_eq!(c.pd, vec![1.0, 1.0, 0.5, 0.0]);
        assert_eq!(c.pf, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(c.sweet_spot(), vec![1]);
        let mut out = Vec::new();
        roc.write_csv(&mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert!(text.starts_with("eta,pd,pf,ci_lo,ci_hi,waveform\n"));
        assert_eq!(text.lines().count(), 5);
        assert!(threshold_sweep(&[], &eta).is_err());
    }
}
