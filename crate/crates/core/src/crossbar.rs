// SPDX-License-Identifier: Apache-2.0

//! Weighted sums over `M` input tracks and `L` detection columns.
//!
//! Each crossing `(i, j)` is a synapse: a notch on track `i` nucleating with
//! weight `w_ij` per input pulse, followed by the detection zone of column
//! `j`. Column sites sit one pitch apart along each track, so zones are
//! disjoint. Column `j` reads `sum_i N_sk,ij`, either through the summed Hall
//! voltages of the parallel tracks or through an MTJ activation.

use alloc::vec;
use alloc::vec::Vec;

use crate::device::{weight_scale_duration, DeviceCalibration, Polarity, PulseTrain};
use crate::nucleation::{draw, map_trials, StochasticModel};
use crate::readout::{hall_voltage, mtj_activation, normal, MeasurementTrace, MtjConfig, Phase, ReadoutNoise};
use crate::rng::Streams;
use crate::transport::{DetectionZone, Notch, SkyrmionPopulation};
use crate::{Error, Result};

/// Longitudinal distance between consecutive column sites, um.
pub const COLUMN_PITCH: f64 = 20.0;
/// Series resistance must exceed every track resistance by this factor.
pub const MIN_SERIES_RATIO: f64 = 50.0;
/// Allowed read-current imbalance between tracks.
pub const CURRENT_BUDGET: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(tag = "kind", rename_all = "snake_case"))]
pub enum ReadoutMode {
    /// Hall voltages of the tracks add, nV.
    LinearAhe,
    /// MTJ on the summed count, mV.
    Mtj(MtjConfig),
}

/// Parallel read circuit: every track has a series resistor at each end.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ReadCircuit {
    /// Ohm, one per track.
    pub track_resistances: Vec<f64>,
    /// Ohm, at each end of each track.
    pub series_resistance: f64,
}

impl ReadCircuit {
    /// The two-track demonstration circuit.
    pub fn two_track() -> Self {
        Self {
            track_resistances: vec![130.0, 120.0],
            series_resistance: 12_000.0,
        }
    }

    pub fn uniform(m_tracks: usize, track_resistance: f64, series_resistance: f64) -> Self {
        Self {
            track_resistances: vec![track_resistance; m_tracks],
            series_resistance,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurrentUniformity {
    /// `max_k |I_k / mean(I) - 1|`
    pub max_imbalance: f64,
    pub within_budget: bool,
}

/// Relative spread of the per-track read currents, `I_k ~ 1/(R_k + 2 R_s)`.
pub fn check_current_uniformity(circuit: &ReadCircuit) -> CurrentUniformity {
    let currents: Vec<f64> = circuit
        .track_resistances
        .iter()
        .map(|r| 1.0 / (r + 2.0 * circuit.series_resistance))
        .collect();
    if currents.is_empty() {
        return CurrentUniformity {
            max_imbalance: 0.0,
            within_budget: true,
        };
    }
    let mean = currents.iter().sum::<f64>() / currents.len() as f64;
    let max_imbalance = currents.iter().map(|i| (i / mean - 1.0).abs()).fold(0.0, f64::max);
    CurrentUniformity {
        max_imbalance,
        within_budget: max_imbalance < CURRENT_BUDGET,
    }
}

/// Notch and detection zone of one crossing.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Site {
    pub notch: Notch,
    pub zone: DetectionZone,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CrossbarConfig {
    pub cal: DeviceCalibration,
    pub m_tracks: usize,
    pub l_columns: usize,
    /// Row-major `m_tracks x l_columns`, skyrmions per pulse at the reference
    /// pulse duration.
    weights: Vec<f64>,
    pub circuit: ReadCircuit,
    /// One per column, shared by all tracks.
    pub sites: Vec<Site>,
    pub readout_mode: ReadoutMode,
    pub track_length: f64,
}

impl CrossbarConfig {
    /// Builds an array with the default layout: column `j` has its notch at
    /// `5 + j * COLUMN_PITCH` um and its zone starting at the notch.
    pub fn new(cal: DeviceCalibration, weights: Vec<Vec<f64>>, readout_mode: ReadoutMode) -> Result<Self> {
        let m_tracks = weights.len();
        let l_columns = weights.first().map_or(0, Vec::len);
        if m_tracks == 0 || l_columns == 0 {
            return Err(Error::Precondition("crossbar needs at least one track and one column"));
        }
        for row in &weights {
            if row.len() != l_columns {
                return Err(Error::DimensionMismatch {
                    expected: l_columns,
                    got: row.len(),
                });
            }
        }
        let sites = (0..l_columns)
            .map(|j| {
                let notch = Notch::at(Notch::DEFAULT_X + j as f64 * COLUMN_PITCH, &cal);
                Site {
                    notch,
                    zone: DetectionZone::starting_at(notch.x, &cal),
                }
            })
            .collect();
        let track_length = cal.track_length.max(Notch::DEFAULT_X + l_columns as f64 * COLUMN_PITCH);
        let circuit = if m_tracks == 2 {
            ReadCircuit::two_track()
        } else {
            ReadCircuit::uniform(m_tracks, 125.0, 12_000.0)
        };
        let config = Self {
            cal,
            m_tracks,
            l_columns,
            weights: weights.into_iter().flatten().collect(),
            circuit,
            sites,
            readout_mode,
            track_length,
        };
        config.validate()?;
        Ok(config)
    }

    /// Zones never saturate.
    pub fn without_capacity(mut self) -> Self {
        for s in &mut self.sites {
            s.zone = s.zone.unbounded();
        }
        self
    }

    pub fn weight(&self, track: usize, column: usize) -> f64 {
        self.weights[track * self.l_columns + column]
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn set_weight(&mut self, track: usize, column: usize, w: f64) -> Result<()> {
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::Precondition("weights must be finite and >= 0"));
        }
        self.weights[track * self.l_columns + column] = w;
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        self.cal.validate()?;
        if self.weights.len() != self.m_tracks * self.l_columns {
            return Err(Error::DimensionMismatch {
                expected: self.m_tracks * self.l_columns,
                got: self.weights.len(),
            });
        }
        if self.weights.iter().any(|w| !(*w >= 0.0) || !w.is_finite()) {
            return Err(Error::Precondition("weights must be finite and >= 0"));
        }
        if self.sites.len() != self.l_columns {
            return Err(Error::DimensionMismatch {
                expected: self.l_columns,
                got: self.sites.len(),
            });
        }
        if self.circuit.track_resistances.len() != self.m_tracks {
            return Err(Error::DimensionMismatch {
                expected: self.m_tracks,
                got: self.circuit.track_resistances.len(),
            });
        }
        let r_max = self.circuit.track_resistances.iter().copied().fold(0.0, f64::max);
        if self.circuit.series_resistance < MIN_SERIES_RATIO * r_max {
            return Err(Error::Precondition(
                "series resistance must be at least 50x the largest track resistance",
            ));
        }
        for s in &self.sites {
            if !s.zone.fits(self.track_length, self.cal.track_width) {
                return Err(Error::Precondition("detection zone must lie within the track"));
            }
        }
        for pair in self.sites.windows(2) {
            if pair[0].zone.x_max() >= pair[1].zone.x_min() {
                return Err(Error::Precondition("column zones must be disjoint"));
            }
        }
        if let ReadoutMode::Mtj(mtj) = &self.readout_mode {
            mtj.validate()?;
        }
        Ok(())
    }

    /// Weight of crossing `(i, j)` for a pulse of the given shape: the
    /// programmed weight scaled by the pulse-duration law.
    pub fn effective_weight(&self, track: usize, column: usize, pulse: &PulseTrain) -> Result<f64> {
        Ok(self.weight(track, column) * weight_scale_duration(&self.cal, pulse.duration)?)
    }

    fn check_input(&self, input: &InputVector) -> Result<()> {
        if input.pulses.len() != self.m_tracks {
            return Err(Error::DimensionMismatch {
                expected: self.m_tracks,
                got: input.pulses.len(),
            });
        }
        for p in &input.pulses {
            p.validate()?;
            if p.polarity != Polarity::Forward {
                return Err(Error::Precondition("crossbar inputs must be forward pulses"));
            }
        }
        Ok(())
    }
}

/// One pulse train per track; the pulse count is the input value.
#[derive(Debug, Clone, PartialEq)]
pub struct InputVector {
    pub pulses: Vec<PulseTrain>,
}

impl InputVector {
    /// Counts on identical pulse shapes.
    pub fn from_counts(counts: &[u32], shape: PulseTrain) -> Self {
        Self {
            pulses: counts.iter().map(|&c| shape.with_count(c)).collect(),
        }
    }
}

/// `sum_i w_ij N_pulse,i` for column `j`, ignoring stochasticity and
/// crowding.
pub fn expected_sum(config: &CrossbarConfig, input: &InputVector, column: usize) -> Result<f64> {
    config.check_input(input)?;
    if column >= config.l_columns {
        return Err(Error::DimensionMismatch {
            expected: config.l_columns,
            got: column + 1,
        });
    }
    let mut total = 0.0;
    for (i, pulse) in input.pulses.iter().enumerate() {
        total += config.effective_weight(i, column, pulse)? * f64::from(pulse.count);
    }
    Ok(total)
}

/// Result for one column of a crossbar run.
#[derive(Debug, Clone, PartialEq)]
pub struct ColumnOutput {
    pub expected_sum: f64,
    /// Skyrmions in the column's zone on each track.
    pub per_track: Vec<u32>,
    pub n_detec: u32,
    /// nV in linear mode, mV in MTJ mode.
    pub output: f64,
}

/// Simulates every track of the array under its input and returns the
/// per-column skyrmion counts (`[column][track]`).
///
/// Track `i` draws from `streams.child(i)`, so a track's evolution does not
/// depend on the other tracks' inputs.
pub fn simulate_counts(
    config: &CrossbarConfig,
    input: &InputVector,
    model: &StochasticModel,
    streams: Streams,
) -> Result<Vec<Vec<u32>>> {
    config.validate()?;
    config.check_input(input)?;
    model.validate()?;
    let mut counts = vec![vec![0u32; config.m_tracks]; config.l_columns];
    for (i, pulse) in input.pulses.iter().enumerate() {
        let pop = simulate_track(config, i, pulse, model, streams)?;
        for (j, site) in config.sites.iter().enumerate() {
            counts[j][i] = pop.count_in_zone(&site.zone);
        }
    }
    Ok(counts)
}

fn simulate_track(
    config: &CrossbarConfig,
    track: usize,
    pulse: &PulseTrain,
    model: &StochasticModel,
    streams: Streams,
) -> Result<SkyrmionPopulation> {
    let mut pop = SkyrmionPopulation::with_geometry(track as u32, config.track_length, config.cal.track_width);
    let mut rng = streams.child(track as u64).stream(0);
    let weights: Vec<f64> = (0..config.l_columns)
        .map(|j| config.effective_weight(track, j, pulse))
        .collect::<Result<_>>()?;
    let one = pulse.with_count(1);
    for _ in 0..pulse.count {
        pulse_track(config, &mut pop, &weights, &one, model, &mut rng)?;
    }
    Ok(pop)
}

/// One input pulse on one track: nucleate at every site, move, crowd.
fn pulse_track<R: rand::Rng + ?Sized>(
    config: &CrossbarConfig,
    pop: &mut SkyrmionPopulation,
    weights: &[f64],
    one: &PulseTrain,
    model: &StochasticModel,
    rng: &mut R,
) -> Result<()> {
    for (site, &w) in config.sites.iter().zip(weights) {
        let n = draw(w, model.p_bar, rng);
        pop.nucleate(n, site.notch);
    }
    pop.advance(one, &config.cal)?;
    for site in &config.sites {
        pop.apply_capacity(&site.zone);
    }
    Ok(())
}

fn noise_streams(streams: Streams) -> Streams {
    streams.child(u64::MAX)
}

/// Column output for per-track counts.
fn column_output<R: rand::Rng + ?Sized>(
    config: &CrossbarConfig,
    per_track: &[u32],
    noise: Option<&ReadoutNoise>,
    rng: &mut R,
) -> f64 {
    let total: u32 = per_track.iter().sum();
    match &config.readout_mode {
        ReadoutMode::LinearAhe => {
            let spread = noise.filter(|n| n.per_skyrmion).map(|_| ReadoutNoise {
                sigma_meas: 0.0,
                per_skyrmion: true,
            });
            let mut v: f64 = per_track
                .iter()
                .map(|&n| hall_voltage(n, &config.cal, spread.as_ref(), rng))
                .sum();
            if let Some(n) = noise.filter(|n| n.sigma_meas > 0.0) {
                v += n.sigma_meas * normal(rng);
            }
            v
        }
        ReadoutMode::Mtj(mtj) => mtj_activation(total, mtj, &config.cal),
    }
}

/// Runs the array once: stochastic nucleation, transport and crowding on
/// every track, then the column readout.
pub fn run_weighted_sum(
    config: &CrossbarConfig,
    input: &InputVector,
    model: &StochasticModel,
    noise: Option<&ReadoutNoise>,
    streams: Streams,
) -> Result<Vec<ColumnOutput>> {
    let counts = simulate_counts(config, input, model, streams)?;
    let mut rng = noise_streams(streams).stream(0);
    counts
        .into_iter()
        .enumerate()
        .map(|(j, per_track)| {
            let output = column_output(config, &per_track, noise, &mut rng);
            Ok(ColumnOutput {
                expected_sum: expected_sum(config, input, j)?,
                n_detec: per_track.iter().sum(),
                per_track,
                output,
            })
        })
        .collect()
}

/// Total detected count per column for `trials` independent runs. Trial `k`
/// uses `streams.child(k)`.
pub fn monte_carlo_counts(
    config: &CrossbarConfig,
    input: &InputVector,
    model: &StochasticModel,
    trials: u32,
    streams: Streams,
) -> Result<Vec<Vec<u32>>> {
    config.validate()?;
    config.check_input(input)?;
    model.validate()?;
    map_trials(trials, |k| {
        simulate_counts(config, input, model, streams.child(u64::from(k)))
            .map(|c| c.iter().map(|col| col.iter().sum()).collect())
    })
    .into_iter()
    .collect()
}

/// Measurement counts of the two-track demonstration sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Fig4Schedule {
    pub baseline: u32,
    pub stability: u32,
    pub post: u32,
}

impl Default for Fig4Schedule {
    fn default() -> Self {
        Self {
            baseline: 20,
            stability: 20,
            post: 10,
        }
    }
}

/// Two-track sequence: baseline, pulses on track 1 (one measurement per
/// pulse), a stability hold, the same for track 2, a saturating reset and
/// post-reset samples. Every sample is the summed signal of column 0.
///
/// Track `i` draws from `streams.child(i)`, as in [`run_weighted_sum`].
pub fn run_fig4_protocol(
    config: &CrossbarConfig,
    input: &InputVector,
    model: &StochasticModel,
    noise: Option<&ReadoutNoise>,
    schedule: Fig4Schedule,
    streams: Streams,
) -> Result<MeasurementTrace> {
    if config.m_tracks != 2 {
        return Err(Error::Protocol(alloc::format!(
            "two-track protocol needs 2 tracks, got {}",
            config.m_tracks
        )));
    }
    config.validate()?;
    config.check_input(input)?;
    model.validate()?;
    let mut pops: Vec<SkyrmionPopulation> = (0..2)
        .map(|i| SkyrmionPopulation::with_geometry(i, config.track_length, config.cal.track_width))
        .collect();
    let mut noise_rng = noise_streams(streams).stream(0);
    let mut trace = MeasurementTrace::new(crate::readout::REFERENCE_READ_CURRENT);
    let zone = config.sites[0].zone;

    let measure = |pops: &[SkyrmionPopulation], phase: Phase, trace: &mut MeasurementTrace, rng: &mut _| {
        let per_track: Vec<u32> = pops.iter().map(|p| p.count_in_zone(&zone)).collect();
        let v = column_output(config, &per_track, noise, rng);
        trace.push(phase, v, per_track.iter().sum());
    };

    for _ in 0..schedule.baseline {
        measure(&pops, Phase::Baseline, &mut trace, &mut noise_rng);
    }
    for (i, pulse) in input.pulses.iter().enumerate() {
        let weights: Vec<f64> = (0..config.l_columns)
            .map(|j| config.effective_weight(i, j, pulse))
            .collect::<Result<_>>()?;
        let mut rng = streams.child(i as u64).stream(0);
        let one = pulse.with_count(1);
        for _ in 0..pulse.count {
            pulse_track(config, &mut pops[i], &weights, &one, model, &mut rng)?;
            measure(&pops, Phase::Pulsing, &mut trace, &mut noise_rng);
        }
        for _ in 0..schedule.stability {
            measure(&pops, Phase::Stability, &mut trace, &mut noise_rng);
        }
    }
    for p in &mut pops {
        p.field_reset();
    }
    measure(&pops, Phase::Reset, &mut trace, &mut noise_rng);
    for _ in 0..schedule.post {
        measure(&pops, Phase::Post, &mut trace, &mut noise_rng);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slow() -> PulseTrain {
        PulseTrain::forward(1, 150.0, 50.0).unwrap()
    }

    fn linear(weights: Vec<Vec<f64>>) -> CrossbarConfig {
        CrossbarConfig::new(DeviceCalibration::paper2024(), weights, ReadoutMode::LinearAhe).unwrap()
    }

    #[test]
    fn expected_sum_examples() {
        let c = linear(vec![vec![1.0], vec![1.0]]);
        assert_eq!(
            expected_sum(&c, &InputVector::from_counts(&[0, 0], slow()), 0).unwrap(),
            0.0
        );
        assert_eq!(
            expected_sum(&c, &InputVector::from_counts(&[20, 20], slow()), 0).unwrap(),
            40.0
        );
        let c = linear(vec![vec![1.0], vec![0.0]]);
        assert_eq!(
            expected_sum(&c, &InputVector::from_counts(&[30, 30], slow()), 0).unwrap(),
            30.0
        );
        assert!(matches!(
            expected_sum(&c, &InputVector::from_counts(&[1], slow()), 0),
            Err(Error::DimensionMismatch { .. })
        ));
        assert!(expected_sum(&c, &InputVector::from_counts(&[1, 1], slow()), 1).is_err());
    }

    #[test]
    fn duration_tunes_weight() {
        let c = linear(vec![vec![1.0], vec![1.0]]);
        let input = InputVector {
            pulses: vec![slow().with_count(30), PulseTrain::forward(30, 150.0, 30.0).unwrap()],
        };
        assert_eq!(expected_sum(&c, &input, 0).unwrap(), 30.0);
    }

    #[test]
    fn config_validation() {
        let cal = DeviceCalibration::paper2024();
        assert!(CrossbarConfig::new(cal.clone(), vec![], ReadoutMode::LinearAhe).is_err());
        assert!(CrossbarConfig::new(cal.clone(), vec![vec![1.0], vec![1.0, 2.0]], ReadoutMode::LinearAhe).is_err());
        assert!(CrossbarConfig::new(cal.clone(), vec![vec![-1.0]], ReadoutMode::LinearAhe).is_err());
        let mut c = linear(vec![vec![1.0], vec![1.0]]);
        c.circuit.series_resistance = 1000.0;
        assert!(c.validate().is_err());
        let c = linear(vec![vec![1.0, 1.0, 1.0]]);
        assert_eq!(c.sites.len(), 3);
        assert!(c.track_length >= 65.0);
    }

    #[test]
    fn noise_free_two_track_sum() {
        let c = linear(vec![vec![1.0], vec![1.0]]).without_capacity();
        let out = run_weighted_sum(
            &c,
            &InputVector::from_counts(&[20, 20], slow()),
            &StochasticModel::deterministic(),
            None,
            Streams::new(1),
        )
        .unwrap();
        assert_eq!(out[0].n_detec, 40);
        assert_eq!(out[0].output, 880.0);
        assert_eq!(out[0].expected_sum, 40.0);
    }

    #[test]
    fn current_uniformity_examples() {
        let equal = ReadCircuit::uniform(3, 125.0, 12_000.0);
        assert_eq!(check_current_uniformity(&equal).max_imbalance, 0.0);
        let demo = check_current_uniformity(&ReadCircuit::two_track());
        assert!((demo.max_imbalance - 2.07e-4).abs() < 1e-6, "{}", demo.max_imbalance);
        assert!(demo.within_budget);
        let bare = check_current_uniformity(&ReadCircuit {
            series_resistance: 0.0,
            ..ReadCircuit::two_track()
        });
        assert!((bare.max_imbalance - 0.04).abs() < 1e-3);
        assert!(!bare.within_budget);
    }

    #[test]
    fn multi_column_zones_are_independent() {
        let c = linear(vec![vec![1.0, 0.0, 2.0], vec![0.0, 1.0, 1.0]]).without_capacity();
        let input = InputVector::from_counts(&[10, 5], slow());
        let out = run_weighted_sum(&c, &input, &StochasticModel::deterministic(), None, Streams::new(2)).unwrap();
        let n: Vec<u32> = out.iter().map(|o| o.n_detec).collect();
        assert_eq!(n, vec![10, 5, 25]);
        for o in &out {
            assert_eq!(f64::from(o.n_detec), o.expected_sum);
        }
    }

    #[test]
    fn fig4_requires_two_tracks() {
        let c = linear(vec![vec![1.0]]);
        let r = run_fig4_protocol(
            &c,
            &InputVector::from_counts(&[1], slow()),
            &StochasticModel::deterministic(),
            None,
            Fig4Schedule::default(),
            Streams::new(0),
        );
        assert!(matches!(r, Err(Error::Protocol(_))));
    }

    #[test]
    fn fig4_flat_when_weights_zero() {
        let c = linear(vec![vec![0.0], vec![0.0]]);
        let trace = run_fig4_protocol(
            &c,
            &InputVector::from_counts(&[20, 20], slow()),
            &StochasticModel::new(0.4).unwrap(),
            Some(&ReadoutNoise::measurement_only(25.0)),
            Fig4Schedule::default(),
            Streams::new(3),
        )
        .unwrap();
        assert_eq!(trace.samples.len(), 20 + 20 + 20 + 20 + 20 + 1 + 10);
        assert!(trace.samples.iter().all(|s| s.n_detec == 0));
        assert!(trace.samples.iter().all(|s| s.delta_v.abs() < 5.0 * 25.0));
        let stable = trace.segment_means(Phase::Stability);
        assert_eq!(stable.len(), 2);
    }
}
