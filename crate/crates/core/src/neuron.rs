//! Integrate-and-fire neuron with reset-by-subtraction.
//!
//! The membrane follows `v(t) = v(t-1) + I(t) - θ·s_out(t)` with `v(0) = 0`,
//! no leakage and `I(t) = Σ_j w_j s_j(t)`. All arithmetic is exact, so the
//! spike count can be compared bit-for-bit against `⌊Σ_j w_j k_j / θ⌋`.

use num_traits::{Signed, ToPrimitive, Zero};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::rational::Rational;

/// Binary spike slots over a window of `T` timesteps.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpikeTrain {
    slots: Vec<bool>,
}

impl SpikeTrain {
    pub fn new(slots: Vec<bool>) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::Domain("spike train window must be at least 1".into()));
        }
        Ok(Self { slots })
    }

    pub fn silent(window: usize) -> Result<Self> {
        Self::new(vec![false; window])
    }

    pub fn window(&self) -> usize {
        self.slots.len()
    }

    pub fn slots(&self) -> &[bool] {
        &self.slots
    }

    pub fn spike_count(&self) -> usize {
        self.slots.iter().filter(|&&s| s).count()
    }

    pub fn fires_at(&self, t: usize) -> bool {
        self.slots[t]
    }
}

/// `N_src` input trains sharing one window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SpikeMatrix {
    trains: Vec<SpikeTrain>,
}

impl SpikeMatrix {
    pub fn new(trains: Vec<SpikeTrain>) -> Result<Self> {
        let Some(first) = trains.first() else {
            return Err(Error::Domain("spike matrix needs at least one channel".into()));
        };
        let window = first.window();
        if let Some((j, bad)) = trains.iter().enumerate().find(|(_, tr)| tr.window() != window) {
            return Err(Error::Dimension(format!(
                "channel {j} has window {} but channel 0 has window {window}",
                bad.window()
            )));
        }
        Ok(Self { trains })
    }

    /// Rate-encodes per-channel counts with one schedule. Seeded schedules get a
    /// distinct stream per channel derived from the base seed.
    pub fn encode(counts: &[usize], window: usize, schedule: Schedule) -> Result<Self> {
        let trains = counts
            .iter()
            .enumerate()
            .map(|(j, &k)| {
                let sched = match schedule {
                    Schedule::EvenSpaced => Schedule::EvenSpaced,
                    Schedule::SeededRandom(seed) => {
                        Schedule::SeededRandom(seed.wrapping_add((j as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
                    }
                };
                encode_rate(k, window, sched)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(trains)
    }

    pub fn channels(&self) -> usize {
        self.trains.len()
    }

    pub fn window(&self) -> usize {
        self.trains[0].window()
    }

    pub fn trains(&self) -> &[SpikeTrain] {
        &self.trains
    }

    /// Per-channel spike counts `k_j`.
    pub fn counts(&self) -> Vec<usize> {
        self.trains.iter().map(SpikeTrain::spike_count).collect()
    }

    pub fn total_spikes(&self) -> usize {
        self.trains.iter().map(SpikeTrain::spike_count).sum()
    }
}

/// Synaptic weights and firing threshold of one neuron.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeuronParams {
    weights: Vec<Rational>,
    threshold: Rational,
}

impl NeuronParams {
    pub fn new(weights: Vec<Rational>, threshold: Rational) -> Result<Self> {
        if !threshold.is_positive() {
            return Err(Error::Domain(format!("threshold must be positive, got {threshold}")));
        }
        if weights.is_empty() {
            return Err(Error::Domain("neuron needs at least one input weight".into()));
        }
        Ok(Self { weights, threshold })
    }

    pub fn weights(&self) -> &[Rational] {
        &self.weights
    }

    pub fn threshold(&self) -> &Rational {
        &self.threshold
    }

    fn check_inputs(&self, inputs: &SpikeMatrix) -> Result<()> {
        if inputs.channels() != self.weights.len() {
            return Err(Error::Dimension(format!(
                "{} input channels but {} weights",
                inputs.channels(),
                self.weights.len()
            )));
        }
        Ok(())
    }

    /// `Σ_j w_j k_j`.
    pub fn weighted_drive(&self, counts: &[usize]) -> Result<Rational> {
        if counts.len() != self.weights.len() {
            return Err(Error::Dimension(format!(
                "{} counts but {} weights",
                counts.len(),
                self.weights.len()
            )));
        }
        Ok(self
            .weights
            .iter()
            .zip(counts)
            .map(|(w, &k)| w * Rational::from_integer(k.into()))
            .sum())
    }

    fn current_at(&self, inputs: &SpikeMatrix, t: usize) -> Rational {
        self.weights
            .iter()
            .zip(inputs.trains())
            .filter(|(_, train)| train.fires_at(t))
            .map(|(w, _)| w)
            .sum()
    }
}

/// Placement rule for [`encode_rate`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Schedule {
    /// Spikes at `⌊i·T/k⌋` for `i = 0..k`.
    EvenSpaced,
    /// A uniform `k`-subset of the window drawn from the seed.
    SeededRandom(u64),
}

/// Rate-encodes an activation `k/T` as a train with exactly `k` spikes.
pub fn encode_rate(k: usize, window: usize, schedule: Schedule) -> Result<SpikeTrain> {
    if window == 0 {
        return Err(Error::Domain("window must be at least 1".into()));
    }
    if k > window {
        return Err(Error::Domain(format!("spike count {k} exceeds window {window}")));
    }
    let mut slots = vec![false; window];
    match schedule {
        Schedule::EvenSpaced => {
            for i in 0..k {
                slots[i * window / k] = true;
            }
        }
        Schedule::SeededRandom(seed) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            for pos in rand::seq::index::sample(&mut rng, window, k) {
                slots[pos] = true;
            }
        }
    }
    SpikeTrain::new(slots)
}

/// Full record of one simulated window.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimulationTrace {
    /// `v(1..=T)`.
    pub potentials: Vec<Rational>,
    pub out_spikes: SpikeTrain,
    pub n: usize,
    /// `v(T)`.
    pub residual: Rational,
    /// Whether `0 ≤ I(t) < θ` held at every step.
    pub premise_ok: bool,
}

impl SimulationTrace {
    /// `ε = v(T)/θ`.
    pub fn residual_eps(&self, params: &NeuronParams) -> Rational {
        &self.residual / params.threshold()
    }
}

pub fn simulate_if(inputs: &SpikeMatrix, params: &NeuronParams) -> Result<SimulationTrace> {
    params.check_inputs(inputs)?;
    let theta = params.threshold();
    let window = inputs.window();
    let mut v = Rational::zero();
    let mut potentials = Vec::with_capacity(window);
    let mut out = Vec::with_capacity(window);
    let mut premise_ok = true;
    for t in 0..window {
        let current = params.current_at(inputs, t);
        premise_ok &= !current.is_negative() && &current < theta;
        v += current;
        let fire = &v >= theta;
        if fire {
            v -= theta;
        }
        out.push(fire);
        potentials.push(v.clone());
    }
    let out_spikes = SpikeTrain::new(out)?;
    Ok(SimulationTrace {
        n: out_spikes.spike_count(),
        residual: v,
        potentials,
        out_spikes,
        premise_ok,
    })
}

/// `⌊Σ_j w_j k_j / θ⌋`, exactly.
pub fn spike_count_oracle(counts: &[usize], params: &NeuronParams) -> Result<usize> {
    // NeuronParams guarantees θ > 0; keep the check for hand-built callers.
    if !params.threshold().is_positive() {
        return Err(Error::Domain("threshold must be positive".into()));
    }
    let drive = params.weighted_drive(counts)?;
    if drive.is_negative() {
        return Err(Error::OutOfPremise(format!("net drive {drive} is negative")));
    }
    (drive / params.threshold())
        .floor()
        .to_integer()
        .to_usize()
        .ok_or_else(|| Error::Domain("spike count does not fit in usize".into()))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StepCheck {
    pub current: Rational,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PremiseReport {
    pub steps: Vec<StepCheck>,
    pub all_ok: bool,
}

impl PremiseReport {
    pub fn violations(&self) -> impl Iterator<Item = (usize, &StepCheck)> {
        self.steps.iter().enumerate().filter(|(_, s)| !s.ok)
    }
}

/// Per-step check of `0 ≤ I(t) < θ`.
pub fn check_premise(inputs: &SpikeMatrix, params: &NeuronParams) -> Result<PremiseReport> {
    params.check_inputs(inputs)?;
    let theta = params.threshold();
    let steps: Vec<StepCheck> = (0..inputs.window())
        .map(|t| {
            let current = params.current_at(inputs, t);
            let ok = !current.is_negative() && &current < theta;
            StepCheck { current, ok }
        })
        .collect();
    let all_ok = steps.iter().all(|s| s.ok);
    Ok(PremiseReport { steps, all_ok })
}
