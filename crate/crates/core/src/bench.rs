//! Repeat-and-average timing plus a power-draw energy model.

use std::path::Path;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Mutex;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Source of monotonic time in seconds.
pub trait Clock: Send + Sync {
    fn now(&self) -> f64;
}

/// Wall-clock time since construction.
#[derive(Debug)]
pub struct WallClock {
    start: Instant,
}

impl WallClock {
    pub fn new() -> Self {
        WallClock { start: Instant::now() }
    }
}

impl Default for WallClock {
    fn default() -> Self {
        Self::new()
    }
}

impl Clock for WallClock {
    fn now(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

/// Advances by a fixed step on every reading, so every timed interval has
/// length `step`. Makes reports reproducible byte for byte.
#[derive(Debug)]
pub struct StepClock {
    step_bits: u64,
    ticks: AtomicU64,
}

impl StepClock {
    pub fn new(step: f64) -> Self {
        StepClock {
            step_bits: step.to_bits(),
            ticks: AtomicU64::new(0),
        }
    }
}

impl Clock for StepClock {
    fn now(&self) -> f64 {
        let t = self.ticks.fetch_add(1, Ordering::SeqCst);
        t as f64 * f64::from_bits(self.step_bits)
    }
}

/// Only one timed section runs at a time, so concurrent work never
/// inflates a measurement.
static TIMED_SECTION: Mutex<()> = Mutex::new(());

/// Measures `f` once on `clock` while holding the timing lock.
pub fn measure<T>(clock: &dyn Clock, f: impl FnOnce() -> T) -> (T, f64) {
    let _guard = TIMED_SECTION.lock().unwrap_or_else(|p| p.into_inner());
    let start = clock.now();
    let out = f();
    let elapsed = (clock.now() - start).max(0.0);
    (out, elapsed)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimingResult {
    pub stage: String,
    pub durations_s: Vec<f64>,
    pub mean_s: f64,
}

impl TimingResult {
    pub fn from_durations(stage: impl Into<String>, durations_s: Vec<f64>) -> Self {
        let mean_s = if durations_s.is_empty() {
            0.0
        } else {
            durations_s.iter().sum::<f64>() / durations_s.len() as f64
        };
        TimingResult {
            stage: stage.into(),
            durations_s,
            mean_s,
        }
    }

    pub fn repeats(&self) -> usize {
        self.durations_s.len()
    }
}

/// Runs `action` `repeats` times, timing each run; returns the timing and
/// every run's output.
pub fn time_stage<T, F>(stage: &str, clock: &dyn Clock, repeats: usize, mut action: F) -> Result<(TimingResult, Vec<T>)>
where
    F: FnMut(usize) -> Result<T>,
{
    if repeats == 0 {
        return Err(Error::InvalidHyperparameter("repeats must be at least 1".into()));
    }
    let mut durations = Vec::with_capacity(repeats);
    let mut outputs = Vec::with_capacity(repeats);
    for r in 0..repeats {
        let (out, secs) = measure(clock, || action(r));
        outputs.push(out?);
        durations.push(secs);
    }
    Ok((TimingResult::from_durations(stage, durations), outputs))
}

/// Nominal power draw of a processing set and the grid's carbon intensity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerProfile {
    pub name: String,
    pub cpu_power_w: f64,
    pub gpu_power_w: f64,
    pub ram_power_w: f64,
    /// kg CO₂ per kWh.
    pub carbon_intensity: f64,
}

impl PowerProfile {
    pub fn new(name: impl Into<String>, cpu_w: f64, gpu_w: f64, ram_w: f64, intensity: f64) -> Result<Self> {
        let p = PowerProfile {
            name: name.into(),
            cpu_power_w: cpu_w,
            gpu_power_w: gpu_w,
            ram_power_w: ram_w,
            carbon_intensity: intensity,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [self.cpu_power_w, self.gpu_power_w, self.ram_power_w, self.carbon_intensity];
        if fields.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(Error::Config(format!(
                "power profile {:?} needs finite, non-negative values",
                self.name
            )));
        }
        Ok(())
    }

    pub fn total_power_w(&self) -> f64 {
        self.cpu_power_w + self.gpu_power_w + self.ram_power_w
    }
}

/// Illustrative profiles named after seven processing sets. The wattages
/// are nominal board/TDP-style figures and the intensity a generic grid
/// average; override them for any real study.
pub fn default_profiles() -> Vec<PowerProfile> {
    let p = |name: &str, cpu, gpu, ram| PowerProfile {
        name: name.to_string(),
        cpu_power_w: cpu,
        gpu_power_w: gpu,
        ram_power_w: ram,
        carbon_intensity: 0.475,
    };
    vec![
        p("T4-GPU-HighRAM", 42.5, 70.0, 9.8),
        p("CPU-HighRAM", 42.5, 0.0, 9.8),
        p("CPU", 42.5, 0.0, 4.8),
        p("T4-GPU", 42.5, 70.0, 4.8),
        p("A100-GPU-HighRAM", 42.5, 400.0, 31.9),
        p("V100-GPU", 42.5, 300.0, 4.8),
        p("V100-GPU-HighRAM", 42.5, 300.0, 9.8),
    ]
}

pub fn find_profile<'a>(profiles: &'a [PowerProfile], name: &str) -> Option<&'a PowerProfile> {
    profiles.iter().find(|p| p.name == name)
}

/// Reads one profile object, or a JSON array of them.
pub fn load_profiles(path: &Path) -> Result<Vec<PowerProfile>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_profiles(&text)
}

pub fn parse_profiles(text: &str) -> Result<Vec<PowerProfile>> {
    let value: serde_json::Value = serde_json::from_str(text)?;
    let profiles: Vec<PowerProfile> = if value.is_array() {
        serde_json::from_value(value)?
    } else {
        vec![serde_json::from_value(value)?]
    };
    for p in &profiles {
        p.validate()?;
    }
    Ok(profiles)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub energy_kwh: f64,
    pub emissions_kg: f64,
    pub profile: String,
    pub duration_s: f64,
}

/// `energy = duration × total watts / 3.6e6`, `emissions = energy × intensity`.
pub fn estimate_energy(duration_s: f64, profile: &PowerProfile) -> Result<EnergyEstimate> {
    if !(duration_s >= 0.0) || !duration_s.is_finite() {
        return Err(Error::InvalidHyperparameter(format!("duration must be >= 0, got {duration_s}")));
    }
    let energy_kwh = duration_s * profile.total_power_w() / 3.6e6;
    Ok(EnergyEstimate {
        energy_kwh,
        emissions_kg: energy_kwh * profile.carbon_intensity,
        profile: profile.name.clone(),
        duration_s,
    })
}
