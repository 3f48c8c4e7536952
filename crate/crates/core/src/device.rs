//! Linear ion-drift memristor and a write-verify programming loop.
//!
//! The device is two resistors in series: a doped region of length `w`
//! with resistance `R_on * w / D` and an undoped remainder with
//! `R_off * (1 - w / D)`. Current through the device moves the boundary at
//! a rate proportional to `mu_v * R_on / D`. Positive current grows the
//! doped region, which lowers the resistance.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemristorDevice {
    /// Doped region length (m).
    pub w: f64,
    /// Device thickness (m).
    pub d: f64,
    pub r_on: f64,
    pub r_off: f64,
    /// Dopant mobility (m^2 V^-1 s^-1).
    pub mu_v: f64,
}

impl MemristorDevice {
    pub fn new(w: f64, d: f64, r_on: f64, r_off: f64, mu_v: f64) -> Result<Self> {
        if !(d > 0.0) || !(r_on > 0.0) || !(r_off > r_on) || !(mu_v >= 0.0) {
            return Err(Error::Param(format!(
                "device needs D > 0, 0 < R_on < R_off, mu_v >= 0 (got D={d}, R_on={r_on}, R_off={r_off}, mu_v={mu_v})"
            )));
        }
        if !(0.0..=d).contains(&w) {
            return Err(Error::Param(format!("state w={w} outside [0, {d}]")));
        }
        Ok(Self {
            w,
            d,
            r_on,
            r_off,
            mu_v,
        })
    }

    /// Dimensionless parameters: `D = 1`, `R_on = 1`, `R_off = 160`.
    /// A 1 V, 1 s pulse at mid-state moves `w` by roughly one percent.
    pub fn normalized(w: f64) -> Self {
        Self {
            w: w.clamp(0.0, 1.0),
            d: 1.0,
            r_on: 1.0,
            r_off: 160.0,
            mu_v: 0.8,
        }
    }

    /// TiO2-like parameters: 10 nm film, 100 ohm / 16 kohm, 1e-14 m^2/(V s).
    pub fn tio2(w_fraction: f64) -> Self {
        let d = 10e-9;
        Self {
            w: w_fraction.clamp(0.0, 1.0) * d,
            d,
            r_on: 100.0,
            r_off: 16e3,
            mu_v: 1e-14,
        }
    }

    pub fn resistance(&self) -> f64 {
        let x = self.w / self.d;
        self.r_on * x + self.r_off * (1.0 - x)
    }

    pub fn conductance(&self) -> f64 {
        1.0 / self.resistance()
    }

    /// `(G - G_off) / (G_on - G_off)`, in `[0,1]`.
    pub fn normalized_conductance(&self) -> f64 {
        let g_on = 1.0 / self.r_on;
        let g_off = 1.0 / self.r_off;
        ((self.conductance() - g_off) / (g_on - g_off)).clamp(0.0, 1.0)
    }

    /// State `w` at which the normalized conductance equals `target`.
    pub fn state_for_normalized(&self, target: f64) -> f64 {
        let g_on = 1.0 / self.r_on;
        let g_off = 1.0 / self.r_off;
        let r = 1.0 / (g_off + target.clamp(0.0, 1.0) * (g_on - g_off));
        ((self.r_off - r) / (self.r_off - self.r_on) * self.d).clamp(0.0, self.d)
    }

    /// One forward-Euler step under applied voltage `v` for `dt` seconds.
    pub fn step(&self, v: f64, dt: f64) -> Self {
        let i = v / self.resistance();
        let dw = self.mu_v * self.r_on / self.d * i * dt;
        Self {
            w: (self.w + dw).clamp(0.0, self.d),
            ..*self
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IvSample {
    pub t: f64,
    pub v: f64,
    pub i: f64,
    pub w: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IvTrace {
    pub samples: Vec<IvSample>,
}

impl IvTrace {
    /// CSV with header `t,v,i,w`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("t,v,i,w\n");
        for s in &self.samples {
            out.push_str(&format!("{},{},{},{}\n", s.t, s.v, s.i, s.w));
        }
        out
    }
}

/// Drives the device with `waveform(t)` for `steps` Euler steps of `dt`.
///
/// Each sample records the current through the device at the sampled
/// voltage before the state is advanced.
pub fn simulate_iv(
    dev: &MemristorDevice,
    waveform: impl Fn(f64) -> f64,
    dt: f64,
    steps: usize,
) -> Result<IvTrace> {
    if steps == 0 {
        return Err(Error::Param("steps must be at least 1".into()));
    }
    if !(dt > 0.0) {
        return Err(Error::Param(format!("dt must be positive, got {dt}")));
    }
    let mut state = *dev;
    let mut samples = Vec::with_capacity(steps);
    for n in 0..steps {
        let t = n as f64 * dt;
        let v = waveform(t);
        samples.push(IvSample {
            t,
            v,
            i: v / state.resistance(),
            w: state.w,
        });
        state = state.step(v, dt);
    }
    Ok(IvTrace { samples })
}

/// `amplitude * sin(2 pi f t)`.
pub fn sine(amplitude: f64, frequency: f64) -> impl Fn(f64) -> f64 {
    move |t| amplitude * (std::f64::consts::TAU * frequency * t).sin()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProgramResult {
    pub achieved: f64,
    pub pulses: usize,
    pub converged: bool,
}

/// Pulse-read-compare programming of a single device.
///
/// Each pulse is sized from the ideal model to land on the target and then
/// scaled by a random factor in `[1 - jitter, 1 + jitter]`, standing in for
/// cycle-to-cycle switching variation. Pulse width is capped, so large moves
/// need many pulses.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WriteVerify {
    /// Device in its reset state; programming always starts here.
    pub device: MemristorDevice,
    pub pulse_voltage: f64,
    pub max_pulse_width: f64,
    pub jitter: f64,
}

impl Default for WriteVerify {
    fn default() -> Self {
        Self {
            device: MemristorDevice::normalized(0.0),
            pulse_voltage: 1.0,
            max_pulse_width: 1.0,
            jitter: 0.5,
        }
    }
}

impl WriteVerify {
    pub fn program(
        &self,
        target: f64,
        tolerance: f64,
        max_pulses: usize,
        seed: u64,
    ) -> Result<ProgramResult> {
        if !(0.0..=1.0).contains(&target) {
            return Err(Error::Param(format!("target {target} outside [0,1]")));
        }
        if !(tolerance > 0.0) {
            return Err(Error::Param(format!(
                "tolerance must be positive, got {tolerance}"
            )));
        }
        if !(0.0..1.0).contains(&self.jitter) {
            return Err(Error::Param(format!(
                "jitter {} outside [0,1)",
                self.jitter
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut dev = self.device;
        let w_target = dev.state_for_normalized(target);
        let mut pulses = 0;
        loop {
            let achieved = dev.normalized_conductance();
            if (achieved - target).abs() <= tolerance {
                return Ok(ProgramResult {
                    achieved,
                    pulses,
                    converged: true,
                });
            }
            if pulses >= max_pulses {
                return Ok(ProgramResult {
                    achieved,
                    pulses,
                    converged: false,
                });
            }
            let dw = w_target - dev.w;
            let v = self.pulse_voltage.copysign(dw);
            let rate = dev.mu_v * dev.r_on / dev.d * self.pulse_voltage / dev.resistance();
            let width = (dw.abs() / rate).min(self.max_pulse_width);
            let factor = 1.0 + self.jitter * rng.random_range(-1.0..=1.0);
            dev = dev.step(v, width * factor);
            pulses += 1;
        }
    }
}

/// Write-verify with the default normalized device and pulse settings.
pub fn program_conductance(
    target: f64,
    tolerance: f64,
    max_pulses: usize,
    seed: u64,
) -> Result<ProgramResult> {
    WriteVerify::default().program(target, tolerance, max_pulses, seed)
}
