// SPDX-License-Identifier: Apache-2.0

//! Point-particle kinematics of skyrmions on a track.
//!
//! Coordinates are in um: `x` runs along the track from the input end, `y`
//! across it from the notch edge. A forward pulse of duration `t` at velocity
//! `v(J)` moves every skyrmion by `dx = v t` and, through the skyrmion Hall
//! effect, `dy = dx tan(theta)` towards the far edge, where it annihilates.

use alloc::vec::Vec;

use rand::Rng;

use crate::device::{velocity_from_current, DeviceCalibration, Polarity, PulseTrain};
use crate::{Error, Result};

/// Tolerance for "has reached the notch" on the way back.
const NOTCH_TOLERANCE: f64 = 1e-9;
/// How far past the downstream zone edge crowded-out skyrmions are pushed.
const DISPLACE_MARGIN: f64 = 1e-6;

/// A nucleation site on the track.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Notch {
    pub x: f64,
    pub y: f64,
}

impl Notch {
    /// Default longitudinal notch position, um from the input end.
    pub const DEFAULT_X: f64 = 5.0;

    /// Notch at `x = 5 um`, at the tip of the constriction.
    pub fn for_calibration(cal: &DeviceCalibration) -> Self {
        Self::at(Self::DEFAULT_X, cal)
    }

    pub fn at(x: f64, cal: &DeviceCalibration) -> Self {
        Self {
            x,
            y: cal.notch_depth_fraction * cal.track_width,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Skyrmion {
    pub id: u64,
    pub x: f64,
    pub y: f64,
    pub alive: bool,
    /// Held at its notch after a reverse erase failed to annihilate it.
    pub pinned: bool,
    /// Where it was nucleated; reverse motion ends here.
    pub origin: Notch,
}

/// The discrete skyrmions of one track: the non-volatile device state.
#[derive(Debug, Clone, PartialEq)]
pub struct SkyrmionPopulation {
    pub track_id: u32,
    skyrmions: Vec<Skyrmion>,
    next_id: u64,
    length: f64,
    width: f64,
}

impl SkyrmionPopulation {
    pub fn new(track_id: u32, cal: &DeviceCalibration) -> Self {
        Self::with_geometry(track_id, cal.track_length, cal.track_width)
    }

    pub fn with_geometry(track_id: u32, length: f64, width: f64) -> Self {
        Self {
            track_id,
            skyrmions: Vec::new(),
            next_id: 0,
            length,
            width,
        }
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn width(&self) -> f64 {
        self.width
    }

    /// All tracked skyrmions, annihilated ones included until the next reset.
    pub fn skyrmions(&self) -> &[Skyrmion] {
        &self.skyrmions
    }

    pub fn alive(&self) -> impl Iterator<Item = &Skyrmion> {
        self.skyrmions.iter().filter(|s| s.alive)
    }

    pub fn alive_count(&self) -> usize {
        self.alive().count()
    }

    /// Creates `count` skyrmions at `notch`.
    pub fn nucleate(&mut self, count: u32, notch: Notch) {
        for _ in 0..count {
            self.place_with_origin(notch.x, notch.y, notch);
        }
    }

    /// Places one skyrmion at `(x, y)` that was nucleated at `origin`.
    pub fn place_with_origin(&mut self, x: f64, y: f64, origin: Notch) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        let alive = self.inside(x, y);
        self.skyrmions.push(Skyrmion {
            id,
            x,
            y,
            alive,
            pinned: false,
            origin,
        });
        id
    }

    fn inside(&self, x: f64, y: f64) -> bool {
        (0.0..=self.length).contains(&x) && (0.0..=self.width).contains(&y)
    }

    /// Translates every alive skyrmion by `(dx, dy)`; anything that reaches
    /// an edge annihilates.
    fn translate(&mut self, dx: f64, dy: f64) {
        let (length, width) = (self.length, self.width);
        for s in self.skyrmions.iter_mut().filter(|s| s.alive) {
            s.pinned = false;
            s.x += dx;
            s.y += dy;
            if s.y >= width || s.y < 0.0 || s.x > length || s.x < 0.0 {
                s.alive = false;
            }
        }
    }

    /// Applies `pulse.count` forward pulses.
    pub fn advance(&mut self, pulse: &PulseTrain, cal: &DeviceCalibration) -> Result<()> {
        if pulse.polarity != Polarity::Forward {
            return Err(Error::Precondition("advance needs a forward pulse"));
        }
        let (dx, dy) = step(pulse, cal)?;
        for _ in 0..pulse.count {
            self.translate(dx, dy);
        }
        Ok(())
    }

    /// Reverse pulses walk skyrmions back along their trajectory. One that
    /// reaches its notch is annihilated, or pinned there with probability
    /// `residual_prob`.
    pub fn reverse_erase<R: Rng + ?Sized>(
        &mut self,
        pulses: &PulseTrain,
        cal: &DeviceCalibration,
        residual_prob: f64,
        rng: &mut R,
    ) -> Result<()> {
        if pulses.polarity != Polarity::Reverse {
            return Err(Error::Precondition("reverse_erase needs reverse pulses"));
        }
        if !(0.0..=1.0).contains(&residual_prob) {
            return Err(Error::Precondition("residual_prob must lie in [0, 1]"));
        }
        let (dx, dy) = step(pulses, cal)?;
        let (length, width) = (self.length, self.width);
        for _ in 0..pulses.count {
            for s in self.skyrmions.iter_mut().filter(|s| s.alive && !s.pinned) {
                s.x -= dx;
                s.y -= dy;
                if s.x <= s.origin.x + NOTCH_TOLERANCE {
                    if residual_prob > 0.0 && rng.random::<f64>() < residual_prob {
                        s.x = s.origin.x;
                        s.y = s.origin.y;
                        s.pinned = true;
                    } else {
                        s.alive = false;
                    }
                } else if s.y < 0.0 || s.y >= width || s.x > length {
                    s.alive = false;
                }
            }
        }
        Ok(())
    }

    /// Saturating-field reset: every skyrmion is erased.
    pub fn field_reset(&mut self) {
        self.skyrmions.clear();
    }

    /// Alive skyrmions whose centre lies in the closed zone rectangle.
    pub fn count_in_zone(&self, zone: &DetectionZone) -> u32 {
        self.alive().filter(|s| zone.contains(s.x, s.y)).count() as u32
    }

    /// Pushes the most recently created in-zone skyrmions just past the
    /// downstream zone edge until at most `zone.capacity` remain inside.
    pub fn apply_capacity(&mut self, zone: &DetectionZone) {
        let mut inside: Vec<usize> = self
            .skyrmions
            .iter()
            .enumerate()
            .filter(|(_, s)| s.alive && zone.contains(s.x, s.y))
            .map(|(i, _)| i)
            .collect();
        let capacity = zone.capacity as usize;
        if inside.len() <= capacity {
            return;
        }
        inside.sort_by_key(|&i| core::cmp::Reverse(self.skyrmions[i].id));
        let excess = inside.len() - capacity;
        let x_out = zone.x_max() + DISPLACE_MARGIN;
        let length = self.length;
        for &i in &inside[..excess] {
            let s = &mut self.skyrmions[i];
            s.x = x_out;
            if s.x > length {
                s.alive = false;
            }
        }
    }
}

/// Per-pulse displacement `(dx, dy)` in um.
pub fn step(pulse: &PulseTrain, cal: &DeviceCalibration) -> Result<(f64, f64)> {
    pulse.validate()?;
    let v = velocity_from_current(cal, pulse.current_density)?;
    // m/s * ns = 1e-9 m = 1e-3 um
    let dx = v * pulse.duration * 1e-3;
    Ok((dx, dx * cal.hall_slope()))
}

/// Square Hall-cross detection area.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct DetectionZone {
    pub center_x: f64,
    pub center_y: f64,
    pub side: f64,
    pub capacity: u32,
}

impl DetectionZone {
    pub const DEFAULT_SIDE: f64 = 6.0;

    pub fn new(center_x: f64, center_y: f64, side: f64, capacity: u32) -> Result<Self> {
        if !(side > 0.0) {
            return Err(Error::Precondition("zone side must be > 0"));
        }
        if capacity == 0 {
            return Err(Error::Precondition("zone capacity must be >= 1"));
        }
        Ok(Self {
            center_x,
            center_y,
            side,
            capacity,
        })
    }

    /// A full-width zone of the default side whose upstream edge sits at
    /// `x_start`, with the crowding capacity of the calibrated diameter.
    pub fn starting_at(x_start: f64, cal: &DeviceCalibration) -> Self {
        let side = Self::DEFAULT_SIDE;
        Self {
            center_x: x_start + 0.5 * side,
            center_y: 0.5 * cal.track_width,
            side,
            capacity: default_capacity(side, cal.skyrmion_diameter),
        }
    }

    /// Zone that never saturates.
    pub fn unbounded(self) -> Self {
        Self {
            capacity: u32::MAX,
            ..self
        }
    }

    pub fn x_min(&self) -> f64 {
        self.center_x - 0.5 * self.side
    }

    pub fn x_max(&self) -> f64 {
        self.center_x + 0.5 * self.side
    }

    pub fn y_min(&self) -> f64 {
        self.center_y - 0.5 * self.side
    }

    pub fn y_max(&self) -> f64 {
        self.center_y + 0.5 * self.side
    }

    /// Area, um^2.
    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x_min() && x <= self.x_max() && y >= self.y_min() && y <= self.y_max()
    }

    /// Whether the zone lies within a `length x width` track footprint.
    pub fn fits(&self, length: f64, width: f64) -> bool {
        const EPS: f64 = 1e-12;
        self.x_min() >= -EPS && self.x_max() <= length + EPS && self.y_min() >= -EPS && self.y_max() <= width + EPS
    }
}

/// Crowding capacity with skyrmions spaced three diameters apart:
/// `floor((side / 3d)^2)`, `d` in nm, `side` in um.
pub fn default_capacity(side: f64, diameter_nm: f64) -> u32 {
    let per_row = side * 1e3 / (3.0 * diameter_nm);
    (libm::floor(per_row * per_row) as u32).max(1)
}
