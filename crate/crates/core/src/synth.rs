//! Scripted road users for tests and demonstrations.
//!
//! Each agent moves from a start point with an initial heading and speed and
//! may change speed or heading once, at a given time after its first sample.
//! Positions are evaluated in closed form and sampled on the tracking grid.

use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::trajectory::{TrackPoint, Trajectory, UserKind};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Maneuver {
    Uniform,
    /// Brake at `rate` (m/s², positive) from `at` seconds until `min_speed`.
    Decelerate {
        at: f64,
        rate: f64,
        min_speed: f64,
    },
    /// Speed up at `rate` from `at` seconds until `max_speed`.
    Accelerate {
        at: f64,
        rate: f64,
        max_speed: f64,
    },
    /// Turn at constant speed with `yaw_rate` (rad/s, counter-clockwise
    /// positive) from `at` seconds on.
    Curve {
        at: f64,
        yaw_rate: f64,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentScript {
    pub id: String,
    pub kind: UserKind,
    /// Time of the first sample; a multiple of the step.
    pub t0: f64,
    pub duration: f64,
    pub start: [f64; 2],
    /// Degrees, counter-clockwise from the x axis.
    pub heading_deg: f64,
    pub speed: f64,
    #[serde(default = "uniform")]
    pub maneuver: Maneuver,
}

fn uniform() -> Maneuver {
    Maneuver::Uniform
}

/// A scene description: agents plus optional Gaussian position noise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    #[serde(default)]
    pub seed: u64,
    /// Standard deviation of the noise added to x and y, meters.
    #[serde(default)]
    pub noise_sd: f64,
    #[serde(rename = "agent", default)]
    pub agents: Vec<AgentScript>,
}

impl ScenarioSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::InvalidInput(format!("scenario: {e}")))
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::InvalidInput(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }
}

/// Distance travelled after `tau` seconds starting at speed `v`, changing
/// speed at `a` (signed) from `at` until `limit` is reached.
fn distance(v: f64, tau: f64, at: f64, a: f64, limit: f64) -> f64 {
    if tau <= at {
        return v * tau;
    }
    let tp = tau - at;
    let reach = ((limit - v) / a).max(0.0);
    let base = v * at;
    if tp <= reach {
        base + v * tp + 0.5 * a * tp * tp
    } else {
        base + v * reach + 0.5 * a * reach * reach + limit * (tp - reach)
    }
}

impl AgentScript {
    fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidInput(format!("agent `{}`: {m}", self.id)));
        if !(self.speed >= 0.0 && self.speed.is_finite()) {
            return bad(format!("speed must be non-negative, got {}", self.speed));
        }
        if !(self.duration > 0.0) {
            return bad(format!("duration must be positive, got {}", self.duration));
        }
        match self.maneuver {
            Maneuver::Decelerate { rate, min_speed, .. } if !(rate > 0.0) || min_speed < 0.0 => {
                bad("deceleration needs a positive rate and non-negative floor".into())
            }
            Maneuver::Accelerate { rate, max_speed, .. } if !(rate > 0.0) || max_speed < self.speed => {
                bad("acceleration needs a positive rate and a cap above the start speed".into())
            }
            _ => Ok(()),
        }
    }

    /// Noise-free position `tau` seconds after the first sample.
    pub fn position(&self, tau: f64) -> (f64, f64) {
        let h = self.heading_deg.to_radians();
        let (x0, y0) = (self.start[0], self.start[1]);
        let v = self.speed;
        let straight = |s: f64| (x0 + s * h.cos(), y0 + s * h.sin());
        match self.maneuver {
            Maneuver::Uniform => straight(v * tau),
            Maneuver::Decelerate { at, rate, min_speed } => straight(distance(v, tau, at, -rate, min_speed.min(v))),
            Maneuver::Accelerate { at, rate, max_speed } => straight(distance(v, tau, at, rate, max_speed)),
            Maneuver::Curve { at, yaw_rate } => {
                if tau <= at || yaw_rate == 0.0 {
                    return straight(v * tau);
                }
                let (xa, ya) = straight(v * at);
                let th = h + yaw_rate * (tau - at);
                let r = v / yaw_rate;
                (xa + r * (th.sin() - h.sin()), ya - r * (th.cos() - h.cos()))
            }
        }
    }

    /// Speed `tau` seconds after the first sample.
    pub fn speed_at(&self, tau: f64) -> f64 {
        let clamp = |at: f64, a: f64, limit: f64| {
            if tau <= at {
                self.speed
            } else {
                let v = self.speed + a * (tau - at);
                if a < 0.0 {
                    v.max(limit)
                } else {
                    v.min(limit)
                }
            }
        };
        match self.maneuver {
            Maneuver::Uniform | Maneuver::Curve { .. } => self.speed,
            Maneuver::Decelerate { at, rate, min_speed } => clamp(at, -rate, min_speed.min(self.speed)),
            Maneuver::Accelerate { at, rate, max_speed } => clamp(at, rate, max_speed),
        }
    }
}

/// Samples every agent on the `step` grid, adding the scenario's noise.
/// Agents are returned in script order.
pub fn synthesize(spec: &ScenarioSpec, step: f64) -> Result<Vec<Trajectory>> {
    if !(spec.noise_sd >= 0.0 && spec.noise_sd.is_finite()) {
        return Err(Error::InvalidInput(format!(
            "noise_sd must be non-negative, got {}",
            spec.noise_sd
        )));
    }
    let noise = Normal::new(0.0, spec.noise_sd).expect("valid standard deviation");
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    spec.agents
        .iter()
        .map(|a| {
            a.validate()?;
            let n = (a.duration / step).round() as usize;
            let k0 = (a.t0 / step).round();
            let points = (0..=n)
                .map(|k| {
                    let tau = k as f64 * step;
                    let (x, y) = a.position(tau);
                    let (dx, dy) = if spec.noise_sd > 0.0 {
                        (noise.sample(&mut rng), noise.sample(&mut rng))
                    } else {
                        (0.0, 0.0)
                    };
                    TrackPoint::new((k0 + k as f64) * step, x + dx, y + dy)
                })
                .collect();
            Trajectory::new(a.id.clone(), a.kind, step, points)
        })
        .collect()
}

/// Pedestrians crossing a two-way street.
///
/// Agents come in pedestrian-vehicle pairs, one pair starting every second.
/// Vehicles drive along the x axis in lanes at y = -1.5 (eastbound) and
/// y = 1.5 (westbound); pedestrians cross along y near one of four
/// crossing points 2 m apart. Unchanged, both members of a pair would reach
/// their crossing point together 8 s after starting. Each agent
/// independently yields (brakes toward a fifth of its speed, 40%), asserts
/// (starts at 80% of its speed and speeds up, 50%) or keeps its pace. Most
/// maneuvers begin within 1.5 s of the start; about one in seven begins
/// 2 to 5 s in, after the conflict is under way.
/// Scripts are drawn from `seed`, so equal seeds give equal scenes.
pub fn mixed_scene(n_agents: usize, seed: u64) -> ScenarioSpec {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pairs = n_agents / 2;
    let mut agents = Vec::with_capacity(2 * pairs);
    for i in 0..pairs {
        let t0 = i as f64;
        let tm = 8.0;
        let xm = 2.0 * (i % 4) as f64 + rng.random_range(-2.0..2.0);
        let eastbound = i % 2 == 0;
        let lane = if eastbound { -1.5 } else { 1.5 };
        let v_dir = if eastbound { 1.0 } else { -1.0 };
        let v_speed: f64 = rng.random_range(6.0..9.0);
        let p_dir = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let p_speed: f64 = rng.random_range(1.1..1.6);

        let mut script_for = |kind: UserKind, speed: f64| {
            let (lo, hi) = match kind {
                UserKind::Vehicle => (0.35, 0.6),
                UserKind::Pedestrian => (0.09, 0.17),
            };
            let at = if rng.random_bool(0.15) {
                rng.random_range(2.0..5.0)
            } else {
                rng.random_range(0.0..1.5)
            };
            let u: f64 = rng.random();
            let rate = lo + rng.random::<f64>() * (hi - lo);
            if u < 0.4 {
                (
                    Maneuver::Decelerate {
                        at,
                        rate,
                        min_speed: 0.2 * speed,
                    },
                    speed,
                )
            } else if u < 0.9 {
                (
                    Maneuver::Accelerate {
                        at,
                        rate,
                        max_speed: 1.6 * speed,
                    },
                    0.8 * speed,
                )
            } else {
                (Maneuver::Uniform, speed)
            }
        };
        let (v_maneuver, v_start) = script_for(UserKind::Vehicle, v_speed);
        let (p_maneuver, p_start) = script_for(UserKind::Pedestrian, p_speed);
        agents.push(AgentScript {
            id: format!("v{i:02}"),
            kind: UserKind::Vehicle,
            t0,
            duration: 2.0 * tm,
            start: [xm - v_dir * v_start * tm, lane],
            heading_deg: if eastbound { 0.0 } else { 180.0 },
            speed: v_start,
            maneuver: v_maneuver,
        });
        agents.push(AgentScript {
            id: format!("p{i:02}"),
            kind: UserKind::Pedestrian,
            t0,
            duration: 2.0 * tm,
            start: [xm, lane - p_dir * p_start * tm],
            heading_deg: if p_dir > 0.0 { 90.0 } else { 270.0 },
            speed: p_start,
            maneuver: p_maneuver,
        });
    }
    ScenarioSpec {
        seed,
        noise_sd: 0.0,
        agents,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn agent(maneuver: Maneuver) -> AgentScript {
        AgentScript {
            id: "a".into(),
            kind: UserKind::Vehicle,
            t0: 1.0,
            duration: 10.0,
            start: [2.0, -1.0],
            heading_deg: 90.0,
            speed: 6.0,
            maneuver,
        }
    }

    #[test]
    fn uniform_agent_has_constant_speed() {
        let spec = ScenarioSpec {
            seed: 0,
            noise_sd: 0.0,
            agents: vec![agent(Maneuver::Uniform)],
        };
        let tr = &synthesize(&spec, 0.5).unwrap()[0];
        assert_eq!(tr.points()[0].t, 1.0);
        for i in 0..tr.len() {
            assert!((tr.speed_at(i).unwrap() - 6.0).abs() < 1e-9);
        }
    }

    #[test]
    fn braking_kinematics() {
        let a = agent(Maneuver::Decelerate {
            at: 2.0,
            rate: 1.0,
            min_speed: 2.0,
        });
        // 12 m before braking, then 4 s to lose 4 m/s covering 16 m.
        let (_, y) = a.position(6.0);
        assert!((y - (-1.0 + 12.0 + 16.0)).abs() < 1e-9);
        let (_, y) = a.position(8.0);
        assert!((y - (-1.0 + 28.0 + 4.0)).abs() < 1e-9);
        assert_eq!(a.speed_at(3.0), 5.0);
        assert_eq!(a.speed_at(9.0), 2.0);
    }

    #[test]
    fn curve_keeps_speed() {
        let a = agent(Maneuver::Curve { at: 1.0, yaw_rate: 0.3 });
        let d = 1e-5;
        for tau in [0.5, 2.0, 5.0] {
            let (x0, y0) = a.position(tau);
            let (x1, y1) = a.position(tau + d);
            assert!(((x1 - x0).hypot(y1 - y0) / d - 6.0).abs() < 1e-4);
        }
    }

    #[test]
    fn noise_is_seeded() {
        let mut spec = mixed_scene(6, 4);
        spec.noise_sd = 0.05;
        let a = synthesize(&spec, 0.5).unwrap();
        assert_eq!(a, synthesize(&spec, 0.5).unwrap());
        spec.seed = 5;
        assert_ne!(a, synthesize(&spec, 0.5).unwrap());
    }

    #[test]
    fn scenario_toml_round_trip() {
        let spec = mixed_scene(4, 1);
        assert_eq!(ScenarioSpec::from_toml(&spec.to_toml()).unwrap(), spec);
        let text = "[[agent]]\nid = \"p\"\nkind = \"ped\"\nt0 = 0.0\nduration = 4.0\nstart = [0.0, 0.0]\nheading_deg = 90.0\nspeed = 1.2\n";
        let s = ScenarioSpec::from_toml(text).unwrap();
        assert_eq!(s.agents[0].maneuver, Maneuver::Uniform);
    }
}
