//! Eventually-periodic trajectories on the unit time grid.
//!
//! A trajectory is a map `t -> state` that is piecewise constant on
//! `[t, t+1)` and eventually periodic: a finite preamble followed by a
//! non-empty cycle repeated forever. Trajectories are kept in canonical form
//! (minimal preamble, minimal period), so structural equality coincides with
//! pointwise equality of the underlying maps.

use crate::{Error, Result};

/// State index into the owning model's state list.
pub type State = usize;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Trajectory {
    preamble: Vec<State>,
    cycle: Vec<State>,
}

impl Trajectory {
    /// Builds a trajectory and normalizes it to canonical form.
    pub fn new(preamble: Vec<State>, cycle: Vec<State>) -> Result<Self> {
        if cycle.is_empty() {
            return Err(Error::InvalidTrajectory("cycle must be non-empty".into()));
        }
        let mut z = Trajectory { preamble, cycle };
        z.canonicalize();
        Ok(z)
    }

    /// The constant trajectory sitting at `state` forever.
    pub fn constant(state: State) -> Self {
        Trajectory {
            preamble: Vec::new(),
            cycle: vec![state],
        }
    }

    pub fn preamble(&self) -> &[State] {
        &self.preamble
    }

    pub fn cycle(&self) -> &[State] {
        &self.cycle
    }

    /// Preamble length plus cycle length.
    pub fn transient_len(&self) -> usize {
        self.preamble.len() + self.cycle.len()
    }

    /// z(t) for integer t.
    pub fn state_at(&self, t: u64) -> State {
        let p = self.preamble.len() as u64;
        if t < p {
            self.preamble[t as usize]
        } else {
            let q = self.cycle.len() as u64;
            self.cycle[((t - p) % q) as usize]
        }
    }

    /// The trajectory t -> z(t + h).
    pub fn shift(&self, h: u64) -> Trajectory {
        let p = self.preamble.len() as u64;
        let mut z = if h <= p {
            Trajectory {
                preamble: self.preamble[h as usize..].to_vec(),
                cycle: self.cycle.clone(),
            }
        } else {
            let q = self.cycle.len() as u64;
            let rot = ((h - p) % q) as usize;
            let mut cycle = self.cycle.clone();
            cycle.rotate_left(rot);
            Trajectory {
                preamble: Vec::new(),
                cycle,
            }
        };
        z.canonicalize();
        z
    }

    /// Concatenation at integer time `tau`: follows `self` on `[0, tau)` and
    /// `other` shifted by `tau` afterwards. Requires `self(tau) = other(0)`.
    pub fn concatenate(&self, tau: u64, other: &Trajectory) -> Result<Trajectory> {
        if self.state_at(tau) != other.state_at(0) {
            return Err(Error::ConcatMismatch {
                left: self.state_at(tau).to_string(),
                right: other.state_at(0).to_string(),
            });
        }
        let mut preamble: Vec<State> = (0..tau).map(|t| self.state_at(t)).collect();
        preamble.extend_from_slice(&other.preamble);
        let mut z = Trajectory {
            preamble,
            cycle: other.cycle.clone(),
        };
        z.canonicalize();
        Ok(z)
    }

    /// Mean cost over one cycle period — the common Cesàro/Abel limit of the
    /// trajectory's averaged payoffs.
    pub fn cycle_mean(&self, costs: &[f64]) -> f64 {
        let sum: f64 = self.cycle.iter().map(|&s| costs[s]).sum();
        sum / self.cycle.len() as f64
    }

    /// Largest state index mentioned by the trajectory.
    pub fn max_state(&self) -> State {
        self.preamble
            .iter()
            .chain(self.cycle.iter())
            .copied()
            .max()
            .expect("cycle is non-empty")
    }

    fn canonicalize(&mut self) {
        // Minimal period of the cycle; for a purely periodic word the minimal
        // period divides the given one.
        let q = self.cycle.len();
        for d in 1..=q {
            if q % d != 0 {
                continue;
            }
            if (d..q).all(|i| self.cycle[i] == self.cycle[i % d]) {
                self.cycle.truncate(d);
                break;
            }
        }
        // Minimal preamble: absorb trailing preamble states that already
        // match the tail of the cycle, rotating the cycle to compensate.
        while let Some(&last) = self.preamble.last() {
            if last == *self.cycle.last().expect("cycle is non-empty") {
                self.preamble.pop();
                self.cycle.rotate_right(1);
            } else {
                break;
            }
        }
    }
}
