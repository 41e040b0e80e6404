//! Stochastic-shortest-path sailing on a square grid.
//!
//! A boat moves between adjacent cells of an `n × n` grid, trying to reach a
//! goal cell at minimal expected sailing time. Moving costs depend on the
//! angle between the heading and the current wind: running with the wind is
//! cheap, heading close to the wind is expensive, and heading straight into
//! the wind is impossible. Diagonal legs cost √2 times the straight-line
//! rate, and flipping the boat from port to starboard tack (or back) adds a
//! fixed delay. The wind itself drifts as a Markov chain, rotating by 45°
//! with probability 0.3 to either side at each step.
//!
//! Rewards are negative costs, so maximizing total reward minimizes expected
//! time-to-goal. The goal cell is absorbing. The domain reports
//! [`goal_driven`](crate::mdp::GenerativeMdp::goal_driven) so planners run
//! simulations until the goal (with a safety cap) rather than truncating at
//! the nominal horizon.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use smallvec::SmallVec;

use crate::mdp::{ActionId, GenerativeMdp, Outcome, StateId};
use crate::rng::mix64;
use crate::{Error, Result};

/// Compass headings in canonical order; also used for wind directions.
pub const DIRECTION_NAMES: [&str; 8] = ["N", "NE", "E", "SE", "S", "SW", "W", "NW"];

/// Cell offsets for each heading, matching [`DIRECTION_NAMES`].
const DELTAS: [(i64, i64); 8] = [
    (0, 1),
    (1, 1),
    (1, 0),
    (1, -1),
    (0, -1),
    (-1, -1),
    (-1, 0),
    (-1, 1),
];

/// Which side of the boat the wind is on.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Tack {
    /// No tack committed yet (start of an episode).
    None,
    Port,
    Starboard,
}

impl Tack {
    fn index(self) -> u64 {
        match self {
            Tack::None => 0,
            Tack::Port => 1,
            Tack::Starboard => 2,
        }
    }

    fn from_index(i: u64) -> Tack {
        match i {
            0 => Tack::None,
            1 => Tack::Port,
            2 => Tack::Starboard,
            _ => unreachable!("tack index is always 0..3"),
        }
    }

    fn name(self) -> &'static str {
        match self {
            Tack::None => "none",
            Tack::Port => "port",
            Tack::Starboard => "starboard",
        }
    }
}

/// Parameters of the sailing domain.
#[derive(Clone, Debug)]
pub struct SailingConfig {
    /// Grid side length (the lake is `n × n` cells).
    pub n: u32,
    /// Goal cell; defaults to the far corner `(n-1, n-1)`.
    pub goal: (u32, u32),
    /// Probability the wind direction persists for one step.
    pub wind_persist: f64,
    /// Probability the wind rotates 45° clockwise (and, equally,
    /// counter-clockwise) in one step.
    pub wind_rotate: f64,
    /// Base cost per heading-vs-wind offset. Slots cover offsets
    /// 0,1,2,3,5,6,7 (offset 4 — dead into the wind — is forbidden):
    /// tail, broad reach, beam reach, close haul on both sides mirrored.
    pub costs: [f64; 7],
    /// Extra delay when switching between port and starboard tack.
    pub tack_penalty: f64,
}

impl SailingConfig {
    /// Standard parameterization for an `n × n` lake.
    pub fn new(n: u32) -> SailingConfig {
        SailingConfig {
            n,
            goal: (n.saturating_sub(1), n.saturating_sub(1)),
            wind_persist: 0.4,
            wind_rotate: 0.3,
            costs: [1.0, 2.0, 3.0, 4.0, 4.0, 3.0, 2.0],
            tack_penalty: 3.0,
        }
    }
}

/// The sailing MDP. See the module docs for the dynamics.
///
/// States pack `(x, y, wind, tack)` into a dense id, so the total state count
/// is `n² · 8 · 3` and planners may use flat-array statistics tables.
#[derive(Clone, Debug)]
pub struct SailingMdp {
    config: SailingConfig,
    name: String,
    config_hash: u64,
}

impl SailingMdp {
    pub fn new(config: SailingConfig) -> Result<SailingMdp> {
        if config.n < 2 {
            return Err(Error::Config("sailing grid must be at least 2x2".into()));
        }
        if config.goal.0 >= config.n || config.goal.1 >= config.n {
            return Err(Error::Config(format!(
                "sailing goal {:?} outside {}x{} grid",
                config.goal, config.n, config.n
            )));
        }
        let p_stay = config.wind_persist;
        let p_rot = config.wind_rotate;
        if !(p_stay > 0.0 && p_rot > 0.0 && (p_stay + 2.0 * p_rot - 1.0).abs() < 1e-12) {
            return Err(Error::Config(format!(
                "wind probabilities must be positive and sum to 1: persist {p_stay}, rotate {p_rot} each side"
            )));
        }
        if config.costs.iter().any(|&c| c <= 0.0) || config.tack_penalty < 0.0 {
            return Err(Error::Config("sailing costs must be positive".into()));
        }
        let mut hash = mix64(config.n as u64 ^ mix64((config.goal.0 as u64) << 32 | config.goal.1 as u64));
        hash = mix64(hash ^ p_stay.to_bits() ^ mix64(p_rot.to_bits()));
        for c in config.costs {
            hash = mix64(hash ^ c.to_bits());
        }
        hash = mix64(hash ^ config.tack_penalty.to_bits());
        let name = format!("sailing-{0}x{0}", config.n);
        Ok(SailingMdp {
            config,
            name,
            config_hash: hash,
        })
    }

    pub fn config(&self) -> &SailingConfig {
        &self.config
    }

    /// Dense id for `(x, y, wind, tack)`.
    pub fn state_id(&self, x: u32, y: u32, wind: u8, tack: Tack) -> StateId {
        debug_assert!(x < self.config.n && y < self.config.n && wind < 8);
        (((x as u64 * self.config.n as u64 + y as u64) * 8 + wind as u64) * 3) + tack.index()
    }

    /// Inverse of [`state_id`](Self::state_id).
    pub fn unpack(&self, s: StateId) -> (u32, u32, u8, Tack) {
        let tack = Tack::from_index(s % 3);
        let rest = s / 3;
        let wind = (rest % 8) as u8;
        let cell = rest / 8;
        let n = self.config.n as u64;
        ((cell / n) as u32, (cell % n) as u32, wind, tack)
    }

    fn at_goal(&self, x: u32, y: u32) -> bool {
        (x, y) == self.config.goal
    }

    /// Headings available from `s`, in canonical compass order: those that
    /// stay on the grid and do not point dead into the wind.
    fn applicable(&self, s: StateId) -> SmallVec<[u8; 8]> {
        let (x, y, wind, _) = self.unpack(s);
        let mut moves = SmallVec::new();
        if self.at_goal(x, y) {
            return moves;
        }
        let n = self.config.n as i64;
        for (dir, &(dx, dy)) in DELTAS.iter().enumerate() {
            let dir = dir as u8;
            if (dir + 8 - wind) % 8 == 4 {
                continue; // dead upwind
            }
            let nx = x as i64 + dx;
            let ny = y as i64 + dy;
            if nx >= 0 && nx < n && ny >= 0 && ny < n {
                moves.push(dir);
            }
        }
        moves
    }

    /// Cost of sailing one leg along `dir` under `wind` starting from `tack`,
    /// and the tack after the leg.
    fn leg(&self, dir: u8, wind: u8, tack: Tack) -> (f64, Tack) {
        let rel = (dir + 8 - wind) % 8;
        debug_assert_ne!(rel, 4, "upwind heading must be filtered out earlier");
        let slot = if rel <= 3 { rel } else { rel - 1 } as usize;
        let mut cost = self.config.costs[slot];
        if dir % 2 == 1 {
            cost *= std::f64::consts::SQRT_2; // diagonal leg
        }
        let next_tack = match rel {
            1..=3 => Tack::Starboard,
            5..=7 => Tack::Port,
            _ => tack, // straight downwind keeps the current tack
        };
        let switched = matches!(
            (tack, next_tack),
            (Tack::Port, Tack::Starboard) | (Tack::Starboard, Tack::Port)
        );
        if switched {
            cost += self.config.tack_penalty;
        }
        (cost, next_tack)
    }

    /// Position, reward, and next tack of taking action `a` in `s`;
    /// everything about the transition except the wind draw.
    fn move_part(&self, s: StateId, a: ActionId) -> (u32, u32, f64, Tack) {
        let (x, y, wind, tack) = self.unpack(s);
        let moves = self.applicable(s);
        let dir = moves[a as usize];
        let (dx, dy) = DELTAS[dir as usize];
        let (cost, next_tack) = self.leg(dir, wind, tack);
        (
            (x as i64 + dx) as u32,
            (y as i64 + dy) as u32,
            -cost,
            next_tack,
        )
    }
}

impl GenerativeMdp for SailingMdp {
    fn horizon(&self) -> usize {
        4 * self.config.n as usize
    }

    fn action_count(&self, s: StateId) -> usize {
        self.applicable(s).len()
    }

    fn sample_transition(&self, s: StateId, a: ActionId, rng: &mut ChaCha8Rng) -> (StateId, f64) {
        let (nx, ny, reward, next_tack) = self.move_part(s, a);
        let (_, _, wind, _) = self.unpack(s);
        let u: f64 = rng.gen();
        let next_wind = if u < self.config.wind_persist {
            wind
        } else if u < self.config.wind_persist + self.config.wind_rotate {
            (wind + 1) % 8
        } else {
            (wind + 7) % 8
        };
        (self.state_id(nx, ny, next_wind, next_tack), reward)
    }

    fn reward_bounds(&self) -> (f64, f64) {
        let max_base = self.config.costs.iter().cloned().fold(0.0, f64::max);
        (
            -(max_base * std::f64::consts::SQRT_2 + self.config.tack_penalty),
            -self.config.costs.iter().cloned().fold(f64::INFINITY, f64::min),
        )
    }

    fn enumerate_outcomes(&self, s: StateId, a: ActionId) -> Option<Vec<Outcome>> {
        let (nx, ny, reward, next_tack) = self.move_part(s, a);
        let (_, _, wind, _) = self.unpack(s);
        Some(vec![
            Outcome {
                state: self.state_id(nx, ny, wind, next_tack),
                probability: self.config.wind_persist,
                reward,
            },
            Outcome {
                state: self.state_id(nx, ny, (wind + 1) % 8, next_tack),
                probability: self.config.wind_rotate,
                reward,
            },
            Outcome {
                state: self.state_id(nx, ny, (wind + 7) % 8, next_tack),
                probability: self.config.wind_rotate,
                reward,
            },
        ])
    }

    fn start_states(&self) -> Vec<StateId> {
        // Episodes begin at any non-goal cell, any wind, any tack history
        // (the benchmark draws initial states uniformly over these triples).
        let mut starts = Vec::new();
        for x in 0..self.config.n {
            for y in 0..self.config.n {
                if self.at_goal(x, y) {
                    continue;
                }
                for wind in 0..8 {
                    for tack in [Tack::None, Tack::Port, Tack::Starboard] {
                        starts.push(self.state_id(x, y, wind, tack));
                    }
                }
            }
        }
        starts
    }

    fn state_count(&self) -> Option<u64> {
        let n = self.config.n as u64;
        Some(n * n * 8 * 3)
    }

    fn goal_driven(&self) -> bool {
        true
    }

    fn name(&self) -> &str {
        &self.name
    }

    fn config_hash(&self) -> u64 {
        self.config_hash
    }

    fn describe_state(&self, s: StateId) -> String {
        let (x, y, wind, tack) = self.unpack(s);
        format!(
            "({x},{y}) wind={} tack={}",
            DIRECTION_NAMES[wind as usize],
            tack.name()
        )
    }

    fn describe_action(&self, s: StateId, a: ActionId) -> String {
        let moves = self.applicable(s);
        DIRECTION_NAMES[moves[a as usize] as usize].to_string()
    }
}
