//! Seeded random instances, with five size presets.
//!
//! The stream is splitmix64 and is consumed in a fixed order: capacity
//! (`[j][t]`), hold cost (`[j][t]`), dispatch cost (`[j][t]`), demand
//! (`[i][t]`), coverage (`[j][i]`), then one draw per zone left uncovered when
//! coverage repair is on. Integers in `lo..=hi` are `lo + next % (hi - lo + 1)`;
//! a Bernoulli(p) draw is `(next >> 11) * 2^-53 < p`. Any implementation that
//! follows these rules reproduces the same instance for the same seed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::Instance;

const GOLDEN_GAMMA: u64 = 0x9E37_79B9_7F4A_7C15;

#[derive(Debug, Clone)]
pub struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    pub fn new(seed: u64) -> Self {
        SplitMix64 { state: seed }
    }

    pub fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(GOLDEN_GAMMA);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }

    /// Uniform on `lo..=hi`. Requires `0 <= lo <= hi`.
    pub fn uniform(&mut self, lo: i64, hi: i64) -> i64 {
        debug_assert!(0 <= lo && lo <= hi);
        let span = (hi - lo) as u64 + 1;
        lo + (self.next_u64() % span) as i64
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    pub fn bernoulli(&mut self, p: f64) -> bool {
        self.unit() < p
    }
}

/// Closed integer range.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Bounds {
    pub lo: i64,
    pub hi: i64,
}

impl Bounds {
    pub const fn new(lo: i64, hi: i64) -> Self {
        Bounds { lo, hi }
    }

    pub fn contains(&self, v: i64) -> bool {
        self.lo <= v && v <= self.hi
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GenParams {
    pub num_vehicles: i64,
    pub num_slots: usize,
    pub num_stations: usize,
    pub num_zones: usize,
    pub capacity: Bounds,
    pub fixed_cost: Bounds,
    pub service_cost: Bounds,
    pub demand: Bounds,
    pub coverage_density: f64,
    pub ensure_coverage: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub big_m: Option<i64>,
    #[serde(default)]
    pub transfer_cost: i64,
}

impl GenParams {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParams(msg));
        if self.num_slots == 0 || self.num_stations == 0 || self.num_zones == 0 {
            return bad("slots, stations and zones must be positive".into());
        }
        if self.num_vehicles < 0 || self.transfer_cost < 0 {
            return bad("vehicles and transfer cost must be non-negative".into());
        }
        for (name, b) in [
            ("capacity", self.capacity),
            ("fixed_cost", self.fixed_cost),
            ("service_cost", self.service_cost),
            ("demand", self.demand),
        ] {
            if b.lo < 0 || b.lo > b.hi {
                return bad(format!("{name} bounds {}..{} must satisfy 0 <= lo <= hi", b.lo, b.hi));
            }
        }
        if !(0.0..=1.0).contains(&self.coverage_density) {
            return bad(format!("coverage_density {} outside [0, 1]", self.coverage_density));
        }
        Ok(())
    }
}

/// Parameters of size preset `k` (1 to 5).
pub fn preset(k: u32) -> Result<GenParams> {
    const VEHICLES: [i64; 5] = [100, 200, 200, 200, 200];
    const SLOTS: [usize; 5] = [4, 4, 4, 12, 24];
    const STATIONS: [usize; 5] = [10, 15, 20, 20, 20];
    const ZONES: [usize; 5] = [20, 30, 40, 40, 60];
    if !(1..=5).contains(&k) {
        return Err(Error::InvalidParams(format!("preset {k} does not exist, expected 1 to 5")));
    }
    let c = (k - 1) as usize;
    Ok(GenParams {
        num_vehicles: VEHICLES[c],
        num_slots: SLOTS[c],
        num_stations: STATIONS[c],
        num_zones: ZONES[c],
        capacity: Bounds::new(1, 6),
        fixed_cost: Bounds::new(6, 10),
        service_cost: Bounds::new(2, 6),
        demand: Bounds::new(0, 5),
        coverage_density: 0.5,
        ensure_coverage: true,
        big_m: None,
        transfer_cost: 0,
    })
}

pub fn generate(params: &GenParams, seed: u64) -> Result<Instance> {
    params.validate()?;
    let (nj, ni, nt) = (params.num_stations, params.num_zones, params.num_slots);
    let mut rng = SplitMix64::new(seed);
    let mut grid = |rows: usize, b: Bounds| -> Vec<Vec<i64>> {
        (0..rows).map(|_| (0..nt).map(|_| rng.uniform(b.lo, b.hi)).collect()).collect()
    };
    let capacity = grid(nj, params.capacity);
    let hold_cost = grid(nj, params.fixed_cost);
    let dispatch_cost = grid(nj, params.service_cost);
    let demand = grid(ni, params.demand);

    let mut coverage: Vec<Vec<i64>> = (0..nj)
        .map(|_| (0..ni).map(|_| rng.bernoulli(params.coverage_density) as i64).collect())
        .collect();
    if params.ensure_coverage {
        for i in 0..ni {
            if (0..nj).all(|j| coverage[j][i] == 0) {
                let j = rng.uniform(0, nj as i64 - 1) as usize;
                coverage[j][i] = 1;
            }
        }
    }

    let mut inst = Instance {
        num_stations: nj,
        num_zones: ni,
        num_slots: nt,
        fleet_size: params.num_vehicles,
        coverage,
        capacity,
        hold_cost,
        dispatch_cost,
        demand,
        big_m: 0,
        transfer_cost: params.transfer_cost,
    };
    inst.big_m = match params.big_m {
        Some(m) => m,
        None => i64::try_from(inst.big_m_floor() + 1)
            .map_err(|_| Error::InvalidParams("default penalty does not fit in 64 bits".into()))?,
    };
    Ok(inst)
}

/// Small random instance for oracle comparisons: at most 3 stations, 4 zones
/// and 3 slots, capacity and demand at most 2. `case` selects one of many
/// independent instances under the same `seed`.
pub fn tiny_instance(seed: u64, case: u64) -> Instance {
    let mut rng = SplitMix64::new(seed ^ case.wrapping_mul(GOLDEN_GAMMA).rotate_left(17));
    let params = GenParams {
        num_vehicles: rng.uniform(2, 6),
        num_slots: rng.uniform(1, 3) as usize,
        num_stations: rng.uniform(1, 3) as usize,
        num_zones: rng.uniform(1, 4) as usize,
        capacity: Bounds::new(1, 2),
        fixed_cost: Bounds::new(1, 3),
        service_cost: Bounds::new(1, 3),
        demand: Bounds::new(0, 2),
        coverage_density: 0.6,
        ensure_coverage: rng.bernoulli(0.9),
        big_m: None,
        transfer_cost: rng.uniform(0, 2),
    };
    generate(&params, rng.next_u64()).expect("tiny parameters are valid")
}
