#![allow(dead_code)]

use frontrack::flux::RegionParams;
use frontrack::grid::admissible_level;
use frontrack::profile::InitialProfile;
use frontrack::sim::{RunOptions, Scenario};
use frontrack::RoadNetwork;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub const GAMMAS: [f64; 5] = [0.5, 0.75, 1.0, 1.5, 2.0];

pub fn region(rng: &mut ChaCha8Rng) -> RegionParams {
    let g = GAMMAS[rng.random_range(0..GAMMAS.len())];
    RegionParams::new(g, rng.random_range(0.0..0.8) * g).unwrap()
}

/// Random network with at most `max_boundaries` boundaries whose admissible
/// level does not exceed `max_level`.
pub fn network(rng: &mut ChaCha8Rng, max_boundaries: usize, max_level: u32) -> (RoadNetwork, u32) {
    loop {
        let m = rng.random_range(0..=max_boundaries);
        let mut b: Vec<f64> = (0..m).map(|_| (rng.random_range(-3.0f64..3.0) * 8.0).round() / 8.0).collect();
        b.sort_by(f64::total_cmp);
        b.dedup();
        let regions = (0..=b.len()).map(|_| region(rng)).collect();
        let Ok(net) = RoadNetwork::new(b, regions, rng.random_range(0.1..0.95)) else { continue };
        match admissible_level(&net) {
            Ok(n) if n <= max_level => return (net, n),
            _ => continue,
        }
    }
}

pub fn initial(rng: &mut ChaCha8Rng, max_steps: usize) -> InitialProfile {
    let k = rng.random_range(0..=max_steps);
    let mut xs: Vec<f64> = (0..k).map(|_| rng.random_range(-4.0..4.0)).collect();
    xs.sort_by(f64::total_cmp);
    InitialProfile { left: rng.random_range(0.0..=1.0), steps: xs.into_iter().map(|x| (x, rng.random_range(0.0..=1.0))).collect() }
}

pub fn scenario(rng: &mut ChaCha8Rng, max_boundaries: usize, max_level: u32) -> (Scenario, u32) {
    let (network, n) = network(rng, max_boundaries, max_level);
    let t_end = rng.random_range(1.0..5.0);
    let snapshots = (1..=4).map(|i| t_end * i as f64 / 4.0).collect();
    let s = Scenario {
        network,
        initial: initial(rng, 6),
        y0: rng.random_range(-3.0..3.0),
        t_end,
        snapshots,
        options: RunOptions::default(),
    };
    (s, n)
}
