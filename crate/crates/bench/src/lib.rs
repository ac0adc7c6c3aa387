//! Fixed, seeded workloads shared by the benchmarks.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use smallness_core::pipeline::{GuardMode, PipelineInstance};
use smallness_core::random::{random_family, random_pipeline, random_singleton, random_tr2};
use smallness_core::singleton::SingletonInstance;
use smallness_core::star_forest::Tr2Instance;
use smallness_core::IncreasingFamily;

const SEED: u64 = 7;

fn rng(i: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(SEED ^ i)
}

/// Families on at most `max_n` elements.
pub fn families(count: u64, max_n: usize) -> Vec<IncreasingFamily> {
    (0..count).map(|i| random_family(&mut rng(i), max_n)).collect()
}

pub fn singleton_instances(count: u64) -> Vec<SingletonInstance> {
    (0..count).map(|i| random_singleton(&mut rng(i))).collect()
}

pub fn tr2_instances(count: u64) -> Vec<Tr2Instance> {
    (0..count).map(|i| random_tr2(&mut rng(i))).collect()
}

/// Reduced-guard pipeline instances; the theorem guard leaves almost all of
/// them degenerate at this size.
pub fn pipeline_instances(count: u64) -> Vec<PipelineInstance> {
    let mut out = Vec::new();
    let mut i = 0;
    while out.len() < count as usize {
        if let Ok(inst) = random_pipeline(&mut rng(1000 + i), GuardMode::Reduced) {
            if !inst.is_degenerate() {
                out.push(inst);
            }
        }
        i += 1;
    }
    out
}
