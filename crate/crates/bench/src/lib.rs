//! Fixed workloads shared by the benchmarks in `benches/`.

use quenched_core::{DisorderDistribution, ModelParams, QuadratureConfig};

pub struct Workload {
    pub name: &'static str,
    pub params: ModelParams,
    pub dist: DisorderDistribution,
}

/// The interacting model (`m₀² = λ = 1`) under each disorder family.
pub fn workloads() -> Vec<Workload> {
    let params = ModelParams::new(1.0, 1.0).expect("valid model");
    vec![
        Workload {
            name: "uniform",
            params,
            dist: DisorderDistribution::uniform(1.0).expect("valid law"),
        },
        Workload {
            name: "truncated_gaussian",
            params,
            dist: DisorderDistribution::truncated_gaussian(1.0, 1.5).expect("valid law"),
        },
        Workload {
            name: "atoms",
            params,
            dist: DisorderDistribution::atoms(vec![(-1.0, 0.25), (0.5, 0.5), (1.2, 0.25)])
                .expect("valid law"),
        },
    ]
}

pub fn quadrature() -> QuadratureConfig {
    QuadratureConfig::default()
}
