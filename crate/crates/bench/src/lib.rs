//! Shared fixtures for the benchmarks.

use radbound_core::experiments::{catalog, with_norms, Instance};
use radbound_core::{evaluate, Operation, ProblemSpec};

/// A catalog instance at the given mesh resolution.
pub fn instance(name: &str, resolution: usize) -> Instance {
    catalog()
        .into_iter()
        .find(|i| i.name == name)
        .unwrap_or_else(|| panic!("no catalog instance {name}"))
        .at_resolution(resolution)
}

/// The spec of a catalog instance, carrying every data norm `ops` read,
/// measured on a coarse mesh.
pub fn spec(name: &str, ops: &[Operation]) -> ProblemSpec {
    let inst = instance(name, 16);
    let problem = inst.problem().expect("catalog problem");
    let mut spec = inst.spec(&problem);
    for op in ops {
        with_norms(&mut spec, &problem, |s| evaluate(s, op)).expect("bound on a catalog instance");
    }
    spec
}
