//! Fixtures shared by the criterion benchmarks.

use backjump_core::generators::gen_pigeonhole;
use backjump_core::Formula;

pub fn pigeonhole_formula(n: u32) -> Formula {
    let inst = gen_pigeonhole(n);
    Formula::from_raw(inst.variable_count, &inst.constraints)
}
