//! Explicit competitor fields.

pub mod branched;
pub mod bump;
pub mod potential;

pub use branched::{branched_seed, BranchedSpec};
pub use bump::{nucleation_bump, BumpSpec};
pub use potential::{
    convolution_oracle, potential_seed, radial_poisson, radial_profile, OracleResolution, PotentialSpec, ProbeValue,
    RadialProfile, RadialSolution,
};

/// Radial cutoff equal to 1 on `[0, 1]` and 0 beyond `1.5`, quintic in between.
pub fn smoothstep_cutoff(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 1.5 {
        0.0
    } else {
        let t = (r - 1.0) / 0.5;
        1.0 - t * t * t * (10.0 - 15.0 * t + 6.0 * t * t)
    }
}

#[cfg(test)]
mod tests {
    use super::smoothstep_cutoff;

    #[test]
    fn cutoff_is_c2() {
        for knot in [1.0, 1.5] {
            let e = 1e-5;
            let d = |r: f64| (smoothstep_cutoff(r + e) - smoothstep_cutoff(r - e)) / (2.0 * e);
            assert!(d(knot - 2.0 * e).abs() < 1e-6 && d(knot + 2.0 * e).abs() < 1e-6);
        }
        assert!((smoothstep_cutoff(1.25) - 0.5).abs() < 1e-15);
    }
}
