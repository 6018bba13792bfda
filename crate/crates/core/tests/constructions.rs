use wellscape::constructions::{
    convolution_oracle, potential_seed, radial_poisson, radial_profile, OracleResolution, PotentialSpec,
};
use wellscape::energy::b_geometry;
use wellscape::field::validate_admissible;
use wellscape::Grid;

fn probes() -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    for &r in &[0.05, 0.2, 0.45, 0.8, 1.3, 1.9, 2.5] {
        for &th in &[0.4_f64, 1.3, 2.2] {
            out.push((r * th.cos(), r * th.sin()));
        }
    }
    out
}

#[test]
fn radial_solve_agrees_with_direct_convolution() {
    for j in [1u32, 3, 6] {
        let spec = PotentialSpec::new(j, 1.0).unwrap();
        let p = radial_profile(&spec);
        let sol = radial_poisson(&|r| p.value(r), spec.n_r).unwrap();
        let f = |x: f64, y: f64| {
            let r = x.hypot(y);
            if r == 0.0 {
                0.0
            } else {
                p.value(r) * y / r
            }
        };
        let pts = probes();
        let direct = convolution_oracle(&f, &p.knots(), &pts, OracleResolution::default());
        for (&(x, y), d) in pts.iter().zip(&direct) {
            let r = x.hypot(y);
            let z = sol.z(r) * y / r;
            assert!(((z - d.z) / d.z).abs() < 1e-3, "j = {j} at ({x}, {y}): {z} vs {}", d.z);
        }
    }
}

#[test]
fn derivative_at_origin() {
    for j in 1..=8u32 {
        let spec = PotentialSpec::new(j, 1.0).unwrap();
        let p = radial_profile(&spec);
        let sol = radial_poisson(&|r| p.value(r), spec.n_r).unwrap();
        let expect = spec.zy_origin_closed_form();
        assert!(((sol.zy_origin() - expect) / expect).abs() < 1e-6, "j = {j}");
    }
}

#[test]
fn seeds_keep_a_b_set() {
    let g = Grid::new(1.0, 128, 128).unwrap();
    for j in [1u32, 4, 8] {
        let u = potential_seed(&PotentialSpec::new(j, 1.0).unwrap(), &g).unwrap();
        assert!(validate_admissible(&u).admissible);
        assert!(b_geometry(&u).area_b > 0.0, "j = {j}");
    }
}
