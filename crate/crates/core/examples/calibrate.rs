//! Sweep that produces `data/calibration.json`.
//!
//! ```text
//! cargo run --release --example calibrate            # print only
//! cargo run --release --example calibrate -- --write # also overwrite the shipped file
//! ```
//!
//! Lower constants are the observed minimum halved, upper constants the
//! observed maximum doubled.

use std::collections::BTreeMap;

use rayon::prelude::*;
use wellscape::bounds::killerinterp_check;
use wellscape::calibration::Calibration;
use wellscape::constructions::*;
use wellscape::energy::*;
use wellscape::field::l2_norm;
use wellscape::landscape::*;
use wellscape::{Grid, ScalarField};

const N: usize = 128;

fn round_sig(x: f64, down: bool) -> f64 {
    let e = 10f64.powi(x.abs().log10().floor() as i32 - 2);
    let v = if down { (x / e).floor() * e } else { (x / e).ceil() * e };
    format!("{v:.2e}").parse().unwrap()
}

fn min_max(xs: &[f64]) -> (f64, f64) {
    xs.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

/// Raw killerinterp ratios at two truncation levels.
fn interp_ratios(u: &ScalarField, neutral: &Calibration) -> Vec<f64> {
    let cols = column_uyy_sq(u);
    let geo = b_geometry(u);
    let mut in_pi: Vec<f64> = geo.pi_columns.iter().map(|&i| cols[i]).collect();
    if in_pi.is_empty() {
        return vec![];
    }
    in_pi.sort_by(f64::total_cmp);
    let levels = [in_pi[in_pi.len() / 2] * (1.0 + 1e-9), in_pi[in_pi.len() - 1] * (1.0 + 1e-9)];
    levels
        .iter()
        .filter_map(|&m| killerinterp_check(u, m, neutral).ok())
        .map(|r| r.lhs / r.rhs)
        .collect()
}

fn main() {
    let write = std::env::args().any(|a| a == "--write");
    let shipped = Calibration::shipped();
    let mut neutral_map = BTreeMap::new();
    for k in wellscape::calibration::KEYS {
        neutral_map.insert(k.to_string(), 1.0);
    }
    let neutral = Calibration::parse(&serde_json::to_string(&neutral_map).unwrap()).unwrap();
    let grid = Grid::new(1.0, N, N).unwrap();
    let cfg = MinimizeConfig::default();

    // critical depth ratios Δ_c L / ε
    let mut ratios = Vec::new();
    let mut crit = Vec::new();
    for eps in [0.01, 0.02, 0.05] {
        let r = critical_delta(eps, Variant::E1, &grid, &cfg, 0.25, &shipped).unwrap();
        let ratio = r.midpoint() * grid.l / eps;
        println!("critical eps={eps}: [{:.4e}, {:.4e}] ratio {ratio:.3}", r.delta_lo, r.delta_hi);
        ratios.push(ratio);
        crit.push((eps, r.delta_hi));
    }

    // energy-decreasing states above the critical depth
    let mut states: Vec<(f64, f64, ScalarField)> = Vec::new();
    for &(eps, dc) in &crit[1..] {
        for m in [1.5, 3.0, 6.0] {
            let delta = m * dc;
            let p = EnergyParams::new(eps, delta, Variant::E1).unwrap();
            let e0 = delta * grid.area();
            let tol = energy_tolerance(e0, eps);
            let found: Vec<ScalarField> = Start::standard_portfolio()
                .par_iter()
                .filter(|s| !matches!(s, Start::Zero))
                .filter_map(|s| build_start(s, &p, &grid, 0))
                .filter_map(|u| minimize(&u, &p, &cfg).ok())
                .filter(|r| r.breakdown.total < e0 - tol && r.breakdown.area_b > 0.0)
                .map(|r| r.field)
                .collect();
            println!("pq eps={eps} delta={delta:.4e}: {} decreasing states", found.len());
            states.extend(found.into_iter().map(|u| (eps, delta, u)));
        }
    }
    assert!(!states.is_empty(), "no energy-decreasing states found");
    let (mut cf, mut cg, mut cu) = (Vec::new(), Vec::new(), Vec::new());
    for (eps, delta, u) in &states {
        let p = l2_norm(u);
        let q = b_geometry(u).area_b.sqrt();
        cf.push(p * q / (eps.powi(6) * delta.powf(-3.5)));
        cg.push(p / (q * eps / delta.sqrt()));
        cu.push(p / (q * grid.l * delta.sqrt()));
    }

    // interpolation constant over minimizers and constructions
    let mut family: Vec<ScalarField> = states.iter().map(|s| s.2.clone()).collect();
    for eps in [0.01, 0.02, 0.05] {
        family.push(branched_seed(&BranchedSpec::new(eps, 1.0).unwrap(), &grid).unwrap());
    }
    family.push(nucleation_bump(&BumpSpec::new(0.1, 0.25, 4.0, 1.0).unwrap(), &grid).unwrap());
    for j in [2, 5, 8] {
        family.push(potential_seed(&PotentialSpec::new(j, 1.0).unwrap(), &grid).unwrap());
    }
    let interp: Vec<f64> = family.iter().flat_map(|u| interp_ratios(u, &neutral)).collect();

    let (rmin, rmax) = min_max(&ratios);
    let (cf_min, _) = min_max(&cf);
    let (cg_min, _) = min_max(&cg);
    let (_, cu_max) = min_max(&cu);
    let (ki_min, _) = min_max(&interp);
    println!("observed: ratio [{rmin:.3}, {rmax:.3}] c_f {cf_min:.4e} c_g {cg_min:.4e} c_u {cu_max:.4e} killerinterp {ki_min:.4e}");

    let pq_f = round_sig(cf_min / 2.0, true);
    let pq_g = round_sig(cg_min / 2.0, true);
    let pq_upper = round_sig(cu_max * 2.0, false);
    let mut out = BTreeMap::new();
    out.insert("critical_lower", round_sig(rmin / 2.0, true));
    out.insert("critical_upper", round_sig(rmax * 2.0, false));
    out.insert("killerinterp", round_sig(ki_min / 2.0, true));
    out.insert("pq_f", pq_f);
    out.insert("pq_g", pq_g);
    out.insert("pq_upper", pq_upper);
    out.insert("theorem2_r", round_sig((pq_f * pq_g).sqrt(), true));
    out.insert("theorem2_s", round_sig(pq_f / pq_upper, true));
    let json = serde_json::to_string_pretty(&out).unwrap() + "\n";
    print!("{json}");
    if write {
        let path = concat!(env!("CARGO_MANIFEST_DIR"), "/data/calibration.json");
        std::fs::write(path, json).unwrap();
        println!("wrote {path}");
    }
}
