//! Seeded property suites for the kernel, the two-state closed forms,
//! the allocation search, and the simulator.

use mac_broadcast::channel::{simplex_grid, ChannelModel, PowerAllocation, PowerMap, RateVector};
use mac_broadcast::opt::{
    self, average_rate_coefficients, maximize_average_rate, maximize_linear, region_vertices,
    SearchOptions,
};
use mac_broadcast::sim::{run_sim, unit_sample, SimConfig};
use mac_broadcast::{cap_term, multi_state, two_state};

fn fig_model() -> ChannelModel {
    ChannelModel::two_state(0.25, 1.0, 10.0, 0.4).unwrap()
}

/// Deterministic point on the k-simplex, exponential-spacing trick.
fn random_simplex(cells: usize, seed: u64, draw: u64) -> Vec<f64> {
    let mut w: Vec<f64> = (0..cells)
        .map(|i| {
            let u = unit_sample(seed, draw * cells as u64 + i as u64);
            (-(1.0 - u).ln()).max(1e-300)
        })
        .collect();
    let total: f64 = w.iter().sum();
    for x in &mut w {
        *x /= total;
    }
    w
}

fn random_allocation(ell: usize, seed: u64, draw: u64) -> PowerAllocation {
    PowerAllocation::Symmetric(PowerMap::new(ell, random_simplex(ell * ell, seed, draw)).unwrap())
}

#[test]
fn cap_term_monotone_in_both_arguments() {
    for k in 0..1000u64 {
        let x = 4.0 * unit_sample(101, 3 * k) + 1e-6;
        let y = 4.0 * unit_sample(101, 3 * k + 1);
        let p = 20.0 * unit_sample(101, 3 * k + 2) + 0.1;
        let delta = 1e-3;
        let base = cap_term(x, y, p).unwrap();
        assert!(cap_term(x + delta, y, p).unwrap() > base);
        assert!(cap_term(x, y + delta, p).unwrap() < base);
    }
}

#[test]
fn cap_term_scaling_identity() {
    // scaling signal and interference together helps: the noise floor
    // 1/P does not scale
    for k in 0..500u64 {
        let x = 4.0 * unit_sample(102, 3 * k) + 1e-6;
        let y = 4.0 * unit_sample(102, 3 * k + 1);
        let c = 1.0 + 4.0 * unit_sample(102, 3 * k + 2) + 1e-6;
        let p = 10.0;
        assert!(cap_term(c * x, c * y, p).unwrap() > cap_term(x, y, p).unwrap());
    }
}

#[test]
fn simplex_grid_count_matches_composition_formula() {
    fn binom(n: u64, k: u64) -> u64 {
        let mut acc = 1u64;
        for i in 0..k {
            acc = acc * (n - i) / (i + 1);
        }
        acc
    }
    for (ell, res) in [(1usize, 0.5f64), (2, 0.5), (2, 0.2), (2, 0.1), (3, 0.5)] {
        let n = (1.0 / res).round() as u64;
        let k = (ell * ell) as u64;
        let expect = binom(n + k - 1, k - 1);
        let got = simplex_grid(ell, res).unwrap().count() as u64;
        assert_eq!(got, expect, "count mismatch at ell={ell}, res={res}");
        for pa in simplex_grid(ell, res).unwrap() {
            pa.validate().unwrap();
        }
    }
}

#[test]
fn stage_constants_symmetry_on_random_allocations() {
    let m = fig_model();
    for k in 0..200u64 {
        let pa = random_allocation(2, 7, k);
        let sc = two_state::stage_constants(&m, &pa).unwrap();
        for (i, j) in [(4, 8), (14, 16), (13, 17), (15, 18), (29, 31), (30, 32)] {
            assert!(
                (sc.a(i) - sc.a(j)).abs() <= 1e-12,
                "a{i} != a{j}: {} vs {}",
                sc.a(i),
                sc.a(j)
            );
        }
    }
}

#[test]
fn base_layer_sum_cap_degrades_with_the_weak_state() {
    // the all-weak joint state always caps the base layer harder than
    // the all-strong one, including asymmetric splits
    let m = fig_model();
    for k in 0..200u64 {
        let pa = PowerAllocation::Asymmetric(
            PowerMap::new(2, random_simplex(4, 21, 2 * k)).unwrap(),
            PowerMap::new(2, random_simplex(4, 21, 2 * k + 1)).unwrap(),
        );
        let sc = two_state::stage_constants(&m, &pa).unwrap();
        assert!(sc.a(3) <= sc.a(12) + 1e-15);
    }
}

#[test]
fn baseline_grouping_recovers_the_region_projection() {
    // with zero power on the cross/top layers, the weak-group cap of the
    // grouped baseline equals the projected region cap exactly; the
    // strong-group cap agrees whenever the mixed-state stage is slack
    // (at strong-heavy splits the staged decoder binds first and the
    // projection is the smaller min{2*a14, a24})
    let m = fig_model();
    let mut strong_agreements = 0usize;
    for k in 0..=200u64 {
        let b11 = k as f64 / 200.0;
        let pa = PowerAllocation::symmetric_two_state(b11, 1.0 - b11, 0.0, 0.0).unwrap();
        let bb = two_state::baseline_region(&m, &pa).unwrap();
        let lb = two_state::layer_bounds(&m, &pa).unwrap();
        let sc = two_state::stage_constants(&m, &pa).unwrap();

        assert!(
            (2.0 * lb.r11 - bb.weak).abs() <= 1e-12,
            "weak cap mismatch at b11={b11}"
        );

        let projected = 2.0 * lb.r12;
        let staged = (2.0 * sc.a(14)).min(sc.a(24));
        assert!((projected - staged).abs() <= 1e-12);
        if 2.0 * sc.a(14) >= sc.a(24) {
            assert!((projected - bb.strong).abs() <= 1e-12);
            strong_agreements += 1;
        } else {
            assert!(projected <= bb.strong + 1e-12);
        }
    }
    assert!(strong_agreements > 0);
}

#[test]
fn region_membership_implies_stagewise_feasibility() {
    let m = fig_model();
    let mut checked = 0usize;
    for k in 0..100u64 {
        let pa = random_allocation(2, 31, k);
        let region = two_state::rate_region(&m, &pa).unwrap();
        let verts = region_vertices(&region).unwrap();
        for rep in 0..5u64 {
            // random convex combination of vertices, pulled strictly inside
            let w = random_simplex(verts.len(), 32, k * 5 + rep);
            let mut coords = vec![0.0; 4];
            for (v, wi) in verts.iter().zip(&w) {
                for (c, e) in coords.iter_mut().zip(v.entries()) {
                    *c += wi * e * 0.999;
                }
            }
            let rv = RateVector::new(2, coords).unwrap();
            assert!(region.contains(&rv, 1e-9).unwrap());
            let report = two_state::stage_feasibility(&m, &pa, &rv).unwrap();
            assert!(
                report.passed(),
                "stage check failed for interior point at draw {k}"
            );
            checked += 1;
        }
    }
    assert_eq!(checked, 500);
}

#[test]
fn general_region_zero_power_streams_have_zero_caps() {
    let m3 = ChannelModel::new(vec![0.2, 0.5, 1.0], 10.0, vec![0.3, 0.3, 0.4]).unwrap();
    for pa in simplex_grid(3, 0.5).unwrap() {
        let region = multi_state::rate_region(&m3, &pa).unwrap();
        let b = pa.symmetric().unwrap();
        for u in 1..=3usize {
            for v in 1..=3usize {
                if b.get(u, v) == 0.0 {
                    let mut sig = vec![0u8; 9];
                    sig[(u - 1) * 3 + (v - 1)] = 1;
                    let bound = region.bound_for(&sig).unwrap();
                    assert_eq!(bound, 0.0, "stream ({u},{v}) starved but capped at {bound}");
                }
            }
        }
    }
}

#[test]
fn bound_terms_nonnegative_on_random_allocations() {
    let m3 = ChannelModel::new(vec![0.2, 0.5, 1.0], 10.0, vec![0.3, 0.3, 0.4]).unwrap();
    for k in 0..100u64 {
        let pa = random_allocation(3, 41, k);
        for v in 2..=3usize {
            for u in 1..v {
                let pb = multi_state::pair_bounds(&m3, &pa, u, v).unwrap();
                for (name, val) in [
                    ("b1", pb.b1),
                    ("b2", pb.b2),
                    ("b3", pb.b3),
                    ("b4", pb.b4),
                    ("b5", pb.b5),
                    ("b6", pb.b6.unwrap()),
                    ("b7", pb.b7),
                    ("b8", pb.b8),
                    ("b9", pb.b9),
                    ("b10", pb.b10),
                ] {
                    assert!(val >= 0.0, "{name}({u},{v}) = {val} < 0");
                }
            }
        }
        for u in 1..=3usize {
            let d = multi_state::diagonal_bounds(&m3, &pa, u).unwrap();
            assert!(d.b11 >= 0.0 && d.b12 >= 0.0);
        }
    }
}

#[test]
fn grid_average_rate_optimum_is_monotone_in_weak_probability() {
    // every objective weight shrinks as the weak probability grows, so
    // the grid optimum cannot rise (refinement disabled: it could shift
    // which local step wins and blur the comparison)
    let opts = SearchOptions {
        resolution: 0.1,
        refine: false,
        min_step: 1e-4,
    };
    let mut last = f64::INFINITY;
    for i in 0..=4 {
        let p = i as f64 / 4.0;
        let m = ChannelModel::two_state(0.25, 1.0, 5.0, p).unwrap();
        let best = maximize_average_rate(&m, &opts, false).unwrap();
        assert!(
            best.value <= last + 1e-12,
            "optimum rose from {last} to {}",
            best.value
        );
        last = best.value;
    }
}

#[test]
fn optimizer_argmax_is_consistent_with_its_value() {
    let m = ChannelModel::two_state(0.4, 1.0, 5.0, 0.3).unwrap();
    let opts = SearchOptions {
        resolution: 0.1,
        refine: true,
        min_step: 1e-3,
    };
    let best = maximize_average_rate(&m, &opts, false).unwrap();
    let region = two_state::rate_region(&m, &best.allocation).unwrap();
    assert!(region.contains(&best.rates, 1e-9).unwrap());
    let coeffs = average_rate_coefficients(&m);
    let value: f64 = coeffs
        .iter()
        .zip(best.rates.entries())
        .map(|(c, r)| c * r)
        .sum();
    assert!((value - best.value).abs() <= 1e-12);
    // and the linear value is the decode-table expectation of the rates
    let table = multi_state::decode_table(2).unwrap();
    let avg = opt::average_rate_general(&m, &best.rates, &table).unwrap();
    assert!((avg - best.value).abs() <= 1e-12);
}

#[test]
fn simulator_counts_follow_the_multinomial() {
    let model = ChannelModel::two_state(0.25, 1.0, 10.0, 0.4).unwrap();
    let allocation = PowerAllocation::symmetric_two_state(0.4, 0.3, 0.2, 0.1).unwrap();
    let trials = 40_000u64;
    for seed in [1u64, 2, 3, 5, 8, 13, 21, 34] {
        let cfg = SimConfig {
            trials,
            seed,
            model: model.clone(),
            rates: RateVector::zero(2),
            allocation: allocation.clone(),
        };
        let rep = run_sim(&cfg).unwrap();
        for (p, q) in [(1usize, 1usize), (1, 2), (2, 1), (2, 2)] {
            let prob = model.prob(p) * model.prob(q);
            let expect = trials as f64 * prob;
            let sigma = (trials as f64 * prob * (1.0 - prob)).sqrt();
            let got = *rep.per_state_counts.get(&(p, q)).unwrap_or(&0) as f64;
            assert!(
                (got - expect).abs() <= 4.0 * sigma,
                "seed {seed}, state ({p},{q}): count {got} vs {expect} +- 4*{sigma}"
            );
        }
    }
}

#[test]
fn simulator_mean_converges_to_the_formula() {
    // 4-sigma band must hold in at least 99 of 100 seeded repetitions;
    // flake policy: one full rerun with shifted seeds
    fn failures(offset: u64) -> usize {
        let model = ChannelModel::two_state(0.25, 1.0, 10.0, 0.4).unwrap();
        let allocation = PowerAllocation::symmetric_two_state(0.4, 0.3, 0.2, 0.1).unwrap();
        let lb = two_state::layer_bounds(&model, &allocation).unwrap();
        let scale = 0.9 * (lb.cross_sum / (lb.r12 + lb.r21)).min(1.0);
        let rates =
            RateVector::two_state(0.9 * lb.r11, scale * lb.r12, scale * lb.r21, 0.9 * lb.r22)
                .unwrap();
        let mut bad = 0;
        for k in 0..100u64 {
            let cfg = SimConfig {
                trials: 20_000,
                seed: offset + k,
                model: model.clone(),
                rates: rates.clone(),
                allocation: allocation.clone(),
            };
            let rep = run_sim(&cfg).unwrap();
            if (rep.empirical_mean - rep.formula_value).abs() > 4.0 * rep.std_error {
                bad += 1;
            }
        }
        bad
    }
    let first = failures(1000);
    if first > 1 {
        let second = failures(9000);
        assert!(
            second <= 1,
            "convergence failed twice: {first} then {second} of 100"
        );
    }
}

#[test]
fn lp_argmax_ties_resolve_to_zero_coordinates() {
    let m = fig_model();
    let pa = random_allocation(2, 55, 0);
    let region = two_state::rate_region(&m, &pa).unwrap();
    // only the top layer pays; everything else must sit at the origin
    let (_, arg) = maximize_linear(&region, &[0.0, 0.0, 0.0, 1.0]).unwrap();
    assert_eq!(arg.get(1, 1), 0.0);
    assert_eq!(arg.get(1, 2), 0.0);
    assert_eq!(arg.get(2, 1), 0.0);
}
