use lhfrac::analytic::{singlet_closed_form, singlet_scf};
use lhfrac::lhf::{compute_g, fix_constants, scf, solve_exchange, vx_update, ChannelKernels, ScfParams, ScfResult};
use lhfrac::occupations::{
    build_density_matrix, default_fill_order, parse_fill_order, spin_density, EnsembleDensityMatrix,
    OccupationSpec, Shell, Side, Spin,
};
use lhfrac::radial::{build_grid, RadialFunction, RadialGrid};

fn grid(z: f64) -> RadialGrid {
    build_grid(z, 600, 40.0).unwrap()
}

fn run(z: f64, n: f64, side: Side) -> (RadialGrid, ScfResult) {
    let g = grid(z);
    let spec = OccupationSpec::from_fill(z, &default_fill_order(), n, side).unwrap();
    let res = scf(&spec, &g, &ScfParams::default()).unwrap();
    (g, res)
}

fn beta_dm(res: &ScfResult) -> EnsembleDensityMatrix {
    build_density_matrix(&res.orbitals, &res.spec, res.spec.potential_fraction()).unwrap()
}

/// Points where the density of the ensemble exceeds `floor` of its peak.
fn mask(dm: &EnsembleDensityMatrix, floor: f64) -> [Vec<bool>; 2] {
    spin_density(dm).map(|n| {
        let peak = n.iter().fold(0.0f64, |m, x| m.max(*x));
        n.iter().map(|x| peak > 0.0 && *x > floor * peak).collect()
    })
}

fn max_diff(a: &[RadialFunction; 2], b: &[RadialFunction; 2], m: &[Vec<bool>; 2]) -> f64 {
    let mut d = 0.0f64;
    for s in 0..2 {
        for i in 0..a[s].len() {
            if m[s][i] {
                d = d.max((a[s][i] - b[s][i]).abs());
            }
        }
    }
    d
}

fn shifted(v: &[RadialFunction; 2], c: [f64; 2]) -> [RadialFunction; 2] {
    [0, 1].map(|s| v[s].iter().map(|x| x + c[s]).collect())
}

#[test]
fn converged_potential_is_a_fixed_point_of_the_update() {
    for (z, n) in [(4.0, 2.5), (4.0, 3.4), (2.0, 1.5)] {
        let (g, res) = run(z, n, Side::Below);
        let dm = beta_dm(&res);
        let out = vx_update(&g, &dm, &res.potentials.v_x, res.potentials.g_beta).unwrap();
        let d = max_diff(&out, &res.potentials.v_x, &mask(&dm, 1e-8));
        assert!(d < 1e-9, "Z={z} N={n}: {d}");
    }
}

#[test]
fn g_of_one_electron_with_self_interaction_removed() {
    let g = grid(1.0);
    let spec = OccupationSpec::new(1.0, vec![], vec![], Shell::new(1, 0).unwrap(), Spin::Up, 1.0).unwrap();
    let res = scf(&spec, &g, &ScfParams::default()).unwrap();
    let dm = beta_dm(&res);
    let v_h = res.potentials.v_h.clone();
    let v_x = [v_h.iter().map(|v| -v).collect(), vec![0.0; g.len()]];
    assert!(compute_g(&g, &v_x, &dm).unwrap().abs() < 1e-10);
    let moved = shifted(&v_x, [0.25, 0.0]);
    assert!((compute_g(&g, &moved, &dm).unwrap() - 0.25).abs() < 1e-10);
}

#[test]
fn g_shifts_by_particle_weighted_constants() {
    let (g, res) = run(4.0, 3.3, Side::Below);
    let dm = beta_dm(&res);
    let g0 = compute_g(&g, &res.potentials.v_x, &dm).unwrap();
    assert!(g0.abs() < 1e-9, "{g0}");
    let c = [0.07, -0.02];
    let g1 = compute_g(&g, &shifted(&res.potentials.v_x, c), &dm).unwrap();
    let expect = c[0] * dm.trace(Spin::Up) + c[1] * dm.trace(Spin::Down);
    assert!((g1 - expect).abs() < 1e-10);
}

#[test]
fn fix_constants_recovers_removed_shift() {
    for n in [1.4, 3.6] {
        let z = if n < 2.0 { 2.0 } else { 4.0 };
        let (g, res) = run(z, n, Side::Below);
        let dm_beta = beta_dm(&res);
        let dm_alpha = build_density_matrix(&res.orbitals, &res.spec, res.spec.alpha).unwrap();
        let c = fix_constants(&g, &res.potentials.v_x, &dm_alpha, &dm_beta).unwrap();
        assert!(c[0].abs() < 1e-9 && c[1].abs() < 1e-9, "{c:?}");
        let moved = shifted(&res.potentials.v_x, [0.3, -0.1]);
        let c = fix_constants(&g, &moved, &dm_alpha, &dm_beta).unwrap();
        assert!((c[0] + 0.3).abs() < 1e-9 && (c[1] - 0.1).abs() < 1e-9, "{c:?}");
    }
}

#[test]
fn singlet_constants_follow_the_closed_form() {
    for n in [1.2, 1.5, 1.8] {
        let (g, res) = run(2.0, n, Side::Below);
        let up = &res.orbital((Shell::new(1, 0).unwrap(), Spin::Up)).unwrap().u;
        let down = &res.orbital((Shell::new(1, 0).unwrap(), Spin::Down)).unwrap().u;
        let closed = singlet_closed_form(&g, up, down, n - 1.0).unwrap();
        assert!((res.potentials.constants[0] - closed.c_up).abs() < 1e-6, "{n}");
        assert!(res.potentials.constants[1].abs() < 1e-6, "{n}");
        let m = mask(&beta_dm(&res), 1e-8);
        assert!(max_diff(&res.potentials.v_x, &closed.v_x, &m) < 1e-6);
    }
}

#[test]
fn integer_gauge_shift_leaves_the_condition_invariant() {
    let (g, res) = run(4.0, 4.0, Side::Below);
    let dm = beta_dm(&res);
    let counts = [dm.trace(Spin::Up), dm.trace(Spin::Down)];
    let c = [0.2, -0.2 * counts[0] / counts[1]];
    let m = mask(&dm, 1e-8);
    let residual = |v: &[RadialFunction; 2]| -> [RadialFunction; 2] {
        let gv = compute_g(&g, v, &dm).unwrap();
        let out = vx_update(&g, &dm, v, gv).unwrap();
        [0, 1].map(|s| out[s].iter().zip(&v[s]).map(|(a, b)| a - b).collect())
    };
    let r0 = residual(&res.potentials.v_x);
    let r1 = residual(&shifted(&res.potentials.v_x, c));
    assert!(max_diff(&r0, &r1, &m) < 1e-9);
    let bad = residual(&shifted(&res.potentials.v_x, [0.2, 0.2]));
    assert!(max_diff(&r0, &bad, &m) > 1e-3);
}

#[test]
fn general_solver_matches_the_two_orbital_singlet() {
    let g = grid(2.0);
    for alpha in [0.3, 0.7] {
        let spec = OccupationSpec::from_fill(2.0, &default_fill_order(), 1.0 + alpha, Side::Below).unwrap();
        let general = scf(&spec, &g, &ScfParams::default()).unwrap();
        let special = singlet_scf(&g, 2.0, alpha, &ScfParams::default()).unwrap();
        assert!((general.e_direct - special.energy).abs() < 1e-7);
        assert!((general.homo().energy - special.epsilon[1]).abs() < 1e-7);
    }
}

#[test]
fn exact_solve_is_gauge_fixed_at_integer_n() {
    let below = run(4.0, 3.0, Side::Below).1;
    let above = run(4.0, 3.0, Side::Above).1;
    assert!((below.e_direct - above.e_direct).abs() < 1e-7);
    let g = grid(4.0);
    let sol = solve_exchange(&g, &beta_dm(&below)).unwrap();
    assert!(sol.g.abs() < 1e-9);
}

/// Exchange energy of a `p` shell by direct double quadrature of the
/// Legendre-expanded Coulomb kernel, including the `k = 2` term.
#[test]
fn p_shell_exchange_integral_against_double_quadrature() {
    let g = grid(10.0);
    let spec = OccupationSpec::from_fill(10.0, &default_fill_order(), 10.0, Side::Below).unwrap();
    let res = scf(&spec, &g, &ScfParams::default()).unwrap();
    let dm = beta_dm(&res);
    let orbs = dm.channel(Spin::Up);
    let kern = ChannelKernels::new(&g, orbs);

    let r = g.r();
    let w = g.weights();
    let p: Vec<usize> = (0..orbs.len()).filter(|&i| orbs[i].l() == 1).collect();
    assert_eq!(p.len(), 1);
    let u = &orbs[p[0]].orbital.u;
    let mut brute = 0.0;
    for i in 0..r.len() {
        for j in 0..r.len() {
            let (lo, hi) = if r[i] < r[j] { (r[i], r[j]) } else { (r[j], r[i]) };
            let radial = (1.0 / hi) * (1.0 / 3.0) + (lo * lo / hi.powi(3)) * (2.0 / 15.0);
            brute += w[i] * w[j] * u[i] * u[i] * u[j] * u[j] * radial * 9.0;
        }
    }
    let from_kernels: f64 = {
        let only_p: Vec<_> = orbs.iter().filter(|o| o.l() == 1).cloned().collect();
        ChannelKernels::new(&g, &only_p).exchange_integral
    };
    assert!(kern.exchange_integral > from_kernels);
    assert!((brute - from_kernels).abs() < 2e-3 * from_kernels, "{brute} vs {from_kernels}");
}

#[test]
fn polarized_fill_order_parses() {
    let order = parse_fill_order("1s:up,2s:up").unwrap();
    let spec = OccupationSpec::from_fill(2.0, &order, 1.5, Side::Below).unwrap();
    assert_eq!(spec.homo, Shell::new(2, 0).unwrap());
    assert_eq!(spec.counts(spec.alpha), [1.5, 0.0]);
}
