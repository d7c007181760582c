//! One line per acceptance criterion; the test fails if any criterion does.

use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use lhfrac::analytic::{oep_singlet_scf, singlet_closed_form, singlet_jump, singlet_scf, triplet_jump};
use lhfrac::cli::{parse_config, run_scan, PointRecord};
use lhfrac::lhf::{potential_jump, scf, ScfParams, ScfResult};
use lhfrac::occupations::{
    beta_from_alpha, build_density_matrix, default_fill_order, parse_fill_order, spin_density, OccupationSpec,
    Shell, Side, Spin,
};
use lhfrac::radial::{build_grid, RadialGrid};
use lhfrac::wick::run_wick_suite;

const SINGLET_ORACLE: f64 = -0.8207003630706;

struct Report {
    lines: Vec<(usize, bool, String)>,
}

impl Report {
    fn record(&mut self, id: usize, pass: bool, detail: String, start: Instant) {
        let line = format!(
            "criterion {id:>2}: {} ({:.1}s) {detail}",
            if pass { "PASS" } else { "FAIL" },
            start.elapsed().as_secs_f64()
        );
        // Written past the test harness capture so the lines always show.
        writeln!(std::io::stderr(), "{line}").unwrap();
        self.lines.push((id, pass, line));
    }
}

fn grid(z: f64) -> RadialGrid {
    build_grid(z, 600, 40.0).unwrap()
}

fn run(grid: &RadialGrid, z: f64, order: &[(Shell, Spin)], n: f64, params: &ScfParams) -> ScfResult {
    let spec = OccupationSpec::from_fill(z, order, n, Side::Below).unwrap();
    scf(&spec, grid, params).unwrap()
}

fn energy(grid: &RadialGrid, z: f64, order: &[(Shell, Spin)], n: f64, params: &ScfParams) -> f64 {
    run(grid, z, order, n, params).e_direct
}

fn scan(text: &str) -> Vec<PointRecord> {
    let config = parse_config(text).unwrap();
    let points = config.scan.unwrap().points();
    run_scan(&config, &points, Side::Below)
        .unwrap()
        .into_iter()
        .map(|(n, r)| r.unwrap_or_else(|e| panic!("scan point {n}: {e}")))
        .collect()
}

fn criterion_1(report: &mut Report) {
    let t = Instant::now();
    let g = grid(2.0);
    let (mut de, mut dv) = (0.0f64, 0.0f64);
    for alpha in [0.25, 0.5, 0.75, 1.0] {
        let res = run(&g, 2.0, &default_fill_order(), alpha, &ScfParams::default());
        de = de.max((res.e_direct + 2.0 * alpha).abs()).max((res.e_dft + 2.0 * alpha).abs());
        let dm = build_density_matrix(&res.orbitals, &res.spec, res.spec.alpha).unwrap();
        let n = &spin_density(&dm)[0];
        for (i, r) in g.r().iter().enumerate() {
            if n[i] / (4.0 * PI * r * r) > 1e-12 {
                dv = dv.max((res.potentials.v_h[i] + res.potentials.v_x[0][i]).abs());
            }
        }
    }
    report.record(
        1,
        de < 1e-6 && dv < 1e-8,
        format!("max |E + 2a| = {de:.2e}, max |v_eff - v_ext| = {dv:.2e}"),
        t,
    );
}

fn criterion_2(report: &mut Report) {
    let t = Instant::now();
    let g = grid(2.0);
    let (mut de, mut dv, mut db) = (0.0f64, 0.0f64, 0.0f64);
    for alpha in [0.2, 0.5, 0.8] {
        let res = run(&g, 2.0, &default_fill_order(), 1.0 + alpha, &ScfParams::default());
        let special = singlet_scf(&g, 2.0, alpha, &ScfParams::default()).unwrap();
        de = de.max((res.e_direct - special.energy).abs());
        let up = &res.orbital((Shell::new(1, 0).unwrap(), Spin::Up)).unwrap().u;
        let down = &res.orbital((Shell::new(1, 0).unwrap(), Spin::Down)).unwrap().u;
        let closed = singlet_closed_form(&g, up, down, alpha).unwrap();
        db = db
            .max((res.spec.potential_fraction() - alpha / (2.0 - alpha)).abs())
            .max((closed.beta - alpha / (2.0 - alpha)).abs());
        let dm = build_density_matrix(&res.orbitals, &res.spec, res.spec.potential_fraction()).unwrap();
        for (s, n) in spin_density(&dm).iter().enumerate() {
            let peak = n.iter().fold(0.0f64, |m, x| m.max(*x));
            for i in 0..g.len() {
                if n[i] > 1e-8 * peak {
                    let v = res.potentials.v_h[i] + res.potentials.v_x[s][i];
                    dv = dv.max((v - closed.v_tilde[s][i]).abs());
                }
            }
        }
    }
    report.record(
        2,
        de < 1e-6 && dv < 1e-6 && db < 1e-15,
        format!("max |dE| = {de:.2e}, max |d v_tilde| = {dv:.2e}, max |d beta| = {db:.1e}"),
        t,
    );
}

fn criterion_3(report: &mut Report) {
    let t = Instant::now();
    let scans = [
        "Z = 2\nscan.start = 0\nscan.stop = 2\nscan.step = 0.1\n",
        "Z = 2\nfill = 1s:up,2s:up\nscan.start = 0.1\nscan.stop = 2\nscan.step = 0.1\n",
        "Z = 4\nscan.start = 2\nscan.stop = 4\nscan.step = 0.1\n",
        "Z = 12\nscan.start = 10\nscan.stop = 12\nscan.step = 0.1\n",
    ];
    let (mut points, mut gap, mut residual) = (0, 0.0f64, 0.0f64);
    for text in scans {
        for rec in scan(text) {
            points += 1;
            gap = gap.max((rec.e_direct - rec.e_dft).abs());
            residual = residual.max(rec.identity_residual.abs());
        }
    }
    report.record(
        3,
        gap < 1e-6 && residual < 1e-6,
        format!("{points} points: max |E_direct - E_dft| = {gap:.2e}, max residual = {residual:.2e}"),
        t,
    );
}

fn criterion_4(report: &mut Report) {
    let t = Instant::now();
    let g = grid(2.0);
    let order = default_fill_order();
    let p = ScfParams { tol: 1e-11, tol_energy: 1e-13, max_iter: 5000, ..Default::default() };
    let d = 1e-4;
    let e1 = energy(&g, 2.0, &order, 1.0, &p);
    let left = (e1 - energy(&g, 2.0, &order, 1.0 - d, &p)) / d;
    let right = (energy(&g, 2.0, &order, 1.0 + d, &p) - e1) / d;
    let above = scf(&OccupationSpec::from_fill(2.0, &order, 1.0, Side::Above).unwrap(), &g, &p).unwrap();
    let eps_up = run(&g, 2.0, &order, 1.0, &p).homo().energy;
    let eps_down = above.homo().energy;
    let expect = SINGLET_ORACLE + 2.0;
    let closed = singlet_jump(&g, 2.0).unwrap().jump;
    let jump = right - left;
    let pass = (jump - expect).abs() < 1e-3
        && (eps_up + 2.0).abs() < 1e-6
        && (eps_down - SINGLET_ORACLE).abs() < 1e-6;
    report.record(
        4,
        pass,
        format!(
            "slope jump {jump:.6} vs {expect:.6} (closed form {closed:.6}); eps_up {eps_up:.9}, eps_down {eps_down:.9}"
        ),
        t,
    );
}

fn criterion_5(report: &mut Report) {
    let t = Instant::now();
    let g = grid(2.0);
    let order = parse_fill_order("1s:up,2s:up").unwrap();
    let tight = ScfParams { tol: 1e-11, tol_energy: 1e-13, max_iter: 5000, ..Default::default() };
    let expect = triplet_jump(&g, 2.0).unwrap().jump;
    let e1 = energy(&g, 2.0, &order, 1.0, &tight);
    let slopes = |d: f64| {
        let left = (e1 - energy(&g, 2.0, &order, 1.0 - d, &tight)) / d;
        let right = (energy(&g, 2.0, &order, 1.0 + d, &tight) - e1) / d;
        right - left
    };
    let jump_fine = slopes(1e-8);
    let jump_coarse = slopes(1e-3);

    let d = 1e-3;
    let below = run(&g, 2.0, &order, 1.0 - d, &tight);
    let above = run(&g, 2.0, &order, 1.0 + d, &tight);
    let jump = potential_jump(&g, &below, &above, 1e-6).unwrap();
    let dv = (0..g.len())
        .filter(|&i| jump.region[i])
        .map(|i| jump.delta_v[0][i].abs())
        .fold(0.0f64, f64::max);
    let core = (0..g.len())
        .filter(|&i| jump.region[i] && g.r()[i] < 1.0)
        .map(|i| jump.delta_v[0][i].abs())
        .fold(0.0f64, f64::max);
    let slope_ok = (jump_fine - expect).abs() < 1e-3;
    report.record(
        5,
        slope_ok && dv < 1e-4,
        format!(
            "slope jump {jump_fine:.6} at d=1e-8 ({jump_coarse:.6} at d=1e-3) vs {expect:.6} [{}]; max |dv_x_up| at d=1e-3 = {dv:.2e} ({core:.2e} for r < 1) [{}]",
            if slope_ok { "ok" } else { "off" },
            if dv < 1e-4 { "ok" } else { "off" }
        ),
        t,
    );
}

fn criterion_6(report: &mut Report) {
    let t = Instant::now();
    let g = grid(4.0);
    let order = default_fill_order();
    let p = ScfParams::default();
    let below = run(&g, 4.0, &order, 2.9, &p);
    let above = run(&g, 4.0, &order, 3.1, &p);
    let jump = potential_jump(&g, &below, &above, 1e-6).unwrap();
    let pass = jump.variation[0] < 0.02 && jump.variation[1] < 0.02 && jump.constraint_residual < 0.02;
    report.record(
        6,
        pass,
        format!(
            "dv_up {:.4} (variation {:.2}%), dv_down {:.4} (variation {:.2}%), |2dv_up + dv_down| relative {:.2}%",
            jump.mean[0],
            100.0 * jump.variation[0],
            jump.mean[1],
            100.0 * jump.variation[1],
            100.0 * jump.constraint_residual
        ),
        t,
    );
}

fn criterion_7(report: &mut Report) {
    let t = Instant::now();
    let default = default_fill_order();
    let triplet = parse_fill_order("1s:up,2s:up").unwrap();
    let cases: [(f64, &[(Shell, Spin)], f64); 6] = [
        (2.0, &default, 1.5),
        (2.0, &triplet, 1.5),
        (4.0, &default, 2.9),
        (4.0, &default, 3.1),
        (4.0, &default, 3.5),
        (12.0, &default, 11.5),
    ];
    let mut worst = 0.0f64;
    let mut details = Vec::new();
    for (z, order, n) in cases {
        let g = grid(z);
        let res = run(&g, z, order, n, &ScfParams::default());
        let rec = PointRecord::from_result(&g, &res).unwrap();
        let beta = res.spec.potential_fraction();
        let mut parts = Vec::new();
        for spin in Spin::BOTH {
            if res.spec.count(spin, res.spec.alpha) == 0.0 {
                continue;
            }
            let expect = if spin == res.spec.homo_spin { -beta } else { -1.0 };
            let got = rec.tail_slope[spin.index()];
            worst = worst.max((got - expect).abs());
            parts.push(format!("{spin} {got:.4}/{expect:.4}"));
        }
        details.push(format!("Z={z} N={n}: {}", parts.join(" ")));
    }
    report.record(
        7,
        worst < 1e-2,
        format!("max slope error {worst:.2e}; {}", details.join("; ")),
        t,
    );
}

fn criterion_8(report: &mut Report) {
    let t = Instant::now();
    let p = ScfParams { tol: 1e-10, tol_energy: 1e-12, ..Default::default() };
    let d = 1e-3;
    let order = default_fill_order();
    let mut pass = true;
    let mut details = Vec::new();
    for (z, n) in [(2.0, 1.0), (4.0, 3.0)] {
        let g = grid(z);
        let e0 = energy(&g, z, &order, n, &p);
        let lo = energy(&g, z, &order, n - d, &p);
        let hi = energy(&g, z, &order, n + d, &p);
        let gap = (hi - lo).abs();
        let jump = (hi - e0) / d - (e0 - lo) / d;
        pass &= gap < 1e-3 && jump > 0.1;
        // One-sided limits by linear extrapolation from N±d and N±2d.
        let lo2 = energy(&g, z, &order, n - 2.0 * d, &p);
        let hi2 = energy(&g, z, &order, n + 2.0 * d, &p);
        let limit_gap = ((2.0 * hi - hi2) - (2.0 * lo - lo2)).abs();
        details.push(format!(
            "Z={z} N={n}: |E(N-d) - E(N+d)| {gap:.2e}, extrapolated one-sided limits differ by {limit_gap:.1e}, slope jump {jump:.4}"
        ));
    }
    report.record(8, pass, details.join("; "), t);
}

fn criterion_9(report: &mut Report) {
    let t = Instant::now();
    let r = run_wick_suite(20240601, 1000).unwrap();
    let elapsed = t.elapsed().as_secs_f64();
    report.record(
        9,
        r.passed(1e-12) && elapsed < 60.0,
        format!(
            "{} trials: gap {:.1e}, affine {:.1e}, factorization {:.1e}, integer idempotency {:.1e}, fractional min {:.1e}",
            r.trials,
            r.max_wick_gap,
            r.max_affine_residual,
            r.max_factorization_error,
            r.max_integer_idempotency,
            r.min_fractional_deviation
        ),
        t,
    );
}

fn criterion_10(report: &mut Report) {
    let t = Instant::now();
    let g = grid(2.0);
    let p = ScfParams { tol: 1e-10, tol_energy: 1e-12, ..Default::default() };
    let mut integer = 0.0f64;
    let mut fractional = 0.0f64;
    for alpha in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let lhf = energy(&g, 2.0, &default_fill_order(), 1.0 + alpha, &p);
        let oep = oep_singlet_scf(&g, 2.0, alpha, &p).unwrap().energy;
        if alpha == 0.0 || alpha == 1.0 {
            integer = integer.max((lhf - oep).abs());
        } else {
            fractional = fractional.max((lhf - oep).abs());
        }
    }
    report.record(
        10,
        integer < 1e-6 && fractional < 1e-2,
        format!("integer N: {integer:.2e}; fractional N: {fractional:.2e}"),
        t,
    );
}

fn criterion_11(report: &mut Report) {
    let t = Instant::now();
    let mut worst = 0.0f64;
    let mut endpoints = true;
    for n in 1..=4usize {
        for i in 0..=20 {
            let alpha = i as f64 * 0.05;
            let nf = n as f64;
            let direct = alpha * nf / ((1.0 - alpha) * (1.0 + nf) + alpha * nf);
            let b = beta_from_alpha(n, alpha).unwrap();
            worst = worst.max((b - direct).abs());
        }
        endpoints &= beta_from_alpha(n, 0.0).unwrap() == 0.0 && beta_from_alpha(n, 1.0).unwrap() == 1.0;
    }
    report.record(
        11,
        worst <= 1e-15 && endpoints,
        format!("max deviation {worst:.1e}, endpoints exact: {endpoints}"),
        t,
    );
}

#[test]
fn acceptance() {
    let mut report = Report { lines: Vec::new() };
    criterion_1(&mut report);
    criterion_2(&mut report);
    criterion_3(&mut report);
    criterion_4(&mut report);
    criterion_5(&mut report);
    criterion_6(&mut report);
    criterion_7(&mut report);
    criterion_8(&mut report);
    criterion_9(&mut report);
    criterion_10(&mut report);
    criterion_11(&mut report);
    let failed: Vec<usize> = report.lines.iter().filter(|l| !l.1).map(|l| l.0).collect();
    assert!(failed.is_empty(), "criteria not met: {failed:?}");
}
