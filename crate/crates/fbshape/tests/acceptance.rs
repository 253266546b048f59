//! Acceptance gate: one test per criterion, each printing a single
//! pass/fail line (run with `cargo test --test acceptance -- --nocapture`).

use std::path::Path;
use std::process::Command;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;

use fbshape::cheeger::cheeger_convex;
use fbshape::conditions::{
    didenko_default_fields, didenko_ratio, effective_line_threshold, existence_report,
    extrapolate_threshold, ConditionParams, Verdict,
};
use fbshape::fem::{green_identity_report, solve_chain, solve_derivative_chain, FemSystem};
use fbshape::flows::{run_flow, FlowParams, FlowVerdict, ProblemId};
use fbshape::mesh::triangulate;
use fbshape::shape_calculus::{derivcheck, FunctionalId, Workspace};
use fbshape::{ConvexBody, DeformationField, SourceSpec, StarDomain};

fn check(n: u32, name: &str, ok: bool, detail: &str) {
    let status = if ok { "PASS" } else { "FAIL" };
    println!("criterion {n:02} {name}: {status} ({detail})");
    assert!(ok, "criterion {n:02} {name} failed: {detail}");
}

/// Gentle random star domain, padded to the full 16-mode basis.
fn random_domain(rng: &mut ChaCha8Rng) -> StarDomain {
    let a0 = rng.gen_range(0.85..1.2);
    let mut cos = vec![0.0; 16];
    let mut sin = vec![0.0; 16];
    for k in 0..5 {
        let amp = 0.06 / (k as f64 + 1.0);
        cos[k] = rng.gen_range(-amp..amp);
        sin[k] = rng.gen_range(-amp..amp);
    }
    StarDomain::new([0.0, 0.0], a0, cos, sin).unwrap()
}

fn boundary_average(sys: &FemSystem<f64>, normal_derivative: &[f64]) -> f64 {
    let num = sys.boundary_integral_with(|i| -normal_derivative[i]);
    let den = sys.boundary_integral_with(|_| 1.0);
    num / den
}

#[test]
fn criterion_01_ball_oracle_match() {
    let disk = StarDomain::circle([0.0, 0.0], 1.0).unwrap();
    let mesh = triangulate(&disk, 0.02).unwrap();
    let sys = FemSystem::new(mesh);
    let chain = solve_chain(&sys, &SourceSpec::Constant(1.0)).unwrap();
    let center = sys
        .mesh
        .nodes
        .iter()
        .enumerate()
        .min_by(|(_, a), (_, b)| {
            (a[0] * a[0] + a[1] * a[1]).partial_cmp(&(b[0] * b[0] + b[1] * b[1])).unwrap()
        })
        .map(|(i, _)| i)
        .unwrap();
    let u0 = chain.u.values[center];
    let qu = boundary_average(&sys, &chain.flux_u.normal_derivative);
    let qv = boundary_average(&sys, &chain.flux_v.normal_derivative);
    let qw = boundary_average(&sys, &chain.flux_w.normal_derivative);
    let qz = boundary_average(&sys, &chain.flux_z.normal_derivative);
    let ok = (u0 - 0.25).abs() <= 1e-3
        && (qu - 0.5).abs() <= 0.01 * 0.5
        && (qv - 0.0625).abs() <= 0.02 * 0.0625
        && (qw - 1.0 / 96.0).abs() <= 0.02 / 96.0
        && (qz - 1.0 / 192.0).abs() <= 0.02 / 192.0;
    check(
        1,
        "ball-oracle-match",
        ok,
        &format!("u0={u0:.6} |∇u|={qu:.6} |∇v|={qv:.6} |∇w|={qw:.8} |∇z|={qz:.8}"),
    );
}

#[test]
fn criterion_02_green_balance() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let mut worst = 0.0f64;
    for _ in 0..10 {
        let domain = random_domain(&mut rng);
        let mesh = triangulate(&domain, 0.02 * domain.mean_radius()).unwrap();
        let sys = FemSystem::new(mesh);
        let chain = solve_chain(&sys, &SourceSpec::Constant(1.0)).unwrap();
        let int_f: f64 = chain.load_u.iter().sum();
        let flux = sys.boundary_integral_with(|i| (-chain.flux_u.normal_derivative[i]).abs());
        worst = worst.max((flux - int_f).abs() / int_f);
    }
    check(2, "green-balance", worst <= 0.005, &format!("worst relative gap {worst:.2e}"));
}

#[test]
fn criterion_03_shape_derivative_validation() {
    let ids: Vec<FunctionalId<f64>> = vec![
        FunctionalId::Vol,
        FunctionalId::Per,
        FunctionalId::FIntU2,
        FunctionalId::GDirichlet,
        FunctionalId::Jp(1.0 / 32.0),
        FunctionalId::Ratio(1),
        FunctionalId::Ratio(2),
        FunctionalId::Ratio(3),
        FunctionalId::Ratio(4),
        FunctionalId::Ratio(5),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut worst = 0.0f64;
    let mut worst_name = String::new();
    for _ in 0..5 {
        let domain = random_domain(&mut rng);
        let rows = derivcheck(
            &domain,
            &ids,
            &SourceSpec::Constant(1.0),
            1e-3,
            0.05 * domain.mean_radius(),
        )
        .unwrap();
        for row in rows {
            if row.rel_gap > worst {
                worst = row.rel_gap;
                worst_name = format!("{} mode {}", row.functional, row.field_mode);
            }
        }
    }
    check(
        3,
        "shape-derivative-validation",
        worst <= 1e-2,
        &format!("worst rel gap {worst:.2e} at {worst_name}"),
    );
}

#[test]
fn criterion_04_green_identity_propositions() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut worst = 0.0f64;
    for _ in 0..5 {
        let domain = random_domain(&mut rng);
        let mesh = triangulate(&domain, 0.03 * domain.mean_radius()).unwrap();
        let sys = FemSystem::new(mesh);
        let chain = solve_chain(&sys, &SourceSpec::Constant(1.0)).unwrap();
        for m in 0..8 {
            let field = DeformationField::basis(m, domain.modes());
            let dchain = solve_derivative_chain(&sys, &domain, &chain, &field).unwrap();
            let rep = green_identity_report(&sys, &chain, &dchain);
            for g in rep.gaps() {
                worst = worst.max(g);
            }
        }
    }
    // unit disk, V·ν ≡ 1: the three right-hand sides are π/2, π/8, π/16
    let disk = StarDomain::circle([0.0, 0.0], 1.0).unwrap();
    let mesh = triangulate(&disk, 0.02).unwrap();
    let sys = FemSystem::new(mesh);
    let chain = solve_chain(&sys, &SourceSpec::Constant(1.0)).unwrap();
    let field = DeformationField::basis(0, disk.modes());
    let dchain = solve_derivative_chain(&sys, &disk, &chain, &field).unwrap();
    let rep = green_identity_report(&sys, &chain, &dchain);
    let pi = std::f64::consts::PI;
    let disk_ok = (rep.second_order.1 - pi / 2.0).abs() <= 0.02 * pi / 2.0
        && (rep.third_order.1 - pi / 8.0).abs() <= 0.02 * pi / 8.0
        && (rep.nonlinear.1 - pi / 16.0).abs() <= 0.02 * pi / 16.0;
    check(
        4,
        "green-identity-propositions",
        worst <= 0.02 && disk_ok,
        &format!(
            "worst gap {worst:.2e}; disk rhs {:.4}/{:.4}/{:.4}",
            rep.second_order.1, rep.third_order.1, rep.nonlinear.1
        ),
    );
}

#[test]
fn criterion_05_serrin_flow() {
    let init = StarDomain::new([0.0, 0.0], 1.0, vec![0.0, 0.0, 0.15], vec![]).unwrap();
    let mut params = FlowParams::new(0.1, 1e-3, 200);
    params.h_factor = 0.015;
    let result = run_flow(&ProblemId::Serrin { k: 0.5 }, &init, &params).unwrap();
    let ok = result.verdict == FlowVerdict::Converged
        && (result.best_fit_radius - 1.0).abs() <= 0.01
        && result.final_residual <= 1e-3
        && result.distance_to_circle <= 5e-3;
    check(
        5,
        "serrin-flow",
        ok,
        &format!(
            "{:?} radius={:.5} residual={:.2e} hausdorff={:.2e}",
            result.verdict, result.best_fit_radius, result.final_residual,
            result.distance_to_circle
        ),
    );
}

#[test]
fn criterion_06_p_flow() {
    let init = StarDomain::new([0.0, 0.0], 1.1, vec![0.0, 0.1], vec![]).unwrap();
    let mut params = FlowParams::new(0.1, 5e-4, 200);
    params.h_factor = 0.02;
    let problem = ProblemId::P { f: SourceSpec::Constant(1.0), c: 1.0 / 32.0 };
    let result = run_flow(&problem, &init, &params).unwrap();
    let ok = result.verdict == FlowVerdict::Converged
        && (result.best_fit_radius - 1.0).abs() <= 0.01;
    check(
        6,
        "p-flow",
        ok,
        &format!(
            "{:?} radius={:.5} residual={:.2e}",
            result.verdict, result.best_fit_radius, result.final_residual
        ),
    );
}

#[test]
fn criterion_07_qs_flow() {
    let support = ConvexBody::regular_ngon([0.0, 0.0], 0.5, 128).unwrap();
    let f = SourceSpec::Indicator { body: support.clone(), scale: 1.0 };
    let init = StarDomain::new([0.0, 0.0], 2.2, vec![0.0, 0.1], vec![]).unwrap();
    let mut params = FlowParams::new(0.1, 4e-4, 200);
    params.h_factor = 0.02;
    let result = run_flow(&ProblemId::Qs { f: f.clone(), k: 0.05 }, &init, &params).unwrap();
    let radius_ok = result.verdict == FlowVerdict::Converged
        && (result.best_fit_radius - 2.5).abs() <= 0.02 * 2.5;
    let report = existence_report(
        &support,
        &f,
        &ConditionParams { k: 0.05, c: 1.0 / 32.0, tol: 0.0 },
    )
    .unwrap();
    let verdict = report.entry("thm_2_2_flux_balance").unwrap().verdict;
    check(
        7,
        "qs-flow",
        radius_ok && verdict == Verdict::Strict,
        &format!(
            "{:?} radius={:.5} thm_2_2={}",
            result.verdict, result.best_fit_radius, verdict.as_str()
        ),
    );
}

#[test]
fn criterion_08_oc_scale_invariance() {
    let mut worst = 0.0f64;
    for radius in [0.5, 1.0, 2.0] {
        let disk = StarDomain::circle([0.0, 0.0], radius).unwrap();
        let mesh = triangulate(&disk, 0.02).unwrap();
        let sys = FemSystem::new(mesh);
        let chain = solve_chain(&sys, &SourceSpec::Constant(1.0)).unwrap();
        for &i in &sys.mesh.boundary_loop {
            let qu = -chain.flux_u.normal_derivative[i];
            let qv = -chain.flux_v.normal_derivative[i];
            worst = worst.max((qv - 0.5 * qu * qu * qu).abs());
        }
    }
    check(8, "oc-scale-invariance", worst <= 1e-2, &format!("sup residual {worst:.2e}"));
}

#[test]
fn criterion_09_j4_nonnegativity() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let source = SourceSpec::Constant(1.0);
    let mut worst_margin = f64::MAX;
    for _ in 0..20 {
        let domain = random_domain(&mut rng);
        let ws = Workspace::new(&domain, &source, Workspace::default_h(&domain)).unwrap();
        let j4 = ws.functional_value(FunctionalId::J4).unwrap();
        let g = ws.functional_value(FunctionalId::GDirichlet).unwrap();
        worst_margin = worst_margin.min(j4 + 1e-2 * 4.0 * g);
    }
    let disk = StarDomain::circle([0.0, 0.0], 1.0).unwrap();
    let ws = Workspace::new(&disk, &source, Workspace::default_h(&disk)).unwrap();
    let j4_disk = ws.functional_value(FunctionalId::J4).unwrap();
    let ok = worst_margin >= 0.0 && j4_disk.abs() <= 1e-2 * std::f64::consts::PI / 2.0;
    check(
        9,
        "j4-nonnegativity",
        ok,
        &format!("worst margin {worst_margin:.2e}, disk J4 {j4_disk:.2e}"),
    );
}

#[test]
fn criterion_10_didenko() {
    let disk = StarDomain::circle([0.0, 0.0], 1.0).unwrap();
    let report = didenko_ratio(&disk, &didenko_default_fields(disk.modes())).unwrap();
    let usable: Vec<f64> = report.ratios.iter().flatten().copied().collect();
    let disk_ok = usable.len() == 8
        && usable.iter().all(|r| (r - 0.5).abs() <= 0.02 * 0.5);
    let wobble = StarDomain::new([0.0, 0.0], 1.0, vec![0.0, 0.2], vec![]).unwrap();
    let wreport = didenko_ratio(&wobble, &didenko_default_fields(wobble.modes())).unwrap();
    check(
        10,
        "didenko",
        disk_ok && wreport.spread > 0.05,
        &format!(
            "disk ratios {} in [{:.4},{:.4}], wobble spread {:.4}",
            usable.len(),
            usable.iter().cloned().fold(f64::MAX, f64::min),
            usable.iter().cloned().fold(f64::MIN, f64::max),
            wreport.spread
        ),
    );
}

#[test]
fn criterion_11_cheeger() {
    let square = ConvexBody::rectangle([0.0, 0.0], 0.5, 0.5).unwrap();
    let h_sq = cheeger_convex(&square).unwrap().h;
    let ngon = ConvexBody::regular_ngon([0.0, 0.0], 1.0, 256).unwrap();
    let h_disk = cheeger_convex(&ngon).unwrap().h;
    let h_scaled = cheeger_convex(&square.scaled(2.0)).unwrap().h;
    let ok = (h_sq - 3.7724).abs() <= 1e-3
        && (h_disk - 2.0).abs() <= 1e-2
        && (h_scaled - h_sq / 2.0).abs() <= 1e-6;
    check(
        11,
        "cheeger",
        ok,
        &format!("square {h_sq:.5}, 256-gon {h_disk:.5}, scaling gap {:.1e}",
            (h_scaled - h_sq / 2.0).abs()),
    );
}

#[test]
fn criterion_12_thin_line_threshold() {
    let k = 0.25;
    let widths = [1e-2, 5e-3];
    let thresholds: Vec<f64> = widths
        .iter()
        .map(|&eps| {
            let body = ConvexBody::thin_rectangle([0.0, 0.0], 1.0, eps).unwrap();
            effective_line_threshold(&body, k)
        })
        .collect();
    let a = extrapolate_threshold(widths[0], thresholds[0], widths[1], thresholds[1]);
    // the report's verdict must flip across the computed threshold
    let body = ConvexBody::thin_rectangle([0.0, 0.0], 1.0, widths[0]).unwrap();
    let params = ConditionParams { k, c: 1.0 / 32.0, tol: 0.0 };
    let verdict_at = |aa: f64| {
        let f = SourceSpec::ThinLine { body: body.clone(), mass_per_length: aa };
        existence_report(&body, &f, &params)
            .unwrap()
            .entry("remark_5_3_thin_line")
            .unwrap()
            .verdict
    };
    let flips = verdict_at(0.9 * thresholds[0]) == Verdict::Violated
        && verdict_at(1.1 * thresholds[0]) == Verdict::Strict;
    let ok = (a - 2.0 * k).abs() <= 0.05 * 2.0 * k && flips;
    check(
        12,
        "thin-line-threshold",
        ok,
        &format!("extrapolated a = {a:.5} vs 2k = {:.2}, flips={flips}", 2.0 * k),
    );
}

fn dir_snapshot(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect();
    files.sort_by(|a, b| a.0.cmp(&b.0));
    files
}

#[test]
fn criterion_13_determinism() {
    let bin = env!("CARGO_BIN_EXE_fbshape");
    let data = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let tmp = tempfile::tempdir().unwrap();
    let runs: [(&str, Vec<String>); 3] = [
        (
            "solve",
            vec![
                "solve".into(),
                "--domain".into(),
                data.join("disk.json").display().to_string(),
                "--h-factor".into(),
                "0.02".into(),
            ],
        ),
        (
            "flow",
            vec![
                "flow".into(),
                "--problem".into(),
                "serrin".into(),
                "--k".into(),
                "0.5".into(),
                "--init".into(),
                data.join("wobble.json").display().to_string(),
                "--tol".into(),
                "1e-3".into(),
                "--h-factor".into(),
                "0.015".into(),
            ],
        ),
        (
            "cheeger",
            vec![
                "cheeger".into(),
                "--convex".into(),
                data.join("square.json").display().to_string(),
            ],
        ),
    ];
    let mut all_ok = true;
    let mut detail = String::new();
    for (name, args) in &runs {
        let mut snaps = Vec::new();
        for rep in 0..2 {
            let out_dir = tmp.path().join(format!("{name}-{rep}"));
            let status = Command::new(bin)
                .args(args)
                .arg("--out")
                .arg(&out_dir)
                .status()
                .unwrap();
            assert!(status.success(), "{name} run {rep} failed");
            snaps.push(dir_snapshot(&out_dir));
        }
        let same = snaps[0] == snaps[1];
        all_ok &= same;
        detail.push_str(&format!("{name}:{} ", if same { "identical" } else { "DIFFERS" }));
    }
    check(13, "determinism", all_ok, detail.trim());
}
