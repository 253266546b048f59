use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use serde_json::{json, Value};

use fbshape::cheeger::{cheeger_condition, cheeger_convex};
use fbshape::conditions::{
    didenko_default_fields, didenko_ratio, existence_report, overdetermined_residuals,
    ConditionParams, ConditionReport,
};
use fbshape::error::{Error, Result};
use fbshape::fem::{green_identity_report, solve_chain, solve_derivative_chain, FemSystem};
use fbshape::flows::{run_flow, FlowParams, FlowVerdict, ProblemId};
use fbshape::geometry::{has_c_gnp, CgnpVerdict};
use fbshape::io::{self, fmt};
use fbshape::mesh::triangulate;
use fbshape::radial::{oracle, parse_quantity, BallSpec};
use fbshape::shape_calculus::{
    derivcheck, FunctionalId, DEFAULT_FD_EPS, DEFAULT_H_FACTOR,
};
use fbshape::{DeformationField, SourceSpec};

#[derive(Parser)]
#[command(name = "fbshape", version, about = "Overdetermined free-boundary laboratory")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the chained Dirichlet problems on a star domain and dump fields.
    Solve {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, default_value = "const:1")]
        source: String,
        /// Mesh pitch as a fraction of the mean radius.
        #[arg(long, default_value_t = DEFAULT_H_FACTOR)]
        h_factor: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Closed-form ball values (dimension N, radius R).
    Oracle {
        #[arg(long = "N")]
        n: u32,
        #[arg(long = "R")]
        radius: f64,
        /// u, v, w, z, grad_u_bdry, ..., int_u, int_u2, int_grad_u2, j4,
        /// jp:C, serrin_radius:K, p_radius:C
        #[arg(long)]
        quantity: String,
        /// Sample radius for the profile quantities (defaults to R).
        #[arg(long)]
        r: Option<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Analytic vs finite-difference shape derivatives over the mode basis.
    Derivcheck {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, default_value = "const:1")]
        source: String,
        /// Comma-separated names (VOL, PER, F_INT_U2, G_DIRICHLET, INT_U,
        /// J_P:C, J4, RATIO_1..RATIO_5); defaults to all applicable.
        #[arg(long)]
        functionals: Option<String>,
        #[arg(long, default_value_t = DEFAULT_FD_EPS)]
        eps: f64,
        #[arg(long, default_value_t = DEFAULT_H_FACTOR)]
        h_factor: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Residual-driven boundary flow toward the overdetermined configuration.
    Flow {
        /// serrin | qs | p | oc
        #[arg(long)]
        problem: String,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        c: Option<f64>,
        #[arg(long, default_value = "const:1")]
        f: String,
        #[arg(long)]
        init: PathBuf,
        #[arg(long, default_value_t = 1e-3)]
        tol: f64,
        #[arg(long, default_value_t = 0.1)]
        step0: f64,
        #[arg(long, default_value_t = 200)]
        max_iters: usize,
        #[arg(long, default_value_t = DEFAULT_H_FACTOR)]
        h_factor: f64,
        /// Convex body file; the flow then maintains C-GNP.
        #[arg(long)]
        constraint: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Existence conditions for a convex body and overdetermined residuals
    /// for a star domain.
    Verify {
        #[arg(long)]
        domain: Option<PathBuf>,
        #[arg(long)]
        convex: Option<PathBuf>,
        #[arg(long, default_value_t = 0.5)]
        k: f64,
        #[arg(long, default_value_t = 1.0 / 32.0)]
        c: f64,
        #[arg(long, default_value = "const:1")]
        f: String,
        /// Numerical tolerance of the inputs, widening the boundary-case band.
        #[arg(long, default_value_t = 0.0)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// C-GNP admissibility test.
    Cgnp {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long)]
        convex: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Cheeger constant and Cheeger set of a convex polygon.
    Cheeger {
        #[arg(long)]
        convex: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Green-identity balance for the domain-derivative chain.
    Identities {
        #[arg(long)]
        domain: PathBuf,
        #[arg(long, default_value_t = DEFAULT_H_FACTOR)]
        h_factor: f64,
        /// Number of basis deformation fields to test.
        #[arg(long, default_value_t = 8)]
        fields: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(1);
        }
    };
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}

fn run(command: Command) -> Result<u8> {
    match command {
        Command::Solve { domain, source, h_factor, out } => {
            cmd_solve(&domain, &source, h_factor, out.as_deref())
        }
        Command::Oracle { n, radius, quantity, r, out } => {
            cmd_oracle(n, radius, &quantity, r, out.as_deref())
        }
        Command::Derivcheck { domain, source, functionals, eps, h_factor, out } => {
            cmd_derivcheck(&domain, &source, functionals.as_deref(), eps, h_factor, out.as_deref())
        }
        Command::Flow {
            problem,
            k,
            c,
            f,
            init,
            tol,
            step0,
            max_iters,
            h_factor,
            constraint,
            out,
        } => cmd_flow(
            &problem,
            k,
            c,
            &f,
            &init,
            tol,
            step0,
            max_iters,
            h_factor,
            constraint.as_deref(),
            out.as_deref(),
        ),
        Command::Verify { domain, convex, k, c, f, tol, out } => {
            cmd_verify(domain.as_deref(), convex.as_deref(), k, c, &f, tol, out.as_deref())
        }
        Command::Cgnp { domain, convex, out } => cmd_cgnp(&domain, &convex, out.as_deref()),
        Command::Cheeger { convex, out } => cmd_cheeger(&convex, out.as_deref()),
        Command::Identities { domain, h_factor, fields, out } => {
            cmd_identities(&domain, h_factor, fields, out.as_deref())
        }
    }
}

fn ensure_dir(out: &std::path::Path) -> Result<()> {
    fs::create_dir_all(out)?;
    Ok(())
}

fn cmd_solve(
    domain_path: &std::path::Path,
    source_str: &str,
    h_factor: f64,
    out: Option<&std::path::Path>,
) -> Result<u8> {
    let domain = io::read_domain(domain_path)?;
    let source = io::parse_source(source_str)?;
    let mesh = triangulate(&domain, h_factor * domain.mean_radius())?;
    let sys = FemSystem::new(mesh);
    let chain = solve_chain(&sys, &source)?;
    let int_f: f64 = chain.load_u.iter().sum();
    let flux_u = sys.boundary_integral_with(|i| -chain.flux_u.normal_derivative[i]);
    println!(
        "nodes={} tris={} h={}",
        sys.mesh.nodes.len(),
        sys.mesh.tris.len(),
        fmt(sys.mesh.h)
    );
    println!("int_f={} boundary_flux_u={}", fmt(int_f), fmt(flux_u));
    println!(
        "int_u={} int_u2={} dirichlet_energy={}",
        fmt(sys.integrate(&chain.u.values)),
        fmt(sys.inner_mass(&chain.u.values, &chain.u.values)),
        fmt(sys.dirichlet_energy(&chain.u.values))
    );
    if let Some(out) = out {
        ensure_dir(out)?;
        let nodes: Vec<String> = sys
            .mesh
            .nodes
            .iter()
            .enumerate()
            .map(|(i, p)| {
                format!("{i},{},{},{}", fmt(p[0]), fmt(p[1]), u8::from(sys.mesh.is_boundary[i]))
            })
            .collect();
        io::write_csv(&out.join("nodes.csv"), "id,x,y,boundary_flag", &nodes)?;
        let tris: Vec<String> =
            sys.mesh.tris.iter().map(|t| format!("{},{},{}", t[0], t[1], t[2])).collect();
        io::write_csv(&out.join("tris.csv"), "n1,n2,n3", &tris)?;
        let fields = [
            ("u", &chain.u, &chain.flux_u),
            ("v", &chain.v, &chain.flux_v),
            ("w", &chain.w, &chain.flux_w),
            ("z", &chain.z, &chain.flux_z),
        ];
        for (name, field, flux) in fields {
            let rows: Vec<String> = field
                .values
                .iter()
                .enumerate()
                .map(|(i, &v)| format!("{i},{}", fmt(v)))
                .collect();
            io::write_csv(&out.join(format!("{name}.csv")), "node_id,value", &rows)?;
            let frows: Vec<String> = sys
                .mesh
                .boundary_edges
                .iter()
                .zip(&flux.edge_flux)
                .enumerate()
                .map(|(e, (edge, &q))| {
                    format!(
                        "{e},{},{},{}",
                        fmt(edge.midpoint[0]),
                        fmt(edge.midpoint[1]),
                        fmt(q)
                    )
                })
                .collect();
            io::write_csv(
                &out.join(format!("flux_{name}.csv")),
                "edge_id,arc_midpoint_x,arc_midpoint_y,flux",
                &frows,
            )?;
        }
        let summary = json!({
            "schema": io::SCHEMA,
            "area": domain.area(),
            "perimeter": domain.perimeter(),
            "mesh": {"nodes": sys.mesh.nodes.len(), "tris": sys.mesh.tris.len(), "h": sys.mesh.h},
            "int_f": int_f,
            "boundary_flux_u": flux_u,
            "int_u": sys.integrate(&chain.u.values),
            "int_u2": sys.inner_mass(&chain.u.values, &chain.u.values),
            "dirichlet_energy": sys.dirichlet_energy(&chain.u.values),
        });
        io::write_json(&out.join("summary.json"), &summary)?;
        fs::write(&out.join("domain.svg"), io::domains_svg(&[(&domain, "black")]))?;
        io::write_manifest(
            out,
            "solve",
            json!({
                "domain": domain_path.display().to_string(),
                "source": source_str,
                "h_factor": h_factor,
            }),
        )?;
    }
    Ok(0)
}

fn cmd_oracle(
    n: u32,
    radius: f64,
    quantity: &str,
    r: Option<f64>,
    out: Option<&std::path::Path>,
) -> Result<u8> {
    let spec = BallSpec::new(n, radius)?;
    let q = parse_quantity::<f64>(quantity)?;
    let value = oracle(spec, q, r)?;
    println!("{}", fmt(value));
    if let Some(out) = out {
        ensure_dir(out)?;
        let report = json!({
            "schema": io::SCHEMA,
            "N": n,
            "R": radius,
            "quantity": quantity,
            "r": r,
            "value": value,
        });
        io::write_json(&out.join("oracle.json"), &report)?;
        io::write_manifest(
            out,
            "oracle",
            json!({"N": n, "R": radius, "quantity": quantity, "r": r}),
        )?;
    }
    Ok(0)
}

fn cmd_derivcheck(
    domain_path: &std::path::Path,
    source_str: &str,
    functionals: Option<&str>,
    eps: f64,
    h_factor: f64,
    out: Option<&std::path::Path>,
) -> Result<u8> {
    let domain = io::read_domain(domain_path)?;
    let source = io::parse_source(source_str)?;
    let ids: Vec<FunctionalId<f64>> = match functionals {
        Some(list) => list
            .split(',')
            .map(|s| FunctionalId::parse(s.trim()))
            .collect::<Result<_>>()?,
        None => FunctionalId::all_for_source(matches!(source, SourceSpec::Constant(c) if c == 1.0)),
    };
    let rows = derivcheck(&domain, &ids, &source, eps, h_factor * domain.mean_radius())?;
    let max_gap = rows.iter().map(|r| r.rel_gap).fold(0.0f64, f64::max);
    println!("{} rows, max rel_gap = {}", rows.len(), fmt(max_gap));
    if let Some(out) = out {
        ensure_dir(out)?;
        let lines: Vec<String> = rows
            .iter()
            .map(|r| {
                format!(
                    "{},{},{},{},{}",
                    r.functional,
                    r.field_mode,
                    fmt(r.analytic),
                    fmt(r.fd),
                    fmt(r.rel_gap)
                )
            })
            .collect();
        io::write_csv(
            &out.join("derivcheck.csv"),
            "functional,field_mode,analytic,fd,rel_gap",
            &lines,
        )?;
        io::write_json(
            &out.join("report.json"),
            &json!({"schema": io::SCHEMA, "rows": rows.len(), "max_rel_gap": max_gap}),
        )?;
        io::write_manifest(
            out,
            "derivcheck",
            json!({
                "domain": domain_path.display().to_string(),
                "source": source_str,
                "functionals": functionals,
                "eps": eps,
                "h_factor": h_factor,
            }),
        )?;
    }
    Ok(0)
}

#[allow(clippy::too_many_arguments)]
fn cmd_flow(
    problem_str: &str,
    k: Option<f64>,
    c: Option<f64>,
    f: &str,
    init_path: &std::path::Path,
    tol: f64,
    step0: f64,
    max_iters: usize,
    h_factor: f64,
    constraint: Option<&std::path::Path>,
    out: Option<&std::path::Path>,
) -> Result<u8> {
    let need = |v: Option<f64>, name: &str| {
        v.ok_or_else(|| Error::InvalidArgument(format!("--{name} is required for this problem")))
    };
    let problem: ProblemId<f64> = match problem_str {
        "serrin" => ProblemId::Serrin { k: need(k, "k")? },
        "qs" => ProblemId::Qs { f: io::parse_source(f)?, k: need(k, "k")? },
        "p" => ProblemId::P { f: io::parse_source(f)?, c: need(c, "c")? },
        "oc" => ProblemId::Oc,
        _ => {
            return Err(Error::InvalidArgument(format!(
                "unknown problem `{problem_str}` (serrin | qs | p | oc)"
            )))
        }
    };
    let init = io::read_domain(init_path)?;
    let mut params = FlowParams::new(step0, tol, max_iters);
    params.h_factor = h_factor;
    if let Some(cp) = constraint {
        params.constraint = Some(io::read_convex(cp)?);
    }
    let result = run_flow(&problem, &init, &params)?;
    let verdict = match result.verdict {
        FlowVerdict::Converged => "converged",
        FlowVerdict::MaxIters => "max-iters",
        FlowVerdict::StepCollapse => "step-collapse",
    };
    println!(
        "{verdict} after {} iterations, residual {}",
        result.iterations,
        fmt(result.final_residual)
    );
    println!(
        "best-fit radius {} distance-to-circle {}",
        fmt(result.best_fit_radius),
        fmt(result.distance_to_circle)
    );
    if let Some(out) = out {
        ensure_dir(out)?;
        let rows: Vec<String> = result
            .history
            .iter()
            .map(|h| {
                format!("{},{},{},{}", h.iter, fmt(h.residual), fmt(h.area), fmt(h.perimeter))
            })
            .collect();
        io::write_csv(&out.join("history.csv"), "iter,residual,area,perimeter", &rows)?;
        io::write_domain(&out.join("final.json"), &result.domain)?;
        io::write_json(
            &out.join("report.json"),
            &json!({
                "schema": io::SCHEMA,
                "problem": problem.name(),
                "verdict": verdict,
                "iterations": result.iterations,
                "final_residual": result.final_residual,
                "best_fit_radius": result.best_fit_radius,
                "distance_to_circle": result.distance_to_circle,
            }),
        )?;
        fs::write(
            &out.join("boundaries.svg"),
            io::domains_svg(&[(&init, "black"), (&result.domain, "crimson")]),
        )?;
        let residuals: Vec<f64> = result.history.iter().map(|h| h.residual).collect();
        fs::write(&out.join("residual.svg"), io::sparkline_svg(&residuals))?;
        io::write_manifest(
            out,
            "flow",
            json!({
                "problem": problem_str,
                "k": k,
                "c": c,
                "f": f,
                "init": init_path.display().to_string(),
                "tol": tol,
                "step0": step0,
                "max_iters": max_iters,
                "h_factor": h_factor,
                "constraint": constraint.map(|p| p.display().to_string()),
            }),
        )?;
    }
    Ok(if result.verdict == FlowVerdict::Converged { 0 } else { 2 })
}

fn condition_entries_json(report: &ConditionReport<f64>) -> Value {
    let entries: Vec<Value> = report
        .entries
        .iter()
        .map(|e| {
            json!({
                "name": e.name,
                "lhs": e.lhs,
                "rhs": e.rhs,
                "verdict": e.verdict.as_str(),
                "branch": e.branch,
            })
        })
        .collect();
    json!({"entries": entries, "tolerance": report.tolerance})
}

fn print_condition_entries(report: &ConditionReport<f64>) {
    for e in &report.entries {
        println!("{}: lhs={} rhs={} -> {}", e.name, fmt(e.lhs), fmt(e.rhs), e.verdict.as_str());
    }
}

fn cmd_verify(
    domain: Option<&std::path::Path>,
    convex: Option<&std::path::Path>,
    k: f64,
    c: f64,
    f: &str,
    tol: f64,
    out: Option<&std::path::Path>,
) -> Result<u8> {
    if domain.is_none() && convex.is_none() {
        return Err(Error::InvalidArgument("verify needs --domain and/or --convex".into()));
    }
    let source = io::parse_source(f)?;
    let params = ConditionParams { k, c, tol };
    let mut report = json!({
        "schema": io::SCHEMA,
        "params": {"k": k, "c": c, "tol": tol},
    });
    let obj = report.as_object_mut().unwrap();
    if let Some(cpath) = convex {
        let body = io::read_convex(cpath)?;
        let ex = existence_report(&body, &source, &params)?;
        print_condition_entries(&ex);
        obj.insert("existence".into(), condition_entries_json(&ex));
        let ch = cheeger_condition(&body, &source, &params)?;
        print_condition_entries(&ch);
        obj.insert("cheeger_condition".into(), condition_entries_json(&ch));
    }
    if let Some(dpath) = domain {
        let d = io::read_domain(dpath)?;
        let od = overdetermined_residuals(&d, &source, &params)?;
        for e in &od.pointwise {
            println!(
                "{}: best_constant={} sup_deviation={}",
                e.name,
                fmt(e.best_constant),
                fmt(e.sup_deviation)
            );
        }
        for e in &od.inequalities {
            println!(
                "{}: lhs={} rhs={} -> {}",
                e.name,
                fmt(e.lhs),
                fmt(e.rhs),
                e.verdict.as_str()
            );
        }
        println!("oc_constraint={}", fmt(od.oc_constraint));
        let pointwise: Vec<Value> = od
            .pointwise
            .iter()
            .map(|e| {
                json!({
                    "name": e.name,
                    "best_constant": e.best_constant,
                    "sup_deviation": e.sup_deviation,
                })
            })
            .collect();
        let inequalities: Vec<Value> = od
            .inequalities
            .iter()
            .map(|e| {
                json!({
                    "name": e.name,
                    "lhs": e.lhs,
                    "rhs": e.rhs,
                    "verdict": e.verdict.as_str(),
                    "branch": e.branch,
                })
            })
            .collect();
        obj.insert(
            "overdetermined".into(),
            json!({
                "pointwise": pointwise,
                "inequalities": inequalities,
                "oc_constraint": od.oc_constraint,
            }),
        );
        // the Didenko ratio is defined for f ≡ 1 only
        if matches!(source, SourceSpec::Constant(c) if c == 1.0) {
            let dk = didenko_ratio(&d, &didenko_default_fields(d.modes()))?;
            println!(
                "didenko: mean={} spread={} rn_reference={}",
                fmt(dk.mean),
                fmt(dk.spread),
                fmt(dk.rn_reference)
            );
            obj.insert(
                "didenko".into(),
                json!({
                    "ratios": dk.ratios,
                    "spread": dk.spread,
                    "mean": dk.mean,
                    "rn_reference": dk.rn_reference,
                }),
            );
        }
    }
    if let Some(out) = out {
        ensure_dir(out)?;
        io::write_json(&out.join("report.json"), &report)?;
        io::write_manifest(
            out,
            "verify",
            json!({
                "domain": domain.map(|p| p.display().to_string()),
                "convex": convex.map(|p| p.display().to_string()),
                "k": k,
                "c": c,
                "f": f,
                "tol": tol,
            }),
        )?;
    }
    Ok(0)
}

fn cmd_cgnp(
    domain_path: &std::path::Path,
    convex_path: &std::path::Path,
    out: Option<&std::path::Path>,
) -> Result<u8> {
    let domain = io::read_domain(domain_path)?;
    let body = io::read_convex(convex_path)?;
    let verdict = has_c_gnp(&domain, &body);
    let (report, code) = match &verdict {
        CgnpVerdict::Holds { pitch } => {
            println!("holds (pitch {})", fmt(*pitch));
            (json!({"schema": io::SCHEMA, "verdict": "holds", "pitch": pitch}), 0)
        }
        CgnpVerdict::Fails { witness, pitch } => {
            println!("fails at ({}, {}) (pitch {})", fmt(witness[0]), fmt(witness[1]), fmt(*pitch));
            (
                json!({
                    "schema": io::SCHEMA,
                    "verdict": "fails",
                    "witness": [witness[0], witness[1]],
                    "pitch": pitch,
                }),
                2,
            )
        }
        CgnpVerdict::NotContainingC => {
            println!("not-containing-c");
            (json!({"schema": io::SCHEMA, "verdict": "not-containing-c"}), 2)
        }
    };
    if let Some(out) = out {
        ensure_dir(out)?;
        io::write_json(&out.join("report.json"), &report)?;
        io::write_manifest(
            out,
            "cgnp",
            json!({
                "domain": domain_path.display().to_string(),
                "convex": convex_path.display().to_string(),
            }),
        )?;
    }
    Ok(code)
}

fn cmd_cheeger(convex_path: &std::path::Path, out: Option<&std::path::Path>) -> Result<u8> {
    let body = io::read_convex(convex_path)?;
    let res = cheeger_convex(&body)?;
    println!("h={} r={}", fmt(res.h), fmt(res.r));
    if let Some(out) = out {
        ensure_dir(out)?;
        io::write_json(
            &out.join("cheeger.json"),
            &json!({
                "schema": io::SCHEMA,
                "h": res.h,
                "r": res.r,
                "omega_area": res.omega_area,
                "omega_perimeter": res.omega_perimeter,
                "cheeger_area": res.cheeger_area,
                "cheeger_perimeter": res.cheeger_perimeter,
            }),
        )?;
        fs::write(&out.join("cheeger.svg"), io::cheeger_svg(&body, &res))?;
        io::write_manifest(
            out,
            "cheeger",
            json!({"convex": convex_path.display().to_string()}),
        )?;
    }
    Ok(0)
}

fn cmd_identities(
    domain_path: &std::path::Path,
    h_factor: f64,
    fields: usize,
    out: Option<&std::path::Path>,
) -> Result<u8> {
    let domain = io::read_domain(domain_path)?;
    let mesh = triangulate(&domain, h_factor * domain.mean_radius())?;
    let sys = FemSystem::new(mesh);
    let chain = solve_chain(&sys, &SourceSpec::Constant(1.0))?;
    let modes = domain.modes();
    let nfields = fields.min(DeformationField::basis_len(modes));
    let mut lines = Vec::new();
    let mut max_gap = 0.0f64;
    for m in 0..nfields {
        let field = DeformationField::basis(m, modes);
        let dchain = solve_derivative_chain(&sys, &domain, &chain, &field)?;
        let rep = green_identity_report(&sys, &chain, &dchain);
        let gaps = rep.gaps();
        let pairs =
            [("second_order", rep.second_order), ("third_order", rep.third_order), ("nonlinear", rep.nonlinear)];
        for ((name, (lhs, rhs)), gap) in pairs.into_iter().zip(gaps) {
            lines.push(format!("{m},{name},{},{},{}", fmt(lhs), fmt(rhs), fmt(gap)));
            max_gap = max_gap.max(gap);
        }
    }
    println!("{nfields} fields, max identity gap = {}", fmt(max_gap));
    if let Some(out) = out {
        ensure_dir(out)?;
        io::write_csv(
            &out.join("identities.csv"),
            "field_mode,identity,lhs,rhs,rel_gap",
            &lines,
        )?;
        io::write_json(
            &out.join("report.json"),
            &json!({"schema": io::SCHEMA, "fields": nfields, "max_rel_gap": max_gap}),
        )?;
        io::write_manifest(
            out,
            "identities",
            json!({
                "domain": domain_path.display().to_string(),
                "h_factor": h_factor,
                "fields": fields,
            }),
        )?;
    }
    Ok(0)
}
