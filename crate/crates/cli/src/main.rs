use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;
use serde_json::{json, Value};

use wforge_core::config::SurfaceConfig;
use wforge_core::geometry::{sample, GeometrySample};
use wforge_core::mesh::{build_mesh, export_csv, export_obj, sample_domain};
use wforge_core::paths::{integrability_residual, periods, sample_grid};
use wforge_core::spinor::{
    default_chart, so3_shadow, spinor_from_weierstrass, spinor_integrability_residual, spinor_period_check,
    Chart, MoebiusAction, SpinorRep,
};
use wforge_core::weierstrass::{norm3, validate, WeierstrassData};
use wforge_core::{exec, Error};

/// `println!` that stops quietly once stdout is closed, e.g. when piped into `head`.
macro_rules! out {
    ($($arg:tt)*) => {{
        use std::io::Write;
        if writeln!(std::io::stdout(), $($arg)*).is_err() {
            std::process::exit(0);
        }
    }};
}

#[derive(Parser)]
#[command(name = "wforge", version, about = "Conformal immersions from Weierstrass and spinor data")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Path to a JSON surface document, or a preset name
    config: String,
    /// Print machine-readable JSON instead of tables
    #[arg(long, global = true)]
    json: bool,
    /// Run without the thread pool
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Isotropy, nonvanishing and puncture-order checks
    Validate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 4096)]
        samples: usize,
    },
    /// Loop integrals of the triple and the period condition
    Periods {
        #[command(flatten)]
        common: Common,
    },
    /// Triple-level and spinor-level integrability residuals
    Integrability {
        #[command(flatten)]
        common: Common,
        /// Grid points per axis
        #[arg(long, default_value_t = 64)]
        n: usize,
    },
    /// Integrate over the parameter grid and write the mesh
    Immerse {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Metric, Hopf differential and curvatures
    Geometry {
        #[command(flatten)]
        common: Common,
        /// Sample point `re,im`; may be repeated
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        at: Vec<Complex64>,
        /// Sample the configured grid
        #[arg(long)]
        grid: bool,
    },
    /// Spinor coefficients on a chart with period and integrability reports
    Spinor {
        #[command(flatten)]
        common: Common,
        /// Chart rectangle `min_re,min_im,max_re,max_im`
        #[arg(long, allow_hyphen_values = true)]
        chart: Option<String>,
        /// Branch base `re,im`; defaults to the chart center
        #[arg(long, value_parser = parse_complex, allow_hyphen_values = true)]
        base: Option<Complex64>,
        /// Sample points per chart axis
        #[arg(long, default_value_t = 3)]
        samples: usize,
    },
    /// Apply a 2x2 matrix to the spinor pair and print the new document
    Transform {
        #[command(flatten)]
        common: Common,
        /// `a_re,a_im,b_re,b_im` for [[a, -conj b], [b, conj a]], or eight
        /// numbers for [[a, b], [c, d]]
        #[arg(long, allow_hyphen_values = true, conflicts_with = "preset_rotation")]
        matrix: Option<String>,
        /// `axis,angle` with axis x, y or z and the angle in radians
        #[arg(long, allow_hyphen_values = true)]
        preset_rotation: Option<String>,
        /// Write the document here instead of stdout
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Rotate within the associate family and print the new document
    Associate {
        #[command(flatten)]
        common: Common,
        #[arg(long, allow_hyphen_values = true)]
        theta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

impl Cmd {
    fn common(&self) -> &Common {
        match self {
            Cmd::Validate { common, .. }
            | Cmd::Periods { common }
            | Cmd::Integrability { common, .. }
            | Cmd::Immerse { common, .. }
            | Cmd::Geometry { common, .. }
            | Cmd::Spinor { common, .. }
            | Cmd::Transform { common, .. }
            | Cmd::Associate { common, .. } => common,
        }
    }
}

enum Verdict {
    Pass,
    Fail,
}

fn numbers(s: &str) -> Result<Vec<f64>, String> {
    s.split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{p}`: {e}")))
        .collect()
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    match numbers(s)?.as_slice() {
        [re, im] => Ok(Complex64::new(*re, *im)),
        _ => Err("expected `re,im`".into()),
    }
}

fn input(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}

fn fc(c: Complex64) -> String {
    format!("{:.6e}{:+.6e}i", c.re, c.im)
}

fn cjson(c: Complex64) -> Value {
    json!([c.re, c.im])
}

fn print_table(header: &[&str], rows: &[Vec<String>]) {
    let mut width: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for r in rows {
        for (w, cell) in width.iter_mut().zip(r) {
            *w = (*w).max(cell.len());
        }
    }
    let line = |cells: Vec<&str>| {
        let parts: Vec<String> = cells.iter().zip(&width).map(|(c, w)| format!("{c:>w$}")).collect();
        out!("{}", parts.join("  ").trim_end());
    };
    line(header.to_vec());
    for r in rows {
        line(r.iter().map(String::as_str).collect());
    }
}

fn emit(json_mode: bool, value: Value, text: impl FnOnce()) {
    if json_mode {
        out!("{}", serde_json::to_string_pretty(&value).expect("json"));
    } else {
        text();
    }
}

fn verdict_word(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn spinor_on(d: &WeierstrassData, chart: Option<Chart>, base: Option<Complex64>) -> Result<SpinorRep, Error> {
    let chart = match chart {
        Some(c) => c,
        None => default_chart(d.domain())?,
    };
    spinor_from_weierstrass(d, chart, base.unwrap_or_else(|| chart.center()))
}

fn geometry_row(s: &GeometrySample) -> Vec<String> {
    vec![
        fc(s.z),
        format!("{:.9e}", s.lambda),
        format!("{:+.9e}", s.h),
        format!("{:+.9e}", s.k),
        format!("{:.6e}", s.q.norm()),
        format!("{:.6e}", s.q_norm()),
        if s.umbilic { "yes".into() } else { "no".into() },
        format!("({:+.6}, {:+.6}, {:+.6})", s.eta[0], s.eta[1], s.eta[2]),
    ]
}

fn geometry_json(s: &GeometrySample) -> Value {
    json!({
        "z": cjson(s.z),
        "lambda": s.lambda,
        "H": s.h,
        "K": s.k,
        "abs_q": s.q.norm(),
        "q_norm": s.q_norm(),
        "umbilic": s.umbilic,
        "eta": s.eta,
        "h_leak": s.h_leak,
    })
}

fn write_doc(cfg: &SurfaceConfig, out: &Option<PathBuf>) -> Result<(), Error> {
    let text = cfg.to_json();
    match out {
        Some(p) => std::fs::write(p, text + "\n").map_err(|source| Error::Io {
            path: p.clone(),
            source,
        }),
        None => {
            out!("{text}");
            Ok(())
        }
    }
}

fn run(cmd: Cmd) -> Result<Verdict, Error> {
    let common = cmd.common().clone();
    if common.sequential {
        exec::set_mode(exec::Mode::Sequential);
    }
    let cfg = SurfaceConfig::load(&common.config)?;
    let d = cfg.check()?;
    let tol = cfg.tolerances;
    let js = common.json;

    match cmd {
        Cmd::Validate { samples, .. } => {
            let r = validate(&d, samples, &tol);
            emit(js, serde_json::to_value(&r).expect("json"), || {
                out!("surface           {}", cfg.name);
                out!("samples           {}", r.samples);
                out!("max isotropy      {:.3e}", r.max_isotropy_residual);
                out!("min |w|           {:.3e}", r.min_omega_norm);
                for p in &r.punctures {
                    let ord = |o: Option<i32>| o.map_or("?".to_string(), |v| v.to_string());
                    out!(
                        "puncture {:<20} declared {}  ord(mu) {}  ord(nu) {}  {}",
                        fc(p.point),
                        p.declared_order,
                        ord(p.ord_mu),
                        ord(p.ord_nu),
                        p.note
                    );
                }
                for n in &r.notes {
                    out!("note: {n}");
                }
                for reason in &r.reasons {
                    out!("fail: {reason}");
                }
                out!("verdict           {}", verdict_word(r.pass));
            });
            Ok(if r.pass { Verdict::Pass } else { Verdict::Fail })
        }
        Cmd::Periods { .. } => {
            let loops = cfg.loops()?;
            let r = periods(&d, &loops, &tol)?;
            emit(js, serde_json::to_value(&r).expect("json"), || {
                let rows: Vec<Vec<String>> = r
                    .loops
                    .iter()
                    .map(|l| {
                        let mut row = vec![l.label.clone()];
                        row.extend(l.period.iter().map(|&c| fc(c)));
                        row.push(format!("{:.3e}", l.re_abs.iter().fold(0.0f64, |a, &b| a.max(b))));
                        row
                    })
                    .collect();
                print_table(&["loop", "x", "y", "z", "max |Re|"], &rows);
                out!("tolerance {:.1e}", r.tolerance);
                out!("verdict {}", verdict_word(r.period_condition));
            });
            Ok(if r.period_condition { Verdict::Pass } else { Verdict::Fail })
        }
        Cmd::Integrability { n, .. } => {
            let omega_level = integrability_residual(&d, n)?;
            let sp = spinor_on(&d, None, None)?;
            let spinor_level = spinor_integrability_residual(&sp, n)?;
            let ok = omega_level <= tol.integrability && spinor_level <= tol.integrability;
            let value = json!({
                "omega_level": omega_level,
                "spinor_level": spinor_level,
                "chart": {"min": cjson(sp.chart.min), "max": cjson(sp.chart.max)},
                "tolerance": tol.integrability,
                "pass": ok,
            });
            emit(js, value, || {
                out!("triple residual   {omega_level:.3e}");
                out!("spinor residual   {spinor_level:.3e}  (chart {} .. {})", fc(sp.chart.min), fc(sp.chart.max));
                out!("tolerance         {:.1e}", tol.integrability);
                out!("verdict           {}", verdict_word(ok));
            });
            Ok(if ok { Verdict::Pass } else { Verdict::Fail })
        }
        Cmd::Immerse { out, csv, .. } => {
            let grid = sample_domain(&cfg.domain, cfg.grid.nx, cfg.grid.ny)?;
            let mut mesh = build_mesh(&d, &grid, cfg.basepoint, cfg.base_value, tol.quadrature, tol.period)?;
            mesh.meta.name = cfg.name.clone();
            mesh.meta.theta = cfg.theta;
            if let Some(p) = &out {
                export_obj(&mesh, p)?;
            }
            if let Some(p) = &csv {
                export_csv(&mesh, p)?;
            }
            let consistency = mesh.normal_consistency();
            let ok = mesh.meta.max_cycle_defect <= tol.period;
            let value = json!({
                "vertices": mesh.vertices.len(),
                "faces": mesh.faces.len(),
                "max_cycle_defect": mesh.meta.max_cycle_defect,
                "seam_defect": mesh.meta.seam_defect,
                "welded": mesh.meta.welded,
                "normal_consistency": consistency,
                "pass": ok,
            });
            emit(js, value, || {
                out!("vertices          {}", mesh.vertices.len());
                out!("faces             {}", mesh.faces.len());
                out!("cycle defect      {:.3e}", mesh.meta.max_cycle_defect);
                if let Some(s) = mesh.meta.seam_defect {
                    let state = if mesh.meta.welded { "welded" } else { "cut" };
                    out!("seam defect       {s:.3e} ({state})");
                }
                out!("normal agreement  {:.2}%", 100.0 * consistency);
                if let Some(p) = &out {
                    out!("wrote {}", p.display());
                }
                if let Some(p) = &csv {
                    out!("wrote {}", p.display());
                }
                out!("verdict           {}", verdict_word(ok));
            });
            Ok(if ok { Verdict::Pass } else { Verdict::Fail })
        }
        Cmd::Geometry { at, grid, .. } => {
            let mut pts = at;
            if grid || pts.is_empty() {
                pts.extend(sample_grid(&cfg.domain, cfg.grid.nx));
            }
            let samples = exec::try_map(&pts, |&z| sample(&d, z, tol.integrability))?;
            let value = Value::Array(samples.iter().map(geometry_json).collect());
            emit(js, value, || {
                let rows: Vec<Vec<String>> = samples.iter().map(geometry_row).collect();
                print_table(&["z", "lambda", "H", "K", "|q|", "||q||", "umbilic", "eta"], &rows);
            });
            Ok(Verdict::Pass)
        }
        Cmd::Spinor { chart, base, samples, .. } => {
            let chart = chart
                .map(|s| match numbers(&s).map_err(input)?.as_slice() {
                    [a, b, c, e] => Chart::new(Complex64::new(*a, *b), Complex64::new(*c, *e)),
                    _ => Err(input("--chart expects min_re,min_im,max_re,max_im")),
                })
                .transpose()?;
            let sp = spinor_on(&d, chart, base)?;
            let n = samples.max(1);
            let pts: Vec<Complex64> = sample_grid(&sp.chart.as_domain(0.0), n);
            let rows = exec::try_map(&pts, |&z| {
                let (u, v) = sp.uv(z)?;
                let w = d.omega(z)?;
                Ok::<_, Error>((z, u, v, norm3(&w), 2f64.sqrt() * (u.norm_sqr() + v.norm_sqr())))
            })?;
            let loops = cfg.loops()?;
            let per = spinor_period_check(&sp, &loops, tol.quadrature, tol.period)?;
            let integ = spinor_integrability_residual(&sp, 32)?;
            let ok = per.pass && integ <= tol.integrability;
            let value = json!({
                "chart": {"min": cjson(sp.chart.min), "max": cjson(sp.chart.max)},
                "branch_base": cjson(sp.branch_base),
                "samples": rows.iter().map(|(z, u, v, nw, ns)| json!({
                    "z": cjson(*z), "u": cjson(*u), "v": cjson(*v), "omega_norm": nw, "spinor_norm": ns,
                })).collect::<Vec<_>>(),
                "periods": per,
                "integrability": integ,
                "pass": ok,
            });
            emit(js, value, || {
                out!("chart {} .. {}, branch base {}", fc(sp.chart.min), fc(sp.chart.max), fc(sp.branch_base));
                let table: Vec<Vec<String>> = rows
                    .iter()
                    .map(|(z, u, v, nw, ns)| vec![fc(*z), fc(*u), fc(*v), format!("{nw:.9e}"), format!("{ns:.9e}")])
                    .collect();
                print_table(&["z", "u", "v", "|w|", "sqrt2(|u|^2+|v|^2)"], &table);
                let prow: Vec<Vec<String>> = per
                    .loops
                    .iter()
                    .map(|l| vec![l.label.clone(), fc(l.uu), fc(l.vv), fc(l.uv), format!("{:.3e}", l.conj_defect)])
                    .collect();
                if !prow.is_empty() {
                    print_table(&["loop", "u^2", "v^2", "uv", "conj defect"], &prow);
                }
                out!("integrability     {integ:.3e}");
                out!("verdict           {}", verdict_word(ok));
            });
            Ok(if ok { Verdict::Pass } else { Verdict::Fail })
        }
        Cmd::Transform {
            matrix,
            preset_rotation,
            out,
            ..
        } => {
            let t = match (matrix, preset_rotation) {
                (Some(m), None) => {
                    let v = numbers(&m).map_err(input)?;
                    let cx = |k: usize| Complex64::new(v[k], v[k + 1]);
                    match v.len() {
                        4 => MoebiusAction::quaternion(cx(0), cx(2))?,
                        8 => MoebiusAction::new(cx(0), cx(2), cx(4), cx(6))?,
                        _ => return Err(input("--matrix expects 4 or 8 numbers")),
                    }
                }
                (None, Some(r)) => {
                    let (axis, angle) = r
                        .split_once(',')
                        .ok_or_else(|| input("--preset-rotation expects axis,angle"))?;
                    let angle: f64 = angle.trim().parse().map_err(|_| input("bad rotation angle"))?;
                    let mut chars = axis.trim().chars();
                    match (chars.next(), chars.next()) {
                        (Some(c), None) => MoebiusAction::rotation(c, angle)?,
                        _ => return Err(input("rotation axis must be x, y or z")),
                    }
                }
                _ => return Err(input("transform needs --matrix or --preset-rotation")),
            };
            let prev = cfg.moebius_action()?.unwrap_or_else(MoebiusAction::identity);
            let total = t.mul(&prev);
            let mut next = cfg.clone();
            next.moebius = Some([[total.a, total.b], [total.c, total.d]]);
            let next = next.flattened()?;
            let shadow = so3_shadow(&t).ok();
            if let Some(m) = shadow {
                eprintln!("T^ =");
                for row in m {
                    eprintln!("  {:+.12} {:+.12} {:+.12}", row[0], row[1], row[2]);
                }
            } else {
                eprintln!("T is not quaternionic: integrability and periods are not guaranteed to survive");
            }
            write_doc(&next, &out)?;
            Ok(Verdict::Pass)
        }
        Cmd::Associate { theta, out, .. } => {
            let mut next = cfg.clone();
            next.theta += theta;
            next.check()?;
            write_doc(&next, &out)?;
            Ok(Verdict::Pass)
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.cmd) {
        Ok(Verdict::Pass) => ExitCode::SUCCESS,
        Ok(Verdict::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
