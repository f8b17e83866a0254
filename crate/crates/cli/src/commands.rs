//! One function per subcommand.

use anyhow::Context;
use serde::Serialize;
use serde_json::json;
use stratawave_core::asymptotics::{
    branch_expansion, second_order_coefficients, AkVariant, AsymptoticLowerField, AsymptoticUpperField,
};
use stratawave_core::continuation::{trace_branch, trace_branch_at, Branch, NewtonOptions, TraceOptions};
use stratawave_core::dispersion::dispersion_row;
use stratawave_core::elliptic::{GridSpec, LayerField, PsiOperator};
use stratawave_core::flowfield::{
    critical_curves, find_stagnation_points, separatrix_and_layer, velocity, CriticalCurves, CriticalLayer,
    SampleSpec, StagnationReport, StreamFunction,
};
use stratawave_core::verify::{run_acceptance, AcceptanceOptions, AcceptanceReport};
use stratawave_core::{BranchPoint, Error};

use crate::config::{Method, RunConfig};
use crate::output::{companion_path, emit, num, pretty, write_with_sidecar, Csv};
use crate::plot;

/// Some acceptance criterion failed; exit status 3 with the report.
#[derive(Debug)]
pub struct AcceptanceFailed(pub AcceptanceReport);

impl std::fmt::Display for AcceptanceFailed {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let ids: Vec<&str> = self.0.criteria.iter().filter(|c| !c.passed).map(|c| c.id.as_str()).collect();
        write!(f, "acceptance criteria failed: {}", ids.join(", "))
    }
}

impl std::error::Error for AcceptanceFailed {}

fn trace_options(cfg: &RunConfig) -> TraceOptions {
    TraceOptions {
        newton: NewtonOptions {
            tol: cfg.tol,
            ..NewtonOptions::default()
        },
        ..TraceOptions::default()
    }
}

/// Corrected solution at amplitude `s`, reached in steps of `ds`.
pub fn solve_at(cfg: &RunConfig, k: u32, s: f64) -> anyhow::Result<BranchPoint> {
    let p = cfg.params()?;
    let mut ladder: Vec<f64> = (1..).map(|j| j as f64 * cfg.ds).take_while(|&t| t < s * (1.0 - 1e-12)).collect();
    ladder.push(s);
    let branch = trace_branch_at(k, cfg.branch, &p, &ladder, &trace_options(cfg))?;
    match branch.point_at(s) {
        Some(pt) => Ok(pt.clone()),
        None => Err(Error::NumericalFailure {
            context: "branch continuation".into(),
            detail: format!(
                "stopped at s = {} before reaching s = {s}: {}",
                branch.achieved_s,
                branch.stopped.as_deref().unwrap_or("unknown reason")
            ),
        }
        .into()),
    }
}

fn operator_for(cfg: &RunConfig, pt: &BranchPoint) -> anyhow::Result<PsiOperator> {
    let grid = GridSpec {
        ny: NewtonOptions::default().ny,
        ..GridSpec::for_harmonics(pt.profile.harmonics())
    };
    Ok(PsiOperator::new(cfg.params()?, pt.profile.k(), grid)?)
}

pub fn dispersion(cfg: &RunConfig) -> anyhow::Result<()> {
    let k_max = cfg.require_k()?;
    let p = cfg.params()?;
    let mut text = String::new();
    for k in 1..=k_max {
        text.push_str(&serde_json::to_string(&dispersion_row(k, &p, 64)?)?);
        text.push('\n');
    }
    emit("dispersion", cfg, &text)
}

pub fn expand(cfg: &RunConfig) -> anyhow::Result<()> {
    let k = cfg.require_k()?;
    let c = second_order_coefficients(k, cfg.branch, &cfg.params()?, AkVariant::default())?;
    emit("expand", cfg, &pretty(&c)?)
}

pub fn branch(cfg: &RunConfig) -> anyhow::Result<()> {
    let k = cfg.require_k()?;
    let (s_max, ds) = cfg.require_range()?;
    let b: Branch = trace_branch(k, cfg.branch, &cfg.params()?, s_max, ds, &trace_options(cfg))?;
    if let Some(why) = &b.stopped {
        eprintln!("warning: branch stopped at s = {}: {why}", b.achieved_s);
    }
    emit("branch", cfg, &pretty(&b.points)?)
}

fn sample_rows(csv: &mut Csv, field: &dyn StreamFunction, spec: &SampleSpec) {
    let layer = field.layer();
    let profile = field.profile();
    let ys = spec.y_nodes(layer);
    for x in spec.x_nodes(profile.k()) {
        let eta = profile.eval(x);
        for (yt, d) in ys.iter().zip(field.transformed_column(x, &ys)) {
            csv.row(&[num(x), num(layer.to_physical(*yt, eta)), num(d.v), layer.name().to_string()]);
        }
    }
}

pub fn field(cfg: &RunConfig) -> anyhow::Result<()> {
    let k = cfg.require_k()?;
    let s = cfg.require_s()?;
    let p = cfg.params()?;
    let spec = SampleSpec::new(cfg.nx, cfg.ny)?;
    let text = match cfg.method {
        Method::Asymptotic => {
            let c = second_order_coefficients(k, cfg.branch, &p, AkVariant::default())?;
            let lambda = branch_expansion(&c, s, 2)?.lambda;
            let lower = AsymptoticLowerField::new(&c, &p, s)?;
            let upper = AsymptoticUpperField::new(&c, &p, s, lambda)?;
            let mut csv = Csv::new(&["x", "y", "psi", "layer"]);
            sample_rows(&mut csv, &lower, &spec);
            sample_rows(&mut csv, &upper, &spec);
            csv.into_string()
        }
        Method::Elliptic => {
            let pt = solve_at(cfg, k, s)?;
            let op = operator_for(cfg, &pt)?;
            let lower = op.solve_lower(&pt.profile)?;
            let upper = op.solve_upper(pt.lambda, &pt.profile)?;
            let mut csv = Csv::new(&["x", "y", "psi", "u_rel", "v", "layer"]);
            for f in [&lower as &dyn StreamFunction, &upper] {
                let v = velocity(f, &spec)?;
                for j in 0..v.x.len() {
                    csv.row(&[
                        num(v.x[j]),
                        num(v.y[j]),
                        num(v.psi[j]),
                        num(v.u_rel[j]),
                        num(v.v[j]),
                        v.layer.name().to_string(),
                    ]);
                }
            }
            csv.into_string()
        }
    };
    emit("field", cfg, &text)
}

/// Everything `flow` and `plot` need about one solution.
pub struct FlowPicture {
    pub point: BranchPoint,
    pub lower: LayerField,
    pub report: StagnationReport,
    pub curves: CriticalCurves,
    pub layer: CriticalLayer,
}

pub fn flow_picture(cfg: &RunConfig) -> anyhow::Result<FlowPicture> {
    let k = cfg.require_k()?;
    let s = cfg.require_s()?;
    let point = solve_at(cfg, k, s)?;
    let lower = operator_for(cfg, &point)?.solve_lower(&point.profile)?;
    let report = find_stagnation_points(&lower)?;
    let curves = critical_curves(&lower)?;
    let layer = separatrix_and_layer(&lower, &report)?;
    Ok(FlowPicture {
        point,
        lower,
        report,
        curves,
        layer,
    })
}

#[derive(Serialize)]
struct StreamlineInfo {
    id: usize,
    kind: &'static str,
    end: Option<String>,
    psi_level: Option<f64>,
    winding: Option<f64>,
}

pub fn flow(cfg: &RunConfig) -> anyhow::Result<()> {
    let pic = flow_picture(cfg)?;
    let mut csv = Csv::new(&["id", "x", "y"]);
    let mut info = vec![StreamlineInfo {
        id: 0,
        kind: "separatrix",
        end: None,
        psi_level: None,
        winding: None,
    }];
    for q in &pic.layer.separatrix.points {
        csv.row(&["0".into(), num(q[0]), num(q[1])]);
    }
    let closed = pic.layer.closed_streamlines.iter().zip(pic.layer.windings.iter().map(|w| Some(*w)));
    let open = pic.layer.open_streamlines.iter().zip(std::iter::repeat(None));
    for (j, (line, winding)) in closed.chain(open).enumerate() {
        let id = j + 1;
        info.push(StreamlineInfo {
            id,
            kind: if winding.is_some() { "critical-layer" } else { "open" },
            end: Some(format!("{:?}", line.end)),
            psi_level: Some(line.psi_level),
            winding,
        });
        for q in &line.points {
            csv.row(&[id.to_string(), num(q[0]), num(q[1])]);
        }
    }
    let summary = json!({
        "s": pic.point.s,
        "lambda": pic.point.lambda,
        "stagnation": pic.report,
        "critical_curves": pic.curves,
        "critical_layer_area": pic.layer.area,
        "streamlines": info,
        "warnings": pic.layer.warnings,
        "config": cfg,
    });
    match &cfg.out {
        Some(path) => {
            write_with_sidecar(path, "flow", cfg, &csv.into_string())?;
            // the summary embeds the config, so it needs no sidecar of its own
            let side = companion_path(path, ".stagnation.json");
            std::fs::write(&side, pretty(&summary)?).with_context(|| format!("writing {}", side.display()))
        }
        None => emit("flow", cfg, &pretty(&summary)?),
    }
}

pub fn plot(cfg: &RunConfig) -> anyhow::Result<()> {
    let pic = flow_picture(cfg)?;
    emit("plot", cfg, &plot::render(&pic))
}

pub fn verify(cfg: &RunConfig) -> anyhow::Result<()> {
    let report = run_acceptance(&AcceptanceOptions::default());
    for c in &report.criteria {
        eprintln!("{}", c.line());
    }
    emit("verify", cfg, &pretty(&report)?)?;
    if report.all_passed {
        Ok(())
    } else {
        Err(AcceptanceFailed(report).into())
    }
}

/// Diagnostic body for exit status 3.
pub fn diagnostic(err: &anyhow::Error, cfg: Option<&RunConfig>) -> serde_json::Value {
    let failed = err
        .downcast_ref::<AcceptanceFailed>()
        .map(|a| a.0.criteria.iter().filter(|c| !c.passed).cloned().collect::<Vec<_>>());
    json!({
        "error": format!("{err:#}"),
        "failed_criteria": failed,
        "config": cfg,
    })
}
