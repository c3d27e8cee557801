use nalgebra::DMatrix;
use serde_json::json;
use signless_core::io::write_state;
use signless_core::teleport::{
    analyze, construct_no_positivity_state, construct_qubit_teleport_state, strict_decrease_scan, ScanOptions,
    TripartiteSplit, FAC_TOL,
};
use signless_core::DensityMatrix;

use super::{load_state, Ctx};
use crate::args::{parse_groups, TeleportCmd};
use crate::error::CliError;
use crate::output::{f, opt, Check, Outcome, Table};

const REPORT_HEADERS: [&str; 8] = [
    "factorization_defect",
    "max_post_state_deviation",
    "avg_post_entropy_nats",
    "s_a_nats",
    "s_c_nats",
    "ratio",
    "outcomes",
    "discarded_outcomes",
];

fn report_row(r: &signless_core::teleport::TeleportReport) -> Vec<String> {
    vec![
        f(r.factorization_defect),
        f(r.max_post_state_deviation),
        f(r.avg_post_entropy),
        f(r.s_a),
        f(r.s_c),
        opt(r.ratio),
        r.outcomes.to_string(),
        r.discarded_outcomes.to_string(),
    ]
}

pub fn run(cmd: &TeleportCmd, ctx: Ctx) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    match cmd {
        TeleportCmd::Analyze { state, split, renormalize } => {
            let ket = load_state(state, *renormalize, &mut out)?.ket;
            let g = parse_groups(split)?;
            if g.len() != 3 {
                return Err(CliError::usage("--split needs three groups A|B|C"));
            }
            let split = TripartiteSplit::new(ket.layout(), &g[0], &g[1], &g[2])?;
            let r = analyze(&ket, &split)?;
            let mut t = Table::new(&REPORT_HEADERS);
            t.push(report_row(&r));
            if ket.is_nonneg() && r.factorization_defect < FAC_TOL && r.s_a > 0.01 && r.s_c > 0.01 {
                let ratio = r.ratio.unwrap_or(0.0);
                out.checks.push(Check::at_most("strict_decrease_ratio", ratio, 1.0 - ctx.tol(1e-6)));
            }
            out.results = json!(r);
            out.table = t;
        }
        TeleportCmd::Construct { spectrum, d_a, rho_a, d_c, state_out } => {
            let (ket, r, extra) = match (spectrum, rho_a) {
                (Some(spec), _) => {
                    let rho_c = DensityMatrix::diagonal(spec)?;
                    let ket = construct_no_positivity_state(&rho_c, *d_a)?;
                    let split = TripartiteSplit::three_site();
                    let r = analyze(&ket, &split)?;
                    (ket, r, json!({ "construction": "general", "spectrum": spec, "d_a": d_a }))
                }
                (None, Some(px)) => {
                    let [p, x] = px.as_slice() else {
                        return Err(CliError::usage("--rho-a takes `p,x`"));
                    };
                    let m = DMatrix::from_row_slice(2, 2, &[*p, *x, *x, 1.0 - p]);
                    let rho = DensityMatrix::from_real(signless_core::SiteLayout::new(vec![2])?, m)?;
                    let c = construct_qubit_teleport_state(&rho, *d_c, None, None)?;
                    let extra = json!({ "construction": "nonneg_qubit", "s": c.s, "mixing": c.mixing, "d_c": d_c });
                    (c.state, c.report, extra)
                }
                (None, None) => return Err(CliError::usage("give --spectrum or --rho-a")),
            };
            out.checks.push(Check::at_most("factorization_defect", r.factorization_defect, ctx.tol(1e-9)));
            out.checks.push(Check::at_most("max_post_state_deviation", r.max_post_state_deviation, ctx.tol(1e-9)));
            if let Some(p) = state_out {
                write_state(&ket, p)?;
            }
            let mut t = Table::new(&REPORT_HEADERS);
            t.push(report_row(&r));
            out.table = t;
            out.results = json!({ "report": r, "dims": ket.dims(), "nonneg": ket.is_nonneg(), "input": extra });
        }
        TeleportCmd::Scan { samples, dims } => {
            let [d_a, d_b, d_c] = dims.as_slice() else {
                return Err(CliError::usage("--dims takes d_A,d_B,d_C"));
            };
            let opts = ScanOptions { samples: *samples, d_a: *d_a, d_b: *d_b, d_c: *d_c, seed: ctx.seed };
            let rep = strict_decrease_scan(&opts)?;
            let mut t = Table::new(&[
                "seed",
                "index",
                "family",
                "factorization_defect",
                "find_residual",
                "s_a_nats",
                "s_c_nats",
                "avg_post_entropy_nats",
                "ratio",
            ]);
            for r in &rep.records {
                t.push(vec![
                    ctx.seed.to_string(),
                    r.index.to_string(),
                    format!("{:?}", r.family),
                    f(r.factorization_defect),
                    f(r.find_residual),
                    f(r.s_a),
                    f(r.s_c),
                    f(r.avg_post_entropy),
                    opt(r.ratio),
                ]);
            }
            out.checks.push(Check::at_most("find_identity_residual", rep.max_find_residual, ctx.tol(1e-8)));
            out.checks.push(Check::at_most("strict_decrease_violations", rep.violations as f64, 0.0));
            out.notes
                .push(format!("retained {} of {} samples, max ratio {:?}", rep.retained, rep.samples, rep.max_ratio));
            out.results = json!({
                "retained": rep.retained, "rejected": rep.rejected, "max_ratio": rep.max_ratio,
                "argmax": rep.argmax, "max_find_residual": rep.max_find_residual, "violations": rep.violations,
            });
            out.table = t;
        }
    }
    Ok(out)
}
