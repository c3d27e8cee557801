use serde_json::json;
use signless_core::feasibility::{
    appendix_lhs, appendix_pair, d2_analytic_check, feasible_pair_search, lhs_ratio, min_feasible_inner_product,
    FeasibilityQuery, SearchBudget, SearchVerdict,
};

use super::Ctx;
use crate::args::FeasibilityCmd;
use crate::error::CliError;
use crate::output::{f, Check, Outcome, Table};

fn budget(ctx: Ctx) -> SearchBudget {
    SearchBudget { seed: ctx.seed, ..SearchBudget::default() }
}

pub fn run(cmd: &FeasibilityCmd, ctx: Ctx) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    match cmd {
        FeasibilityCmd::Lhs { v, w, delta, d } => {
            let (v, w) = match (v, w, delta, d) {
                (Some(v), Some(w), _, _) => (v.clone(), w.clone()),
                (_, _, Some(delta), Some(d)) => appendix_pair(*delta, *d)?,
                _ => return Err(CliError::usage("give --v and --w, or --delta and --d")),
            };
            let lhs = lhs_ratio(&v, &w)?;
            let nv = v.iter().map(|x| x * x).sum::<f64>().sqrt();
            let nw = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            let inner = v.iter().zip(&w).map(|(a, b)| a * b).sum::<f64>() / (nv * nw);
            let closed = match (delta, d) {
                (Some(delta), Some(d)) => Some(appendix_lhs(*delta, *d)?),
                _ => None,
            };
            let mut t = Table::new(&["d", "lhs", "inner", "feasible", "closed_form_lhs"]);
            t.push(vec![
                v.len().to_string(),
                f(lhs),
                f(inner),
                (lhs < inner).to_string(),
                closed.map(f).unwrap_or_default(),
            ]);
            if let Some(c) = closed {
                out.checks.push(Check::at_most("closed_form_matches", (c - lhs).abs(), ctx.tol(1e-12)));
            }
            out.table = t;
            out.results = json!({ "v": v, "w": w, "lhs": lhs, "inner": inner, "closed_form_lhs": closed });
        }
        FeasibilityCmd::Search { d, s } => {
            let q = FeasibilityQuery::new(*d, *s)?;
            let verdict = feasible_pair_search(q, &budget(ctx));
            let mut t = Table::new(&["d", "s", "verdict", "lhs", "inner", "source"]);
            let (name, lhs, inner, source) = match &verdict {
                SearchVerdict::Feasible(w) => ("feasible", f(w.lhs), f(w.inner), format!("{:?}", w.source)),
                SearchVerdict::Infeasible => ("infeasible", String::new(), String::new(), String::new()),
                SearchVerdict::NotFound { best, .. } => ("not_found", f(*best), String::new(), String::new()),
            };
            t.push(vec![d.to_string(), f(*s), name.into(), lhs, inner, source]);
            if let Some(w) = verdict.witness() {
                out.checks.push(Check::at_most("witness_lhs_below_inner", w.residual(), 0.0));
            }
            out.table = t;
            out.results = json!(verdict);
        }
        FeasibilityCmd::Threshold { d, precision } => {
            let mut t =
                Table::new(&["d", "s_min", "s_infeasible", "s_min_times_sqrt_d", "witness_source", "simplex_improved"]);
            let mut all = Vec::new();
            for &dd in d {
                let th = min_feasible_inner_product(dd, *precision, &budget(ctx))?;
                t.push(vec![
                    dd.to_string(),
                    f(th.s_min),
                    f(th.s_infeasible),
                    f(th.s_min * (dd as f64).sqrt()),
                    format!("{:?}", th.witness.source),
                    th.simplex_improved.to_string(),
                ]);
                out.checks.push(Check::at_most(format!("witness_feasible_d{dd}"), th.witness.residual(), 0.0));
                all.push(th);
            }
            out.table = t;
            out.results = json!(all);
        }
        FeasibilityCmd::D2check { points } => {
            let c = d2_analytic_check(*points);
            let mut t = Table::new(&["points", "min_margin", "violations", "margin_at_zero"]);
            t.push(vec![c.points.to_string(), f(c.min_margin), c.violations.to_string(), f(c.margin_at_zero)]);
            out.checks.push(Check::flag("d2_margin_positive", c.passed()));
            for s in [0.5, 0.9, 0.99] {
                let v = feasible_pair_search(FeasibilityQuery::new(2, s)?, &budget(ctx));
                out.checks.push(Check::flag(format!("d2_infeasible_s{s}"), matches!(v, SearchVerdict::Infeasible)));
            }
            out.table = t;
            out.results = json!(c);
        }
    }
    Ok(out)
}
