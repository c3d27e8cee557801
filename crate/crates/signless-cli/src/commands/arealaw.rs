use nalgebra::DMatrix;
use serde_json::json;
use signless_core::arealaw::{
    build_base_hamiltonian, build_channel, build_primed_hamiltonian, channel_spectrum, isometry_reduction_check,
    projector_gap_check, random_projector, scan_models, spectrum_report, ExpanderModel, ScanConfig,
};
use signless_core::rng::{self, Rng};

use super::Ctx;
use crate::args::{ArealawCmd, ModelArgs};
use crate::error::CliError;
use crate::output::{f, opt, Check, Outcome, Table};

fn model(m: &ModelArgs, ctx: Ctx) -> Result<ExpanderModel, CliError> {
    Ok(ExpanderModel::random(m.d, m.k, m.q, ctx.seed, m.attempt)?)
}

pub fn run(cmd: &ArealawCmd, ctx: Ctx) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    match cmd {
        ArealawCmd::Channel { model: m, pinned } => {
            let mdl = model(m, ctx)?;
            let ch = build_channel(&mdl, *pinned);
            let s = channel_spectrum(&ch);
            let tp = ch.trace_preservation_residual();
            let choi = ch.choi_min_eigenvalue();
            let mut t = Table::new(&[
                "d",
                "k",
                "seed",
                "pinned",
                "fp_multiplicity",
                "second_ev",
                "trace_preservation_residual",
                "choi_min_eig",
            ]);
            t.push(vec![
                m.d.to_string(),
                m.k.to_string(),
                ctx.seed.to_string(),
                pinned.to_string(),
                s.fixed_point_multiplicity.to_string(),
                f(s.second_modulus),
                f(tp),
                f(choi),
            ]);
            out.checks.push(Check::at_most("trace_preserving", tp, ctx.tol(1e-12)));
            out.checks.push(Check::at_most("choi_psd", (-choi).max(0.0), ctx.tol(1e-9)));
            out.table = t;
            out.results = json!({ "model": mdl, "spectrum": s });
        }
        ArealawCmd::Build { model: m, primed } => {
            let mdl = model(m, ctx)?;
            let h = if *primed { build_primed_hamiltonian(&mdl)? } else { build_base_hamiltonian(&mdl)? };
            let r = spectrum_report(&h)?;
            let mut t = Table::new(&[
                "d",
                "k",
                "seed",
                "primed",
                "dim",
                "ground_energy",
                "ground_degeneracy",
                "spectral_gap",
                "end_site_entropy_nats",
            ]);
            t.push(vec![
                m.d.to_string(),
                m.k.to_string(),
                ctx.seed.to_string(),
                primed.to_string(),
                r.dim.to_string(),
                f(r.ground_energy),
                r.ground_degeneracy.to_string(),
                opt(r.spectral_gap),
                f(r.end_site_entropy),
            ]);
            out.checks.push(Check::at_most("hermitian", h.hermiticity_residual(), ctx.tol(1e-10)));
            out.checks.push(Check::at_most("psd", (-h.min_term_eigenvalue()).max(0.0), ctx.tol(1e-9)));
            if !primed {
                out.checks.push(Check::at_most("frustration_free", r.ground_energy.abs(), ctx.tol(1e-9)));
            }
            out.table = t;
            out.results = json!(r);
        }
        ArealawCmd::Scan { d_list, k, seeds, q, max_attempts, pinned } => {
            let cfg = ScanConfig {
                d_list: d_list.clone(),
                k: *k,
                seeds: *seeds,
                seed: ctx.seed,
                q: *q,
                max_attempts: *max_attempts,
                pinned: *pinned,
            };
            let rows = scan_models(&cfg)?;
            let mut headers = vec![
                "d",
                "seed",
                "attempts",
                "fp_multiplicity",
                "second_ev",
                "base_degeneracy",
                "base_gap",
                "primed_degeneracy",
                "primed_gap",
                "end_entropy_over_lnd",
            ];
            if *pinned {
                headers.extend(["pinned_fp_multiplicity", "pinned_second_ev"]);
            }
            let mut t = Table::new(&headers);
            for r in &rows {
                let mut row = vec![
                    r.d.to_string(),
                    r.seed.to_string(),
                    r.attempts.to_string(),
                    r.fp_multiplicity.to_string(),
                    f(r.second_ev),
                    r.base_degeneracy.to_string(),
                    opt(r.base_gap),
                    r.primed_degeneracy.to_string(),
                    opt(r.primed_gap),
                    f(r.end_entropy_over_lnd),
                ];
                if *pinned {
                    row.push(r.pinned_fp_multiplicity.map(|m| m.to_string()).unwrap_or_default());
                    row.push(opt(r.pinned_second_ev));
                }
                t.push(row);
            }
            let worst = rows.iter().map(|r| r.base_ground_energy.abs()).fold(0.0, f64::max);
            out.checks.push(Check::at_most("base_frustration_free", worst, ctx.tol(1e-9)));
            out.table = t;
            out.results = json!(rows);
        }
        ArealawCmd::Projcheck { trials, max_dim } => {
            let mut failures = 0usize;
            let mut min_margin = f64::INFINITY;
            for i in 0..*trials {
                let mut r = rng::stream(ctx.seed, i as u64);
                let n = r.random_range(1..=(*max_dim).max(1));
                let (r0, r1) = (r.random_range(0..=n), r.random_range(0..=n));
                let q0 = random_projector(&mut r, n, r0);
                let q1 = random_projector(&mut r, n, r1);
                let g = projector_gap_check(&q0, &q1)?;
                if let (Some(l), Some(rh)) = (g.lhs, g.rhs) {
                    min_margin = min_margin.min(l - rh);
                }
                failures += usize::from(!g.ok);
            }
            let th = std::f64::consts::FRAC_PI_3;
            let (c, s) = (th.cos(), th.sin());
            let q1 = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 0.0]);
            let q0 = DMatrix::from_row_slice(2, 2, &[c * c, c * s, c * s, s * s]);
            let block = projector_gap_check(&q0, &q1)?;
            let mut t = Table::new(&["trials", "failures", "min_margin", "block_lhs", "block_rhs"]);
            t.push(vec![trials.to_string(), failures.to_string(), f(min_margin), opt(block.lhs), opt(block.rhs)]);
            out.checks.push(Check::at_most("projector_gap_failures", failures as f64, 0.0));
            out.checks.push(Check::flag("projector_block_ok", block.ok));
            out.table = t;
            out.results = json!({ "failures": failures, "min_margin": min_margin, "block": block });
        }
        ArealawCmd::Isocheck { model: m } => {
            let mdl = model(m, ctx)?;
            let c = isometry_reduction_check(&mdl)?;
            let mut t = Table::new(&["d", "k", "seed", "isometry_residual", "min_eigenvalue"]);
            t.push(vec![
                m.d.to_string(),
                m.k.to_string(),
                ctx.seed.to_string(),
                f(c.isometry_residual),
                f(c.min_eigenvalue),
            ]);
            out.checks.push(Check::at_most("isometry", c.isometry_residual, ctx.tol(1e-10)));
            out.checks.push(Check::at_most("operator_inequality", (-c.min_eigenvalue).max(0.0), ctx.tol(1e-8)));
            out.table = t;
            out.results = json!(c);
        }
    }
    Ok(out)
}
