use serde_json::json;
use signless_core::chain::{
    analyze_chain, exhaustive_correlation_defect, gibbs_reconstruct, markov_coherent_gibbs, reconstruction_overlap,
    ChainState, MarkovWeights,
};
use signless_core::io::write_state;

use super::{load_state, Ctx};
use crate::args::ChainCmd;
use crate::error::CliError;
use crate::output::{f, opt, Check, Outcome, Table};

pub fn run(cmd: &ChainCmd, ctx: Ctx) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    match cmd {
        ChainCmd::Analyze { state, window, exhaustive, renormalize } => {
            let chain = ChainState::new(load_state(state, *renormalize, &mut out)?.ket)?;
            let rep = analyze_chain(&chain, *window)?;
            let mut t =
                Table::new(&["i", "j", "expected_entanglement_nats", "cmi_nats", "pinsker_distance", "pinsker_bound"]);
            for r in &rep.decay {
                t.push(vec![
                    r.i.to_string(),
                    r.j.to_string(),
                    f(r.expected_entanglement),
                    f(r.cmi),
                    f(r.pinsker_distance),
                    f(r.pinsker_bound),
                ]);
            }
            let slack = ctx.tol(1e-9);
            let pinsker =
                rep.decay.iter().map(|r| r.pinsker_distance - r.pinsker_bound).fold(f64::NEG_INFINITY, f64::max);
            out.checks.push(Check::at_most("pinsker_bound", pinsker.max(0.0), slack));
            let lnd = (chain.d() as f64).ln();
            let over = rep
                .decay
                .iter()
                .map(|r| (r.expected_entanglement - lnd).max(-r.expected_entanglement))
                .fold(0.0, f64::max);
            out.checks.push(Check::at_most("decay_table_within_0_ln_d", over, 1e-12));
            for (o, shown) in rep.overlaps.iter().zip(&rep.displayed_overlap_bound) {
                out.checks.push(Check::at_most(
                    format!("fidelity_bound_l{}", o.window),
                    (o.fidelity_lower_bound - o.overlap).max(0.0),
                    slack,
                ));
                out.notes.push(format!(
                    "l={}: overlap {} , 1 - ||P-P_rec||/2 = {}, fitted display bound {}",
                    o.window,
                    o.overlap,
                    o.fidelity_lower_bound,
                    opt(*shown)
                ));
            }
            let exh = if *exhaustive { Some(exhaustive_correlation_defect(&chain)?) } else { None };
            out.results = json!({ "report": rep, "exhaustive_max_defect": exh });
            out.table = t;
        }
        ChainCmd::Reconstruct { state, l, state_out, renormalize } => {
            let chain = ChainState::new(load_state(state, *renormalize, &mut out)?.ket)?;
            let rec = gibbs_reconstruct(&chain.distribution(), *l)?;
            let o = reconstruction_overlap(&chain, *l)?;
            if let Some(p) = state_out {
                write_state(&rec, p)?;
            }
            let mut t = Table::new(&["l", "overlap", "fidelity_lower_bound"]);
            t.push(vec![l.to_string(), f(o.overlap), f(o.fidelity_lower_bound)]);
            out.checks.push(Check::at_most(
                "fidelity_bound",
                (o.fidelity_lower_bound - o.overlap).max(0.0),
                ctx.tol(1e-9),
            ));
            out.table = t;
            out.results = json!(o);
        }
        ChainCmd::Factory { d, length, order, uniform, state_out } => {
            let weights = if *uniform { MarkovWeights::Uniform } else { MarkovWeights::Random { seed: ctx.seed } };
            let chain = markov_coherent_gibbs(*d, *length, *order, &weights)?;
            let o = reconstruction_overlap(&chain, *order)?;
            if let Some(p) = state_out {
                write_state(chain.ket(), p)?;
            }
            let mut t = Table::new(&["seed", "d", "length", "order", "overlap_at_order"]);
            t.push(vec![ctx.seed.to_string(), d.to_string(), length.to_string(), order.to_string(), f(o.overlap)]);
            out.checks.push(Check::at_most("markov_roundtrip", 1.0 - o.overlap, ctx.tol(1e-10)));
            out.table = t;
            out.results = json!(o);
        }
    }
    Ok(out)
}
