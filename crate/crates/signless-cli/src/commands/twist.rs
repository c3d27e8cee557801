use serde_json::json;
use signless_core::io::{read_operator, write_operator};
use signless_core::twist::{region_decompose, twist_expectation, twist_product, RegionPartition, TwistSpec};

use super::{load_state, Ctx};
use crate::args::{parse_groups, TwistCmd};
use crate::error::CliError;
use crate::output::{f, Outcome, Table};

pub fn run(cmd: &TwistCmd, _ctx: Ctx) -> Result<Outcome, CliError> {
    let mut out = Outcome::default();
    match cmd {
        TwistCmd::Decompose { op, regions } => {
            let (layout, m) = read_operator(op)?;
            let part = RegionPartition::new(layout, parse_groups(regions)?)?;
            let dec = region_decompose(&m, &part)?;
            let residual = (dec.reconstruct(&part) - &m).norm();
            let mut t = Table::new(&["terms", "truncation_residual", "reconstruction_residual"]);
            t.push(vec![dec.len().to_string(), f(dec.truncation_residual), f(residual)]);
            let coeffs: Vec<f64> = dec.terms.iter().map(|t| t.coefficient).collect();
            out.table = t;
            out.results = json!({ "coefficients": coeffs, "reconstruction_residual": residual });
        }
        TwistCmd::Eval { ops, regions, orderings, state, op_out } => {
            let mut layout = None;
            let mut mats = Vec::new();
            for p in ops {
                let (l, m) = read_operator(p)?;
                if layout.as_ref().is_some_and(|x| x != &l) {
                    return Err(CliError::usage("operators must share one layout"));
                }
                layout = Some(l);
                mats.push(m);
            }
            let layout = layout.expect("at least one operator");
            let dims = layout.dims().to_vec();
            let part = RegionPartition::new(layout, parse_groups(regions)?)?;
            let spec = TwistSpec::new(mats, part, parse_groups(orderings)?)?;
            let product = twist_product(&spec)?;
            if let Some(p) = op_out {
                write_operator(dims, &product, p)?;
            }
            let mut t = Table::new(&["frobenius_norm", "expectation_re", "expectation_im"]);
            let (re, im) = match state {
                Some(s) => {
                    let ket = load_state(s, false, &mut out)?.ket;
                    let e = twist_expectation(&ket, &spec)?;
                    (f(e.re), f(e.im))
                }
                None => (String::new(), String::new()),
            };
            t.push(vec![f(product.norm()), re, im]);
            out.table = t;
            out.results = json!({ "frobenius_norm": product.norm() });
        }
    }
    Ok(out)
}
