//! Central finite-difference validation of analytic gradients.

use crate::error::{Error, Result};
use crate::tensor::{Tape, Tensor, Var};

/// Compares the tape's analytic gradients against central finite differences.
///
/// `build` receives a fresh tape and one leaf per entry of `params`
/// (in order) and must return a scalar loss. Every parameter coordinate is
/// perturbed by `±eps` in turn; the reported value is the maximum over
/// coordinates of
///
/// ```text
/// |analytic - numeric| / max(1e-8, |analytic| + |numeric|)
/// ```
///
/// Parameters unreachable from the loss count as having analytic gradient
/// exactly zero.
pub fn grad_check<F>(params: &mut [Tensor], eps: f64, mut build: F) -> Result<f64>
where
    F: FnMut(&mut Tape, &[Var]) -> Result<Var>,
{
    if eps <= 0.0 {
        return Err(Error::contract("grad_check: eps must be positive"));
    }

    let analytic: Vec<Vec<f64>> = {
        let mut tape = Tape::new();
        let vars: Vec<Var> = params.iter().map(|t| tape.leaf(t)).collect();
        let loss = build(&mut tape, &vars)?;
        tape.backward(loss)?;
        vars.iter()
            .zip(params.iter())
            .map(|(&v, p)| {
                tape.grad(v)
                    .map(|g| g.to_vec())
                    .unwrap_or_else(|| vec![0.0; p.numel()])
            })
            .collect()
    };

    let mut max_err: f64 = 0.0;
    for pi in 0..params.len() {
        for ci in 0..params[pi].numel() {
            let original = params[pi].data()[ci];

            params[pi].data_mut()[ci] = original + eps;
            let f_plus = eval(params, &mut build)?;
            params[pi].data_mut()[ci] = original - eps;
            let f_minus = eval(params, &mut build)?;
            params[pi].data_mut()[ci] = original;

            let numeric = (f_plus - f_minus) / (2.0 * eps);
            let a = analytic[pi][ci];
            let err = (a - numeric).abs() / f64::max(1e-8, a.abs() + numeric.abs());
            max_err = max_err.max(err);
        }
    }
    Ok(max_err)
}

fn eval<F>(params: &[Tensor], build: &mut F) -> Result<f64>
where
    F: FnMut(&mut Tape, &[Var]) -> Result<Var>,
{
    let mut tape = Tape::new();
    let vars: Vec<Var> = params.iter().map(|t| tape.leaf(t)).collect();
    let loss = build(&mut tape, &vars)?;
    Ok(tape.value(loss)[0])
}
