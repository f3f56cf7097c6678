//! A tour of the autodiff core: build a tiny graph on a tape, run the
//! backward pass, and validate the analytic gradients against central
//! finite differences.
//!
//! Run with: cargo run --example autodiff_basics

use sequentinel::tensor::{grad_check, Tape, Tensor};

fn main() {
    // forward: loss = sum(sigmoid(x W + b))
    let x = Tensor::from_vec(vec![1, 3], vec![0.5, -1.0, 2.0]).unwrap();
    let w = Tensor::from_vec(vec![3, 2], vec![0.1, 0.4, -0.3, 0.2, 0.7, -0.5])
        .unwrap()
        .with_grad();
    let b = Tensor::from_vec(vec![2], vec![0.05, -0.05])
        .unwrap()
        .with_grad();

    let mut tape = Tape::new();
    let (xv, wv, bv) = (tape.leaf(&x), tape.leaf(&w), tape.leaf(&b));
    let z = tape.matmul(xv, wv).unwrap();
    let z = tape.add(z, bv).unwrap();
    let y = tape.sigmoid(z);
    let loss = tape.sum(y);
    println!("loss = {:.6}", tape.value(loss)[0]);

    tape.backward(loss).unwrap();
    println!("dloss/dW = {:?}", tape.grad(wv).unwrap());
    println!("dloss/db = {:?}", tape.grad(bv).unwrap());

    // the same graph, checked coordinate by coordinate against
    // (f(p + eps) - f(p - eps)) / (2 eps)
    let mut params = vec![w, b];
    let x_data = x.data().to_vec();
    let err = grad_check(&mut params, 1e-5, move |tape, vars| {
        let x = tape.constant(vec![1, 3], x_data.clone())?;
        let z = tape.matmul(x, vars[0])?;
        let z = tape.add(z, vars[1])?;
        let y = tape.sigmoid(z);
        Ok(tape.sum(y))
    })
    .unwrap();
    println!("max relative error vs finite differences: {err:.3e}");
}
