//! Compare backprop gradients with central finite differences.

use fogrl::nn::Mlp;
use fogrl::sim::RngStream;

fn main() -> fogrl::Result<()> {
    let mut rng = RngStream::new(5, "example");
    let net = Mlp::new(&[4, 16, 8, 3], &mut rng)?;
    let x = [0.2, -0.7, 0.4, 1.0];
    let c = [1.0, -0.5, 0.25];
    let loss = |m: &Mlp| -> fogrl::Result<f64> {
        Ok(m.forward(&x)?.iter().zip(c).map(|(o, w)| o * w).sum())
    };

    let mut grads = vec![0.0; net.param_count()];
    net.backward(&net.forward_trace(&x)?, &c, &mut grads)?;

    let h = 1e-5;
    let mut worst: f64 = 0.0;
    for i in (0..net.param_count()).step_by(7) {
        let mut plus = net.clone();
        plus.params_mut()[i] += h;
        let mut minus = net.clone();
        minus.params_mut()[i] -= h;
        let fd = (loss(&plus)? - loss(&minus)?) / (2.0 * h);
        worst = worst.max((fd - grads[i]).abs() / fd.abs().max(grads[i].abs()).max(1e-7));
    }
    println!(
        "{} parameters, worst relative error {worst:.2e}",
        net.param_count()
    );
    Ok(())
}
