//! Draws each benchmark model under both input designs and summarizes the responses.

use gradcobra::simulate::{simulate, InputDesign, SimDesign, SimModel};

fn main() -> gradcobra::Result<()> {
    println!("{:>5} {:<13} {:>5} {:>5} {:>9} {:>9}", "model", "design", "n", "d", "mean y", "sd y");
    for model in SimModel::all() {
        for design in [InputDesign::Uncorrelated, InputDesign::Correlated] {
            // reference dimensions, smaller n to keep the run short
            let d = model.default_size().1;
            let data = simulate(&SimDesign::new(model, design, 1).with_size(200, d))?;
            let y = data.y.as_slice();
            let mean = y.iter().sum::<f64>() / y.len() as f64;
            let sd = (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (y.len() - 1) as f64).sqrt();
            println!("{:>5} {:<13} {:>5} {:>5} {mean:>9.4} {sd:>9.4}", model.id(), design.to_string(), 200, d);
        }
    }
    Ok(())
}
