//! Evaluates every kernel family at a few distances, in both parametrizations.

use gradcobra::kernel::{kernel_weight, kernel_weight_dh, Bandwidth, DistanceSample, KernelFamily, KernelSpec};

fn main() -> gradcobra::Result<()> {
    let dists = [0.0, 0.25, 0.5, 1.0, 2.0];
    println!("{:<14} {}", "kernel", dists.map(|d| format!("{d:>9}")).join(""));
    for family in KernelFamily::ALL {
        let spec = KernelSpec::new(family);
        let bw = Bandwidth::scale(1.0);
        let row: Vec<String> = dists
            .iter()
            .map(|&d| {
                // distance along one axis, so the Chebyshev and Euclidean norms coincide
                let sample = DistanceSample::with_chebyshev(d * d, d);
                kernel_weight(&spec, &bw, sample).map(|w| format!("{w:>9.4}"))
            })
            .collect::<gradcobra::Result<_>>()?;
        println!("{:<14} {}", spec.to_string(), row.join(""));
    }

    // inverse scale: exp(-h d² / 2σ²) and its derivative in h
    let gauss = KernelSpec::gaussian();
    for h in [0.5, 1.0, 4.0] {
        let bw = Bandwidth::inverse_scale(h);
        let s = DistanceSample::radial(1.0);
        println!(
            "gauss inverse-scale h={h}: K = {:.5}, dK/dh = {:.5}",
            kernel_weight(&gauss, &bw, s)?,
            kernel_weight_dh(&gauss, &bw, s)?
        );
    }

    let spec: KernelSpec = "cgauss:sigma=0.5:rho1=2".parse()?;
    println!("parsed token -> {spec} (family {:?})", spec.family);
    Ok(())
}
