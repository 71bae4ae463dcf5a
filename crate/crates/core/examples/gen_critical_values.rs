//! Regenerates the compiled Dickey–Fuller critical-value table.
//!
//! Prints CSV `n,pct,value` to stdout. The `inf` row is the intercept of a
//! least-squares line in `1/n` through large-sample simulations.
//!
//!     cargo run --release -p ratedml-core --example gen_critical_values -- [reps] [seed]

use ratedml_core::synth::df_critical_values;

fn main() {
    let mut args = std::env::args().skip(1);
    let reps: usize = args.next().map_or(200_000, |s| s.parse().expect("reps"));
    let seed: u64 = args.next().map_or(20_240_101, |s| s.parse().expect("seed"));

    println!("n,pct,value");
    for (i, n) in [50usize, 100, 250, 500].into_iter().enumerate() {
        let cv = df_critical_values(n, reps, seed + i as u64).expect("simulation");
        for (pct, v) in [(1, cv.one_pct), (5, cv.five_pct), (10, cv.ten_pct)] {
            println!("{n},{pct},{v:.4}");
        }
    }

    let large = [250usize, 500, 1000, 2000];
    let sims: Vec<_> = large
        .iter()
        .enumerate()
        .map(|(i, &n)| df_critical_values(n, reps, seed + 100 + i as u64).expect("simulation"))
        .collect();
    let xs: Vec<f64> = large.iter().map(|&n| 1.0 / n as f64).collect();
    let mx = xs.iter().sum::<f64>() / xs.len() as f64;
    for pct in [1, 5, 10] {
        let ys: Vec<f64> = sims
            .iter()
            .map(|cv| match pct {
                1 => cv.one_pct,
                5 => cv.five_pct,
                _ => cv.ten_pct,
            })
            .collect();
        let my = ys.iter().sum::<f64>() / ys.len() as f64;
        let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
        let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
        let intercept = my - sxy / sxx * mx;
        println!("inf,{pct},{intercept:.4}");
    }
}
