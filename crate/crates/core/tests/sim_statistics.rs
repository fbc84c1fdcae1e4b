use momad_core::sim::{perturb_features, propose, ProposalConfig};
use momad_core::Trajectory;

fn sample_std(v: &[f64]) -> f64 {
    let m = v.iter().sum::<f64>() / v.len() as f64;
    (v.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (v.len() - 1) as f64).sqrt()
}

#[test]
fn jitter_std_matches_setting() {
    let gt = Trajectory::from_xy(
        &[(2.0, 0.0), (4.0, 0.5), (6.0, 1.5), (8.0, 3.0), (9.5, 5.0), (10.5, 7.0)],
        0.5,
    )
    .unwrap();
    let cfg = ProposalConfig {
        k: 10_000,
        mode_noise: 0.0,
        jitter: 0.5,
        d_q: 4,
    };
    let set = propose(&gt, &cfg, 42).unwrap();
    for i in 0..gt.len() {
        for axis in 0..2 {
            let r: Vec<f64> = set
                .trajectories()
                .iter()
                .map(|t| {
                    let (p, q) = (t.points()[i], gt.points()[i]);
                    if axis == 0 {
                        p.x - q.x
                    } else {
                        p.y - q.y
                    }
                })
                .collect();
            let s = sample_std(&r);
            assert!((s - 0.5).abs() <= 0.025, "waypoint {i} axis {axis}: std {s}");
        }
    }
}

#[test]
fn feature_noise_std() {
    let x: Vec<f64> = (0..100_000).map(|i| (i as f64).sin()).collect();
    let out = perturb_features(&x, 0.1, 9).unwrap();
    let d: Vec<f64> = out.iter().zip(&x).map(|(a, b)| a - b).collect();
    let s = sample_std(&d);
    assert!((0.095..=0.105).contains(&s), "std {s}");
}
