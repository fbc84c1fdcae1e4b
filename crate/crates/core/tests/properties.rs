use momad_core::curation::{curate, SampleRecord};
use momad_core::interactor::softmax;
use momad_core::matching::{directed_hausdorff, hausdorff, ttm_select, ttm_select_par};
use momad_core::metrics::{boxes_overlap, focal_loss, tpc, ObstacleBox};
use momad_core::trajectory::{overlap_mask, relative_pose, resample, transform_from_frame, transform_to_frame};
use momad_core::{DistanceKind, Pose2, Trajectory, TrajectorySet, Waypoint};
use proptest::prelude::*;

fn coord() -> impl Strategy<Value = f64> {
    -100.0..100.0f64
}

fn traj(len: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Trajectory> {
    prop::collection::vec((coord(), coord()), len).prop_map(|xy| Trajectory::from_xy(&xy, 0.5).unwrap())
}

fn pose() -> impl Strategy<Value = Pose2> {
    (-3.2..3.2f64, coord(), coord()).prop_map(|(h, x, y)| Pose2::from_heading(h, x, y))
}

fn close(a: &Trajectory, b: &Trajectory, tol: f64) -> bool {
    a.len() == b.len() && a.points().iter().zip(b.points()).all(|(p, q)| p.distance(q) <= tol)
}

proptest! {
    #[test]
    fn hausdorff_is_a_metric(a in traj(1..=10), b in traj(1..=10), c in traj(1..=10)) {
        let ab = hausdorff(&a, &b).unwrap();
        prop_assert_eq!(ab, hausdorff(&b, &a).unwrap());
        prop_assert!(ab >= 0.0);
        prop_assert_eq!(hausdorff(&a, &a).unwrap(), 0.0);
        prop_assert!(ab <= hausdorff(&a, &c).unwrap() + hausdorff(&c, &b).unwrap() + 1e-9);
        prop_assert!(directed_hausdorff(&a, &b).unwrap() <= ab);
    }

    #[test]
    fn hausdorff_is_rigid_invariant(a in traj(1..=10), b in traj(1..=10), g in pose()) {
        let before = hausdorff(&a, &b).unwrap();
        let after = hausdorff(&transform_to_frame(&a, &g).unwrap(), &transform_to_frame(&b, &g).unwrap()).unwrap();
        prop_assert!((before - after).abs() <= 1e-9 * (1.0 + before));
    }

    #[test]
    fn frame_transfer_round_trips(a in traj(1..=10), g in pose()) {
        let back = transform_from_frame(&transform_to_frame(&a, &g).unwrap(), &g).unwrap();
        prop_assert!(close(&a, &back, 1e-9));
    }

    #[test]
    fn relative_pose_composes(p in pose(), q in pose(), x in coord(), y in coord()) {
        // A point in the current frame reaches the same world point either way.
        let delta = relative_pose(&p, &q).unwrap();
        let local = Waypoint::new(x, y);
        let via_prev = p.apply(&delta.apply_inverse(&local));
        let direct = q.apply(&local);
        prop_assert!(via_prev.distance(&direct) <= 1e-9);
    }

    #[test]
    fn ttm_parallel_matches_sequential(cands in prop::collection::vec(traj(6..=6), 1..8), h in traj(6..=6), g in pose()) {
        let n = cands.len();
        let set = TrajectorySet::without_queries(cands, vec![0.0; n]).unwrap();
        for kind in [DistanceKind::Hausdorff, DistanceKind::MeanEuclidean] {
            prop_assert_eq!(ttm_select(&set, &h, &g, kind).unwrap(), ttm_select_par(&set, &h, &g, kind).unwrap());
        }
    }

    #[test]
    fn resample_keeps_endpoints(a in traj(2..=10), n in 2usize..20) {
        let r = resample(&a, n).unwrap();
        prop_assert_eq!(r.len(), n);
        prop_assert_eq!(r.first(), a.first());
        prop_assert_eq!(r.last(), a.last());
        prop_assert!(r.arc_length() <= a.arc_length() + 1e-9);
    }

    #[test]
    fn resample_is_idempotent_on_lines(x0 in coord(), y0 in coord(), dx in 0.1..10.0f64, dy in -10.0..10.0f64,
                                       steps in prop::collection::vec(0.1..5.0f64, 1..8), n in 2usize..15) {
        let mut s = 0.0;
        let mut pts = vec![(x0, y0)];
        for st in steps {
            s += st;
            pts.push((x0 + dx * s, y0 + dy * s));
        }
        let once = resample(&Trajectory::from_xy(&pts, 0.5).unwrap(), n).unwrap();
        let twice = resample(&once, n).unwrap();
        prop_assert!(close(&once, &twice, 1e-7));
    }

    #[test]
    fn tpc_is_rigid_invariant(cur in traj(6..=6), prev in traj(6..=6), delta in pose(), g in pose()) {
        let mask = overlap_mask(&cur, &prev, 1);
        let base = tpc(&cur, &prev, &delta, &mask).unwrap().unwrap();
        // Re-express the previous frame by g: the previous plan moves by g⁻¹
        // and the frame transfer absorbs the same change.
        let prev_moved = transform_to_frame(&prev, &g).unwrap();
        let delta_moved = delta.compose(&g);
        let moved = tpc(&cur, &prev_moved, &delta_moved, &mask).unwrap().unwrap();
        prop_assert!((base - moved).abs() <= 1e-8 * (1.0 + base));
    }

    #[test]
    fn softmax_is_a_distribution(logits in prop::collection::vec(-700.0..700.0f64, 1..32)) {
        let a = softmax(&logits);
        prop_assert!((a.iter().sum::<f64>() - 1.0).abs() <= 1e-12);
        prop_assert!(a.iter().all(|v| v.is_finite() && *v >= 0.0));
    }

    #[test]
    fn focal_decreases_with_confidence(p in 0.01..0.98f64, bump in 0.001..0.01f64, gamma in 0.0..5.0f64) {
        let lo = focal_loss(p, true, 0.25, gamma).unwrap();
        let hi = focal_loss(p + bump, true, 0.25, gamma).unwrap();
        prop_assert!(hi < lo);
    }

    #[test]
    fn overlap_is_symmetric_and_rigid(ax in -5.0..5.0f64, ay in -5.0..5.0f64, ah in -3.2..3.2f64,
                                      bx in -5.0..5.0f64, by in -5.0..5.0f64, bh in -3.2..3.2f64, g in pose()) {
        let a = ObstacleBox::new(Waypoint::new(ax, ay), ah, 4.0, 2.0).unwrap();
        let b = ObstacleBox::new(Waypoint::new(bx, by), bh, 3.0, 1.5).unwrap();
        prop_assert_eq!(boxes_overlap(&a, &b), boxes_overlap(&b, &a));
        prop_assert!(boxes_overlap(&a, &a));
        let mv = |o: &ObstacleBox| ObstacleBox { center: g.apply(&o.center), heading: o.heading + g.heading(), ..*o };
        prop_assert_eq!(boxes_overlap(&a, &b), boxes_overlap(&mv(&a), &mv(&b)));
    }

    #[test]
    fn curation_is_idempotent_and_monotone(
        rows in prop::collection::vec((0u8..6, -50.0..50.0f64), 0..40),
        e1 in 0.0..60.0f64, e2 in 0.0..60.0f64,
    ) {
        let samples: Vec<SampleRecord> = rows.iter().enumerate().map(|(i, (scene, dx))| {
            let xy: Vec<(f64, f64)> = (0..6).map(|j| (dx * j as f64 / 5.0, j as f64)).collect();
            SampleRecord::new(format!("s{i}"), format!("c{scene}"), Trajectory::from_xy(&xy, 0.5).unwrap()).unwrap()
        }).collect();
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let once = curate(&samples, lo);
        prop_assert_eq!(curate(&once.samples, lo), once.clone());
        let tighter = curate(&samples, hi);
        prop_assert!(tighter.samples.iter().all(|s| once.samples.contains(s)));
    }
}
