use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rico_core::geometry::{point_segment_distance, Rect, Vec2};
use rico_core::world::{path_length, Planner, Pose, WorldState, ROBOT_RADIUS};
use std::collections::BinaryHeap;

fn random_obstacles(rng: &mut impl Rng, bounds: Rect) -> Vec<Rect> {
    (0..rng.gen_range(0..10))
        .map(|_| {
            let x = rng.gen_range(bounds.min_x..bounds.max_x - 0.2);
            let y = rng.gen_range(bounds.min_y..bounds.max_y - 0.2);
            Rect::new(x, y, (x + rng.gen_range(0.1..2.5)).min(bounds.max_x), (y + rng.gen_range(0.1..2.5)).min(bounds.max_y))
        })
        .collect()
}

fn clearance(bounds: Rect, obstacles: &[Rect], p: Vec2) -> f64 {
    let edges = bounds.corners();
    let mut d = (0..4).map(|k| point_segment_distance(p, edges[k], edges[(k + 1) % 4])).fold(f64::INFINITY, f64::min);
    if !bounds.contains(p) {
        d = 0.0;
    }
    for o in obstacles {
        if o.contains(p) {
            return 0.0;
        }
        let c = o.corners();
        for k in 0..4 {
            d = d.min(point_segment_distance(p, c[k], c[(k + 1) % 4]));
        }
    }
    d
}

/// Dijkstra over 0.1 m cells whose centres keep 0.30 m clearance, 8-connected
/// without corner cutting. Returns the path cost between two cells.
fn grid_oracle(bounds: Rect, obstacles: &[Rect], from: (usize, usize), to: (usize, usize)) -> Option<f64> {
    let res = 0.1;
    let cols = (bounds.width() / res).ceil() as usize;
    let rows = (bounds.height() / res).ceil() as usize;
    let center = |c: usize, r: usize| Vec2::new(bounds.min_x + (c as f64 + 0.5) * res, bounds.min_y + (r as f64 + 0.5) * res);
    let free = |c: usize, r: usize| clearance(bounds, obstacles, center(c, r)) >= 0.30;
    let mut dist = vec![f64::INFINITY; cols * rows];
    let mut heap = BinaryHeap::new();
    dist[from.1 * cols + from.0] = 0.0;
    heap.push((std::cmp::Reverse(0u64), from));
    while let Some((std::cmp::Reverse(dk), (c, r))) = heap.pop() {
        let d = dk as f64 / 1e9;
        if d > dist[r * cols + c] + 1e-12 {
            continue;
        }
        if (c, r) == to {
            return Some(d);
        }
        for (dc, dr) in [(1i64, 0i64), (-1, 0), (0, 1), (0, -1), (1, 1), (1, -1), (-1, 1), (-1, -1)] {
            let (nc, nr) = (c as i64 + dc, r as i64 + dr);
            if nc < 0 || nr < 0 || nc >= cols as i64 || nr >= rows as i64 {
                continue;
            }
            let (nc, nr) = (nc as usize, nr as usize);
            if !free(nc, nr) || (dc != 0 && dr != 0 && !(free(nc, r) && free(c, nr))) {
                continue;
            }
            let nd = d + if dc != 0 && dr != 0 { 2f64.sqrt() * res } else { res };
            if nd < dist[nr * cols + nc] - 1e-12 {
                dist[nr * cols + nc] = nd;
                heap.push((std::cmp::Reverse((nd * 1e9) as u64), (nc, nr)));
            }
        }
    }
    None
}

fn path_is_clear(bounds: Rect, obstacles: &[Rect], path: &[Vec2]) -> bool {
    path.windows(2).all(|w| {
        let n = (w[0].distance(w[1]) / 0.005).ceil().max(1.0) as usize;
        (0..=n).all(|k| clearance(bounds, obstacles, w[0].lerp(w[1], k as f64 / n as f64)) >= ROBOT_RADIUS - 1e-9)
    })
}

#[test]
fn planner_agrees_with_grid_search() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let bounds = Rect::new(0.0, 0.0, 6.0, 5.0);
    let (mut connected, mut checked) = (0, 0);
    while checked < 60 {
        let obstacles = random_obstacles(&mut rng, bounds);
        let cell = |rng: &mut ChaCha8Rng| (rng.gen_range(0..60usize), rng.gen_range(0..50usize));
        let (a, b) = (cell(&mut rng), cell(&mut rng));
        let center = |(c, r): (usize, usize)| Vec2::new((c as f64 + 0.5) * 0.1, (r as f64 + 0.5) * 0.1);
        let (pa, pb) = (center(a), center(b));
        if clearance(bounds, &obstacles, pa) < 0.30 || clearance(bounds, &obstacles, pb) < 0.30 {
            continue;
        }
        checked += 1;
        let planner = Planner::from_parts(bounds, &obstacles);
        let plan = planner.plan(pa, pb);
        match grid_oracle(bounds, &obstacles, a, b) {
            Some(cost) => {
                connected += 1;
                let path = plan.unwrap_or_else(|e| panic!("oracle connects {a:?}-{b:?} but planner says {e}"));
                assert_eq!((path[0], *path.last().unwrap()), (pa, pb));
                assert!(path_is_clear(bounds, &obstacles, &path));
                let len = path_length(&path);
                assert!(len >= pa.distance(pb) - 1e-9);
                assert!(len <= cost + 1e-6, "path {len} longer than grid optimum {cost}");
            }
            None => {
                if let Ok(path) = plan {
                    // only a direct segment can beat the grid's connectivity
                    assert!(path_is_clear(bounds, &obstacles, &path));
                }
            }
        }
    }
    assert!(connected > 20, "too few connected samples: {connected}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Whatever the commands, the robot disc never overlaps an obstacle or
    /// leaves the bounds, and the clock advances by exactly dt.
    #[test]
    fn motion_never_penetrates(seed in any::<u64>(), cmds in prop::collection::vec((-1.0f64..1.0, -2.0f64..2.0), 1..200)) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let bounds = Rect::new(0.0, 0.0, 6.0, 5.0);
        let mut w = WorldState::new(bounds);
        w.obstacles = random_obstacles(&mut rng, bounds);
        let start = (0..200).map(|_| Vec2::new(rng.gen_range(0.3..5.7), rng.gen_range(0.3..4.7))).find(|&p| w.disc_is_free(p));
        prop_assume!(start.is_some());
        let p = start.unwrap();
        w.robot = Pose::new(p.x, p.y, 0.0);
        for (k, (v, om)) in cmds.into_iter().enumerate() {
            w.command_base(v, om).unwrap();
            w.step(0.1).unwrap();
            prop_assert!(clearance(bounds, &w.obstacles, w.robot.position()) >= ROBOT_RADIUS - 1e-9);
            prop_assert!((w.clock - 0.1 * (k + 1) as f64).abs() < 1e-9);
        }
    }
}
