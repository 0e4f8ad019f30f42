//! Grid-world reference code written without the library's geometry helpers.

use std::collections::{BinaryHeap, HashSet, VecDeque};
use std::cmp::Reverse;

use stl_shield::world::Environment;

const W: usize = 8;
const H: usize = 5;

fn adjacent(c: usize) -> Vec<usize> {
    let (col, row) = (c % W, c / W);
    let mut out = Vec::new();
    if row > 0 {
        out.push(c - W);
    }
    if col > 0 {
        out.push(c - 1);
    }
    if col + 1 < W {
        out.push(c + 1);
    }
    if row + 1 < H {
        out.push(c + W);
    }
    out
}

/// Cell under a point, `None` outside `[−1.6,1.6]×[−1,1]`.
pub fn cell_at(x: f64, y: f64) -> Option<usize> {
    if !(-1.6..=1.6).contains(&x) || !(-1.0..=1.0).contains(&y) {
        return None;
    }
    let col = (((x + 1.6) / 0.4).floor() as usize).min(W - 1);
    let row = (((y + 1.0) / 0.4).floor() as usize).min(H - 1);
    Some(row * W + col)
}

pub fn center(c: usize) -> [f64; 2] {
    [-1.6 + 0.4 * (c % W) as f64 + 0.2, -1.0 + 0.4 * (c / W) as f64 + 0.2]
}

/// Breadth-first hop counts from `from` over cells not in `closed`.
pub fn hops(from: usize, closed: &HashSet<usize>) -> Vec<Option<usize>> {
    let mut d = vec![None; W * H];
    d[from] = Some(0);
    let mut q = VecDeque::from([from]);
    while let Some(c) = q.pop_front() {
        for n in adjacent(c) {
            if d[n].is_none() && !closed.contains(&n) {
                d[n] = Some(d[c].unwrap() + 1);
                q.push_back(n);
            }
        }
    }
    d
}

/// Unit-weight Dijkstra; must agree with [`hops`].
pub fn dijkstra(from: usize, closed: &HashSet<usize>) -> Vec<Option<usize>> {
    let mut d: Vec<Option<usize>> = vec![None; W * H];
    let mut heap = BinaryHeap::from([Reverse((0usize, from))]);
    while let Some(Reverse((k, c))) = heap.pop() {
        if d[c].is_some() {
            continue;
        }
        d[c] = Some(k);
        for n in adjacent(c) {
            if d[n].is_none() && !closed.contains(&n) {
                heap.push(Reverse((k + 1, n)));
            }
        }
    }
    d
}

/// Re-checks placement conditions (1)–(3) of a generated environment.
pub fn validate(env: &Environment) -> Result<(), String> {
    let statics: HashSet<usize> = env.static_obstacles.iter().copied().collect();
    if env.static_obstacles.len() != 8 || statics.len() != 8 || statics.iter().any(|c| *c >= W * H) {
        return Err(format!("static obstacles {:?}", env.static_obstacles));
    }
    let ego = cell_at(env.ego_init.px, env.ego_init.py).ok_or("ego outside workspace")?;
    if env.moving_obstacles.len() != 4 {
        return Err("moving obstacle count".into());
    }
    let mut occupied = vec![ego];
    occupied.extend(env.moving_obstacles.iter().map(|m| m.waypoints[0]));
    let distinct: HashSet<usize> = occupied.iter().copied().collect();
    if distinct.len() != 5 || distinct.iter().any(|c| statics.contains(c) || *c >= W * H) {
        return Err(format!("ego/moving starts {occupied:?} collide"));
    }
    for m in &env.moving_obstacles {
        if m.waypoints.iter().any(|c| statics.contains(c)) {
            return Err("moving obstacle tour through a static cell".into());
        }
        if m.waypoints.windows(2).any(|w| !adjacent(w[0]).contains(&w[1])) {
            return Err("tour jumps between non-adjacent cells".into());
        }
    }
    let goals: HashSet<usize> = env.goals.iter().copied().collect();
    if env.goals.len() != 3 || goals.len() != 3 || goals.iter().any(|g| statics.contains(g) || *g >= W * H) {
        return Err(format!("goals {:?}", env.goals));
    }
    let mut homes = env.homes.clone();
    homes.sort_unstable();
    if homes != [0, 7, 32, 39] {
        return Err(format!("homes {:?}", env.homes));
    }
    let d = hops(ego, &statics);
    if !env.goals.iter().any(|g| d[*g].is_some()) {
        return Err("no goal reachable".into());
    }
    Ok(())
}
