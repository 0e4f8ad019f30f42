use std::collections::{BTreeSet, VecDeque};

/// Planar point in the workspace.
pub type Point = [f64; 2];

pub const COLS: usize = 8;
pub const ROWS: usize = 5;
pub const CELL_COUNT: usize = COLS * ROWS;
pub const X_MIN: f64 = -1.6;
pub const X_MAX: f64 = 1.6;
pub const Y_MIN: f64 = -1.0;
pub const Y_MAX: f64 = 1.0;
/// Side length of a (square) grid cell.
pub const CELL_SIZE: f64 = (X_MAX - X_MIN) / COLS as f64;

/// Row-major cell index; row 0 is the bottom row.
pub fn cell_index(col: usize, row: usize) -> usize {
    row * COLS + col
}

pub fn cell_col_row(cell: usize) -> (usize, usize) {
    (cell % COLS, cell / COLS)
}

pub fn cell_center(cell: usize) -> Point {
    let (col, row) = cell_col_row(cell);
    [X_MIN + (col as f64 + 0.5) * CELL_SIZE, Y_MIN + (row as f64 + 0.5) * CELL_SIZE]
}

pub fn in_workspace(p: Point) -> bool {
    (X_MIN..=X_MAX).contains(&p[0]) && (Y_MIN..=Y_MAX).contains(&p[1])
}

/// Cell containing `p`; points on the outer boundary belong to the
/// adjacent cell. `None` outside the workspace.
pub fn cell_of(p: Point) -> Option<usize> {
    if !in_workspace(p) {
        return None;
    }
    let col = (((p[0] - X_MIN) / CELL_SIZE).floor() as usize).min(COLS - 1);
    let row = (((p[1] - Y_MIN) / CELL_SIZE).floor() as usize).min(ROWS - 1);
    Some(cell_index(col, row))
}

/// 4-connected neighbours in ascending index order.
pub fn neighbors(cell: usize) -> impl Iterator<Item = usize> {
    let (col, row) = cell_col_row(cell);
    let down = (row > 0).then(|| cell - COLS);
    let left = (col > 0).then(|| cell - 1);
    let right = (col + 1 < COLS).then(|| cell + 1);
    let up = (row + 1 < ROWS).then(|| cell + COLS);
    [down, left, right, up].into_iter().flatten()
}

/// The four corner cells.
pub fn corner_cells() -> Vec<usize> {
    vec![cell_index(0, 0), cell_index(COLS - 1, 0), cell_index(0, ROWS - 1), cell_index(COLS - 1, ROWS - 1)]
}

pub fn dist(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

pub fn dist_inf(a: Point, b: Point) -> f64 {
    (a[0] - b[0]).abs().max((a[1] - b[1]).abs())
}

/// Breadth-first search from `start` over cells not in `closed`. Returns
/// hop counts and BFS parents; the start cell is always open.
pub(crate) fn bfs(start: usize, closed: &BTreeSet<usize>) -> (Vec<Option<usize>>, Vec<Option<usize>>) {
    let mut hops = vec![None; CELL_COUNT];
    let mut parent = vec![None; CELL_COUNT];
    let mut queue = VecDeque::from([start]);
    hops[start] = Some(0);
    while let Some(cell) = queue.pop_front() {
        let d = hops[cell].unwrap_or(0);
        for next in neighbors(cell) {
            if hops[next].is_none() && !closed.contains(&next) {
                hops[next] = Some(d + 1);
                parent[next] = Some(cell);
                queue.push_back(next);
            }
        }
    }
    (hops, parent)
}

pub(crate) fn backtrack(parent: &[Option<usize>], goal: usize) -> Vec<usize> {
    let mut path = vec![goal];
    let mut cur = goal;
    while let Some(p) = parent[cur] {
        path.push(p);
        cur = p;
    }
    path.reverse();
    path
}
