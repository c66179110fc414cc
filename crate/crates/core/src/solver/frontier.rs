//! Exact row-by-row dynamic program over the cell's bounding box.
//!
//! The frontier holds, for every column, the plug of a vertical edge
//! crossing into the current row, plus the plug of the horizontal edge
//! entering the current pixel from the left. In relaxed mode a plug is just
//! present or absent. In path mode each plug also says which partial path it
//! belongs to: `1` for the piece hanging off the entry pixel, `2` for the
//! piece hanging off the exit pixel, and matching labels `>= 3` for the two
//! ends of any other piece; closing a loop is never allowed.

use std::collections::HashMap;
use std::time::Instant;

use super::model::MipModel;
use super::{EdgeSelection, SolverError};

const BITS: usize = 5;
const MASK: u128 = (1 << BITS) - 1;
pub(crate) const MAX_WIDTH: usize = 24;
const DONE: u128 = 1 << 127;
const S_TAIL: u8 = 1;
const T_TAIL: u8 = 2;
const FRESH: u8 = 31;

struct Layout {
    width: usize,
    height: usize,
    cells: Vec<Option<usize>>,
}

impl Layout {
    fn new(model: &MipModel) -> Self {
        let (mut x0, mut y0, mut x1, mut y1) = (i32::MAX, i32::MAX, i32::MIN, i32::MIN);
        for p in &model.points {
            x0 = x0.min(p.x);
            y0 = y0.min(p.y);
            x1 = x1.max(p.x);
            y1 = y1.max(p.y);
        }
        let (w, h) = ((x1 - x0 + 1) as usize, (y1 - y0 + 1) as usize);
        // scan along the shorter side to keep the frontier narrow
        let transpose = w > h;
        let (width, height) = if transpose { (h, w) } else { (w, h) };
        let mut cells = vec![None; width * height];
        for (v, p) in model.points.iter().enumerate() {
            let (dx, dy) = ((p.x - x0) as usize, (p.y - y0) as usize);
            let (c, r) = if transpose { (dy, dx) } else { (dx, dy) };
            cells[r * width + c] = Some(v);
        }
        Self { width, height, cells }
    }

    fn at(&self, r: usize, c: usize) -> Option<usize> {
        if r < self.height && c < self.width {
            self.cells[r * self.width + c]
        } else {
            None
        }
    }
}

fn get(key: u128, pos: usize) -> u8 {
    ((key >> (pos * BITS)) & MASK) as u8
}

fn set(key: u128, pos: usize, code: u8) -> u128 {
    (key & !(MASK << (pos * BITS))) | (u128::from(code) << (pos * BITS))
}

fn relabel(key: u128, last: usize, from: u8, to: u8) -> u128 {
    (0..=last).find(|&p| get(key, p) == from).map_or(key, |p| set(key, p, to))
}

/// Renumbers pair labels in position order so equal frontiers share a key.
fn normalize(key: u128, last: usize) -> u128 {
    let mut map = [0u8; 32];
    let mut next = 3u8;
    let mut out = key & DONE;
    for p in 0..=last {
        let code = get(key, p);
        let code = if code >= 3 {
            if map[code as usize] == 0 {
                map[code as usize] = next;
                next += 1;
            }
            map[code as usize]
        } else {
            code
        };
        out = set(out, p, code);
    }
    out
}

/// Path-mode transition at one pixel. `base` is the frontier with this
/// pixel's incoming plugs already cleared.
fn connect(base: u128, up: u8, left: u8, go_right: bool, go_down: bool, col: usize, last: usize, tag: Option<u8>) -> Option<u128> {
    let mut key = base;
    let mut ins = [0u8; 2];
    let mut n_in = 0;
    for x in [up, left] {
        if x > 0 {
            ins[n_in] = x;
            n_in += 1;
        }
    }
    let mut out_code = 0u8;
    match (tag, n_in) {
        (Some(tag), 1) => {
            let x = ins[0];
            if x >= 3 {
                key = relabel(key, last, x, tag);
            } else if x != tag && key == 0 {
                key = DONE;
            } else {
                return None;
            }
        }
        (Some(tag), 0) => out_code = tag,
        (None, 2) => {
            let (x, y) = (ins[0], ins[1]);
            if x >= 3 && y >= 3 {
                if x == y {
                    return None;
                }
                key = relabel(key, last, y, x);
            } else if x >= 3 || y >= 3 {
                let (tail, label) = if x < 3 { (x, y) } else { (y, x) };
                key = relabel(key, last, label, tail);
            } else if x != y && key == 0 {
                key = DONE;
            } else {
                return None;
            }
        }
        (None, 1) => out_code = ins[0],
        (None, 0) => out_code = FRESH,
        _ => return None,
    }
    if go_down {
        key = set(key, col, out_code);
    }
    if go_right {
        key = set(key, last, out_code);
    }
    Some(normalize(key, last))
}

/// Minimum-cost edge selection with degree 1 at the terminals and 2
/// elsewhere. With `hamiltonian` the selection must form a single path;
/// otherwise disjoint cycles are allowed beside the path.
///
/// States beyond `beam` per step are cut, and in relaxed mode a passed
/// deadline shrinks the beam; either marks the result as not proven optimal.
/// In path mode a passed deadline is an error.
pub(crate) fn solve(model: &MipModel, hamiltonian: bool, deadline: Option<Instant>, beam: usize) -> Result<EdgeSelection, SolverError> {
    let n = model.vertex_count();
    if n == 1 {
        return Ok(EdgeSelection { edges: Vec::new(), cost: 0.0, optimal: true });
    }
    let lay = Layout::new(model);
    if lay.width > MAX_WIDTH {
        return Err(SolverError::TooWide { width: lay.width, max: MAX_WIDTH });
    }
    let last = lay.width;
    let alpha = model.alpha;
    let mut optimal = true;
    let mut states: Vec<(u128, f64)> = vec![(0, 0.0)];
    let mut trail: Vec<Vec<(u32, u8)>> = Vec::new();
    let mut steps: Vec<(usize, Option<usize>, Option<usize>)> = Vec::new();
    for r in 0..lay.height {
        for c in 0..lay.width {
            let Some(v) = lay.at(r, c) else { continue };
            let right = lay.at(r, c + 1);
            let down = lay.at(r + 1, c);
            let w_right = right.map_or(0.0, |u| model.weight(v, u).expect("adjacent pixels share an edge"));
            let w_down = down.map_or(0.0, |u| model.weight(v, u).expect("adjacent pixels share an edge"));
            let tag = if v == model.s {
                Some(S_TAIL)
            } else if v == model.t {
                Some(T_TAIL)
            } else {
                None
            };
            let req = if tag.is_some() { 1 } else { 2 };
            let mut next: Vec<(u128, f64)> = Vec::new();
            let mut back: Vec<(u32, u8)> = Vec::new();
            let mut index: HashMap<u128, usize> = HashMap::new();
            for (si, &(key, cost)) in states.iter().enumerate() {
                if key & DONE != 0 {
                    continue;
                }
                let up = get(key, c);
                let left = get(key, last);
                let base = set(set(key, c, 0), last, 0);
                for choice in 0u8..4 {
                    let (go_right, go_down) = (choice & 1 != 0, choice & 2 != 0);
                    if (go_right && right.is_none()) || (go_down && down.is_none()) {
                        continue;
                    }
                    let degree = u8::from(up > 0) + u8::from(left > 0) + u8::from(go_right) + u8::from(go_down);
                    if degree != req {
                        continue;
                    }
                    let key2 = if hamiltonian {
                        match connect(base, up, left, go_right, go_down, c, last, tag) {
                            Some(k) => k,
                            None => continue,
                        }
                    } else {
                        set(set(base, c, u8::from(go_down)), last, u8::from(go_right))
                    };
                    let turn = req == 2 && u8::from(up > 0) + u8::from(go_down) == 1;
                    let edge_w = if go_right { w_right } else { 0.0 } + if go_down { w_down } else { 0.0 };
                    let total = cost + alpha * edge_w + (1.0 - alpha) * f64::from(u8::from(turn));
                    match index.get(&key2) {
                        Some(&i) => {
                            if total < next[i].1 {
                                next[i].1 = total;
                                back[i] = (si as u32, choice);
                            }
                        }
                        None => {
                            index.insert(key2, next.len());
                            next.push((key2, total));
                            back.push((si as u32, choice));
                        }
                    }
                }
            }
            let mut cap = beam;
            if deadline.is_some_and(|d| Instant::now() >= d) {
                if hamiltonian {
                    return Err(SolverError::TimeLimit);
                }
                cap = cap.min(64);
            }
            if next.len() > cap {
                optimal = false;
                let mut order: Vec<usize> = (0..next.len()).collect();
                order.sort_by(|&a, &b| next[a].1.total_cmp(&next[b].1).then(next[a].0.cmp(&next[b].0)));
                order.truncate(cap);
                order.sort_unstable();
                next = order.iter().map(|&i| next[i]).collect();
                back = order.iter().map(|&i| back[i]).collect();
            }
            if next.is_empty() {
                return Err(SolverError::Infeasible);
            }
            states = next;
            trail.push(back);
            steps.push((v, right, down));
        }
    }
    let goal = if hamiltonian { DONE } else { 0 };
    let Some(mut at) = states.iter().position(|&(k, _)| k == goal) else {
        return Err(SolverError::Infeasible);
    };
    let cost = states[at].1;
    let mut edges = Vec::with_capacity(n);
    for (back, &(v, right, down)) in trail.iter().zip(&steps).rev() {
        let (parent, choice) = back[at];
        if choice & 1 != 0 {
            edges.push((v, right.expect("right neighbour")));
        }
        if choice & 2 != 0 {
            edges.push((v, down.expect("down neighbour")));
        }
        at = parent as usize;
    }
    edges.reverse();
    Ok(EdgeSelection { edges, cost, optimal })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_packing() {
        let k = set(set(0, 3, 7), 0, 31);
        assert_eq!(get(k, 3), 7);
        assert_eq!(get(k, 0), 31);
        let n = normalize(k, 4);
        assert_eq!((get(n, 0), get(n, 3)), (3, 4));
        assert_eq!(relabel(n, 4, 4, 1), set(n, 3, 1));
    }

    #[test]
    fn closing_a_loop_is_rejected() {
        let key = normalize(set(set(0, 0, 5), 2, 5), 2);
        let base = set(set(key, 0, 0), 2, 0);
        assert_eq!(connect(base, 3, 3, false, false, 0, 2, None), None);
    }
}
