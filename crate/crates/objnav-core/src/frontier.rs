//! Frontier detection: boundaries between explored free space and unknown
//! space, reduced to candidate waypoints at their midpoints.

use alloc::vec::Vec;

use crate::grid::{Cell, Grid, NEIGHBORS_4, NEIGHBORS_8};
use crate::mapper::{Belief, ObstacleMap};

/// One maximal 8-connected chain of frontier cells.
#[derive(Clone, Debug, PartialEq)]
pub struct Frontier {
    /// Chain-ordered cells (endpoint to endpoint for simple chains).
    pub cells: Vec<Cell>,
    /// The median-index cell of the chain.
    pub midpoint: Cell,
}

impl Frontier {
    pub fn size(&self) -> usize {
        self.cells.len()
    }
}

/// A cell is a frontier cell when it is known free and 4-adjacent to at least
/// one unknown cell.
pub fn is_frontier_cell(map: &ObstacleMap, c: Cell) -> bool {
    map.belief(c) == Belief::Free
        && NEIGHBORS_4
            .iter()
            .any(|&(dx, dy)| map.in_bounds(c.offset(dx, dy)) && map.belief(c.offset(dx, dy)) == Belief::Unknown)
}

/// The boundary midpoint of a chain: the median-index cell, taking the lower
/// median for even-length chains.
pub fn frontier_waypoint(f: &Frontier) -> Cell {
    f.cells[(f.cells.len() - 1) / 2]
}

/// All maximal 8-connected frontier components with at least `min_size`
/// cells, ordered row-major by midpoint.
pub fn detect_frontiers(map: &ObstacleMap, min_size: usize) -> Vec<Frontier> {
    let (w, h) = (map.width(), map.height());
    let mut mask = Grid::new(w, h, false);
    for (c, _) in map.iter_cells() {
        if is_frontier_cell(map, c) {
            mask.set(c, true);
        }
    }

    let mut visited = Grid::new(w, h, false);
    let mut frontiers = Vec::new();
    for y in 0..h as i32 {
        for x in 0..w as i32 {
            let seed = Cell::new(x, y);
            if !*mask.get(seed).unwrap() || *visited.get(seed).unwrap() {
                continue;
            }
            let component = collect_component(&mask, &mut visited, seed);
            if component.len() < min_size {
                continue;
            }
            let cells = order_as_chain(&component);
            let midpoint = cells[(cells.len() - 1) / 2];
            frontiers.push(Frontier { cells, midpoint });
        }
    }
    frontiers.sort_by_key(|f| f.midpoint.row_major());
    frontiers
}

fn collect_component(mask: &Grid<bool>, visited: &mut Grid<bool>, seed: Cell) -> Vec<Cell> {
    let mut out = Vec::new();
    let mut stack = alloc::vec![seed];
    visited.set(seed, true);
    while let Some(c) = stack.pop() {
        out.push(c);
        for (dx, dy) in NEIGHBORS_8 {
            let n = c.offset(dx, dy);
            if mask.get(n) == Some(&true) && visited.get(n) == Some(&false) {
                visited.set(n, true);
                stack.push(n);
            }
        }
    }
    out.sort_by_key(|c| c.row_major());
    out
}

/// Deterministic chain ordering: depth-first from the cell with the fewest
/// in-component neighbors (row-major tie-break). For the common thin-chain
/// case this traces the boundary endpoint to endpoint.
fn order_as_chain(component: &[Cell]) -> Vec<Cell> {
    let degree = |c: Cell| {
        NEIGHBORS_8
            .iter()
            .filter(|&&(dx, dy)| component.contains(&c.offset(dx, dy)))
            .count()
    };
    let start = *component
        .iter()
        .min_by_key(|c| (degree(**c), c.row_major()))
        .unwrap();

    let mut chain = Vec::with_capacity(component.len());
    let mut used = alloc::vec![false; component.len()];
    let index_of = |c: Cell| component.iter().position(|&x| x == c).unwrap();
    let mut stack = alloc::vec![start];
    used[index_of(start)] = true;
    while let Some(c) = stack.pop() {
        chain.push(c);
        // push in reverse so earlier offsets are visited first
        for (dx, dy) in NEIGHBORS_8.iter().rev() {
            let n = c.offset(*dx, *dy);
            if let Some(i) = component.iter().position(|&x| x == n) {
                if !used[i] {
                    used[i] = true;
                    stack.push(n);
                }
            }
        }
    }
    chain
}
