//! Portable graymap (binary PGM) snapshot encoding.

use alloc::format;
use alloc::vec::Vec;

use crate::grid::Cell;
use crate::mapper::{Belief, ObstacleMap};
use crate::math;
use crate::valuemap::ValueMap;

fn with_header(width: usize, height: usize) -> Vec<u8> {
    let mut out = Vec::with_capacity(width * height + 32);
    out.extend_from_slice(format!("P5\n{width} {height}\n255\n").as_bytes());
    out
}

/// Belief snapshot: 0 occupied, 128 unknown, 255 free. Row 0 first.
pub fn obstacle_map_pgm(map: &ObstacleMap) -> Vec<u8> {
    let mut out = with_header(map.width(), map.height());
    for (_, b) in map.iter_cells() {
        out.push(match b {
            Belief::Occupied => 0,
            Belief::Unknown => 128,
            Belief::Free => 255,
        });
    }
    out
}

/// Value layer scaled to 0-255. Row 0 first.
pub fn value_layer_pgm(vm: &ValueMap) -> Vec<u8> {
    let mut out = with_header(vm.width(), vm.height());
    for y in 0..vm.height() as i32 {
        for x in 0..vm.width() as i32 {
            let v = vm.value(Cell::new(x, y));
            out.push(math::round(v.clamp(0.0, 1.0) * 255.0) as u8);
        }
    }
    out
}

/// Confidence layer scaled to 0-255. Row 0 first.
pub fn confidence_layer_pgm(vm: &ValueMap) -> Vec<u8> {
    let mut out = with_header(vm.width(), vm.height());
    for y in 0..vm.height() as i32 {
        for x in 0..vm.width() as i32 {
            let c = vm.confidence(Cell::new(x, y));
            out.push(math::round(c.clamp(0.0, 1.0) * 255.0) as u8);
        }
    }
    out
}
