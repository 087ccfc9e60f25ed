//! Seeded scenario generation: room-and-corridor maps for benchmark suites
//! and the adversarial twin-corridor fixture that strands memoryless
//! guidance in a turn loop.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use objnav_core::mapfile::load_world;
use objnav_core::runner::shortest_length;
use objnav_core::world::{GridWorld, Pose};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// One generated episode scenario.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub id: String,
    pub map_text: String,
    pub target: String,
    pub start: Pose,
    pub seed: u64,
}

impl Scenario {
    pub fn world(&self) -> Result<GridWorld> {
        load_world(&self.map_text).map_err(|e| anyhow::anyhow!("scenario {}: {e}", self.id))
    }
}

#[derive(Clone, Debug)]
pub struct RoomsParams {
    pub width: usize,
    pub height: usize,
    pub rooms: usize,
    pub target: String,
    pub seed: u64,
}

impl Default for RoomsParams {
    fn default() -> Self {
        Self {
            width: 200,
            height: 140,
            rooms: 7,
            target: "couch".into(),
            seed: 0,
        }
    }
}

struct Canvas {
    width: usize,
    height: usize,
    cells: Vec<char>,
}

impl Canvas {
    fn filled(width: usize, height: usize) -> Self {
        Self {
            width,
            height,
            cells: vec!['#'; width * height],
        }
    }

    fn put(&mut self, x: i32, y: i32, ch: char) {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.cells[y as usize * self.width + x as usize] = ch;
        }
    }

    fn get(&self, x: i32, y: i32) -> char {
        if x >= 0 && y >= 0 && (x as usize) < self.width && (y as usize) < self.height {
            self.cells[y as usize * self.width + x as usize]
        } else {
            '#'
        }
    }

    fn carve_rect(&mut self, x0: i32, y0: i32, x1: i32, y1: i32) {
        for y in y0..=y1 {
            for x in x0..=x1 {
                // keep the outer border intact
                if x > 0 && y > 0 && (x as usize) < self.width - 1 && (y as usize) < self.height - 1
                {
                    self.put(x, y, '.');
                }
            }
        }
    }

    fn text(&self, header: &str) -> String {
        let mut out = String::with_capacity(self.cells.len() + self.height + header.len() + 2);
        out.push_str(header);
        out.push('\n');
        for y in 0..self.height {
            for x in 0..self.width {
                out.push(self.cells[y * self.width + x]);
            }
            out.push('\n');
        }
        out
    }
}

#[derive(Clone, Copy, Debug)]
struct Room {
    x: i32,
    y: i32,
    w: i32,
    h: i32,
}

impl Room {
    fn center(&self) -> (i32, i32) {
        (self.x + self.w / 2, self.y + self.h / 2)
    }

    fn overlaps(&self, other: &Room, margin: i32) -> bool {
        self.x - margin < other.x + other.w
            && other.x - margin < self.x + self.w
            && self.y - margin < other.y + other.h
            && other.y - margin < self.y + self.h
    }
}

const CORRIDOR_HALF: i32 = 3; // corridors are 7 cells (0.35 m) wide

fn carve_l_corridor(canvas: &mut Canvas, from: (i32, i32), to: (i32, i32), horizontal_first: bool) {
    let h = CORRIDOR_HALF;
    let (fx, fy) = from;
    let (tx, ty) = to;
    if horizontal_first {
        canvas.carve_rect(fx.min(tx) - h, fy - h, fx.max(tx) + h, fy + h);
        canvas.carve_rect(tx - h, fy.min(ty) - h, tx + h, fy.max(ty) + h);
    } else {
        canvas.carve_rect(fx - h, fy.min(ty) - h, fx + h, fy.max(ty) + h);
        canvas.carve_rect(fx.min(tx) - h, ty - h, fx.max(tx) + h, ty + h);
    }
}

/// BFS over carved cells, 4-connected; distances in cells.
fn bfs_free(canvas: &Canvas, start: (i32, i32)) -> Vec<Option<u32>> {
    let mut dist = vec![None; canvas.width * canvas.height];
    let idx = |x: i32, y: i32| y as usize * canvas.width + x as usize;
    let mut queue = std::collections::VecDeque::new();
    if canvas.get(start.0, start.1) != '#' {
        dist[idx(start.0, start.1)] = Some(0);
        queue.push_back(start);
    }
    while let Some((x, y)) = queue.pop_front() {
        let d = dist[idx(x, y)].unwrap();
        for (dx, dy) in [(1, 0), (-1, 0), (0, 1), (0, -1)] {
            let (nx, ny) = (x + dx, y + dy);
            if canvas.get(nx, ny) != '#' && dist[idx(nx, ny)].is_none() {
                dist[idx(nx, ny)] = Some(d + 1);
                queue.push_back((nx, ny));
            }
        }
    }
    dist
}

/// Generate one seeded room-and-corridor scenario. The target sits in the
/// carved cell farthest (geodesically) from the spawn, so undirected
/// exploration pays full price.
pub fn rooms_scenario(params: &RoomsParams, index: usize) -> Result<Scenario> {
    let base = splitmix64(params.seed ^ splitmix64(index as u64));
    for attempt in 0..40u64 {
        let seed = splitmix64(base.wrapping_add(attempt));
        if let Some(scenario) = try_rooms(params, index, seed)? {
            return Ok(scenario);
        }
    }
    bail!("could not generate a valid rooms scenario for index {index}")
}

fn try_rooms(params: &RoomsParams, index: usize, seed: u64) -> Result<Option<Scenario>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (w, h) = (params.width as i32, params.height as i32);
    let mut canvas = Canvas::filled(params.width, params.height);

    let mut rooms: Vec<Room> = Vec::new();
    for _ in 0..600 {
        if rooms.len() >= params.rooms {
            break;
        }
        let rw = rng.gen_range(16..=34);
        let rh = rng.gen_range(16..=34);
        if rw + 4 >= w || rh + 4 >= h {
            continue;
        }
        let room = Room {
            x: rng.gen_range(2..w - rw - 2),
            y: rng.gen_range(2..h - rh - 2),
            w: rw,
            h: rh,
        };
        if rooms.iter().all(|r| !room.overlaps(r, 4)) {
            rooms.push(room);
        }
    }
    if rooms.len() < 3 {
        return Ok(None);
    }
    for room in &rooms {
        canvas.carve_rect(room.x, room.y, room.x + room.w - 1, room.y + room.h - 1);
    }
    for pair in 0..rooms.len() - 1 {
        let from = rooms[pair].center();
        let to = rooms[pair + 1].center();
        carve_l_corridor(&mut canvas, from, to, rng.gen_bool(0.5));
    }

    let spawn = rooms[0].center();
    let dist = bfs_free(&canvas, spawn);

    // farthest reachable spot where a 2x2 footprint fits
    let mut best: Option<(u32, (i32, i32))> = None;
    for y in 1..h - 2 {
        for x in 1..w - 2 {
            let all_free = (0..2).all(|dy| (0..2).all(|dx| canvas.get(x + dx, y + dy) == '.'));
            if !all_free {
                continue;
            }
            if let Some(d) = dist[y as usize * params.width + x as usize] {
                if best.map_or(true, |(bd, _)| d > bd) {
                    best = Some((d, (x, y)));
                }
            }
        }
    }
    let Some((_, (tx, ty))) = best else {
        return Ok(None);
    };
    for dy in 0..2 {
        for dx in 0..2 {
            canvas.put(tx + dx, ty + dy, 'C');
        }
    }

    // a couple of distractors for scene summaries, away from spawn and target
    let mut header = format!("category C = {}", params.target);
    for (letter, category, room_idx) in [('T', "table", 1usize), ('P', "plant", 2usize)] {
        if params.target == category {
            continue;
        }
        let (cx, cy) = rooms[room_idx].center();
        let spot = (cx + 2, cy + 2);
        if canvas.get(spot.0, spot.1) == '.'
            && (spot.0 - tx).abs() + (spot.1 - ty).abs() > 8
            && (spot.0 - spawn.0).abs() + (spot.1 - spawn.1).abs() > 8
        {
            canvas.put(spot.0, spot.1, letter);
            let _ = write!(header, "\ncategory {letter} = {category}");
        }
    }

    canvas.put(spawn.0, spawn.1, 'S');
    let text = canvas.text(&header);

    // validate end to end: the map parses and the episode is feasible
    let world = match load_world(&text) {
        Ok(world) => world,
        Err(_) => return Ok(None),
    };
    let start = world.spawns()[0];
    if shortest_length(&world, &start, &params.target, 1.0, true).is_err() {
        return Ok(None);
    }
    Ok(Some(Scenario {
        id: format!("rooms-{index:04}"),
        map_text: text,
        target: params.target.clone(),
        start,
        seed,
    }))
}

/// The adversarial twin-corridor fixture: a junction with twin dead-end
/// stubs whose around-the-bend tails keep permanent frontiers on both
/// sides, and the target down the long east corridor. Heading-keyed
/// seesaw guidance ping-pongs between the stub frontiers forever unless
/// the history fallback forces forward progress.
pub fn twin_scenario(seed: u64, index: usize) -> Result<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix64(seed ^ splitmix64(index as u64)));
    let (width, height) = (160usize, 110usize);
    let jx = rng.gen_range(34..=38);
    let jy = rng.gen_range(52..=56);
    let east_len = rng.gen_range(64..=72);
    let n_len = rng.gen_range(19..=20);
    let s_len = n_len;

    let mut canvas = Canvas::filled(width, height);
    // main east-west corridor through the junction into the east room
    canvas.carve_rect(jx - 18, jy - 4, jx + east_len + 3, jy + 4);
    // east room with the couch
    let room_x = jx + east_len;
    canvas.carve_rect(room_x, jy - 8, room_x + 16, jy + 9);
    for dy in 0..2 {
        for dx in 0..2 {
            canvas.put(room_x + 9 + dx, jy + dy, 'C');
        }
    }
    // north stub (doorway west of the junction center), tail bending west
    canvas.carve_rect(jx - 8, jy + 5, jx - 2, jy + 5 + n_len);
    canvas.carve_rect(jx - 22, jy + n_len - 1, jx - 9, jy + 5 + n_len);
    // south stub (doorway east of the junction center), tail bending east
    canvas.carve_rect(jx + 2, jy - 5 - s_len, jx + 8, jy - 5);
    canvas.carve_rect(jx + 9, jy - 5 - s_len, jx + 22, jy - s_len + 1);

    canvas.put(jx, jy, 'S');
    let text = canvas.text("category C = couch");
    let world = load_world(&text).context("twin fixture must parse")?;
    let start = world.spawns()[0];
    shortest_length(&world, &start, "couch", 1.0, true)
        .map_err(|e| anyhow::anyhow!("twin fixture must be solvable: {e}"))?;
    Ok(Scenario {
        id: format!("twin-{index:04}"),
        map_text: text,
        target: "couch".into(),
        start,
        seed,
    })
}

/// Write a scenario set: `maps/<id>.map` plus a `manifest.jsonl` with one
/// episode entry per line.
pub fn write_scenario_set(dir: &Path, scenarios: &[Scenario]) -> Result<std::path::PathBuf> {
    let maps_dir = dir.join("maps");
    fs::create_dir_all(&maps_dir).context("creating maps dir")?;
    let mut manifest = String::new();
    for s in scenarios {
        let map_rel = format!("maps/{}.map", s.id);
        fs::write(dir.join(&map_rel), &s.map_text)?;
        let line = serde_json::json!({
            "id": s.id,
            "map": map_rel,
            "target": s.target,
            "seed": s.seed,
            "start": { "x": s.start.x, "y": s.start.y, "heading_deg": s.start.heading_deg },
        });
        manifest.push_str(&line.to_string());
        manifest.push('\n');
    }
    let path = dir.join("manifest.jsonl");
    fs::write(&path, manifest)?;
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use objnav_core::grid::Cell;

    #[test]
    fn rooms_scenarios_parse_and_are_feasible() {
        let params = RoomsParams {
            seed: 7,
            ..RoomsParams::default()
        };
        for index in 0..3 {
            let s = rooms_scenario(&params, index).unwrap();
            let world = s.world().unwrap();
            assert!(world.has_category("couch"));
            assert!(!world.spawns().is_empty());
            assert!(shortest_length(&world, &s.start, "couch", 1.0, true).is_ok());
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let params = RoomsParams {
            seed: 11,
            ..RoomsParams::default()
        };
        let a = rooms_scenario(&params, 2).unwrap();
        let b = rooms_scenario(&params, 2).unwrap();
        assert_eq!(a.map_text, b.map_text);
        assert_eq!(a.seed, b.seed);
        let c = rooms_scenario(
            &RoomsParams {
                seed: 12,
                ..RoomsParams::default()
            },
            2,
        )
        .unwrap();
        assert_ne!(a.map_text, c.map_text);
    }

    #[test]
    fn twin_fixture_has_junction_geometry() {
        for index in 0..5 {
            let s = twin_scenario(99, index).unwrap();
            let world = s.world().unwrap();
            // spawn heading east, couch reachable, both stubs present
            assert_eq!(s.start.heading_deg, 0.0);
            let start_cell = s.start.cell(world.resolution());
            assert!(!world.is_blocked(start_cell));
            // cells north and south of the junction within a stub
            assert!(!world.is_blocked(Cell::new(start_cell.x - 5, start_cell.y + 8)));
            assert!(!world.is_blocked(Cell::new(start_cell.x + 5, start_cell.y - 8)));
        }
    }
}
