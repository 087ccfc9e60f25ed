//! Text map format.
//!
//! A map document is an optional header followed by the grid, separated by a
//! blank line. Header lines bind uppercase letters to object categories
//! (`category C = couch`) and may override the cell size
//! (`resolution = 0.05`). Grid symbols: `#` obstacle, `.` free, `S` candidate
//! spawn, and bound uppercase letters for object footprint cells. Adjacent
//! same-letter cells (4-connected) form one object instance.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::grid::{Cell, Grid, NEIGHBORS_4};
use crate::world::{CellKind, GridWorld, ObjectInstance, Pose, WorldError};

pub const DEFAULT_RESOLUTION_M: f64 = 0.05;

#[derive(Debug, thiserror::Error)]
pub enum MapError {
    #[error("line {line}: malformed header line")]
    BadHeader { line: usize },
    #[error("line {line}: category letter '{letter}' bound twice")]
    DuplicateBinding { line: usize, letter: char },
    #[error("line {line}: ragged row ({got} cells, expected {expected})")]
    RaggedRow {
        line: usize,
        got: usize,
        expected: usize,
    },
    #[error("line {line}, column {col}: unknown symbol '{symbol}'")]
    UnknownSymbol {
        line: usize,
        col: usize,
        symbol: char,
    },
    #[error("line {line}, column {col}: letter '{letter}' has no category binding")]
    UnboundLetter { line: usize, col: usize, letter: char },
    #[error("document contains no grid rows")]
    NoGrid,
    #[error(transparent)]
    Invalid(#[from] WorldError),
}

/// Parse and validate a scenario document.
pub fn load_world(text: &str) -> Result<GridWorld, MapError> {
    let mut bindings: Vec<(char, String)> = Vec::new();
    let mut resolution = DEFAULT_RESOLUTION_M;
    let mut rows: Vec<(usize, &str)> = Vec::new();
    let mut in_grid = false;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim_end();
        if !in_grid {
            if line.trim().is_empty() {
                if !rows.is_empty() {
                    in_grid = true;
                }
                continue;
            }
            if line.contains('=') {
                if !rows.is_empty() {
                    return Err(MapError::BadHeader { line: lineno });
                }
                parse_header_line(line, lineno, &mut bindings, &mut resolution)?;
                continue;
            }
            rows.push((lineno, line));
        } else if line.trim().is_empty() {
            break;
        } else {
            rows.push((lineno, line));
        }
    }

    if rows.is_empty() {
        return Err(MapError::NoGrid);
    }
    let width = rows[0].1.chars().count();
    let height = rows.len();
    for &(lineno, row) in &rows {
        let got = row.chars().count();
        if got != width {
            return Err(MapError::RaggedRow {
                line: lineno,
                got,
                expected: width,
            });
        }
    }

    let mut cells = Grid::new(width, height, CellKind::Free);
    let mut spawns = Vec::new();
    let mut letter_cells: Vec<(char, Cell)> = Vec::new();
    for (y, &(lineno, row)) in rows.iter().enumerate() {
        for (x, symbol) in row.chars().enumerate() {
            let cell = Cell::new(x as i32, y as i32);
            match symbol {
                '.' => {}
                '#' => cells.set(cell, CellKind::Obstacle),
                'S' => {
                    let (cx, cy) = cell.center(resolution);
                    spawns.push(Pose::new(cx, cy, 0.0));
                }
                'A'..='Z' => {
                    if !bindings.iter().any(|(l, _)| *l == symbol) {
                        return Err(MapError::UnboundLetter {
                            line: lineno,
                            col: x + 1,
                            letter: symbol,
                        });
                    }
                    letter_cells.push((symbol, cell));
                }
                _ => {
                    return Err(MapError::UnknownSymbol {
                        line: lineno,
                        col: x + 1,
                        symbol,
                    })
                }
            }
        }
    }

    let mut objects = Vec::new();
    for (letter, category) in &bindings {
        let mut mine: Vec<Cell> = letter_cells
            .iter()
            .filter(|(l, _)| l == letter)
            .map(|(_, c)| *c)
            .collect();
        mine.sort_by_key(|c| c.row_major());
        let mut used = alloc::vec![false; mine.len()];
        for seed in 0..mine.len() {
            if used[seed] {
                continue;
            }
            // flood one 4-connected component into one instance
            let mut footprint = Vec::new();
            let mut stack = alloc::vec![seed];
            used[seed] = true;
            while let Some(i) = stack.pop() {
                footprint.push(mine[i]);
                for (dx, dy) in NEIGHBORS_4 {
                    let n = mine[i].offset(dx, dy);
                    for (j, c) in mine.iter().enumerate() {
                        if !used[j] && *c == n {
                            used[j] = true;
                            stack.push(j);
                        }
                    }
                }
            }
            footprint.sort_by_key(|c| c.row_major());
            objects.push(ObjectInstance {
                category: category.clone(),
                footprint,
            });
        }
    }

    Ok(GridWorld::from_parts(cells, resolution, objects, spawns)?)
}

fn parse_header_line(
    line: &str,
    lineno: usize,
    bindings: &mut Vec<(char, String)>,
    resolution: &mut f64,
) -> Result<(), MapError> {
    let (key, value) = line
        .split_once('=')
        .ok_or(MapError::BadHeader { line: lineno })?;
    let key = key.trim();
    let value = value.trim();
    if let Some(letter_part) = key.strip_prefix("category ") {
        let letter_part = letter_part.trim();
        let mut chars = letter_part.chars();
        let letter = chars.next().ok_or(MapError::BadHeader { line: lineno })?;
        if chars.next().is_some() || !letter.is_ascii_uppercase() || value.is_empty() {
            return Err(MapError::BadHeader { line: lineno });
        }
        if bindings.iter().any(|(l, _)| *l == letter) {
            return Err(MapError::DuplicateBinding {
                line: lineno,
                letter,
            });
        }
        bindings.push((letter, value.to_string()));
        Ok(())
    } else if key == "resolution" {
        let parsed: f64 = value
            .parse()
            .map_err(|_| MapError::BadHeader { line: lineno })?;
        if parsed.is_nan() || parsed <= 0.0 {
            return Err(MapError::BadHeader { line: lineno });
        }
        *resolution = parsed;
        Ok(())
    } else {
        Err(MapError::BadHeader { line: lineno })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_valid_map_with_one_object() {
        let world = load_world("category C = chair\n\n...\n.C.\n...\n").unwrap();
        assert_eq!((world.width(), world.height()), (3, 3));
        assert_eq!(world.objects().len(), 1);
        assert_eq!(world.objects()[0].category, "chair");
        assert_eq!(world.objects()[0].footprint, alloc::vec![Cell::new(1, 1)]);
        assert!(!world.is_obstacle(Cell::new(0, 0)));
    }

    #[test]
    fn hash_rows_become_obstacles() {
        let world = load_world("...\n###\n...\n").unwrap();
        for x in 0..3 {
            assert!(world.is_obstacle(Cell::new(x, 1)));
            assert!(!world.is_obstacle(Cell::new(x, 0)));
        }
    }

    #[test]
    fn object_on_obstacle_rejected() {
        // the grammar cannot stack a letter on '#', so the invariant is
        // exercised through the construction path the parser relies on
        let mut cells = Grid::new(3, 3, CellKind::Free);
        cells.set(Cell::new(1, 1), CellKind::Obstacle);
        let err = GridWorld::from_parts(
            cells,
            0.05,
            alloc::vec![ObjectInstance {
                category: "chair".into(),
                footprint: alloc::vec![Cell::new(1, 1)],
            }],
            Vec::new(),
        )
        .unwrap_err();
        assert!(matches!(err, WorldError::ObjectOnObstacle { .. }));
        let mapped = MapError::from(err);
        assert!(mapped.to_string().contains("obstacle"));
    }

    #[test]
    fn ragged_rows_rejected_with_line() {
        let err = load_world("....\n...\n....\n").unwrap_err();
        match err {
            MapError::RaggedRow { line, got, expected } => {
                assert_eq!((line, got, expected), (2, 3, 4));
            }
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn unknown_symbol_names_line_and_column() {
        let err = load_world("...\n.x.\n...\n").unwrap_err();
        match err {
            MapError::UnknownSymbol { line, col, symbol } => {
                assert_eq!((line, col, symbol), (2, 2, 'x'));
            }
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn unbound_letter_rejected() {
        let err = load_world("...\n.C.\n...\n").unwrap_err();
        assert!(matches!(err, MapError::UnboundLetter { letter: 'C', .. }));
    }

    #[test]
    fn same_letter_components_become_separate_instances() {
        let text = "category C = chair\n\nCC....\n......\n....CC\n";
        let world = load_world(text).unwrap();
        assert_eq!(world.objects().len(), 2);
        assert_eq!(world.objects()[0].footprint.len(), 2);
        assert_eq!(world.objects()[1].footprint.len(), 2);
    }

    #[test]
    fn spawns_are_free_cells_with_zero_heading() {
        let world = load_world("S..\n...\n..S\n").unwrap();
        assert_eq!(world.spawns().len(), 2);
        assert_eq!(world.spawns()[0], Pose::new(0.025, 0.025, 0.0));
    }

    #[test]
    fn resolution_header_overrides_default() {
        let world = load_world("resolution = 0.1\n\n...\n...\n...\n").unwrap();
        assert_eq!(world.resolution(), 0.1);
    }

    #[test]
    fn too_small_grid_rejected() {
        assert!(matches!(
            load_world("..\n..\n"),
            Err(MapError::Invalid(WorldError::TooSmall { .. }))
        ));
    }

    #[test]
    fn duplicate_binding_rejected() {
        let err = load_world("category C = chair\ncategory C = couch\n\n...\n...\n...\n");
        assert!(matches!(err, Err(MapError::DuplicateBinding { letter: 'C', .. })));
    }
}
