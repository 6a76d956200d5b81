//! ASCII mazes, and solving them by verification.
//!
//! A maze is drawn one row per line: a space is walkable, `s` is the start
//! cell, `t` a target cell and any other character is a wall. Lines may end
//! in LF or CRLF; short lines are padded on the right with walls. Tabs are
//! rejected, since their width is ambiguous.
//!
//! The generated b-program moves a walker through the maze: every walkable
//! cell waits for the walker to enter a neighbouring cell and then requests
//! its own `Enter(c,r)` event. Solving adds the requirement that
//! `TARGET_FOUND` never happens, so a counterexample from the verifier is a
//! path to a target.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::bthread::{BProgram, BThreadDef};
use crate::event::{Event, EventSet};
use crate::sync::{Resume, StepResult, SyncStatement};
use crate::value::Value;
use crate::verifier::{verify, Verdict, VerificationResult, VerificationSettings, VerifyError};

pub type Coord = (usize, usize);

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MazeError {
    #[error("maze text is empty")]
    Empty,
    #[error("line {line}, column {col}: tab characters are not allowed")]
    Tab { line: usize, col: usize },
    #[error("maze has no start cell `s`")]
    NoStart,
    #[error("line {line}, column {col}: second start cell `s`")]
    MultipleStart { line: usize, col: usize },
    #[error("maze has no target cell `t`")]
    NoTarget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cell {
    Wall,
    Space,
    Start,
    Target,
}

impl Cell {
    pub fn is_walkable(self) -> bool {
        self != Cell::Wall
    }

    fn symbol(self) -> char {
        match self {
            Cell::Wall => '#',
            Cell::Space => ' ',
            Cell::Start => 's',
            Cell::Target => 't',
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MazeModel {
    width: usize,
    height: usize,
    cells: Vec<Cell>,
    start: Coord,
}

impl MazeModel {
    /// Builds a maze from rows of cells, padding short rows with walls.
    pub fn from_rows(rows: Vec<Vec<Cell>>) -> Result<MazeModel, MazeError> {
        let height = rows.len();
        let width = rows.iter().map(Vec::len).max().unwrap_or(0);
        if width == 0 {
            return Err(MazeError::Empty);
        }
        let mut cells = Vec::with_capacity(width * height);
        let mut start = None;
        for (r, row) in rows.iter().enumerate() {
            for c in 0..width {
                let cell = row.get(c).copied().unwrap_or(Cell::Wall);
                if cell == Cell::Start {
                    if start.is_some() {
                        return Err(MazeError::MultipleStart { line: r + 1, col: c + 1 });
                    }
                    start = Some((c, r));
                }
                cells.push(cell);
            }
        }
        let start = start.ok_or(MazeError::NoStart)?;
        if !cells.contains(&Cell::Target) {
            return Err(MazeError::NoTarget);
        }
        Ok(MazeModel {
            width,
            height,
            cells,
            start,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn start(&self) -> Coord {
        self.start
    }

    /// The cell at `(col, row)`; anything outside the grid is a wall.
    pub fn cell(&self, (col, row): Coord) -> Cell {
        if col < self.width && row < self.height {
            self.cells[row * self.width + col]
        } else {
            Cell::Wall
        }
    }

    /// All coordinates, row by row.
    pub fn coords(&self) -> impl Iterator<Item = Coord> + '_ {
        (0..self.height).flat_map(move |r| (0..self.width).map(move |c| (c, r)))
    }

    pub fn walkable(&self) -> impl Iterator<Item = Coord> + '_ {
        self.coords().filter(|c| self.cell(*c).is_walkable())
    }

    pub fn targets(&self) -> Vec<Coord> {
        self.coords().filter(|c| self.cell(*c) == Cell::Target).collect()
    }

    /// Walkable 4-neighbours of `at`.
    pub fn neighbours(&self, (col, row): Coord) -> Vec<Coord> {
        let mut out = Vec::with_capacity(4);
        if row > 0 {
            out.push((col, row - 1));
        }
        if col > 0 {
            out.push((col - 1, row));
        }
        out.push((col + 1, row));
        out.push((col, row + 1));
        out.retain(|c| self.cell(*c).is_walkable());
        out
    }

    /// Draws the maze with `.` marking the interior of `path`.
    pub fn render_path(&self, path: &MazePath) -> String {
        let on_path: BTreeSet<Coord> = path.coords().iter().copied().collect();
        let mut out = String::new();
        for r in 0..self.height {
            for c in 0..self.width {
                let cell = self.cell((c, r));
                out.push(if cell == Cell::Space && on_path.contains(&(c, r)) {
                    '.'
                } else {
                    cell.symbol()
                });
            }
            out.push('\n');
        }
        out
    }
}

impl fmt::Display for MazeModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for r in 0..self.height {
            let line: String = (0..self.width).map(|c| self.cell((c, r)).symbol()).collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

pub fn parse_maze(text: &str) -> Result<MazeModel, MazeError> {
    if text.is_empty() {
        return Err(MazeError::Empty);
    }
    let mut lines: Vec<&str> = text.split('\n').collect();
    if lines.last() == Some(&"") {
        lines.pop();
    }
    let mut rows = Vec::with_capacity(lines.len());
    for (r, line) in lines.iter().enumerate() {
        let line = line.strip_suffix('\r').unwrap_or(line);
        let mut row = Vec::new();
        for (c, ch) in line.chars().enumerate() {
            row.push(match ch {
                '\t' => return Err(MazeError::Tab { line: r + 1, col: c + 1 }),
                ' ' => Cell::Space,
                's' => Cell::Start,
                't' => Cell::Target,
                _ => Cell::Wall,
            });
        }
        rows.push(row);
    }
    MazeModel::from_rows(rows)
}

pub fn enter_event((col, row): Coord) -> Event {
    Event::with_data(
        format!("Enter({col},{row})"),
        Value::map([("col", Value::from(col)), ("row", Value::from(row))]),
    )
}

pub fn any_entrance() -> EventSet {
    EventSet::NamePrefix("Enter".into())
}

pub fn target_found() -> Event {
    Event::new("TARGET_FOUND")
}

fn coord_of(e: &Event) -> Option<Coord> {
    let data = e.data()?;
    let col = data.get("col")?.as_int()?;
    let row = data.get("row")?.as_int()?;
    Some((usize::try_from(col).ok()?, usize::try_from(row).ok()?))
}

fn cell_bthread(maze: &MazeModel, at: Coord) -> BThreadDef {
    let adjacent = EventSet::of(maze.neighbours(at).into_iter().map(enter_event));
    BThreadDef::looping(
        format!("cell({},{})", at.0, at.1),
        vec![
            SyncStatement::new().wait_for(adjacent),
            SyncStatement::new().request(enter_event(at)).wait_for(any_entrance()),
        ],
    )
}

fn target_bthread(at: Coord) -> BThreadDef {
    BThreadDef::sequence(
        format!("target({},{})", at.0, at.1),
        vec![
            SyncStatement::new().wait_for(enter_event(at)),
            SyncStatement::new()
                .request(target_found())
                .block(EventSet::AllExcept(vec![target_found()])),
        ],
    )
}

/// The maze as a b-program: a walker doing a random walk from the start.
pub fn build_maze_bprogram(maze: &MazeModel) -> BProgram {
    let mut p = BProgram::new("maze");
    for at in maze.walkable() {
        p = p.with(cell_bthread(maze, at));
    }
    for at in maze.targets() {
        p = p.with(target_bthread(at));
    }
    p.with(BThreadDef::sequence(
        "start",
        vec![SyncStatement::new().request(enter_event(maze.start()))],
    ))
}

/// Fails as soon as a target is reached.
pub fn target_never_found() -> BThreadDef {
    BThreadDef::assertion("TargetNeverFound", EventSet::Exact(target_found()), "target found")
}

/// Simplifier: blocks every cell entered so far, so walks never revisit a
/// cell. The state is the sorted set of visited cells.
pub fn only_once() -> BThreadDef {
    let statement = |seen: &BTreeSet<Coord>| {
        SyncStatement::new()
            .wait_for(any_entrance())
            .block(EventSet::of(seen.iter().map(|c| enter_event(*c))))
    };
    BThreadDef::new("onlyOnce", Value::List(vec![]), move |state, resume| {
        let mut seen: BTreeSet<Coord> = state
            .as_list()
            .unwrap_or_default()
            .iter()
            .filter_map(|v| {
                let pair = v.as_list()?;
                Some((pair.first()?.as_int()? as usize, pair.get(1)?.as_int()? as usize))
            })
            .collect();
        if let Resume::Event(e) = resume {
            if let Some(at) = coord_of(e) {
                seen.insert(at);
            }
        }
        let next = Value::List(
            seen.iter()
                .map(|(c, r)| Value::from(vec![*c, *r]))
                .collect(),
        );
        Ok((next, StepResult::Sync(statement(&seen))))
    })
}

/// The maze program plus the requirement, and optionally the simplifier.
pub fn maze_verification_program(maze: &MazeModel, simplifier: bool) -> BProgram {
    let p = build_maze_bprogram(maze).with(target_never_found());
    if simplifier {
        p.with(only_once())
    } else {
        p
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("path is empty")]
    Empty,
    #[error("path starts at {0:?}, not at the start cell")]
    WrongStart(Coord),
    #[error("path ends at {0:?}, which is not a target")]
    NotTarget(Coord),
    #[error("path crosses the wall at {0:?}")]
    Wall(Coord),
    #[error("{0:?} and {1:?} are not adjacent")]
    NotAdjacent(Coord, Coord),
    #[error("{0:?} is visited twice")]
    Repeated(Coord),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MazePath(Vec<Coord>);

impl MazePath {
    pub fn new(coords: Vec<Coord>) -> Self {
        MazePath(coords)
    }

    /// Collects the cells entered along `trace`, in order.
    pub fn from_trace(trace: &[Event]) -> Self {
        MazePath(
            trace
                .iter()
                .filter(|e| any_entrance().contains(e))
                .filter_map(coord_of)
                .collect(),
        )
    }

    pub fn coords(&self) -> &[Coord] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Checks the path walks from the start to a target through distinct,
    /// adjacent, walkable cells.
    pub fn validate(&self, maze: &MazeModel) -> Result<(), PathError> {
        let (first, last) = match (self.0.first(), self.0.last()) {
            (Some(f), Some(l)) => (*f, *l),
            _ => return Err(PathError::Empty),
        };
        if first != maze.start() {
            return Err(PathError::WrongStart(first));
        }
        if maze.cell(last) != Cell::Target {
            return Err(PathError::NotTarget(last));
        }
        let mut seen = BTreeSet::new();
        for (i, at) in self.0.iter().enumerate() {
            if !maze.cell(*at).is_walkable() {
                return Err(PathError::Wall(*at));
            }
            if !seen.insert(*at) {
                return Err(PathError::Repeated(*at));
            }
            if i > 0 {
                let prev = self.0[i - 1];
                if prev.0.abs_diff(at.0) + prev.1.abs_diff(at.1) != 1 {
                    return Err(PathError::NotAdjacent(prev, *at));
                }
            }
        }
        Ok(())
    }
}

impl fmt::Display for MazePath {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|(c, r)| format!("({c},{r})")).collect();
        f.write_str(&parts.join(" "))
    }
}

/// Verifies the maze program with the simplifier and extracts the path from
/// the counterexample, if any. Dead ends are expected, so deadlock and hot
/// cycle detection are turned off.
pub fn verify_maze(
    maze: &MazeModel,
    settings: &VerificationSettings,
) -> Result<(VerificationResult, Option<MazePath>), VerifyError> {
    let settings = settings.clone().deadlocks(false).hot_cycles(false);
    let result = verify(&maze_verification_program(maze, true), &settings)?;
    let path = match &result.verdict {
        Verdict::AssertionViolation { trace, .. } => Some(MazePath::from_trace(trace)),
        _ => None,
    };
    Ok((result, path))
}

/// Finds a path from the start to a target, or `None` if there is none.
pub fn solve_maze(maze: &MazeModel, settings: &VerificationSettings) -> Result<Option<MazePath>, VerifyError> {
    verify_maze(maze, settings).map(|(_, path)| path)
}
