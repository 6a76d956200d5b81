//! Independent oracles shared by the integration and acceptance tests. None
//! of these go through the engine: they model each case study directly.

#![allow(dead_code)]

use std::collections::{HashSet, VecDeque};

use bthreads::maze::{Cell, Coord, MazeModel};
use bthreads::prelude::*;
use bthreads::programs::tictactoe::{parse_move, Mark};
use rand::Rng;

pub fn names(trace: &[Event]) -> Vec<String> {
    trace.iter().map(|e| e.name().to_owned()).collect()
}

// ---------------------------------------------------------------- philosophers

/// Reachable configurations of `n` philosophers, each at one of four
/// program counters: 0 wants the right stick, 1 holds it and wants the left,
/// 2 eats, 3 has put the left stick back. Stick `i` is philosopher `i`'s
/// right and philosopher `i+1`'s left.
pub fn philosopher_states(n: usize) -> usize {
    let right_taken = |pcs: &[u8], stick: usize| pcs[stick] >= 1;
    let left_taken = |pcs: &[u8], stick: usize| pcs[(stick + 1) % n] == 2;
    let mut seen = HashSet::new();
    let mut queue = VecDeque::new();
    let root = vec![0u8; n];
    seen.insert(root.clone());
    queue.push_back(root);
    while let Some(pcs) = queue.pop_front() {
        for p in 0..n {
            let left_stick = (p + n - 1) % n;
            let enabled = match pcs[p] {
                0 => !right_taken(&pcs, p) && !left_taken(&pcs, p),
                1 => !right_taken(&pcs, left_stick) && !left_taken(&pcs, left_stick),
                _ => true,
            };
            if enabled {
                let mut next = pcs.clone();
                next[p] = (pcs[p] + 1) % 4;
                if seen.insert(next.clone()) {
                    queue.push_back(next);
                }
            }
        }
    }
    seen.len()
}

/// Checks the shape of the expected philosophers deadlock: every
/// philosopher picks their right stick exactly once, and nothing else.
pub fn is_all_right_picks(trace: &[Event], n: usize) -> bool {
    let mut got = names(trace);
    got.sort();
    let mut want: Vec<String> = (1..=n).map(|i| format!("Pick{i}R")).collect();
    want.sort();
    got == want
}

// ---------------------------------------------------------------- mazes

/// Random maze of `w`×`h`; each cell is a wall with probability `density`,
/// then start and target are dropped on distinct cells.
pub fn random_maze(rng: &mut impl Rng, w: usize, h: usize, density: f64) -> MazeModel {
    let mut rows: Vec<Vec<Cell>> = (0..h)
        .map(|_| {
            (0..w)
                .map(|_| if rng.gen_bool(density) { Cell::Wall } else { Cell::Space })
                .collect()
        })
        .collect();
    let s = (rng.gen_range(0..w), rng.gen_range(0..h));
    let mut t = s;
    while t == s {
        t = (rng.gen_range(0..w), rng.gen_range(0..h));
    }
    rows[s.1][s.0] = Cell::Start;
    rows[t.1][t.0] = Cell::Target;
    MazeModel::from_rows(rows).expect("generated maze is valid")
}

/// Shortest start-to-target distance in steps, by grid BFS.
pub fn maze_distance(maze: &MazeModel) -> Option<usize> {
    let mut dist = std::collections::HashMap::new();
    let mut queue = VecDeque::new();
    dist.insert(maze.start(), 0usize);
    queue.push_back(maze.start());
    while let Some(at) = queue.pop_front() {
        let d = dist[&at];
        if maze.cell(at) == Cell::Target {
            return Some(d);
        }
        let (c, r) = at;
        let mut around: Vec<Coord> = vec![(c + 1, r), (c, r + 1)];
        if c > 0 {
            around.push((c - 1, r));
        }
        if r > 0 {
            around.push((c, r - 1));
        }
        for n in around {
            if maze.cell(n) != Cell::Wall && !dist.contains_key(&n) {
                dist.insert(n, d + 1);
                queue.push_back(n);
            }
        }
    }
    None
}

// ---------------------------------------------------------------- tic-tac-toe

pub type Board = [Option<Mark>; 9];

const LINES: [[usize; 3]; 8] = [
    [0, 1, 2],
    [3, 4, 5],
    [6, 7, 8],
    [0, 3, 6],
    [1, 4, 7],
    [2, 5, 8],
    [0, 4, 8],
    [2, 4, 6],
];

pub fn board_of(trace: &[Event]) -> Board {
    let mut b = [None; 9];
    for e in trace {
        if let Some((m, (c, r))) = parse_move(e) {
            b[r * 3 + c] = Some(m);
        }
    }
    b
}

pub fn winner(b: &Board) -> Option<Mark> {
    LINES
        .iter()
        .find(|l| b[l[0]].is_some() && b[l[0]] == b[l[1]] && b[l[1]] == b[l[2]])
        .and_then(|l| b[l[0]])
}

pub fn empty_squares(b: &Board) -> Vec<(usize, usize)> {
    (0..9).filter(|i| b[*i].is_none()).map(|i| (i % 3, i / 3)).collect()
}

pub fn to_move(b: &Board) -> Mark {
    let xs = b.iter().filter(|m| **m == Some(Mark::X)).count();
    let os = b.iter().filter(|m| **m == Some(Mark::O)).count();
    if xs == os {
        Mark::X
    } else {
        Mark::O
    }
}

/// Game value under perfect play from both sides: +1 X wins, 0 draw, -1 O
/// wins.
pub fn minimax(b: &Board) -> i8 {
    match winner(b) {
        Some(Mark::X) => return 1,
        Some(Mark::O) => return -1,
        None => {}
    }
    let free = empty_squares(b);
    if free.is_empty() {
        return 0;
    }
    let mover = to_move(b);
    let values = free.iter().map(|(c, r)| {
        let mut next = *b;
        next[r * 3 + c] = Some(mover);
        minimax(&next)
    });
    match mover {
        Mark::X => values.max().unwrap(),
        Mark::O => values.min().unwrap(),
    }
}

/// Whether X has some winning game against an O that may play anywhere.
pub fn x_can_win_somehow(b: &Board) -> bool {
    match winner(b) {
        Some(Mark::X) => return true,
        Some(Mark::O) => return false,
        None => {}
    }
    let mover = to_move(b);
    empty_squares(b).iter().any(|(c, r)| {
        let mut next = *b;
        next[r * 3 + c] = Some(mover);
        x_can_win_somehow(&next)
    })
}

/// Every state reachable from the root, with the trace that first reached
/// it, exploring successors in breadth-first order.
pub fn reachable_states(program: &BProgram, strategy: &dyn EventSelectionStrategy) -> Vec<(ProgramState, Vec<Event>)> {
    let root = match bthreads::verifier::initial_state(program).unwrap() {
        bthreads::verifier::Outcome::State(s) => s,
        _ => return Vec::new(),
    };
    let mut seen = HashSet::new();
    let mut out = Vec::new();
    let mut queue = VecDeque::new();
    seen.insert(root.clone());
    queue.push_back((root, Vec::new()));
    while let Some((state, trace)) = queue.pop_front() {
        for (e, next) in bthreads::verifier::successors(program, &state, strategy).unwrap() {
            if let bthreads::verifier::Outcome::State(s) = next {
                if seen.insert(s.clone()) {
                    let mut t: Vec<Event> = trace.clone();
                    t.push(e);
                    queue.push_back((s, t));
                }
            }
        }
        out.push((state, trace));
    }
    out
}
