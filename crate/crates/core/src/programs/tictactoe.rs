//! Tic-tac-toe: a human (X, moving first) against a b-thread strategy (O).
//!
//! Three groups of b-threads make up the program:
//!
//! * game rules, always present: turn alternation, one mark per square,
//!   eight line detectors announcing `XWin`/`OWin`, a draw detector, and a
//!   game-over b-thread that freezes the board;
//! * O's strategy, a stack of small b-threads whose requests carry
//!   priority hints for the prioritized-sync strategy (win 50, block 40,
//!   fork defense 35, center 30, corners 20, edges 10);
//! * for verification, a simulated X that requests every square, and the
//!   requirement that X never wins.
//!
//! Squares are addressed `(col, row)`, both in `0..3`.

use std::fmt;

use crate::bthread::{BProgram, BThreadDef};
use crate::event::{Event, EventSet};
use crate::sync::{Resume, StepResult, SyncStatement};
use crate::value::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Mark {
    X,
    O,
}

impl fmt::Display for Mark {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mark::X => "X",
            Mark::O => "O",
        })
    }
}

pub type Square = (usize, usize);

pub const LINES: [[Square; 3]; 8] = [
    [(0, 0), (1, 0), (2, 0)],
    [(0, 1), (1, 1), (2, 1)],
    [(0, 2), (1, 2), (2, 2)],
    [(0, 0), (0, 1), (0, 2)],
    [(1, 0), (1, 1), (1, 2)],
    [(2, 0), (2, 1), (2, 2)],
    [(0, 0), (1, 1), (2, 2)],
    [(2, 0), (1, 1), (0, 2)],
];

const CORNERS: [Square; 4] = [(0, 0), (2, 0), (0, 2), (2, 2)];
const EDGES: [Square; 4] = [(1, 0), (0, 1), (2, 1), (1, 2)];

pub const WIN_PRIORITY: i64 = 50;
pub const BLOCK_PRIORITY: i64 = 40;
pub const FORK_PRIORITY: i64 = 35;
pub const CENTER_PRIORITY: i64 = 30;
pub const CORNER_PRIORITY: i64 = 20;
pub const EDGE_PRIORITY: i64 = 10;
pub const SIMULATED_X_PRIORITY: i64 = 10;

pub fn squares() -> impl Iterator<Item = Square> {
    (0..3).flat_map(|row| (0..3).map(move |col| (col, row)))
}

pub fn move_event(mark: Mark, (col, row): Square) -> Event {
    Event::with_data(
        format!("{mark}({col},{row})"),
        Value::map([("col", Value::from(col)), ("row", Value::from(row))]),
    )
}

pub fn x_event(col: usize, row: usize) -> Event {
    move_event(Mark::X, (col, row))
}

pub fn o_event(col: usize, row: usize) -> Event {
    move_event(Mark::O, (col, row))
}

pub fn x_win() -> Event {
    Event::new("XWin")
}

pub fn o_win() -> Event {
    Event::new("OWin")
}

pub fn draw() -> Event {
    Event::new("Draw")
}

pub fn any_x() -> EventSet {
    EventSet::NamePrefix("X(".into())
}

pub fn any_o() -> EventSet {
    EventSet::NamePrefix("O(".into())
}

pub fn any_move() -> EventSet {
    EventSet::any_of([any_x(), any_o()])
}

pub fn game_over() -> EventSet {
    EventSet::of([x_win(), o_win(), draw()])
}

/// Decodes a placement event.
pub fn parse_move(e: &Event) -> Option<(Mark, Square)> {
    let mark = match e.name().as_bytes().first()? {
        b'X' => Mark::X,
        b'O' => Mark::O,
        _ => return None,
    };
    let data = e.data()?;
    let col = data.get("col")?.as_int()? as usize;
    let row = data.get("row")?.as_int()? as usize;
    Some((mark, (col, row)))
}

fn moves_on(mark: Mark, squares: &[Square]) -> EventSet {
    EventSet::of(squares.iter().map(|s| move_event(mark, *s)))
}

fn count(state: &Value) -> i64 {
    state.as_int().unwrap_or(0)
}

fn done(state: &Value) -> Result<(Value, StepResult), crate::bthread::StepError> {
    Ok((state.clone(), StepResult::Done))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TttOptions {
    pub strategy: bool,
    pub simulated_x: bool,
    pub requirement: bool,
}

impl TttOptions {
    /// Strategy, simulated opponent and requirement: the program to verify.
    pub fn verification() -> Self {
        TttOptions {
            strategy: true,
            simulated_x: true,
            requirement: true,
        }
    }

    /// Strategy only; X comes from the host's external queue.
    pub fn interactive() -> Self {
        TttOptions {
            strategy: true,
            simulated_x: false,
            requirement: false,
        }
    }
}

pub fn build_ttt(options: TttOptions) -> BProgram {
    let mut p = BProgram::new("ttt");
    for b in rule_bthreads() {
        p = p.with(b);
    }
    if options.strategy {
        for b in strategy_bthreads() {
            p = p.with(b);
        }
    } else {
        p = p.with(arbitrary_o());
    }
    if options.simulated_x {
        p = p.with(simulated_opponent());
    }
    if options.requirement {
        p = p.with(x_should_not_win());
    }
    p
}

pub fn rule_bthreads() -> Vec<BThreadDef> {
    let mut out = vec![BThreadDef::looping(
        "Turns",
        vec![
            SyncStatement::new().wait_for(any_x()).block(any_o()),
            SyncStatement::new().wait_for(any_o()).block(any_x()),
        ],
    )];
    for sq in squares() {
        let both = EventSet::of([move_event(Mark::X, sq), move_event(Mark::O, sq)]);
        out.push(BThreadDef::sequence(
            format!("Square({},{})", sq.0, sq.1),
            vec![
                SyncStatement::new().wait_for(both.clone()),
                SyncStatement::new().block(both),
            ],
        ));
    }
    out.extend((0..LINES.len()).map(line_detector));
    out.push(draw_detector());
    out.push(BThreadDef::sequence(
        "GameOver",
        vec![
            SyncStatement::new().wait_for(game_over()),
            SyncStatement::new().block(any_move()),
        ],
    ));
    out
}

/// Counts marks on one line; announces a win on a full triplet while
/// freezing the board, and retires once both players hold a square there.
fn line_detector(k: usize) -> BThreadDef {
    let line = LINES[k];
    let waiting = SyncStatement::new().wait_for(EventSet::any_of([
        moves_on(Mark::X, &line),
        moves_on(Mark::O, &line),
        game_over(),
    ]));
    let announce = |win: Event| {
        SyncStatement::new()
            .request(win)
            .wait_for(game_over())
            .block(EventSet::any_of([any_move(), EventSet::Exact(draw())]))
    };
    BThreadDef::new(format!("Line{k}"), Value::from(vec![0i64, 0]), move |state, resume| {
        let counts = state.as_list().unwrap_or_default();
        let (mut x, mut o) = (count(&counts[0]), count(&counts[1]));
        if let Resume::Event(e) = resume {
            match parse_move(e) {
                Some((Mark::X, _)) => x += 1,
                Some((Mark::O, _)) => o += 1,
                None => return done(state),
            }
        }
        let next = Value::from(vec![x, o]);
        let result = if x > 0 && o > 0 {
            StepResult::Done
        } else if x == 3 {
            announce(x_win()).into()
        } else if o == 3 {
            announce(o_win()).into()
        } else {
            waiting.clone().into()
        };
        Ok((next, result))
    })
}

fn draw_detector() -> BThreadDef {
    let wins = EventSet::of([x_win(), o_win()]);
    let waiting = SyncStatement::new().wait_for(EventSet::any_of([any_move(), wins.clone()]));
    BThreadDef::new("DrawDetector", Value::Int(0), move |state, resume| {
        let mut marks = count(state);
        if let Resume::Event(e) = resume {
            if parse_move(e).is_none() || marks == 9 {
                return done(state);
            }
            marks += 1;
        }
        let statement = if marks == 9 {
            SyncStatement::new().request(draw()).wait_for(wins.clone())
        } else {
            waiting.clone()
        };
        Ok((Value::Int(marks), statement.into()))
    })
}

/// Requests O on `target` once `counted` holds both other squares of the
/// line; retires when the line is spoiled, the target is taken, or the game
/// ends.
fn line_completer(name: String, line: [Square; 3], target: Square, counted: Mark, priority: i64) -> BThreadDef {
    let others: Vec<Square> = line.iter().copied().filter(|s| *s != target).collect();
    let opponent = match counted {
        Mark::X => Mark::O,
        Mark::O => Mark::X,
    };
    let waiting = SyncStatement::new().wait_for(EventSet::any_of([
        moves_on(counted, &line),
        moves_on(opponent, &line),
        game_over(),
    ]));
    let requesting = SyncStatement::new()
        .request(move_event(Mark::O, target))
        .wait_for(EventSet::any_of([EventSet::Exact(move_event(Mark::X, target)), game_over()]))
        .hint(priority);
    BThreadDef::new(name, Value::Int(0), move |state, resume| {
        let mut held = count(state);
        if let Resume::Event(e) = resume {
            match parse_move(e) {
                Some((m, sq)) if m == counted && held < 2 && others.contains(&sq) => held += 1,
                _ => return done(state),
            }
        }
        let statement = if held == 2 { requesting.clone() } else { waiting.clone() };
        Ok((Value::Int(held), statement.into()))
    })
}

/// Requests O on whichever of `group` is still free.
fn square_group(name: &str, group: &'static [Square], priority: i64) -> BThreadDef {
    let statement = move |free: &[Value]| {
        let free: Vec<Square> = free
            .iter()
            .map(|i| group[i.as_int().unwrap_or(0) as usize])
            .collect();
        SyncStatement::new()
            .request_all(free.iter().map(|s| move_event(Mark::O, *s)))
            .wait_for(EventSet::any_of([moves_on(Mark::X, &free), game_over()]))
            .hint(priority)
    };
    let all: Vec<i64> = (0..group.len() as i64).collect();
    BThreadDef::new(name, Value::from(all), move |state, resume| {
        let mut free: Vec<Value> = state.as_list().unwrap_or_default().to_vec();
        if let Resume::Event(e) = resume {
            let Some((_, sq)) = parse_move(e) else {
                return done(state);
            };
            free.retain(|i| group[i.as_int().unwrap_or(0) as usize] != sq);
        }
        if free.is_empty() {
            return Ok((Value::List(free), StepResult::Done));
        }
        let s = statement(&free);
        Ok((Value::List(free), s.into()))
    })
}

type Board = [Option<Mark>; 9];

fn idx((c, r): Square) -> usize {
    r * 3 + c
}

fn sq(i: usize) -> Square {
    (i % 3, i / 3)
}

/// Lines through `i` that hold exactly one `mark` and are otherwise empty.
fn half_lines_through(board: &Board, i: usize, mark: Mark) -> Vec<[Square; 3]> {
    LINES
        .iter()
        .filter(|line| line.iter().any(|s| idx(*s) == i))
        .filter(|line| {
            let others: Vec<_> = line.iter().filter(|s| idx(**s) != i).map(|s| board[idx(*s)]).collect();
            others.iter().filter(|m| **m == Some(mark)).count() == 1 && others.iter().any(|m| m.is_none())
        })
        .copied()
        .collect()
}

/// Squares where an X would open two winning threats at once.
pub(crate) fn x_fork_squares(board: &Board) -> Vec<usize> {
    (0..9)
        .filter(|&i| board[i].is_none() && half_lines_through(board, i, Mark::X).len() >= 2)
        .collect()
}

/// O's answer to pending X forks: take the only fork square, or force X to
/// reply somewhere that is not a fork square.
pub(crate) fn fork_defense(board: &Board) -> Vec<usize> {
    let forks = x_fork_squares(board);
    if forks.len() <= 1 {
        return forks;
    }
    let forcing: Vec<usize> = (0..9)
        .filter(|&i| board[i].is_none())
        .filter(|&i| {
            let threats = half_lines_through(board, i, Mark::O);
            !threats.is_empty()
                && threats.iter().all(|line| {
                    line.iter()
                        .map(|s| idx(*s))
                        .filter(|&j| j != i && board[j].is_none())
                        .all(|reply| !forks.contains(&reply))
                })
        })
        .collect();
    if forcing.is_empty() {
        forks
    } else {
        forcing
    }
}

fn board_from(state: &Value) -> Board {
    let mut board = [None; 9];
    for (i, v) in state.as_list().unwrap_or_default().iter().enumerate() {
        board[i] = match v.as_int() {
            Some(1) => Some(Mark::X),
            Some(2) => Some(Mark::O),
            _ => None,
        };
    }
    board
}

fn board_value(board: &Board) -> Value {
    Value::List(
        board
            .iter()
            .map(|m| {
                Value::Int(match m {
                    None => 0,
                    Some(Mark::X) => 1,
                    Some(Mark::O) => 2,
                })
            })
            .collect(),
    )
}

fn fork_blocker() -> BThreadDef {
    BThreadDef::new("BlockFork", board_value(&[None; 9]), |state, resume| {
        let mut board = board_from(state);
        if let Resume::Event(e) = resume {
            let Some((mark, sq)) = parse_move(e) else {
                return done(state);
            };
            board[idx(sq)] = Some(mark);
        }
        let xs = board.iter().filter(|m| **m == Some(Mark::X)).count();
        let os = board.iter().filter(|m| **m == Some(Mark::O)).count();
        let mut statement = SyncStatement::new().wait_for(EventSet::any_of([any_move(), game_over()]));
        if xs > os {
            let answers = fork_defense(&board);
            if !answers.is_empty() {
                statement = statement
                    .request_all(answers.into_iter().map(|i| move_event(Mark::O, sq(i))))
                    .hint(FORK_PRIORITY);
            }
        }
        Ok((board_value(&board), statement.into()))
    })
}

pub fn strategy_bthreads() -> Vec<BThreadDef> {
    let mut out = Vec::new();
    for (k, line) in LINES.iter().enumerate() {
        for target in line {
            out.push(line_completer(
                format!("AddThirdO(line {k}, {},{})", target.0, target.1),
                *line,
                *target,
                Mark::O,
                WIN_PRIORITY,
            ));
        }
    }
    for (k, line) in LINES.iter().enumerate() {
        for target in line {
            out.push(line_completer(
                format!("PreventThirdX(line {k}, {},{})", target.0, target.1),
                *line,
                *target,
                Mark::X,
                BLOCK_PRIORITY,
            ));
        }
    }
    out.push(fork_blocker());
    out.push(BThreadDef::sequence(
        "Center",
        vec![SyncStatement::new()
            .request(o_event(1, 1))
            .wait_for(EventSet::any_of([EventSet::Exact(x_event(1, 1)), game_over()]))
            .hint(CENTER_PRIORITY)],
    ));
    out.push(square_group("Corners", &CORNERS, CORNER_PRIORITY));
    out.push(square_group("Edges", &EDGES, EDGE_PRIORITY));
    out
}

/// Requests every square for `mark` at each sync until the game ends.
fn everywhere(name: &str, mark: Mark, priority: i64) -> BThreadDef {
    let statement = SyncStatement::new()
        .request_all(squares().map(|s| move_event(mark, s)))
        .wait_for(game_over())
        .hint(priority);
    BThreadDef::new(name, Value::Null, move |state, resume| match resume {
        Resume::Event(e) if game_over().contains(e) => done(state),
        _ => Ok((Value::Null, statement.clone().into())),
    })
}

/// Environment b-thread: X may play any legal square.
pub fn simulated_opponent() -> BThreadDef {
    everywhere("SimulatedOpponent", Mark::X, SIMULATED_X_PRIORITY)
}

/// Stand-in for O when the strategy is left out: any legal square.
pub fn arbitrary_o() -> BThreadDef {
    everywhere("ArbitraryO", Mark::O, 0)
}

pub fn x_should_not_win() -> BThreadDef {
    BThreadDef::assertion("R1:XShouldNotWin", EventSet::Exact(x_win()), "X won.")
}

/// Renders a board from the placements seen so far.
pub fn render_board<'a>(moves: impl IntoIterator<Item = &'a Event>) -> String {
    let mut board: Board = [None; 9];
    for e in moves {
        if let Some((mark, sq)) = parse_move(e) {
            board[idx(sq)] = Some(mark);
        }
    }
    let mut out = String::new();
    for row in 0..3 {
        let cells: Vec<String> = (0..3)
            .map(|col| board[idx((col, row))].map_or(".".to_owned(), |m| m.to_string()))
            .collect();
        out.push_str(&cells.join(" "));
        out.push('\n');
    }
    out
}
