//! Command-line host: `run` and `verify` the built-in examples or a maze
//! file, and `play` tic-tac-toe against the O strategy.
//!
//! Exit codes are stable so verdicts can be scripted:
//!
//! | code | meaning |
//! |------|---------|
//! | 0    | completed, event limit reached, verification ok, or game over |
//! | 2    | deadlock |
//! | 3    | assertion failure / violation (for mazes: a path was found) |
//! | 4    | hot cycle |
//! | 5    | depth bound reached |
//! | 64   | usage error, unknown example or strategy |
//! | 65   | maze parse error |
//! | 66   | maze file unreadable |
//! | 70   | engine error |
//! | 74   | output file not writable |

use std::ffi::OsString;
use std::io::{self, BufRead, Write};
use std::path::PathBuf;
use std::sync::{mpsc, Arc};
use std::thread;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::event::Event;
use crate::maze::{parse_maze, verify_maze, MazePath};
use crate::programs::tictactoe::{self, game_over, x_event, Mark};
use crate::programs::{build_ttt, by_name, TttOptions};
use crate::runtime::{run, EventQueue, RunnerConfig, RunnerListener, Termination};
use crate::strategy::BuiltinStrategy;
use crate::verifier::{verify, StoreKind, Verdict, VerificationResult, VerificationSettings};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DEADLOCK: i32 = 2;
pub const EXIT_ASSERTION: i32 = 3;
pub const EXIT_HOT_CYCLE: i32 = 4;
pub const EXIT_DEPTH_BOUND: i32 = 5;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_DATA: i32 = 65;
pub const EXIT_NO_INPUT: i32 = 66;
pub const EXIT_SOFTWARE: i32 = 70;
pub const EXIT_IO: i32 = 74;

#[derive(Debug, Parser)]
#[command(name = "bthreads", version, about = "Run, verify and play behavioral programs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run an example and print the selected events, one JSON object per line.
    Run(RunArgs),
    /// Model-check an example or a maze file.
    Verify(VerifyArgs),
    /// Play tic-tac-toe as X against the O strategy.
    Play,
}

#[derive(Debug, Args)]
struct RunArgs {
    /// hotcold, hotcold:balanced, philosophers:<n> or ttt
    #[arg(long)]
    example: String,
    /// simple, priority-bthread, priority-sync or ordered
    #[arg(long)]
    strategy: Option<BuiltinStrategy>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    max_events: Option<usize>,
    /// Read external events as JSON lines from standard input until EOF.
    #[arg(long)]
    daemon: bool,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// A catalog name, or `maze:<file>`
    #[arg(long, required_unless_present = "maze", conflicts_with = "maze")]
    example: Option<String>,
    #[arg(long)]
    maze: Option<PathBuf>,
    #[arg(long)]
    strategy: Option<BuiltinStrategy>,
    #[arg(long, default_value = "exact")]
    store: StoreKind,
    #[arg(long)]
    max_depth: Option<usize>,
    #[arg(long)]
    hot_cycles: bool,
    /// Also write a machine-readable report here.
    #[arg(long)]
    json: Option<PathBuf>,
}

/// Parses `args` (including the program name) and runs the subcommand
/// against the process's standard streams.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    // Handles stay unlocked: the stdin reader thread of `run --daemon`
    // reports bad lines on stderr while the runner is writing.
    let (mut stdout, mut stderr) = (io::stdout(), io::stderr());
    match cli.command {
        Command::Run(args) => cmd_run(args, &mut stdout, &mut stderr),
        Command::Verify(args) => cmd_verify(args, &mut stdout, &mut stderr),
        Command::Play => match play_ttt(io::stdin().lock(), &mut stdout) {
            Ok(code) => code,
            Err(e) => {
                eprintln!("error: {e}");
                EXIT_IO
            }
        },
    }
}

struct TracePrinter<'a> {
    out: &'a mut dyn Write,
    failed: Option<io::Error>,
}

impl RunnerListener for TracePrinter<'_> {
    fn event_selected(&mut self, event: &Event, _index: usize) {
        if self.failed.is_none() {
            if let Err(e) = writeln!(self.out, "{}", event.to_json_line()).and_then(|_| self.out.flush()) {
                self.failed = Some(e);
            }
        }
    }
}

fn cmd_run(args: RunArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let example = match by_name(&args.example) {
        Ok(e) => e,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_USAGE;
        }
    };
    let strategy = args.strategy.unwrap_or(example.strategy);
    let mut config = RunnerConfig::new(Arc::new(strategy)).seed(args.seed).daemon(args.daemon);
    if let Some(m) = args.max_events {
        config = config.max_events(m);
    }

    let queue = EventQueue::new();
    if args.daemon {
        let q = queue.clone();
        thread::spawn(move || feed_stdin(&q));
    } else {
        queue.close();
    }

    let mut printer = TracePrinter { out, failed: None };
    let result = run(&example.program, &config, &queue, &mut [&mut printer]);
    if let Some(e) = printer.failed {
        let _ = writeln!(err, "error: {e}");
        return EXIT_IO;
    }
    match result {
        Ok(r) => match r.termination {
            Termination::Completed | Termination::EventLimit => EXIT_OK,
            Termination::Deadlock => {
                let _ = writeln!(err, "deadlock");
                EXIT_DEADLOCK
            }
            Termination::AssertionFailed { bthread, message } => {
                let _ = writeln!(err, "assertion failed in {bthread}: {message}");
                EXIT_ASSERTION
            }
        },
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            EXIT_SOFTWARE
        }
    }
}

/// Enqueues each JSON event line from standard input; closes on EOF.
fn feed_stdin(queue: &EventQueue) {
    for line in io::stdin().lock().lines() {
        let Ok(line) = line else { break };
        if line.trim().is_empty() {
            continue;
        }
        let parsed = serde_json::from_str(&line)
            .map_err(|e| e.to_string())
            .and_then(|json| Event::from_json(json).map_err(|e| e.to_string()));
        match parsed {
            Ok(e) => {
                if queue.enqueue(e).is_err() {
                    break;
                }
            }
            Err(e) => eprintln!("ignoring input line: {e}"),
        }
    }
    queue.close();
}

#[derive(Serialize)]
#[serde(rename_all = "camelCase")]
struct JsonReport<'a> {
    verdict: &'static str,
    states_visited: usize,
    edges_traversed: usize,
    trace: Vec<Event>,
    millis: u128,
    #[serde(skip_serializing_if = "Option::is_none")]
    message: Option<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    path: Option<Vec<[usize; 2]>>,
}

fn cmd_verify(args: VerifyArgs, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    let strategy = args.strategy;
    let settings = |default: BuiltinStrategy| {
        let mut s = VerificationSettings::new(Arc::new(strategy.unwrap_or(default)))
            .store(args.store)
            .hot_cycles(args.hot_cycles);
        if let Some(d) = args.max_depth {
            s = s.max_depth(d);
        }
        s
    };

    let started = Instant::now();
    let maze_path = args.maze.clone().or_else(|| {
        args.example
            .as_deref()
            .and_then(|e| e.strip_prefix("maze:"))
            .map(PathBuf::from)
    });
    let outcome = if let Some(path) = &maze_path {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                let _ = writeln!(err, "error: cannot read {}: {e}", path.display());
                return EXIT_NO_INPUT;
            }
        };
        let maze = match parse_maze(&text) {
            Ok(m) => m,
            Err(e) => {
                let _ = writeln!(err, "error: {}: {e}", path.display());
                return EXIT_DATA;
            }
        };
        verify_maze(&maze, &settings(BuiltinStrategy::Simple)).map(|(r, p)| (r, p.map(|p| (maze, p))))
    } else {
        let name = args.example.as_deref().unwrap_or_default();
        let example = match by_name(name) {
            Ok(e) => e,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return EXIT_USAGE;
            }
        };
        verify(&example.program, &settings(example.strategy)).map(|r| (r, None))
    };
    let millis = started.elapsed().as_millis();

    let (result, path) = match outcome {
        Ok(o) => o,
        Err(crate::verifier::VerifyError::Config(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            return EXIT_USAGE;
        }
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_SOFTWARE;
        }
    };

    let _ = write!(out, "{}", human_report(&result, path.as_ref().map(|(_, p)| p)));
    if let Some((maze, p)) = &path {
        let _ = write!(out, "{}", maze.render_path(p));
    }
    let _ = writeln!(err, "time: {millis} ms");

    if let Some(json_path) = &args.json {
        let message = match &result.verdict {
            Verdict::AssertionViolation { message, .. } => Some(message.as_str()),
            _ => None,
        };
        let report = JsonReport {
            verdict: result.verdict.label(),
            states_visited: result.states_visited,
            edges_traversed: result.edges_traversed,
            trace: result.verdict.trace(),
            millis,
            message,
            path: path.as_ref().map(|(_, p)| p.coords().iter().map(|(c, r)| [*c, *r]).collect()),
        };
        let body = serde_json::to_string_pretty(&report).expect("report serializes");
        if let Err(e) = std::fs::write(json_path, body + "\n") {
            let _ = writeln!(err, "error: cannot write {}: {e}", json_path.display());
            return EXIT_IO;
        }
    }

    exit_code(&result.verdict)
}

pub fn exit_code(verdict: &Verdict) -> i32 {
    match verdict {
        Verdict::Ok => EXIT_OK,
        Verdict::Deadlock { .. } => EXIT_DEADLOCK,
        Verdict::AssertionViolation { .. } => EXIT_ASSERTION,
        Verdict::HotCycle { .. } => EXIT_HOT_CYCLE,
        Verdict::DepthBoundReached => EXIT_DEPTH_BOUND,
    }
}

fn human_report(result: &VerificationResult, path: Option<&MazePath>) -> String {
    let mut s = result.to_string();
    match &result.verdict {
        Verdict::HotCycle { prefix, cycle } => {
            s.push_str("prefix:\n");
            for e in prefix {
                s.push_str(&format!("  {}\n", e.to_json_line()));
            }
            s.push_str("cycle:\n");
            for e in cycle {
                s.push_str(&format!("  {}\n", e.to_json_line()));
            }
        }
        v => {
            let trace = v.trace();
            if !trace.is_empty() {
                s.push_str("trace:\n");
                for e in trace {
                    s.push_str(&format!("  {}\n", e.to_json_line()));
                }
            }
        }
    }
    if let Some(p) = path {
        s.push_str(&format!("path: {p}\n"));
    }
    s
}

enum PlayMsg {
    Selected(Event),
    Awaiting,
    Ended,
}

struct PlayListener(mpsc::Sender<PlayMsg>);

impl RunnerListener for PlayListener {
    fn event_selected(&mut self, event: &Event, _index: usize) {
        let _ = self.0.send(PlayMsg::Selected(event.clone()));
    }

    fn awaiting_external(&mut self) {
        let _ = self.0.send(PlayMsg::Awaiting);
    }

    fn ended(&mut self, _termination: &Termination) {
        let _ = self.0.send(PlayMsg::Ended);
    }
}

fn parse_square(line: &str) -> Option<(usize, usize)> {
    let mut parts = line.split(|c: char| c.is_whitespace() || c == ',').filter(|p| !p.is_empty());
    let col = parts.next()?.parse().ok()?;
    let row = parts.next()?.parse().ok()?;
    (parts.next().is_none() && col < 3 && row < 3).then_some((col, row))
}

/// Interactive game: reads `col row` moves from `input`, prints the board
/// after every move and announces the result. The b-program runs in daemon
/// mode on its own thread; a move onto an occupied square stays blocked, so
/// the runner goes back to waiting without selecting it and the player is
/// asked again.
pub fn play_ttt(input: impl BufRead, out: &mut dyn Write) -> io::Result<i32> {
    let program = build_ttt(TttOptions::interactive());
    let queue = EventQueue::new();
    let (tx, rx) = mpsc::channel();
    let runner = {
        let queue = queue.clone();
        thread::spawn(move || {
            let config = RunnerConfig::new(Arc::new(BuiltinStrategy::PrioritizedSync)).daemon(true);
            let mut listener = PlayListener(tx);
            run(&program, &config, &queue, &mut [&mut listener])
        })
    };

    let mut lines = input.lines();
    let mut moves: Vec<Event> = Vec::new();
    let mut pending: Option<Event> = None;
    writeln!(out, "You are X. Enter moves as `col row`, both 0-2.")?;
    write!(out, "{}", tictactoe::render_board(&moves))?;

    for msg in rx.iter() {
        match msg {
            PlayMsg::Selected(e) => {
                if pending.as_ref() == Some(&e) {
                    pending = None;
                }
                if let Some((mark, (c, r))) = tictactoe::parse_move(&e) {
                    moves.push(e);
                    if mark == Mark::O {
                        writeln!(out, "O plays {c} {r}")?;
                    }
                    write!(out, "{}", tictactoe::render_board(&moves))?;
                } else if game_over().contains(&e) {
                    let verdict = match e.name() {
                        "XWin" => "X wins.",
                        "OWin" => "O wins.",
                        _ => "Draw.",
                    };
                    writeln!(out, "{verdict}")?;
                    queue.close();
                }
            }
            PlayMsg::Awaiting => {
                if queue.is_closed() {
                    continue;
                }
                if pending.take().is_some() {
                    writeln!(out, "That square is taken.")?;
                }
                loop {
                    write!(out, "X> ")?;
                    out.flush()?;
                    let Some(line) = lines.next().transpose()? else {
                        writeln!(out)?;
                        queue.close();
                        break;
                    };
                    match parse_square(&line) {
                        Some((c, r)) => {
                            let e = x_event(c, r);
                            pending = Some(e.clone());
                            let _ = queue.enqueue(e);
                            break;
                        }
                        None => writeln!(out, "Expected `col row` with values 0-2.")?,
                    }
                }
            }
            PlayMsg::Ended => break,
        }
    }

    match runner.join() {
        Ok(Ok(_)) => Ok(EXIT_OK),
        Ok(Err(e)) => {
            writeln!(out, "error: {e}")?;
            Ok(EXIT_SOFTWARE)
        }
        Err(_) => Ok(EXIT_SOFTWARE),
    }
}
