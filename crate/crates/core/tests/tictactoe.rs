mod common;

use std::collections::HashSet;
use std::sync::Arc;

use bthreads::prelude::*;
use bthreads::programs::tictactoe::{
    any_x, build_ttt, o_event, parse_move, x_event, x_win, Mark, TttOptions,
};
use bthreads::runtime::replay;
use bthreads::verifier::{successors, Outcome};
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{board_of, empty_squares, minimax, reachable_states, to_move, winner, x_can_win_somehow};

fn prioritized() -> VerificationSettings {
    VerificationSettings::new(Arc::new(BuiltinStrategy::PrioritizedSync))
}

fn no_strategy() -> TttOptions {
    TttOptions {
        strategy: false,
        ..TttOptions::verification()
    }
}

#[test]
fn game_value_is_a_draw() {
    // Perfect play from both sides draws, so X cannot force a win; it can
    // only win against an O that errs.
    let empty = [None; 9];
    assert_eq!(minimax(&empty), 0);
    assert!(x_can_win_somehow(&empty));
}

#[test]
fn without_strategy_x_wins() {
    let p = build_ttt(no_strategy());
    let r = verify(&p, &prioritized()).unwrap();
    let Verdict::AssertionViolation { bthread, message, trace } = &r.verdict else {
        panic!("expected violation, got {:?}", r.verdict);
    };
    assert_eq!(bthread, "R1:XShouldNotWin");
    assert_eq!(message, "X won.");
    assert_eq!(trace.last(), Some(&x_win()));
    assert_eq!(winner(&board_of(trace)), Some(Mark::X));

    let replayed = replay(&p, BuiltinStrategy::PrioritizedSync, trace).unwrap();
    assert_eq!(
        replayed.termination,
        Termination::AssertionFailed {
            bthread: bthread.clone(),
            message: message.clone()
        }
    );
}

#[test]
fn full_strategy_verifies() {
    let r = verify(&build_ttt(TttOptions::verification()), &prioritized()).unwrap();
    assert_eq!(r.verdict, Verdict::Ok);
}

#[test]
fn every_o_choice_keeps_the_draw() {
    // Walk the whole game graph under the strategy. Wherever O is to move,
    // each selectable O move must leave a position X cannot force.
    let p = build_ttt(TttOptions::verification());
    let strategy = BuiltinStrategy::PrioritizedSync;
    let states = reachable_states(&p, &strategy);
    assert!(states.len() > 500);
    let mut o_turns = 0;
    for (state, trace) in &states {
        let board = board_of(trace);
        if winner(&board).is_some() || empty_squares(&board).is_empty() || to_move(&board) != Mark::O {
            continue;
        }
        o_turns += 1;
        let moves = strategy.selectable(&state.snapshot(&p)).unwrap();
        assert!(!moves.is_empty(), "O has no move at {trace:?}");
        for m in moves {
            let (mark, (c, r)) = parse_move(&m).expect("O places a mark");
            assert_eq!(mark, Mark::O);
            let mut next = board;
            next[r * 3 + c] = Some(Mark::O);
            assert!(minimax(&next) <= 0, "O loses after {trace:?} + {m}");
        }
    }
    assert!(o_turns > 100);
}

#[test]
fn x_may_play_every_empty_square() {
    let p = build_ttt(TttOptions::verification());
    let strategy = BuiltinStrategy::PrioritizedSync;
    let mut x_turns: Vec<_> = reachable_states(&p, &strategy)
        .into_iter()
        .filter(|(_, t)| {
            let b = board_of(t);
            winner(&b).is_none() && !empty_squares(&b).is_empty() && to_move(&b) == Mark::X
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    x_turns.shuffle(&mut rng);
    assert!(x_turns.len() >= 50);
    for (state, trace) in x_turns.iter().take(50) {
        let edges: HashSet<Event> = successors(&p, state, &strategy)
            .unwrap()
            .into_iter()
            .map(|(e, _)| e)
            .collect();
        let expected: HashSet<Event> = empty_squares(&board_of(trace))
            .into_iter()
            .map(|(c, r)| x_event(c, r))
            .collect();
        assert_eq!(edges, expected, "after {trace:?}");
        assert!(edges.iter().all(|e| any_x().contains(e)));
    }
}

fn play(program: &BProgram, moves: &[Event]) -> ProgramState {
    let Outcome::State(mut s) = bthreads::verifier::initial_state(program).unwrap() else {
        panic!()
    };
    for m in moves {
        match s.advance(program, m).unwrap() {
            bthreads::state::Transition::Next { state, .. } => s = state,
            other => panic!("{other:?}"),
        }
    }
    s
}

#[test]
fn win_beats_block() {
    // O holds (0,0),(1,0) and X holds (0,1),(1,1): O can win at (2,0) or
    // block at (2,1). Winning comes first.
    let p = build_ttt(TttOptions::verification());
    let s = play(
        &p,
        &[x_event(0, 1), o_event(0, 0), x_event(1, 1), o_event(1, 0), x_event(2, 2)],
    );
    let sel = BuiltinStrategy::PrioritizedSync.selectable(&s.snapshot(&p)).unwrap();
    assert_eq!(sel, vec![o_event(2, 0)]);
}

#[test]
fn block_beats_centre() {
    let p = build_ttt(TttOptions::verification());
    let s = play(&p, &[x_event(0, 0), o_event(2, 2), x_event(1, 0)]);
    let sel = BuiltinStrategy::PrioritizedSync.selectable(&s.snapshot(&p)).unwrap();
    assert_eq!(sel, vec![o_event(2, 0)]);
}

#[test]
fn occupied_square_is_blocked() {
    let p = build_ttt(TttOptions::interactive());
    let s = play(&p, &[x_event(1, 1), o_event(0, 0)]);
    assert!(s.is_blocked(&x_event(1, 1)));
    assert!(s.is_blocked(&x_event(0, 0)));
    assert!(!s.is_blocked(&x_event(2, 2)));
    // And it is O's move only after X's.
    assert!(s.is_blocked(&o_event(2, 2)));
}

#[test]
fn runner_games_never_lost_by_o() {
    let p = build_ttt(TttOptions::verification());
    for seed in 0..50 {
        let r = run_closed(
            &p,
            &RunnerConfig::new(Arc::new(BuiltinStrategy::PrioritizedSync)).seed(seed),
        )
        .unwrap();
        assert_eq!(r.termination, Termination::Completed, "seed {seed}");
        let last = r.trace.last().unwrap().name().to_owned();
        assert!(last == "OWin" || last == "Draw", "seed {seed}: {last}");
    }
}
