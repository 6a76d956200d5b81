//! External events: a host thread feeds PING events into a daemon runner,
//! which answers each with a PONG once its internal work is done.
//!
//! cargo run --example external_events

use std::thread;
use std::time::Duration;

use bthreads::prelude::*;

struct Printer;

impl RunnerListener for Printer {
    fn event_selected(&mut self, event: &Event, index: usize) {
        println!("{index:>2} {}", event.to_json_line());
    }
    fn awaiting_external(&mut self) {
        println!("   (waiting for the host)");
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let program = BProgram::new("echo")
        .with(BThreadDef::sequence("boot", vec![SyncStatement::new().request(Event::new("READY"))]))
        .with(BThreadDef::looping(
            "echo",
            vec![
                SyncStatement::new().wait_for(EventSet::NameIs("PING".into())),
                SyncStatement::new().request(Event::new("PONG")),
            ],
        ));

    let queue = EventQueue::new();
    let host = {
        let queue = queue.clone();
        thread::spawn(move || {
            for n in 0..3 {
                thread::sleep(Duration::from_millis(20));
                queue.enqueue(Event::with_data("PING", Value::Int(n))).unwrap();
            }
            queue.close();
        })
    };
    let result = run(&program, &RunnerConfig::default().daemon(true), &queue, &mut [&mut Printer])?;
    host.join().unwrap();
    println!("{:?}", result.termination);
    Ok(())
}
