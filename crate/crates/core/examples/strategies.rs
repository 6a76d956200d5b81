//! The same synchronization point under each built-in selection strategy.
//!
//! cargo run --example strategies

use bthreads::prelude::*;
use bthreads::strategy::SnapshotEntry;

fn main() {
    let ev = Event::new;
    let urgent = SyncStatement::new().request(ev("ALARM")).hint(5);
    let chatty = SyncStatement::new().request_all([ev("LOG"), ev("ALARM"), ev("TICK")]).hint(1);
    let guard = SyncStatement::new().block(ev("TICK"));
    let snapshot = SyncSnapshot::new(vec![
        SnapshotEntry { bthread: "urgent", priority: 0, statement: &urgent },
        SnapshotEntry { bthread: "chatty", priority: 2, statement: &chatty },
        SnapshotEntry { bthread: "guard", priority: 0, statement: &guard },
    ]);

    for strategy in BuiltinStrategy::ALL {
        let selectable = strategy.selectable(&snapshot).unwrap_or_default();
        let names: Vec<&str> = selectable.iter().map(Event::name).collect();
        println!("{:<17} {}", strategy.cli_name(), names.join(" "));
    }
}
