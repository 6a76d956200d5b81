//! The hot/cold bath controller.

use crate::bthread::{BProgram, BThreadDef};
use crate::event::Event;
use crate::sync::SyncStatement;

pub fn hot() -> Event {
    Event::new("HOT")
}

pub fn cold() -> Event {
    Event::new("COLD")
}

/// Three parts hot and three parts cold water. With `balanced`, a
/// `control-temp` b-thread forces cold before every hot.
pub fn build_hotcold(balanced: bool) -> BProgram {
    let mut program = BProgram::new(if balanced { "hotcold:balanced" } else { "hotcold" })
        .with(BThreadDef::sequence("add-hot", vec![SyncStatement::new().request(hot()); 3]))
        .with(BThreadDef::sequence("add-cold", vec![SyncStatement::new().request(cold()); 3]));
    if balanced {
        program = program.with(control_temp());
    }
    program
}

pub fn control_temp() -> BThreadDef {
    BThreadDef::looping(
        "control-temp",
        vec![
            SyncStatement::new().wait_for(cold()).block(hot()),
            SyncStatement::new().wait_for(hot()).block(cold()),
        ],
    )
}
