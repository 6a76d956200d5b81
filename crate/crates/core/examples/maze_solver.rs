//! Solves a maze by asking the verifier to refute "the target is never
//! reached". Pass a maze file, or use the built-in one.
//!
//! cargo run --example maze_solver -- path/to/maze.txt

use bthreads::maze::{parse_maze, solve_maze};
use bthreads::prelude::*;

const MAZE: &str = "\
s  #    
 # # ## 
 #   #  
 ### # #
     #t 
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let text = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => MAZE.to_owned(),
    };
    let maze = parse_maze(&text)?;
    match solve_maze(&maze, &VerificationSettings::default())? {
        Some(path) => {
            println!("{} steps: {path}", path.len() - 1);
            print!("{}", maze.render_path(&path));
        }
        None => println!("no way through"),
    }
    Ok(())
}
