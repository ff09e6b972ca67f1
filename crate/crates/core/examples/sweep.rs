//! The path sweep through the command layer, as a library call.

use raag_comm::cli::{cmd_sweep, DEFAULT_GUARD_VARS};

fn main() {
    let range = std::env::args().nth(1).unwrap_or_else(|| "5..7".into());
    let out = cmd_sweep(&range, false, DEFAULT_GUARD_VARS).unwrap();
    print!("{}", out.stdout);
}
