//! Run the command line pipeline on a configuration file, as
//! `simtreels pipeline --config <file>` would.
//!
//!     cargo run --release --example pipeline -- examples/avocado_orchard.cfg

fn main() {
    let cfg = std::env::args()
        .nth(1)
        .unwrap_or_else(|| concat!(env!("CARGO_MANIFEST_DIR"), "/examples/sensor_comparison.cfg").into());
    let code = simtreels::cli::run(["simtreels", "pipeline", "--config", &cfg]);
    std::process::exit(code);
}
