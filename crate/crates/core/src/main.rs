fn main() {
    std::process::exit(simtreels::cli::run(std::env::args_os()));
}
