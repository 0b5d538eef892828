fn main() {
    std::process::exit(rip_gate::cli::run(std::env::args()));
}
