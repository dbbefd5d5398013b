fn main() {
    std::process::exit(vacuum_energy::cli::run());
}
