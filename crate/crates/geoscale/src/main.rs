fn main() {
    std::process::exit(geoscale::cli::run());
}
