fn main() {
    std::process::exit(streamflow::cli::run());
}
