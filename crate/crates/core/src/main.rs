fn main() {
    std::process::exit(chernoff_dp::cli::run());
}
