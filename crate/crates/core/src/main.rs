fn main() {
    std::process::exit(covertime::run_cli());
}
