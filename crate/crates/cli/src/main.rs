fn main() {
    std::process::exit(spherebranch::run_cli());
}
