fn main() {
    std::process::exit(mskg::run(std::env::args_os()));
}
