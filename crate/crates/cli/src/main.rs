fn main() {
    std::process::exit(i32::from(bettest_cli::run(std::env::args_os())));
}
