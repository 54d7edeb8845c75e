fn main() -> std::process::ExitCode {
    fri_lab::cli::main_with(std::env::args_os())
}
