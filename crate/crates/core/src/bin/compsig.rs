fn main() -> std::process::ExitCode {
    compsig::cli::main()
}
