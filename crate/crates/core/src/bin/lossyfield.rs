fn main() -> std::process::ExitCode {
    lossyfield::cli::main()
}
