fn main() -> std::process::ExitCode {
    ecac_core::cli::main()
}
