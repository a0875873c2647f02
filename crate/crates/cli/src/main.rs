fn main() -> std::process::ExitCode {
    mwem_cli::run()
}
