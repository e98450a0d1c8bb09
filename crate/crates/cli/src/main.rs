fn main() -> std::process::ExitCode {
    fqc_cli::run_main()
}
