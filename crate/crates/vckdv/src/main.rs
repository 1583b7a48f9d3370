fn main() -> std::process::ExitCode {
    vckdv::cli::main()
}
