fn main() -> std::process::ExitCode {
    adaptnav_server::cli::main()
}
