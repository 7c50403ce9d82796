#include "clocksync/cli.hpp"

int main(int argc, char** argv) { return clocksync::cli::run_cli(argc, argv); }
