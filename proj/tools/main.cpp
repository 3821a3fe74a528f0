#include "cli/cli.hpp"

int main(int argc, char** argv) { return hardmeta::cli::run_subcommand(argc, argv); }
