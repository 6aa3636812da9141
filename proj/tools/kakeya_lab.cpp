#include "kakeya/cli.hpp"

int main(int argc, char** argv) { return kakeya::cli::run_command(argc, argv); }
