#include "treelc/cli.hpp"

int main(int argc, char** argv) { return treelc::cli::run_cli(argc, argv); }
