#include "bistable/cli.hpp"

int main(int argc, char** argv) { return bistable::cli::run_cli(argc, argv); }
