#include "cli.hpp"

int main(int argc, char** argv) { return fedctmc::cli::cli_main(argc, argv); }
