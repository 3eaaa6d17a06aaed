#include <iostream>

#include "shardecon/cli_io.hpp"

int main(int argc, char** argv) { return shardecon::run_cli(argc, argv, std::cout, std::cerr); }
