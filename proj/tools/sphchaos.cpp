#include <iostream>

#include "sphchaos/cli.hpp"

int main(int argc, char** argv) { return sphchaos::cli::run_cli(argc, argv, std::cout, std::cerr); }
