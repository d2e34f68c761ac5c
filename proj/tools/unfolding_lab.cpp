#include <iostream>

#include "unfolding/cli.hpp"

int main(int argc, char** argv) { return unfolding::cli::run_cli(argc, argv, std::cout, std::cerr); }
