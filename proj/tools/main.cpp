#include <iostream>

#include "hardykit_cli.hpp"

int main(int argc, char** argv) { return hardykit::cli::run_cli(argc, argv, std::cout, std::cerr); }
