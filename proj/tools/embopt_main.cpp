#include <iostream>

#include "embopt/cli.hpp"

int main(int argc, char** argv) { return embopt::cli::run(argc, argv, std::cout, std::cerr); }
