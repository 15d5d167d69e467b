#include <iostream>

#include "qfrac/cli.hpp"

int main(int argc, char** argv) { return qfrac::cli::run(argc, argv, std::cout, std::cerr); }
