#include <iostream>

#include "modfix/cli.hpp"

int main(int argc, char** argv) { return modfix::cli::run(argc, argv, std::cout, std::cerr); }
