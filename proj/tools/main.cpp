#include <iostream>

#include "cde/cli.hpp"

int main(int argc, char** argv) { return cde::cli::main(argc, argv, std::cout, std::cerr); }
