#include <iostream>

#include "dualgen/cli.hpp"

int main(int argc, char** argv) { return dualgen::run_cli(argc, argv, std::cout, std::cerr); }
