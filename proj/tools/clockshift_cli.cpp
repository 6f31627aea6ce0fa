#include <iostream>

#include "clockshift/cli.hpp"

int main(int argc, char** argv) { return clockshift::cli::run(argc, argv, std::cout, std::cerr); }
