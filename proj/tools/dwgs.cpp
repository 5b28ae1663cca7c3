#include <iostream>

#include "dwg/cli.hpp"

int main(int argc, char** argv) { return dwg::run_cli(argc, argv, std::cout, std::cerr); }
