#include <iostream>

#include "vexlab/cli.hpp"

int main(int argc, char** argv) { return vexlab::run_cli(argc, argv, std::cout, std::cerr); }
