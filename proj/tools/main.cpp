#include <iostream>

#include "platcomp/cli.hpp"

int main(int argc, char** argv) { return platcomp::run_cli(argc, argv, std::cout, std::cerr); }
