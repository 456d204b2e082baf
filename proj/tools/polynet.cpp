#include "polynet/harness.hpp"

#include <iostream>

int main(int argc, char** argv) { return polynet::harness::run_cli(argc, argv, std::cout, std::cerr); }
