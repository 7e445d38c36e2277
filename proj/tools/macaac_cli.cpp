#include <iostream>

#include "macaac/cli.hpp"

int main(int argc, char** argv) { return macaac::run_cli(argc, argv, std::cout, std::cerr); }
