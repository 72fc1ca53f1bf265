#include <iostream>

#include "biota/cli.hpp"

int main(int argc, char** argv) { return biota::run_cli(argc, argv, std::cout, std::cerr); }
