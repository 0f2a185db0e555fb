#include <iostream>

#include "icensus/cli.hpp"

int main(int argc, char** argv) { return icensus::cli::run(argc, argv, std::cout, std::cerr); }
