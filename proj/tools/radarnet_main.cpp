#include <iostream>

#include "radarnet/cli.hpp"

int main(int argc, char** argv) { return radarnet::cli::run_cli(argc, argv, std::cout, std::cerr); }
