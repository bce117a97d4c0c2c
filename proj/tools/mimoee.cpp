#include <iostream>

#include "mimoee/cli/commands.hpp"

int main(int argc, char** argv) { return mimoee::cli::run_cli(argc, argv, std::cout, std::cerr); }
