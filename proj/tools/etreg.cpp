#include "etreg_cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return etreg::cli::cli_main(argc, argv, std::cout, std::cerr); }
