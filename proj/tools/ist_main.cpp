#include <iostream>

#include "ist/cli.hpp"

int main(int argc, char** argv) { return ist::cli_main(argc, argv, std::cout, std::cerr); }
