#include "mpbia/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mpbia::cli::run(argc, argv, std::cout, std::cerr); }
