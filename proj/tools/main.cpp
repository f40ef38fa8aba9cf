#include "mar/cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return mar::cli::run(argc, argv, std::cout, std::cerr); }
