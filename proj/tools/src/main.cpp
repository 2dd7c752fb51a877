#include <iostream>

#include "fwav/cli.hpp"

int main(int argc, char** argv) { return fwav::cli::run(argc, argv, std::cout, std::cerr); }
