#include <iostream>

#include "wavefit/cli.hpp"

int main(int argc, char** argv) { return wavefit::cli::run(argc, argv, std::cout, std::cerr); }
