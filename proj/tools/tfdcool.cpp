#include <iostream>

#include "tfdcool/cli.hpp"

int main(int argc, char** argv) { return tfd::cli::run(argc, argv, std::cout, std::cerr); }
