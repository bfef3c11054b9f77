#include <iostream>

#include "sigmabilap/cli.hpp"

int main(int argc, char** argv) { return sigmabilap::cli::run(argc, argv, std::cout, std::cerr); }
