#include "cli.hpp"

#include <iostream>

int main(int argc, char** argv) { return wcga::cli_main(argc, argv, std::cout, std::cerr); }
