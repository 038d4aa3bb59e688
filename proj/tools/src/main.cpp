#include <iostream>

#include "khtools/commands.hpp"

int main(int argc, char** argv) { return khtools::cli_main(argc, argv, std::cout, std::cerr); }
