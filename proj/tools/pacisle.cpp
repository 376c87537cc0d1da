#include <iostream>

#include "pacisle/cli.hpp"

int main(int argc, char** argv) { return pacisle::run(argc, argv, std::cout, std::cerr); }
