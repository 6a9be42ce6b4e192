#include <iostream>

#include "sfrbid/cli_app.hpp"

int main(int argc, char** argv) { return sfrbid::run_cli(argc, argv, std::cout, std::cerr); }
